"""Density matrices, pure-state helpers, and basic state functionals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import FockSpace, Operator

__all__ = [
    "DensityMatrix",
    "fock_ket",
    "coherent_ket",
    "fock_dm",
    "coherent_dm",
    "ket_dm",
    "expect",
    "ptrace",
    "trace_distance",
    "entropy",
]

HERM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = -1e-8


@dataclass(frozen=True)
class DensityMatrix:
    """Dense density matrix with subsystem-dimension metadata."""

    dims: tuple[int, ...]
    mat: np.ndarray

    def __post_init__(self):
        d = int(np.prod(self.dims))
        mat = np.ascontiguousarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", mat)
        if mat.shape != (d, d):
            raise ValueError(f"matrix shape {mat.shape} != dims {self.dims}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def validate(self, herm_tol=HERM_TOL, trace_tol=TRACE_TOL,
                 psd_floor=PSD_FLOOR) -> "DensityMatrix":
        """Check Hermiticity, unit trace, and numerical positivity."""
        herm = np.max(np.abs(self.mat - self.mat.conj().T))
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: max deviation {herm:.2e}")
        tr = self.mat.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1 by {abs(tr - 1.0):.2e}")
        lo = float(np.linalg.eigvalsh(self.mat)[0])
        if lo < psd_floor:
            raise ValueError(f"negative eigenvalue {lo:.2e} below floor")
        return self

    def hermitized(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, 0.5 * (self.mat + self.mat.conj().T))


def fock_ket(space: FockSpace, n: int) -> np.ndarray:
    if not 0 <= n <= space.cutoff:
        raise ValueError(f"level {n} outside 0..{space.cutoff}")
    psi = np.zeros(space.dim, dtype=complex)
    psi[n] = 1.0
    return psi


def coherent_ket(space: FockSpace, beta: complex) -> np.ndarray:
    """Truncated coherent state, renormalized on the cutoff space."""
    if beta == 0:
        return fock_ket(space, 0)
    n = np.arange(space.dim)
    log_fact = np.cumsum(np.concatenate(([0.0], np.log(np.arange(1, space.dim)))))
    amp = np.exp(n * np.log(complex(beta)) - 0.5 * log_fact)
    return (amp / np.linalg.norm(amp)).astype(complex)


def ket_dm(psi: np.ndarray, dims: tuple[int, ...] | None = None) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    if dims is None:
        dims = (psi.size,)
    return DensityMatrix(tuple(dims), np.outer(psi, psi.conj()))


def fock_dm(space: FockSpace, n: int) -> DensityMatrix:
    return ket_dm(fock_ket(space, n))


def coherent_dm(space: FockSpace, beta: complex) -> DensityMatrix:
    return ket_dm(coherent_ket(space, beta))


def expect(op: Operator, rho: DensityMatrix) -> complex:
    """Tr[op rho] without densifying the operator."""
    coo = op.mat.tocoo()
    return complex(np.sum(coo.data * rho.mat[coo.col, coo.row]))


def ptrace(rho: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduced state of one subsystem of a bipartite density matrix."""
    if len(rho.dims) != 2:
        raise ValueError("ptrace expects a two-subsystem state")
    da, db = rho.dims
    t = rho.mat.reshape(da, db, da, db)
    if keep == 0:
        return DensityMatrix((da,), np.einsum("ikjk->ij", t))
    if keep == 1:
        return DensityMatrix((db,), np.einsum("kikj->ij", t))
    raise ValueError("keep must be 0 or 1")


def trace_distance(r1: DensityMatrix, r2: DensityMatrix) -> float:
    """Half the trace norm of the (Hermitian) difference."""
    diff = r1.mat - r2.mat
    diff = 0.5 * (diff + diff.conj().T)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def entropy(rho: DensityMatrix | np.ndarray) -> float:
    """Von Neumann entropy, natural log; 0 ln 0 treated as 0."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    lam = np.linalg.eigvalsh(mat)
    lam = lam[lam > 1e-15]
    return float(-np.sum(lam * np.log(lam)))
