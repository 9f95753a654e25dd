"""Fock-space description: truncated ladder operators and ring sectors.

The Fock space is truncated at photon number ``cutoff`` (dimension
``cutoff + 1``).  A ``sector_boundary`` n_c splits the ladder into an inner
part (levels 0..n_c) and an outer part (levels n_c+1..cutoff); the boundary
is meant to sit between two stable rings of the classical flow, at the
unstable ring radius r_c via n_c = round(r_c^2).

Sector-restricted lowering operators follow the convention

    truncated_lowering 'in'  : sum_{n=0}^{n_c-1}   |n><n+1|
    truncated_lowering 'out' : sum_{n=n_c}^{N-1}   |n><n+1|
    sector_identity 'in'     : sum_{n=0}^{n_c}     |n><n|
    sector_identity 'out'    : sum_{n=n_c+1}^{N}   |n><n|

so the two lowering pieces add up to the full unweighted lowering operator
and the two identities add up to the identity.  Note the deliberate index
asymmetry: the lowering split happens at n_c, the identity split at n_c+1.
The weighted variants carry the usual sqrt(n+1) matrix elements and are the
ones to use in spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, EmptySectorError

__all__ = [
    "FockSpace",
    "Operator",
    "identity",
    "annihilation",
    "creation",
    "number",
    "unweighted_lowering",
    "truncated_lowering",
    "weighted_truncated_annihilation",
    "sector_identity",
    "tensor",
]

SECTORS = ("in", "out")


@dataclass(frozen=True)
class FockSpace:
    """Truncated single-oscillator Hilbert space.

    cutoff: largest retained Fock level N; dimension is N + 1.
    sector_boundary: level n_c (0 < n_c <= N) separating the inner and outer
        ring sectors, or None when no sector structure is needed.
    """

    cutoff: int
    sector_boundary: int | None = None

    def __post_init__(self):
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 1:
            raise ConfigError(f"cutoff must be an integer >= 1, got {self.cutoff!r}")
        n_c = self.sector_boundary
        if n_c is not None:
            if not isinstance(n_c, (int, np.integer)) or not 0 < n_c <= self.cutoff:
                raise ConfigError(
                    f"sector_boundary must lie in (0, cutoff], got {n_c!r}"
                )

    @property
    def dim(self) -> int:
        return self.cutoff + 1

    def boundary(self) -> int:
        if self.sector_boundary is None:
            raise ConfigError("this FockSpace has no sector_boundary set")
        return int(self.sector_boundary)


@dataclass(frozen=True)
class Operator:
    """Sparse matrix plus subsystem-dimension metadata."""

    dims: tuple[int, ...]
    mat: sp.csr_matrix

    def __post_init__(self):
        d = int(np.prod(self.dims))
        if self.mat.shape != (d, d):
            raise ValueError(f"matrix shape {self.mat.shape} != dims {self.dims}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "Operator":
        return Operator(self.dims, self.mat.conj().T.tocsr())

    def dense(self) -> np.ndarray:
        return self.mat.toarray()

    def _check(self, other: "Operator"):
        if self.dims != other.dims:
            raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, (self.mat @ other.mat).tocsr())

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, (self.mat + other.mat).tocsr())

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.dims, (self.mat - other.mat).tocsr())

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.dims, (self.mat * complex(scalar)).tocsr())

    __rmul__ = __mul__

    def __neg__(self) -> "Operator":
        return self * (-1.0)

    def __pow__(self, k: int) -> "Operator":
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("operator power requires an integer k >= 0")
        out = identity_like(self)
        for _ in range(int(k)):
            out = out @ self
        return out


def identity_like(op: Operator) -> Operator:
    return Operator(op.dims, sp.identity(op.dim, dtype=complex, format="csr"))


def _ladder(dim: int, rows: np.ndarray, data: np.ndarray) -> sp.csr_matrix:
    # entries |row><row+1| only; exact sparsity, no stored zeros
    cols = rows + 1
    return sp.csr_matrix((data, (rows, cols)), shape=(dim, dim), dtype=complex)


def identity(space: FockSpace) -> Operator:
    return Operator((space.dim,), sp.identity(space.dim, dtype=complex, format="csr"))


def annihilation(space: FockSpace) -> Operator:
    rows = np.arange(space.cutoff)
    return Operator((space.dim,), _ladder(space.dim, rows, np.sqrt(rows + 1.0)))


def creation(space: FockSpace) -> Operator:
    return annihilation(space).dag()


def number(space: FockSpace) -> Operator:
    diag = np.arange(space.dim, dtype=float)
    return Operator((space.dim,), sp.diags(diag, format="csr").astype(complex))


def unweighted_lowering(space: FockSpace) -> Operator:
    """Phase-lowering operator sum_n |n><n+1| over the whole ladder."""
    rows = np.arange(space.cutoff)
    return Operator((space.dim,), _ladder(space.dim, rows, np.ones(space.cutoff)))


def _sector_rows(space: FockSpace, sector: str) -> np.ndarray:
    n_c = space.boundary()
    if sector == "in":
        rows = np.arange(0, n_c)
    elif sector == "out":
        rows = np.arange(n_c, space.cutoff)
    else:
        raise ValueError(f"sector must be one of {SECTORS}, got {sector!r}")
    if rows.size == 0:
        raise EmptySectorError(
            f"sector {sector!r} holds no ladder links for "
            f"cutoff={space.cutoff}, boundary={n_c}"
        )
    return rows


def truncated_lowering(space: FockSpace, sector: str) -> Operator:
    """Unweighted lowering restricted to one ring sector (phase measures)."""
    rows = _sector_rows(space, sector)
    return Operator((space.dim,), _ladder(space.dim, rows, np.ones(rows.size)))


def weighted_truncated_annihilation(space: FockSpace, sector: str) -> Operator:
    """Sector-restricted annihilation with sqrt(n+1) weights (spectra)."""
    rows = _sector_rows(space, sector)
    return Operator((space.dim,), _ladder(space.dim, rows, np.sqrt(rows + 1.0)))


def sector_identity(space: FockSpace, sector: str) -> Operator:
    """Diagonal unit matrix on the inner (n <= n_c) or outer (n > n_c) levels."""
    n_c = space.boundary()
    if sector == "in":
        levels = np.arange(0, n_c + 1)
    elif sector == "out":
        levels = np.arange(n_c + 1, space.dim)
    else:
        raise ValueError(f"sector must be one of {SECTORS}, got {sector!r}")
    if levels.size == 0:
        raise EmptySectorError(
            f"sector {sector!r} holds no levels for "
            f"cutoff={space.cutoff}, boundary={n_c}"
        )
    data = np.ones(levels.size)
    mat = sp.csr_matrix(
        (data, (levels, levels)), shape=(space.dim, space.dim), dtype=complex
    )
    return Operator((space.dim,), mat)


def tensor(a: Operator, b: Operator) -> Operator:
    return Operator(a.dims + b.dims, sp.kron(a.mat, b.mat, format="csr"))
