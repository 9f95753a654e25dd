"""Master-equation generators as sparse superoperators.

The model for one oscillator is

    drho/dt = -i[H, rho] + g1 D[a+] + g2 D[a^2] + g3 D[a+^3] + g4 D[a^4]
    H = Delta a+a + K a+^2 a^2 + (W a+ + W* a)

and two oscillators couple coherently through g (a+_A a_B + a+_B a_A).
Vectorization is column-stacking: vec(rho)[i + j*d] = rho[i, j], so

    -i[H, .]      ->  -i (I (x) H - H^T (x) I)
    rate * D[L]   ->  rate * (conj(L) (x) L
                              - 1/2 I (x) L+L - 1/2 (L+L)^T (x) I)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import fock
from .errors import ConfigError
from .fock import FockSpace, Operator, tensor
from .params import CoupledParams, OscillatorParams

__all__ = [
    "Liouvillian",
    "vec",
    "unvec",
    "hamiltonian",
    "jump_operators",
    "dissipator_superop",
    "hamiltonian_superop",
    "build_single",
    "build_coupled",
]


def vec(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(mat).reshape(-1, order="F")


def unvec(v: np.ndarray, dims: tuple[int, ...] | int) -> np.ndarray:
    d = int(np.prod(dims))
    return np.asarray(v).reshape((d, d), order="F")


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator acting on column-stacked density matrices."""

    dims: tuple[int, ...]
    matrix: sp.csr_matrix

    def __post_init__(self):
        d2 = self.dim**2
        if self.matrix.shape != (d2, d2):
            raise ValueError(
                f"generator shape {self.matrix.shape} inconsistent with dims {self.dims}"
            )

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def apply(self, rho) -> np.ndarray:
        """Action on a density matrix (array or DensityMatrix)."""
        mat = getattr(rho, "mat", rho)
        return unvec(self.matrix @ vec(mat), self.dims)

    def __add__(self, other: "Liouvillian") -> "Liouvillian":
        if self.dims != other.dims:
            raise ValueError(f"dimension mismatch: {self.dims} vs {other.dims}")
        return Liouvillian(self.dims, (self.matrix + other.matrix).tocsr())


def hamiltonian(p: OscillatorParams, space: FockSpace) -> Operator:
    """H = Delta a+a + K a+^2 a^2 + (W a+ + W* a)."""
    a = fock.annihilation(space)
    ad = a.dag()
    h = p.delta * (ad @ a) + p.kerr * (ad @ ad @ a @ a)
    w = complex(p.drive)
    if w != 0:
        h = h + w * ad + np.conj(w) * a
    return h


def jump_operators(p: OscillatorParams, space: FockSpace) -> list[tuple[Operator, float]]:
    """The four incoherent channels with their rates (zero rates skipped)."""
    a = fock.annihilation(space)
    ad = a.dag()
    channels = [
        (ad, p.gamma1),
        (a @ a, p.gamma2),
        (ad @ ad @ ad, p.gamma3),
        (a @ a @ a @ a, p.gamma4),
    ]
    return [(op, rate) for op, rate in channels if rate > 0]


def hamiltonian_superop(h: Operator) -> Liouvillian:
    """-i[H, .] in vectorized form."""
    d = h.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    mat = -1j * (sp.kron(eye, h.mat) - sp.kron(h.mat.T, eye))
    return Liouvillian(h.dims, mat.tocsr())


def dissipator_superop(L: Operator, rate: float) -> Liouvillian:
    """rate * D[L] in vectorized form."""
    if rate < 0:
        raise ConfigError(f"dissipator rate must be non-negative, got {rate}")
    d = L.dim
    eye = sp.identity(d, dtype=complex, format="csr")
    ll = (L.dag() @ L).mat
    mat = rate * (
        sp.kron(L.mat.conj(), L.mat)
        - 0.5 * sp.kron(eye, ll)
        - 0.5 * sp.kron(ll.T, eye)
    )
    return Liouvillian(L.dims, mat.tocsr())


def _generator(p: OscillatorParams, ops: list[tuple[Operator, float]],
               h: Operator) -> Liouvillian:
    gen = hamiltonian_superop(h)
    for op, rate in ops:
        gen = gen + dissipator_superop(op, rate)
    return gen


def build_single(p: OscillatorParams, space: FockSpace) -> Liouvillian:
    """Generator of the single-oscillator master equation."""
    return _generator(p, jump_operators(p, space), hamiltonian(p, space))


def build_coupled(p: CoupledParams, space_a: FockSpace,
                  space_b: FockSpace) -> Liouvillian:
    """Generator for two oscillators with coherent exchange coupling.

    Local terms are lifted to the product space before vectorization, so the
    result is a single generator on the d_A*d_B Hilbert space.
    """
    eye_a = fock.identity(space_a)
    eye_b = fock.identity(space_b)
    a_a = tensor(fock.annihilation(space_a), eye_b)
    a_b = tensor(eye_a, fock.annihilation(space_b))

    h = tensor(hamiltonian(p.osc_a, space_a), eye_b) \
        + tensor(eye_a, hamiltonian(p.osc_b, space_b))
    if p.coupling != 0:
        h = h + p.coupling * (a_a.dag() @ a_b + a_b.dag() @ a_a)

    ops: list[tuple[Operator, float]] = []
    for op, rate in jump_operators(p.osc_a, space_a):
        ops.append((tensor(op, eye_b), rate))
    for op, rate in jump_operators(p.osc_b, space_b):
        ops.append((tensor(eye_a, op), rate))
    return _generator(p, ops, h)
