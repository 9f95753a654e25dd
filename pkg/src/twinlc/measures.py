"""Synchronization diagnostics computed from density matrices.

Phase distributions subtract the uniform background, so every distribution
integrates to zero.  For a single oscillator

    P1(phi) = <phi|rho|phi> - 1/2pi
            = (1/2pi) sum_{k>=1} exp(-i k phi) <atilde^k> + h.c.

where atilde^k = sum_n |n><n+k|, i.e. the k-th coherence sums along the k-th
subdiagonal.  Sector variants restrict the index ranges to the inner/outer
ladder pieces and renormalize by the sector weight; the joint distributions
for two oscillators use the relative phase phi_BA.  The Wigner field is
evaluated through the closed-form Fock-basis kernel (generalized Laguerre
polynomials by upward recurrence).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal
from scipy.special import gammaln

from .errors import EmptySectorError
from .fock import FockSpace
from .states import DensityMatrix, entropy, ptrace

__all__ = [
    "PhaseDistribution",
    "WignerField",
    "wigner",
    "wigner_points",
    "wigner_radial",
    "p1",
    "p1_sector",
    "p2",
    "p2_sector",
    "sync_strength",
    "mutual_information",
]

DEFAULT_M = 720
WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class PhaseDistribution:
    """Real distribution over a uniform phase grid on [-pi, pi)."""

    phases: np.ndarray
    values: np.ndarray
    sector: str

    @property
    def grid_step(self) -> float:
        return float(self.phases[1] - self.phases[0])

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid_step)


def _phase_grid(M: int) -> np.ndarray:
    if M < 8:
        raise ValueError("phase grid needs at least 8 points")
    return np.linspace(-np.pi, np.pi, M, endpoint=False)


def _assemble(coherences: np.ndarray, M: int, norm: float,
              sector: str) -> PhaseDistribution:
    """Distribution (1/2pi/norm) sum_k c_k e^{-ik phi} + h.c. on the grid."""
    phases = _phase_grid(M)
    k = np.arange(1, coherences.size + 1)
    harmonics = np.exp(-1j * np.outer(phases, k))
    values = 2.0 * np.real(harmonics @ coherences) / (2.0 * np.pi * norm)
    return PhaseDistribution(phases, values, sector)


def _single_coherences(rho: DensityMatrix, lo: int, hi: int,
                       k_max: int) -> np.ndarray:
    """c_k = <chain^k> for the lowering chain with start indices [lo, hi].

    chain = sum_{n=lo}^{hi} |n><n+1|, so chain^k sums rho[n+k, n] over
    n in [lo, hi-(k-1)]; the chain stays inside its index window, which
    makes the inner-sector operator nilpotent.
    """
    mat = rho.mat
    d = rho.dim
    out = np.zeros(max(k_max, 0), dtype=complex)
    for k in range(1, k_max + 1):
        top = min(hi - (k - 1), d - 1 - k)
        if top < lo:
            break
        n = np.arange(lo, top + 1)
        out[k - 1] = np.sum(mat[n + k, n])
    return out


def p1(rho: DensityMatrix, M: int = DEFAULT_M) -> PhaseDistribution:
    """Phase distribution of a single oscillator, background subtracted."""
    if len(rho.dims) != 1:
        raise ValueError("p1 expects a single-oscillator state")
    d = rho.dim
    c = _single_coherences(rho, 0, d - 1, d - 1)
    return _assemble(c, M, 1.0, "full")


def p1_sector(rho: DensityMatrix, sector: str, space: FockSpace,
              M: int = DEFAULT_M) -> PhaseDistribution:
    """Sector phase distribution, normalized by the sector occupation."""
    if len(rho.dims) != 1:
        raise ValueError("p1_sector expects a single-oscillator state")
    n_c = space.boundary()
    d = rho.dim
    pops = np.real(np.diagonal(rho.mat))
    if sector == "in":
        lo, hi, k_max = 0, n_c - 1, n_c  # (atilde_in)^k = 0 beyond k = n_c
        weight = float(np.sum(pops[: n_c + 1]))
    elif sector == "out":
        lo, hi, k_max = n_c, d - 2, d - 1 - n_c
        weight = float(np.sum(pops[n_c + 1:]))
    else:
        raise ValueError(f"sector must be 'in' or 'out', got {sector!r}")
    if weight < WEIGHT_FLOOR:
        raise EmptySectorError(
            f"sector {sector!r} has negligible occupation ({weight:.2e})"
        )
    c = _single_coherences(rho, lo, hi, k_max)
    return _assemble(c, M, weight, sector)


def _joint_coherences(rho: DensityMatrix, range_a, range_b) -> np.ndarray:
    """c_k = <(lower_A+)^k (lower_B)^k> with sector-restricted index ranges.

    range_a/range_b: functions k -> (lo, hi) inclusive bounds for the chain
    start index on each oscillator; empty when hi < lo.
    """
    da, db = rho.dims
    t = rho.mat.reshape(da, db, da, db)
    k_cap = min(da, db) - 1
    vals = []
    for k in range(1, k_cap + 1):
        lo_a, hi_a = range_a(k)
        lo_b, hi_b = range_b(k)
        if hi_a < lo_a or hi_b < lo_b:
            break
        m = np.arange(lo_a, hi_a + 1)
        n = np.arange(lo_b, hi_b + 1)
        # <(A+)^k B^k> = sum_{m,n} rho[(m, n+k), (m+k, n)]
        block = t[m[:, None], (n + k)[None, :], (m + k)[:, None], n[None, :]]
        vals.append(np.sum(block))
    return np.asarray(vals, dtype=complex)


def p2(rho: DensityMatrix, M: int = DEFAULT_M) -> PhaseDistribution:
    """Relative-phase distribution of two oscillators."""
    if len(rho.dims) != 2:
        raise ValueError("p2 expects a two-oscillator state")
    da, db = rho.dims

    c = _joint_coherences(
        rho,
        lambda k: (0, da - 1 - k),
        lambda k: (0, db - 1 - k),
    )
    return _assemble(c, M, 1.0, "full")


def _sector_chain_range(space: FockSpace, sector: str, d: int):
    n_c = space.boundary()
    if sector == "in":
        return lambda k: (0, n_c - k)
    if sector == "out":
        return lambda k: (n_c, d - 1 - k)
    raise ValueError(f"sector must be 'in' or 'out', got {sector!r}")


def _sector_levels(space: FockSpace, sector: str) -> np.ndarray:
    n_c = space.boundary()
    if sector == "in":
        return np.arange(0, n_c + 1)
    if sector == "out":
        return np.arange(n_c + 1, space.dim)
    raise ValueError(f"sector must be 'in' or 'out', got {sector!r}")


def joint_sector_weight(rho: DensityMatrix, space_a: FockSpace,
                        space_b: FockSpace, alpha: str, beta: str) -> float:
    """<I_A^alpha I_B^beta>, the population of the joint sector."""
    da, db = rho.dims
    grid = np.real(np.diagonal(rho.mat)).reshape(da, db)
    la = _sector_levels(space_a, alpha)
    lb = _sector_levels(space_b, beta)
    return float(grid[np.ix_(la, lb)].sum())


def p2_sector(rho: DensityMatrix, alpha: str, beta: str,
              space_a: FockSpace, space_b: FockSpace,
              M: int = DEFAULT_M) -> PhaseDistribution:
    """Joint sector relative-phase distribution P2^{alpha,beta}."""
    if len(rho.dims) != 2:
        raise ValueError("p2_sector expects a two-oscillator state")
    da, db = rho.dims
    weight = joint_sector_weight(rho, space_a, space_b, alpha, beta)
    if weight < WEIGHT_FLOOR:
        raise EmptySectorError(
            f"joint sector ({alpha},{beta}) has negligible weight ({weight:.2e})"
        )
    c = _joint_coherences(
        rho,
        _sector_chain_range(space_a, alpha, da),
        _sector_chain_range(space_b, beta, db),
    )
    return _assemble(c, M, weight, f"{alpha},{beta}")


def sync_strength(dist: PhaseDistribution,
                  prominence_frac: float = 0.1) -> tuple[float, float, int]:
    """(max value, refined argmax phase, count of prominent local maxima).

    A flat distribution returns (0.0, nan, 0).  Maxima count uses a
    prominence threshold relative to the global maximum; the argmax is
    refined by a parabola through the peak and its grid neighbors.
    """
    v = dist.values
    M = v.size
    vmax = float(np.max(v))
    if vmax < 1e-12 or np.max(np.abs(v)) < 1e-12:
        return (0.0, math.nan, 0)
    tiled = np.tile(v, 3)
    peaks, _ = scipy.signal.find_peaks(tiled, prominence=prominence_frac * vmax)
    peaks = peaks[(peaks >= M) & (peaks < 2 * M)] - M
    n_maxima = int(peaks.size)
    i = int(np.argmax(v))
    y0, y1, y2 = v[(i - 1) % M], v[i], v[(i + 1) % M]
    denom = y0 - 2.0 * y1 + y2
    shift = 0.0 if denom == 0 else 0.5 * (y0 - y2) / denom
    step = dist.grid_step
    argmax = float(dist.phases[i] + shift * step)
    argmax = float(np.pi - np.mod(np.pi - argmax, 2.0 * np.pi))
    return (vmax, argmax, n_maxima)


# ---------------------------------------------------------------------------
# Wigner function

@dataclass(frozen=True)
class WignerField:
    """W(x + i p) on a rectangular grid; values[i, j] = W(x[i] + i p[j])."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.x))


def wigner_points(rho: DensityMatrix, alphas: np.ndarray) -> np.ndarray:
    """W evaluated at arbitrary complex phase-space points.

    Fock-basis kernel: for m >= n, with d = m - n and y = 4|alpha|^2,

        G_mn = (2/pi) (-1)^n sqrt(n!/m!) (2 alpha*)^d e^{-y/2} L_n^{(d)}(y)

    and the Hermitian partner for m < n.  Laguerre values come from the
    usual three-term upward recurrence in n.
    """
    mat = np.asarray(getattr(rho, "mat", rho))
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("wigner expects a square single-oscillator matrix")
    alphas = np.asarray(alphas, dtype=complex)
    shape = alphas.shape
    al = alphas.ravel()
    d = mat.shape[0]
    y = 4.0 * np.abs(al) ** 2
    gauss = np.exp(-0.5 * y)
    with np.errstate(divide="ignore"):
        log2a = np.log(2.0 * np.abs(al))
    phase = np.exp(-1j * np.angle(al))
    w = np.zeros(al.size, dtype=float)
    lgam = gammaln(np.arange(d + 1) + 1.0)
    for diff in range(d):
        # L_n^{(diff)}(y) by upward recurrence in n
        l_prev = np.zeros_like(y)
        l_cur = np.ones_like(y)
        if diff == 0:
            radial = gauss
        else:
            with np.errstate(invalid="ignore"):
                radial = np.exp(diff * log2a - 0.5 * y)
            radial = np.where(np.isfinite(radial), radial, 0.0)
        ang = phase**diff
        for n in range(0, d - diff):
            m = n + diff
            if n > 0:
                l_next = (
                    (2.0 * n - 1.0 + diff - y) * l_cur
                    - (n - 1.0 + diff) * l_prev
                ) / n
                l_prev, l_cur = l_cur, l_next
            pref = math.exp(0.5 * (lgam[n] - lgam[m])) * (-1.0) ** n
            kern = pref * radial * l_cur * ang
            if diff == 0:
                w += np.real(mat[n, n]) * np.real(kern)
            else:
                w += 2.0 * np.real(mat[m, n] * kern)
    return (w * (2.0 / np.pi)).reshape(shape)


def wigner(rho: DensityMatrix, x: np.ndarray,
           p: np.ndarray | None = None) -> WignerField:
    """Wigner field on a rectangular (x, p) grid, with normalization check."""
    x = np.asarray(x, dtype=float)
    p = x if p is None else np.asarray(p, dtype=float)
    alphas = x[:, None] + 1j * p[None, :]
    values = wigner_points(rho, alphas)
    field = WignerField(x, p, values)
    total = field.integral()
    if abs(total - 1.0) > 1e-4:
        warnings.warn(
            f"Wigner grid captures integral {total:.6f} != 1; enlarge the grid",
            UserWarning,
            stacklevel=2,
        )
    return field


def wigner_radial(rho: DensityMatrix, radii: np.ndarray,
                  phi: float = 0.0) -> np.ndarray:
    """W along the ray alpha = r exp(i phi)."""
    radii = np.asarray(radii, dtype=float)
    return wigner_points(rho, radii * np.exp(1j * phi))


# ---------------------------------------------------------------------------
# mutual information

def mutual_information(rho: DensityMatrix,
                       truncation: tuple[str, str] | None = None,
                       space_a: FockSpace | None = None,
                       space_b: FockSpace | None = None) -> float:
    """I = S(rho_A) + S(rho_B) - S(rho), optionally on a joint ring sector.

    With truncation=(alpha, beta) the state is projected on both sides onto
    the joint sector, renormalized by the sector weight, and the mutual
    information of the projected state is returned.
    """
    if len(rho.dims) != 2:
        raise ValueError("mutual_information expects a two-oscillator state")
    work = rho
    if truncation is not None:
        if space_a is None or space_b is None:
            raise ValueError("sector truncation needs both Fock spaces")
        alpha, beta = truncation
        la = _sector_levels(space_a, alpha)
        lb = _sector_levels(space_b, beta)
        da, db = rho.dims
        t = rho.mat.reshape(da, db, da, db)
        sub = t[np.ix_(la, lb, la, lb)]
        block = sub.reshape(la.size * lb.size, la.size * lb.size)
        weight = float(np.real(block.trace()))
        if weight < WEIGHT_FLOOR:
            raise EmptySectorError(
                f"joint sector ({alpha},{beta}) has negligible weight "
                f"({weight:.2e})"
            )
        work = DensityMatrix((la.size, lb.size), block / weight)
    s_a = entropy(ptrace(work, 0))
    s_b = entropy(ptrace(work, 1))
    s_ab = entropy(work)
    return float(s_a + s_b - s_ab)
