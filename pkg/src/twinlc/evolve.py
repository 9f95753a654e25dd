"""Steady states, time propagation, two-time correlations, and spectra.

The steady state is found by a direct sparse solve: one row of the generator
is replaced by the vectorized trace constraint and the resulting nonsingular
system is solved; the residual is then verified against the untouched
generator.  Time propagation uses an adaptive explicit integrator, and
correlation functions evolve B rho_ss under the semigroup (quantum
regression) with the exact sparse exponential action.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import liouvillian as lv
from .errors import NonConvergenceError, StiffnessError
from .fock import FockSpace, Operator
from .liouvillian import Liouvillian, unvec, vec
from .params import OscillatorParams
from .states import DensityMatrix

__all__ = [
    "DensityMatrix",
    "CorrelationSeries",
    "TruncationWarning",
    "steady_state",
    "choose_cutoff",
    "converged_steady_state",
    "check_cutoff_convergence",
    "spectral_gap",
    "propagate",
    "two_time_correlation",
    "power_spectrum",
    "sector_spectrum",
    "SpectrumResult",
]

STEADY_TOL = 1e-10


class TruncationWarning(UserWarning):
    """A correlation window or grid was too short for full decay."""


def _generator_scale(L: Liouvillian) -> float:
    return float(spla.norm(L.matrix, "fro"))


def _trace_row(d: int) -> sp.csr_matrix:
    idx = np.arange(d) * (d + 1)
    return sp.csr_matrix(
        (np.ones(d), (np.zeros(d, dtype=int), idx)), shape=(1, d * d), dtype=complex
    )


def _finalize(x: np.ndarray, L: Liouvillian, tol: float,
              scale: float) -> DensityMatrix | None:
    resid = float(np.linalg.norm(L.matrix @ x)) / scale
    if not np.isfinite(resid) or resid > tol:
        return None
    rho = unvec(x, L.dims)
    rho = 0.5 * (rho + rho.conj().T)
    tr = rho.trace().real
    if abs(tr) < 1e-6:
        return None
    out = DensityMatrix(L.dims, rho / tr)
    out.validate()
    return out


def steady_state(L: Liouvillian, *, tol: float = STEADY_TOL,
                 x0: np.ndarray | None = None) -> DensityMatrix:
    """Stationary state of the generator, residual-verified.

    Falls back to long-time evolution if the direct solve fails; raises
    NonConvergenceError when neither route reaches the tolerance.
    """
    d = L.dim
    scale = _generator_scale(L)
    trace_row = _trace_row(d)
    rhs = np.zeros(d * d, dtype=complex)
    csr = L.matrix.tocsr()

    for row in (0, d * d - 1):
        parts = []
        if row > 0:
            parts.append(csr[:row])
        parts.append(trace_row)
        if row < d * d - 1:
            parts.append(csr[row + 1:])
        m = sp.vstack(parts).tocsc()
        b = rhs.copy()
        b[row] = 1.0
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", spla.MatrixRankWarning)
                x = spla.spsolve(m, b)
        except RuntimeError:
            continue
        out = _finalize(x, L, tol, scale)
        if out is not None:
            return out

    # fallback: relax toward stationarity under the semigroup
    x = vec(np.identity(d, dtype=complex) / d) if x0 is None else x0.copy()
    diag_idx = np.arange(d) * (d + 1)
    horizon = 1.0
    best = np.inf
    for _ in range(24):
        x = spla.expm_multiply(L.matrix, x, start=0.0, stop=horizon,
                               num=2, endpoint=True)[-1]
        tr = np.sum(x[diag_idx])
        if abs(tr) < 1e-12 or not np.isfinite(abs(tr)):
            break
        x = x / tr
        out = _finalize(x, L, tol, scale)
        if out is not None:
            return out
        resid = float(np.linalg.norm(L.matrix @ x)) / scale
        if resid > 0.5 * best:
            # stationary within roundoff; the tolerance is unreachable
            break
        best = resid
        horizon *= 2.0
    raise NonConvergenceError(
        "steady-state solve did not reach the residual tolerance "
        f"{tol:g} (direct solve and relaxation both failed; best residual "
        f"{best:.3e})"
    )


def spectral_gap(L: Liouvillian, dense_limit: int = 4096) -> tuple[float, float]:
    """Two smallest singular values of the generator (uniqueness check)."""
    d2 = L.dim**2
    if d2 > dense_limit:
        raise ValueError(
            f"spectral_gap is dense-only (d^2={d2} > limit {dense_limit})"
        )
    sv = np.linalg.svd(L.matrix.toarray(), compute_uv=False)
    return (float(sv[-1]), float(sv[-2]))


def _top_population(rho: DensityMatrix, levels: int = 2) -> float:
    """Largest summed top-level occupation over the subsystems."""
    pops = np.real(np.diagonal(rho.mat))
    if len(rho.dims) == 1:
        return float(np.sum(pops[-levels:]))
    da, db = rho.dims
    grid = pops.reshape(da, db)
    return max(
        float(np.sum(grid[-levels:, :])),
        float(np.sum(grid[:, -levels:])),
    )


def choose_cutoff(p: OscillatorParams, *, start: int = 15, top_tol: float = 1e-6,
                  max_cutoff: int = 256,
                  boundary: int | None = None) -> FockSpace:
    """Smallest cutoff (geometric search) with top-two population < top_tol."""
    n = max(4, int(start))
    while True:
        space = FockSpace(n, boundary)
        rho = steady_state(lv.build_single(p, space))
        if _top_population(rho) < top_tol:
            return space
        if n >= max_cutoff:
            raise NonConvergenceError(
                f"population keeps piling up at the cutoff (N={n}); "
                "no converged steady state below max_cutoff"
            )
        n = min(max_cutoff, int(n * 1.4) + 2)


def converged_steady_state(p: OscillatorParams, *, start: int = 15,
                           top_tol: float = 1e-6, max_cutoff: int = 256,
                           boundary: int | None = None
                           ) -> tuple[DensityMatrix, FockSpace]:
    space = choose_cutoff(p, start=start, top_tol=top_tol,
                          max_cutoff=max_cutoff, boundary=boundary)
    return steady_state(lv.build_single(p, space)), space


def check_cutoff_convergence(p: OscillatorParams, cutoff: int,
                             observables, tol: float = 1e-4,
                             boundary: int | None = None) -> tuple[bool, dict]:
    """Doubling check: do named observables move less than tol when N doubles?

    observables: mapping name -> callable(rho, space) returning a float.
    """
    deltas = {}
    vals = {}
    for n in (cutoff, 2 * cutoff):
        space = FockSpace(n, boundary)
        rho = steady_state(lv.build_single(p, space))
        vals[n] = {k: float(f(rho, space)) for k, f in observables.items()}
    ok = True
    for k in observables:
        deltas[k] = abs(vals[2 * cutoff][k] - vals[cutoff][k])
        ok = ok and deltas[k] < tol
    return ok, deltas


def propagate(L: Liouvillian, rho0: DensityMatrix, t_final: float,
              dt: float | None = None) -> DensityMatrix:
    """rho(t_final) by adaptive explicit integration of the master equation."""
    if dt is not None and dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    if t_final == 0:
        return rho0
    mat = L.matrix

    def rhs(_t, y):
        return mat @ y

    sol = scipy.integrate.solve_ivp(
        rhs, (0.0, t_final), vec(rho0.mat), method="DOP853",
        rtol=1e-10, atol=1e-12, first_step=dt, dense_output=False,
        t_eval=[t_final],
    )
    if not sol.success:
        msg = sol.message or "integration failed"
        if "step size" in msg.lower() or "too small" in msg.lower():
            raise StiffnessError(f"integrator step-size collapse: {msg}")
        raise NonConvergenceError(f"propagation failed: {msg}")
    rho = unvec(sol.y[:, -1], L.dims)
    drift = abs(rho.trace().real - 1.0)
    if drift > 1e-9:
        raise NonConvergenceError(
            f"trace drifted by {drift:.2e} (> 1e-9); reduce the step or cutoff"
        )
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(L.dims, rho / rho.trace().real)


@dataclass(frozen=True)
class CorrelationSeries:
    """Stationary two-time correlation g(tau) on tau >= 0."""

    lags: np.ndarray
    values: np.ndarray
    plateau: complex  # Tr[A rho] Tr[B rho], the tau -> inf factorized limit


def _stationarity_residual(L: Liouvillian, rho: DensityMatrix) -> float:
    return float(np.linalg.norm(L.matrix @ vec(rho.mat))) / _generator_scale(L)


def two_time_correlation(L: Liouvillian, rho_ss: DensityMatrix, A: Operator,
                         B: Operator, lags: np.ndarray) -> CorrelationSeries:
    """g(tau) = Tr[A exp(L tau)(B rho_ss)] on a uniform lag grid."""
    lags = np.asarray(lags, dtype=float)
    if lags.ndim != 1 or lags.size < 2 or lags[0] != 0.0:
        raise ValueError("lags must be a 1-D grid starting at 0")
    steps = np.diff(lags)
    if np.any(steps <= 0) or not np.allclose(steps, steps[0], rtol=1e-9):
        raise ValueError("lags must be uniformly spaced and increasing")
    resid = _stationarity_residual(L, rho_ss)
    if resid > 100 * STEADY_TOL:
        raise ValueError(
            f"rho_ss is not stationary for this generator (residual {resid:.2e})"
        )
    v0 = vec(B.mat @ rho_ss.mat)
    segment = spla.expm_multiply(
        L.matrix, v0, start=lags[0], stop=lags[-1], num=lags.size, endpoint=True
    )
    w = vec(A.mat.T.toarray())
    values = segment @ w
    from .states import expect

    plateau = complex(expect(A, rho_ss) * expect(B, rho_ss))
    return CorrelationSeries(lags, values, plateau)


def power_spectrum(corr: CorrelationSeries, omegas: np.ndarray) -> np.ndarray:
    """S(omega) = 2 Re int_0^inf g(tau) exp(-i omega tau) dtau, folded.

    Uses stationarity g(-tau) = g(tau)* to fold the negative-lag half.  Warns
    when |g| has not decayed at the window edge (finite-window bias; with a
    coherent drive the plateau never decays and the warning is expected).
    """
    omegas = np.asarray(omegas, dtype=float)
    g0 = abs(corr.values[0]) or 1.0
    tail = abs(corr.values[-1])
    if tail > 1e-6 * g0:
        warnings.warn(
            f"correlation tail |g(tau_max)|={tail:.3e} exceeds 1e-6 g(0); "
            "spectrum carries finite-window broadening",
            TruncationWarning,
            stacklevel=2,
        )
    # chunk over omegas so the phase matrix stays bounded in memory
    s = np.empty(omegas.size)
    chunk = max(1, 8_000_000 // max(1, corr.lags.size))
    for i in range(0, omegas.size, chunk):
        phases = np.exp(-1j * np.outer(omegas[i : i + chunk], corr.lags))
        integrand = phases * corr.values[None, :]
        s[i : i + chunk] = 2.0 * np.real(
            np.trapezoid(integrand, corr.lags, axis=1)
        )
    return s


@dataclass(frozen=True)
class SpectrumResult:
    omegas: np.ndarray
    values: np.ndarray
    corr: CorrelationSeries


def sector_spectrum(L: Liouvillian, rho_ss: DensityMatrix, a_op: Operator,
                    omegas: np.ndarray, *, d_tau: float,
                    tau_max: float | None = None, tau_cap: float = 400.0,
                    decay_tol: float = 1e-6) -> SpectrumResult:
    """Emission spectrum of one annihilation-like operator.

    Computes g(tau) = <a_op+(t+tau) a_op(t)> chunk by chunk, extending the
    window until |g - plateau| at the tail drops below decay_tol * |g(0)| or
    tau_cap is hit, then transforms.
    """
    a_dag = a_op.dag()
    if tau_max is not None:
        lags = np.arange(0.0, tau_max + 0.5 * d_tau, d_tau)
        corr = two_time_correlation(L, rho_ss, a_dag, a_op, lags)
        return SpectrumResult(omegas, power_spectrum(corr, omegas), corr)

    resid = _stationarity_residual(L, rho_ss)
    if resid > 100 * STEADY_TOL:
        raise ValueError(
            f"rho_ss is not stationary for this generator (residual {resid:.2e})"
        )
    from .states import expect

    plateau = complex(expect(a_dag, rho_ss) * expect(a_op, rho_ss))
    w = vec(a_dag.mat.T.toarray())
    chunk = 200  # lag points per extension
    v = vec(a_op.mat @ rho_ss.mat)
    lag_list = [np.array([0.0])]
    val_list = [np.array([np.dot(w, v)])]
    g0 = abs(val_list[0][0]) or 1.0
    t0 = 0.0
    while True:
        t1 = t0 + chunk * d_tau
        segment = spla.expm_multiply(
            L.matrix, v, start=0.0, stop=t1 - t0, num=chunk + 1, endpoint=True
        )
        vals = segment @ w
        lag_list.append(t0 + d_tau * np.arange(1, chunk + 1))
        val_list.append(vals[1:])
        v = segment[-1]
        t0 = t1
        tail = np.max(np.abs(vals[1:] - plateau))
        if tail < decay_tol * g0 or t0 >= tau_cap:
            break
    lags = np.concatenate(lag_list)
    values = np.concatenate(val_list)
    corr = CorrelationSeries(lags, values, plateau)
    return SpectrumResult(omegas, power_spectrum(corr, omegas), corr)
