"""Shared constants and helpers for the test suite.

Two canonical rate sets appear throughout:

* ``SHALLOW`` -- rings at r1 ~ 0.48 and r2 ~ 2.46 with a low barrier between
  them; the sector boundary sits at round(r_c^2) = 2.
* ``DEEP_*`` -- rings at exactly (1, 4, 8), reconstructed from the radii via
  Vieta's formulas. ``DEEP_ROUNDED`` keeps only three significant digits of
  those rates, which displaces the outer ring to ~8.012.
"""

from __future__ import annotations

import numpy as np

from twinlc import (
    CoupledParams,
    FockSpace,
    OscillatorParams,
    build_coupled,
    build_single,
    rates_from_radii,
    steady_state,
)

SHALLOW = OscillatorParams(gamma1=1.0, gamma2=2.5, gamma3=1.04, gamma4=0.096)

DEEP_EXACT_RATES = rates_from_radii(1.0, 4.0, 8.0, gamma1=1.0)
DEEP_EXACT = OscillatorParams.from_gamma(DEEP_EXACT_RATES)
DEEP_ROUNDED = OscillatorParams(
    gamma1=1.0, gamma2=0.539, gamma3=0.0264, gamma4=0.000244
)

# Radii of the SHALLOW set (regression values, double precision).
SHALLOW_R1 = 0.48256419272632284
SHALLOW_RC = 1.3605910778915087
SHALLOW_R2 = 2.45782906620058

TWO_PI = 2.0 * np.pi


def shallow(**kw) -> OscillatorParams:
    """SHALLOW rates with overridden Hamiltonian fields."""
    base = dict(gamma1=1.0, gamma2=2.5, gamma3=1.04, gamma4=0.096)
    base.update(kw)
    return OscillatorParams(**base)


def vdp(gamma2: float = 0.1, **kw) -> OscillatorParams:
    """Single-ring oscillator: linear gain plus two-photon loss only."""
    return OscillatorParams(gamma1=1.0, gamma2=gamma2, **kw)


def random_dm(d: int, rng: np.random.Generator, dims=None) -> "DensityMatrix":
    """Full-rank random density matrix (Ginibre ensemble)."""
    from twinlc import DensityMatrix

    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    mat = g @ g.conj().T
    mat /= np.trace(mat).real
    return DensityMatrix(dims if dims is not None else (d,), mat)


def random_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return psi / np.linalg.norm(psi)


def steady_single(p: OscillatorParams, cutoff: int, boundary=None, tol=1e-10):
    space = FockSpace(cutoff, boundary)
    L = build_single(p, space)
    return steady_state(L, tol=tol), space, L


def steady_coupled(p: CoupledParams, cutoff: int, boundary=None, tol=1e-10):
    space = FockSpace(cutoff, boundary)
    L = build_coupled(p, space, space)
    return steady_state(L, tol=tol), space, L


def wrap(phi):
    """Map angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(phi), TWO_PI)


def circ_dist(a, b):
    """Circular distance |a - b| on the circle."""
    return np.abs(wrap(np.asarray(a) - np.asarray(b)))
