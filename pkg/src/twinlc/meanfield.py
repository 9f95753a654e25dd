"""Classical mean-field analysis of the oscillator's amplitude dynamics.

First-order cumulant expansion of the master equation yields ODEs for the
polar amplitude variables (r, phi) of each oscillator,

    dr/dt   = r (g1/2 - g2 r^2 + 3 g3 r^4 / 2 - 2 g4 r^6) - W sin(phi)
    dphi/dt = -Delta - 2 K r^2 - (W / r) cos(phi)

with W the (real) drive amplitude.  The undriven radial flow derives from an
effective potential V(r) = (-g1 r^2 + g2 r^4 - g3 r^6 + g4 r^8)/4 whose two
minima r1 < r2 and intervening maximum rc are the twin rings.  This module
provides the radii/potential machinery, the coupled two-oscillator flow, the
reduced relative-phase equations and their perturbative expansions in
eps = g/g1, and the corresponding formulas for standard (single-ring) limit
cycles used for comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import NonConvergenceError
from .params import CoupledParams, OscillatorParams
from .util import wrap_angle

__all__ = [
    "MeanFieldRadii",
    "EffectivePotential",
    "radii",
    "rates_from_radii",
    "default_sector_boundary",
    "potential",
    "rhs_single",
    "rhs_coupled",
    "relative_phase_rhs",
    "relative_phase_rhs_same",
    "relative_phase_rhs_diff",
    "perturbative_radii",
    "PerturbativeRadii",
    "standard_lc_phase",
    "standard_lc_relative_phase",
    "phase_fixed_points",
    "single_fixed_point",
    "coupled_fixed_point",
    "CoupledFixedPoint",
]


# ---------------------------------------------------------------------------
# radii and potential

@dataclass(frozen=True)
class MeanFieldRadii:
    """Stationary radii of the undriven radial flow.

    r1, rc, r2: inner stable, unstable, outer stable radius.  When the cubic
    in u = r^2 has fewer than three distinct positive roots the ``degenerate``
    flag is set, ``roots`` holds whatever positive stationary radii exist
    (sorted), and missing entries are NaN.
    """

    r1: float
    rc: float
    r2: float
    degenerate: bool
    roots: tuple[float, ...]


def _bracket_coeffs(p: OscillatorParams) -> np.ndarray:
    # dr/dt = r * bracket(u), u = r^2; coefficients in descending powers of u
    return np.array([-2.0 * p.gamma4, 1.5 * p.gamma3, -p.gamma2, 0.5 * p.gamma1])


def _bracket(u, p: OscillatorParams):
    return np.polyval(_bracket_coeffs(p), u)


def _radial_flow(r, p: OscillatorParams):
    return r * _bracket(r * r, p)


def radii(p: OscillatorParams) -> MeanFieldRadii:
    """Roots of the radial flow, via companion-matrix roots of the cubic in u."""
    coeffs = _bracket_coeffs(p)
    coeffs = np.trim_zeros(coeffs, "f")
    if coeffs.size <= 1:
        return MeanFieldRadii(math.nan, math.nan, math.nan, True, ())
    roots = np.roots(coeffs)
    scale = max(1.0, float(np.max(np.abs(roots))))
    u = roots[np.abs(roots.imag) <= 1e-9 * scale].real
    u = u[u > 1e-12 * scale]
    # Newton polish so each root zeroes the bracket to full precision
    deriv = np.polyder(coeffs)
    for _ in range(4):
        u = u - np.polyval(coeffs, u) / np.polyval(deriv, u)
    u = np.sort(u)
    merged: list[float] = []
    for val in u:
        if merged and val - merged[-1] <= 1e-10 * max(1.0, u[-1]):
            continue  # near-double root: keep one representative
        merged.append(float(val))
    r = tuple(math.sqrt(val) for val in merged)
    if len(r) == 3 and len(merged) == u.size:
        return MeanFieldRadii(r[0], r[1], r[2], False, r)
    return MeanFieldRadii(
        r[0] if r else math.nan, math.nan, math.nan, True, r
    )


def _require_twin(p: OscillatorParams) -> MeanFieldRadii:
    rr = radii(p)
    if rr.degenerate:
        raise ValueError(
            "parameters do not give two coexisting rings (degenerate radii)"
        )
    return rr


def rates_from_radii(r1: float, rc: float, r2: float, *,
                     gamma1: float | None = None,
                     gamma4: float | None = None) -> tuple[float, float, float, float]:
    """Rates (g1, g2, g3, g4) placing the stationary radii at (r1, rc, r2).

    The radial bracket factorizes as 2 g4 (u1 - u)(uc - u)(u2 - u) with
    u = r^2, so by Vieta

        g1 = 4 g4 u1 uc u2
        g2 = 2 g4 (u1 uc + u1 u2 + uc u2)
        g3 = (4/3) g4 (u1 + uc + u2)

    Exactly one of gamma1/gamma4 fixes the overall scale.
    """
    if not 0 < r1 < rc < r2:
        raise ValueError("radii must satisfy 0 < r1 < rc < r2")
    if (gamma1 is None) == (gamma4 is None):
        raise ValueError("give exactly one of gamma1 or gamma4")
    u1, uc, u2 = r1 * r1, rc * rc, r2 * r2
    if gamma4 is None:
        gamma4 = gamma1 / (4.0 * u1 * uc * u2)
    g1 = 4.0 * gamma4 * u1 * uc * u2
    g2 = 2.0 * gamma4 * (u1 * uc + u1 * u2 + uc * u2)
    g3 = (4.0 / 3.0) * gamma4 * (u1 + uc + u2)
    return (g1, g2, g3, gamma4)


def default_sector_boundary(p: OscillatorParams) -> int:
    """Fock level closest to rc^2, the natural inner/outer split."""
    return int(round(_require_twin(p).rc ** 2))


@dataclass(frozen=True)
class EffectivePotential:
    """Closed-form potential of the radial flow, V(0) = 0."""

    params: OscillatorParams

    def __call__(self, r):
        g1, g2, g3, g4 = self.params.gamma
        u = np.asarray(r, dtype=float) ** 2
        return (-g1 * u + g2 * u**2 - g3 * u**3 + g4 * u**4) / 4.0

    @property
    def barrier_inner(self) -> float:
        """V(rc) - V(r1), the escape barrier of the inner ring."""
        rr = _require_twin(self.params)
        return float(self(rr.rc) - self(rr.r1))

    @property
    def barrier_outer(self) -> float:
        """V(rc) - V(r2), the escape barrier of the outer ring."""
        rr = _require_twin(self.params)
        return float(self(rr.rc) - self(rr.r2))


def potential(p: OscillatorParams) -> EffectivePotential:
    return EffectivePotential(p)


# ---------------------------------------------------------------------------
# flows

def _real_drive(p: OscillatorParams) -> float:
    w = complex(p.drive)
    if abs(w.imag) > 1e-12 * max(1.0, abs(w)):
        raise ValueError("mean-field equations assume a real drive amplitude")
    return w.real


def rhs_single(r: float, phi: float, p: OscillatorParams) -> tuple[float, float]:
    """Amplitude/phase flow of one driven oscillator."""
    w = _real_drive(p)
    if r < 0 or (r == 0 and w != 0):
        raise ValueError(f"radius must be positive (got r={r}) when driven")
    dr = _radial_flow(r, p) - w * math.sin(phi)
    dphi = -p.delta - 2.0 * p.kerr * r * r
    if w != 0:
        dphi -= (w / r) * math.cos(phi)
    return (dr, dphi)


def rhs_coupled(rA: float, phiA: float, rB: float, phiB: float,
                p: CoupledParams) -> tuple[float, float, float, float]:
    """Four coupled ODEs for two oscillators exchanging excitations."""
    g = p.coupling
    out = []
    for (rj, phij, pj, ri, phii) in (
        (rA, phiA, p.osc_a, rB, phiB),
        (rB, phiB, p.osc_b, rA, phiA),
    ):
        w = _real_drive(pj)
        if rj <= 0:
            raise ValueError(f"radius must be positive, got {rj}")
        dr = _radial_flow(rj, pj) + g * ri * math.sin(phii - phij) \
            - w * math.sin(phij)
        dphi = -pj.delta - 2.0 * pj.kerr * rj * rj \
            - g * (ri / rj) * math.cos(phii - phij)
        if w != 0:
            dphi -= (w / rj) * math.cos(phij)
        out.extend((dr, dphi))
    return (out[0], out[1], out[2], out[3])


def _require_autonomous(p: CoupledParams):
    if _real_drive(p.osc_a) != 0 or _real_drive(p.osc_b) != 0:
        raise ValueError("relative-phase reduction assumes undriven oscillators")


def relative_phase_rhs(phiBA: float, rA: float, rB: float,
                       p: CoupledParams) -> float:
    """Exact relative-phase flow at given radii (undriven oscillators)."""
    _require_autonomous(p)
    if rA <= 0 or rB <= 0:
        raise ValueError("radii must be positive")
    delta = p.detuning_difference
    g = p.coupling
    uA, uB = rA * rA, rB * rB
    return (
        -delta
        - 2.0 * (p.osc_b.kerr * uB - p.osc_a.kerr * uA)
        + g * (uB - uA) / (rA * rB) * math.cos(phiBA)
    )


def _same_branch_radii(p: CoupledParams, x: int) -> tuple[float, float, float]:
    if p.osc_a.gamma != p.osc_b.gamma or p.osc_a.kerr != p.osc_b.kerr:
        raise ValueError("relative-phase expansions assume equal rates and "
                         "Kerr on both oscillators (detunings may differ)")
    rr = _require_twin(p.osc_a)
    if x == 1:
        return rr.r1, rr.r2, rr.rc
    if x == 2:
        return rr.r2, rr.r1, rr.rc
    raise ValueError("x must be 1 or 2")


def relative_phase_rhs_same(phiBA: float, x: int, p: CoupledParams) -> float:
    """Reduced relative-phase flow, both oscillators near the same ring r_x.

    Second order in eps = g/gamma1; bistable at {0, pi} for delta = K = 0.
    """
    _require_autonomous(p)
    rx, ry, rc = _same_branch_radii(p, x)
    g = p.coupling
    K = p.osc_a.kerr
    g4 = p.osc_a.gamma4
    ux, uy, uc = rx * rx, ry * ry, rc * rc
    delta = p.detuning_difference
    num = 4.0 * g * K * ux * math.sin(phiBA) - g * g * math.sin(2.0 * phiBA)
    den = 2.0 * ux * (ux - uy) * (ux - uc) * g4
    return -delta + num / den


def relative_phase_rhs_diff(phiBA: float, ordering: tuple[int, int],
                            p: CoupledParams) -> float:
    """Reduced relative-phase flow with A near ring r_x and B near r_y.

    First order in eps = g/gamma1.  The sine term keeps the fixed (r1, r2)
    combination as printed, independent of the ordering.
    """
    _require_autonomous(p)
    x, y = ordering
    if {x, y} != {1, 2}:
        raise ValueError("ordering must be (1, 2) or (2, 1)")
    rx, ry, rc = _same_branch_radii(p, x)
    rr = _require_twin(p.osc_a)
    r1, r2 = rr.r1, rr.r2
    g = p.coupling
    K = p.osc_a.kerr
    g4 = p.osc_a.gamma4
    ux, uy, uc = rx * rx, ry * ry, rc * rc
    u1, u2 = r1 * r1, r2 * r2
    delta = p.detuning_difference
    return (
        -delta
        + 2.0 * K * (ux - uy)
        + g * (uy - ux) / (r1 * r2) * math.cos(phiBA)
        + g * K * (u1 + u2 - uc)
        / (r1 * r2 * (uc - u1) * (u2 - uc) * g4) * math.sin(phiBA)
    )


@dataclass(frozen=True)
class PerturbativeRadii:
    """Expansion coefficients of the locked radii in eps = g/gamma1.

    r_A ~ base_a + eps*r_a1 + eps^2*r_a2 (second order only in the
    same-radius case; r_a2/r_b2 are None otherwise).
    """

    base_a: float
    base_b: float
    r_a1: float
    r_b1: float
    r_a2: float | None
    r_b2: float | None


def perturbative_radii(p: CoupledParams, case: str, phiBA: float,
                       branch=None) -> PerturbativeRadii:
    """Printed first/second-order radius corrections at locked phase phiBA.

    case='same': both oscillators near ring x (branch in {1,2}, default 1).
    case='diff': A near ring x, B near ring y (branch=(x,y), default (1,2)).
    """
    _require_autonomous(p)
    g1 = p.osc_a.gamma1
    g4 = p.osc_a.gamma4
    s = math.sin(phiBA)
    if case == "same":
        x = 1 if branch is None else int(branch)
        rx, ry, rc = _same_branch_radii(p, x)
        ux, uy, uc = rx * rx, ry * ry, rc * rc
        ra1 = s * g1 / (4.0 * rx * (ux - uy) * (ux - uc) * g4)
        ra2 = (
            s * s
            * (9.0 * ux * (uy + uc) - 5.0 * uy * uc - 13.0 * ux * ux)
            / (32.0 * rx**3 * (ux - uy) ** 3 * (ux - uc) ** 3)
            * (g1 / g4) ** 2
        )
        return PerturbativeRadii(rx, rx, ra1, -ra1, ra2, ra2)
    if case == "diff":
        ordering = (1, 2) if branch is None else tuple(branch)
        x, y = ordering
        rx, ry, rc = _same_branch_radii(p, x)
        ux, uy, uc = rx * rx, ry * ry, rc * rc
        ra1 = ry * s * g1 / (4.0 * ux * (ux - uy) * (ux - uc) * g4)
        rb1 = rx * s * g1 / (4.0 * uy * (ux - uy) * (uy - uc) * g4)
        return PerturbativeRadii(rx, ry, ra1, rb1, None, None)
    raise ValueError("case must be 'same' or 'diff'")


# ---------------------------------------------------------------------------
# standard (single-ring) limit cycle comparisons

def standard_lc_phase(phi: float, p: OscillatorParams) -> float:
    """Phase flow of a driven standard limit cycle, perturbative in the drive.

    Two admissible rate patterns: gamma3 = gamma4 = 0 (ring from first/second
    order rates) or gamma1 = gamma2 = 0 (ring from third/fourth order rates).
    """
    w = _real_drive(p)
    g1, g2, g3, g4 = p.gamma
    if g3 == 0 and g4 == 0:
        if g1 <= 0 or g2 <= 0:
            raise ValueError("pattern gamma3=gamma4=0 needs gamma1, gamma2 > 0")
        return (
            -p.delta
            - p.kerr * g1 / g2
            - w * math.sqrt(2.0 * g2 / g1) * math.cos(phi)
            + 2.0 * w * p.kerr * math.sqrt(2.0 / (g1 * g2)) * math.sin(phi)
        )
    if g1 == 0 and g2 == 0:
        if g3 <= 0 or g4 <= 0:
            raise ValueError("pattern gamma1=gamma2=0 needs gamma3, gamma4 > 0")
        return (
            -p.delta
            - 1.5 * p.kerr * g3 / g4
            - w * math.sqrt(4.0 * g4 / (3.0 * g3)) * math.cos(phi)
            + (16.0 / 9.0) * w * p.kerr
            * math.sqrt(4.0 * g4**3 / (3.0 * g3**5)) * math.sin(phi)
        )
    raise ValueError(
        "standard-limit-cycle phase flow needs gamma3=gamma4=0 or gamma1=gamma2=0"
    )


def standard_lc_relative_phase(phiBA: float, p: CoupledParams) -> float:
    """Relative-phase flow of two coupled standard limit cycles.

    Requires gamma3 = gamma4 = 0 on both oscillators, equal gamma1 and equal
    Kerr; second order in the coupling.
    """
    _require_autonomous(p)
    a, b = p.osc_a, p.osc_b
    if a.gamma3 != 0 or a.gamma4 != 0 or b.gamma3 != 0 or b.gamma4 != 0:
        raise ValueError("coupled standard-cycle flow needs gamma3=gamma4=0")
    if a.gamma1 != b.gamma1 or a.gamma1 <= 0:
        raise ValueError("coupled standard-cycle flow assumes equal gamma1 > 0")
    if a.kerr != b.kerr:
        raise ValueError("coupled standard-cycle flow assumes equal Kerr")
    if a.gamma2 <= 0 or b.gamma2 <= 0:
        raise ValueError("gamma2 must be positive on both oscillators")
    g = p.coupling
    g1 = a.gamma1
    g2a, g2b = a.gamma2, b.gamma2
    K = a.kerr
    delta = p.detuning_difference
    return (
        -delta
        + K * (g1 / g2a - g1 / g2b)
        + g * math.cos(phiBA) * (math.sqrt(g2a / g2b) - math.sqrt(g2b / g2a))
        + 4.0 * g * K / math.sqrt(g2a * g2b) * math.sin(phiBA)
        - (g * g / g1) * math.sin(2.0 * phiBA)
        * (1.0 + g2a / (2.0 * g2b) + g2b / (2.0 * g2a))
    )


# ---------------------------------------------------------------------------
# fixed points

def phase_fixed_points(flow, n_grid: int = 1440) -> list[tuple[float, bool]]:
    """Zeros of a 2pi-periodic scalar flow phi -> dphi, with stability.

    Returns (phi, stable) pairs with phi in (-pi, pi], stable meaning a
    negative flow derivative.  An identically vanishing flow yields [].
    """
    phis = np.linspace(-np.pi, np.pi, n_grid + 1)
    vals = np.array([flow(ph) for ph in phis])
    scale = float(np.max(np.abs(vals)))
    if scale < 1e-14:
        return []
    out = []
    node_tol = 1e-12 * scale
    for i in range(n_grid):
        v0, v1 = vals[i], vals[i + 1]
        if abs(v0) <= node_tol:
            # zero sitting (numerically) on a grid node, e.g. exactly at +-pi
            root = phis[i]
        elif v0 * v1 < 0 and abs(v1) > node_tol:
            root = scipy.optimize.brentq(flow, phis[i], phis[i + 1],
                                         xtol=1e-14, rtol=1e-15)
        else:
            continue
        h = 1e-7
        slope = (flow(root + h) - flow(root - h)) / (2.0 * h)
        out.append((float(wrap_angle(root)), bool(slope < 0)))
    # drop duplicates produced by roots landing on grid nodes
    dedup: list[tuple[float, bool]] = []
    for phi, st in sorted(out):
        if not dedup or abs(phi - dedup[-1][0]) > 1e-9:
            dedup.append((phi, st))
    if len(dedup) > 1 and abs(wrap_angle(dedup[0][0] - dedup[-1][0])) < 1e-9:
        dedup.pop()
    return dedup


def single_fixed_point(p: OscillatorParams,
                       guess: tuple[float, float]) -> tuple[float, float]:
    """Locked (r, phi) of the driven single-oscillator flow near a guess."""

    def fun(y):
        if y[0] <= 0:
            # steer the solver away from the invalid half-line
            return np.array([1e6, 1e6])
        return np.asarray(rhs_single(y[0], y[1], p))

    sol = scipy.optimize.root(fun, np.asarray(guess, dtype=float), tol=1e-13)
    res = np.max(np.abs(fun(sol.x)))
    if not sol.success or res > 1e-9:
        raise NonConvergenceError(
            f"no fixed point near guess {guess}: residual {res:.2e}"
        )
    return (float(sol.x[0]), float(wrap_angle(sol.x[1])))


@dataclass(frozen=True)
class CoupledFixedPoint:
    r_a: float
    r_b: float
    phi_ba: float
    stable: bool
    eigenvalues: tuple[complex, ...]


def coupled_fixed_point(p: CoupledParams,
                        guess: tuple[float, float, float]) -> CoupledFixedPoint:
    """Fixed point of the reduced (r_A, r_B, phi_BA) flow near a guess.

    The reduction is exact for undriven oscillators: the absolute phase
    decouples, leaving a three-dimensional autonomous system.
    """
    _require_autonomous(p)
    g = p.coupling

    def fun(y):
        rA, rB, phi = y
        if rA <= 0 or rB <= 0:
            return np.array([1e6, 1e6, 1e6])
        drA = _radial_flow(rA, p.osc_a) + g * rB * math.sin(phi)
        drB = _radial_flow(rB, p.osc_b) - g * rA * math.sin(phi)
        dphi = relative_phase_rhs(phi, rA, rB, p)
        return np.array([drA, drB, dphi])

    sol = scipy.optimize.root(fun, np.asarray(guess, dtype=float), tol=1e-13)
    res = np.max(np.abs(fun(sol.x)))
    if not sol.success or res > 1e-10:
        raise NonConvergenceError(
            f"no coupled fixed point near guess {guess}: residual {res:.2e}"
        )
    y = sol.x
    jac = np.zeros((3, 3))
    for j in range(3):
        h = 1e-7 * max(1.0, abs(y[j]))
        yp, ym = y.copy(), y.copy()
        yp[j] += h
        ym[j] -= h
        jac[:, j] = (fun(yp) - fun(ym)) / (2.0 * h)
    eig = np.linalg.eigvals(jac)
    return CoupledFixedPoint(
        float(y[0]), float(y[1]), float(wrap_angle(y[2])),
        bool(np.all(eig.real < 0)), tuple(eig),
    )
