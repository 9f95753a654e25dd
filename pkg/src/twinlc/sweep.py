"""Parameter sweeps: steady-state diagnostics tabulated over 1D/2D grids.

A sweep point builds the generator, solves for its steady state, and
evaluates the requested measures; per-point failures are recorded in the
row and never abort the grid.  Rows come out in deterministic axis order
(axis2 fastest) regardless of how the points were scheduled, so a fixed
spec always produces an identical table.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .errors import ConfigError
from .fock import FockSpace
from .liouvillian import build_coupled, build_single
from .meanfield import default_sector_boundary, radii
from .measures import (
    DEFAULT_M,
    mutual_information,
    p1,
    p1_sector,
    p2,
    p2_sector,
    sync_strength,
)
from .params import CoupledParams, OscillatorParams
from .states import DensityMatrix, expect
from .evolve import steady_state
from . import fock

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepResult",
    "run_sweep",
    "blockade_scan",
    "bistable_window",
    "MEASURE_NAMES",
]

_SCALAR_SENTINEL = -1  # n_maxima column for scalar (non-distribution) measures

_P1_MEASURES = ("p1", "p1_in", "p1_out")
_P2_MEASURES = ("p2", "p2_in_in", "p2_in_out", "p2_out_in", "p2_out_out")
_MI_MEASURES = (
    "mutual_info",
    "mutual_info_in_in",
    "mutual_info_in_out",
    "mutual_info_out_in",
    "mutual_info_out_out",
)
_SCALAR_MEASURES = ("mean_n", "mean_n_a", "mean_n_b")
MEASURE_NAMES = _P1_MEASURES + _P2_MEASURES + _MI_MEASURES + _SCALAR_MEASURES

_RATIO_AXES = {f"ratio_gamma{j}": f"gamma{j}" for j in (1, 2, 3, 4)}


@dataclass(frozen=True)
class SweepSpec:
    """Declarative sweep description.

    axis names resolve against the fixed parameter record:
      - single oscillator: delta, kerr, drive, gamma1..gamma4
      - coupled: the same with _a/_b suffixes, bare names applied to both
        oscillators, coupling (alias g), and ratio_gammaJ which sets
        gammaJ_a = value * gammaJ_b.
    """

    axis1: tuple[str, tuple[float, ...]]
    fixed: CoupledParams | OscillatorParams
    measures: tuple[str, ...]
    cutoffs: int | tuple[int, int]
    axis2: tuple[str, tuple[float, ...]] | None = None
    boundary: int | tuple[int, int] | None = None
    grid_points: int = DEFAULT_M
    tol: float = 1e-10
    warm_start: bool = False
    workers: int = 1
    check_convergence: bool = False

    def __post_init__(self):
        object.__setattr__(
            self, "axis1", (self.axis1[0], tuple(float(v) for v in self.axis1[1]))
        )
        if self.axis2 is not None:
            object.__setattr__(
                self,
                "axis2",
                (self.axis2[0], tuple(float(v) for v in self.axis2[1])),
            )
        object.__setattr__(self, "measures", tuple(self.measures))
        for name, grid in self._axes():
            arr = np.asarray(grid)
            if arr.size == 0:
                raise ConfigError(f"axis {name!r} has an empty grid")
            if arr.size > 1 and not (
                np.all(np.diff(arr) > 0) or np.all(np.diff(arr) < 0)
            ):
                raise ConfigError(f"axis {name!r} grid must be strictly monotone")
            _check_axis_name(name, self.fixed)
        for m in self.measures:
            if m not in MEASURE_NAMES:
                raise ConfigError(
                    f"unknown measure {m!r}; known: {', '.join(MEASURE_NAMES)}"
                )
            if isinstance(self.fixed, OscillatorParams) and m not in (
                _P1_MEASURES + ("mean_n",)
            ):
                raise ConfigError(
                    f"measure {m!r} needs a coupled parameter record"
                )
            if isinstance(self.fixed, CoupledParams) and m in (
                _P1_MEASURES + ("mean_n",)
            ):
                raise ConfigError(
                    f"measure {m!r} is single-oscillator; "
                    "use the _a/_b coupled variants"
                )

    def _axes(self):
        yield self.axis1
        if self.axis2 is not None:
            yield self.axis2

    def fingerprint(self) -> str:
        blob = json.dumps(_canonical(self), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _canonical(obj):
    if isinstance(obj, SweepSpec):
        return {k: _canonical(v) for k, v in vars(obj).items()}
    if isinstance(obj, (OscillatorParams, CoupledParams)):
        return {k: _canonical(v) for k, v in vars(obj).items()}
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (tuple, list)):
        return [_canonical(v) for v in obj]
    return obj


@dataclass(frozen=True)
class SweepRow:
    axis1: float
    axis2: float
    measure: str
    value: float
    argmax: float
    n_maxima: int
    ok: bool
    converged: bool | None
    error: str


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    provenance: dict

    COLUMNS = (
        "axis1", "axis2", "measure", "value", "argmax",
        "n_maxima", "ok", "converged", "error",
    )

    def table(self) -> list[tuple]:
        return [
            tuple(getattr(r, c) for c in self.COLUMNS) for r in self.rows
        ]

    def column(self, measure: str, field: str = "value") -> np.ndarray:
        return np.array(
            [getattr(r, field) for r in self.rows if r.measure == measure]
        )


def _check_axis_name(name: str, fixed) -> None:
    single_fields = ("delta", "kerr", "drive", "gamma1", "gamma2", "gamma3",
                     "gamma4")
    if isinstance(fixed, OscillatorParams):
        if name not in single_fields:
            raise ConfigError(
                f"axis {name!r} not a single-oscillator parameter; "
                f"expected one of {single_fields}"
            )
        return
    if name in ("coupling", "g") or name in single_fields or name in _RATIO_AXES:
        return
    base, _, suffix = name.rpartition("_")
    if suffix in ("a", "b") and base in single_fields:
        return
    raise ConfigError(f"axis {name!r} not resolvable against coupled parameters")


def _apply_axis(params, name: str, value: float):
    if isinstance(params, OscillatorParams):
        return replace(params, **{name: value})
    if name in ("coupling", "g"):
        return replace(params, coupling=value)
    if name in _RATIO_AXES:
        field = _RATIO_AXES[name]
        ref = getattr(params.osc_b, field)
        return replace(params, osc_a=replace(params.osc_a, **{field: value * ref}))
    base, _, suffix = name.rpartition("_")
    if suffix == "a" and base:
        return replace(params, osc_a=replace(params.osc_a, **{base: value}))
    if suffix == "b" and base:
        return replace(params, osc_b=replace(params.osc_b, **{base: value}))
    return replace(
        params,
        osc_a=replace(params.osc_a, **{name: value}),
        osc_b=replace(params.osc_b, **{name: value}),
    )


def _default_boundaries(spec: SweepSpec):
    """Sector boundaries fixed once from the base parameter record."""
    needs_sector = any(
        m.endswith(("_in", "_out")) or "_in_" in m or "_out_" in m
        for m in spec.measures
    )
    if isinstance(spec.fixed, OscillatorParams):
        if spec.boundary is not None:
            return int(spec.boundary)
        if not needs_sector:
            return None
        return default_sector_boundary(spec.fixed)
    if spec.boundary is not None:
        b = spec.boundary
        return (int(b), int(b)) if np.isscalar(b) else (int(b[0]), int(b[1]))
    if not needs_sector:
        return (None, None)
    return (
        default_sector_boundary(spec.fixed.osc_a),
        default_sector_boundary(spec.fixed.osc_b),
    )


def _spaces(spec: SweepSpec, boundaries, scale: int = 1):
    if isinstance(spec.fixed, OscillatorParams):
        n = int(spec.cutoffs) * scale
        return FockSpace(cutoff=n, sector_boundary=boundaries)
    c = spec.cutoffs
    na, nb = (int(c), int(c)) if np.isscalar(c) else (int(c[0]), int(c[1]))
    ba, bb = boundaries
    return (
        FockSpace(cutoff=na * scale, sector_boundary=ba),
        FockSpace(cutoff=nb * scale, sector_boundary=bb),
    )


def _solve_point(params, spec: SweepSpec, spaces, x0=None):
    if isinstance(params, OscillatorParams):
        lv = build_single(params, spaces)
    else:
        lv = build_coupled(params, spaces[0], spaces[1])
    return steady_state(lv, tol=spec.tol, x0=x0)


def _eval_measure(name: str, rho: DensityMatrix, spaces, M: int):
    """(value, argmax, n_maxima) for one measure on one steady state."""
    if name in _P1_MEASURES:
        if name == "p1":
            dist = p1(rho, M)
        else:
            dist = p1_sector(rho, name.removeprefix("p1_"), spaces, M)
        return sync_strength(dist)
    if name in _P2_MEASURES:
        if name == "p2":
            dist = p2(rho, M)
        else:
            alpha, beta = name.removeprefix("p2_").split("_")
            dist = p2_sector(rho, alpha, beta, spaces[0], spaces[1], M)
        return sync_strength(dist)
    if name in _MI_MEASURES:
        if name == "mutual_info":
            val = mutual_information(rho)
        else:
            alpha, beta = name.removeprefix("mutual_info_").split("_")
            val = mutual_information(rho, (alpha, beta), spaces[0], spaces[1])
        return (val, np.nan, _SCALAR_SENTINEL)
    if name == "mean_n":
        return (expect(fock.number(spaces), rho).real, np.nan, _SCALAR_SENTINEL)
    if name in ("mean_n_a", "mean_n_b"):
        idx = 0 if name.endswith("a") else 1
        sp_i = spaces[idx]
        other = spaces[1 - idx]
        n_op = fock.number(sp_i)
        lifted = (
            fock.tensor(n_op, fock.identity(other))
            if idx == 0
            else fock.tensor(fock.identity(other), n_op)
        )
        return (expect(lifted, rho).real, np.nan, _SCALAR_SENTINEL)
    raise ConfigError(f"unknown measure {name!r}")


def _point_rows(task):
    (spec, boundaries, a1, a2) = task
    rows = []
    try:
        params = _apply_axis(spec.fixed, spec.axis1[0], a1)
        if spec.axis2 is not None:
            params = _apply_axis(params, spec.axis2[0], a2)
        spaces = _spaces(spec, boundaries)
        rho = _solve_point(params, spec, spaces)
        if rho is None:
            raise RuntimeError("steady-state solve did not converge")
        ref = None
        if spec.check_convergence:
            big = _spaces(spec, boundaries, scale=2)
            rho_big = _solve_point(params, spec, big)
            ref = (rho_big, big)
        for m in spec.measures:
            try:
                value, argmax, n_max = _eval_measure(m, rho, spaces, spec.grid_points)
                converged = None
                if ref is not None:
                    v_big, _, _ = _eval_measure(m, ref[0], ref[1], spec.grid_points)
                    converged = bool(abs(v_big - value) < 1e-4)
                rows.append(SweepRow(a1, a2, m, float(value), float(argmax),
                                     int(n_max), True, converged, ""))
            except Exception as exc:  # per-measure failure
                rows.append(SweepRow(a1, a2, m, np.nan, np.nan,
                                     _SCALAR_SENTINEL, False, None, str(exc)))
    except Exception as exc:  # per-point failure: flag every requested row
        for m in spec.measures:
            rows.append(SweepRow(a1, a2, m, np.nan, np.nan,
                                 _SCALAR_SENTINEL, False, None, str(exc)))
    return rows


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate all measures over the grid; axis2 varies fastest."""
    boundaries = _default_boundaries(spec)
    grid2 = spec.axis2[1] if spec.axis2 is not None else (np.nan,)
    tasks = [
        (spec, boundaries, a1, a2) for a1 in spec.axis1[1] for a2 in grid2
    ]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_point_rows, tasks))
    elif spec.warm_start:
        chunks = _run_warm(spec, boundaries, tasks)
    else:
        chunks = [_point_rows(t) for t in tasks]
    rows = tuple(r for chunk in chunks for r in chunk)
    provenance = {
        "spec_fingerprint": spec.fingerprint(),
        "version": __version__,
        "cutoffs": spec.cutoffs,
        "boundary": boundaries,
        "tol": spec.tol,
        "grid_points": spec.grid_points,
        "axes": [
            {"name": n, "size": len(g), "lo": g[0], "hi": g[-1]}
            for n, g in spec._axes()
        ],
        "measures": list(spec.measures),
        "warm_start": spec.warm_start,
    }
    return SweepResult(rows, provenance)


def _run_warm(spec: SweepSpec, boundaries, tasks):
    """Serial sweep reusing the previous steady state as the solver seed."""
    from .liouvillian import vec

    chunks = []
    x0 = None
    for task in tasks:
        (s, b, a1, a2) = task
        try:
            params = _apply_axis(s.fixed, s.axis1[0], a1)
            if s.axis2 is not None:
                params = _apply_axis(params, s.axis2[0], a2)
            spaces = _spaces(s, b)
            rho = _solve_point(params, s, spaces, x0=x0)
            if rho is None:
                raise RuntimeError("steady-state solve did not converge")
            x0 = vec(rho.mat)
        except Exception:
            x0 = None
        chunks.append(_point_rows(task))
    return chunks


def blockade_scan(spec: SweepSpec) -> SweepResult:
    """Ratio scan for bistable (two-maxima) relative-phase locking.

    axis1 must be one of ratio_gamma1..ratio_gamma4.  In addition to the
    requested distribution measures, a ``bistable`` row is emitted per grid
    point: 1.0 when every requested relative-phase distribution shows
    exactly two prominent maxima, else 0.0.
    """
    if spec.axis1[0] not in _RATIO_AXES or spec.axis2 is not None:
        raise ConfigError(
            "blockade_scan expects a single ratio_gammaJ axis"
        )
    dist_measures = [m for m in spec.measures if m in _P2_MEASURES]
    if not dist_measures:
        raise ConfigError(
            "blockade_scan needs at least one relative-phase measure"
        )
    base = run_sweep(spec)
    by_ratio: dict[float, list[SweepRow]] = {}
    for row in base.rows:
        by_ratio.setdefault(row.axis1, []).append(row)
    extra = []
    for ratio in spec.axis1[1]:
        group = by_ratio.get(ratio, [])
        flags = [
            r.n_maxima == 2
            for r in group
            if r.measure in dist_measures and r.ok
        ]
        ok = len(flags) == len(dist_measures)
        bistable = float(ok and all(flags))
        extra.append(SweepRow(ratio, np.nan, "bistable", bistable, np.nan,
                              _SCALAR_SENTINEL, ok, None,
                              "" if ok else "constituent measure failed"))
    prov = dict(base.provenance)
    prov["bistable_from"] = dist_measures
    return SweepResult(base.rows + tuple(extra), prov)


def bistable_window(result: SweepResult) -> tuple[float, float]:
    """(lowest, highest) ratio flagged bistable; (nan, nan) when none."""
    ratios = [
        r.axis1 for r in result.rows if r.measure == "bistable" and r.value == 1.0
    ]
    if not ratios:
        return (float("nan"), float("nan"))
    return (min(ratios), max(ratios))
