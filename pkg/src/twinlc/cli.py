"""Command-line front end.

Subcommands map one-to-one onto the physics operations; every run reads one
config document and optionally writes CSV tables plus a JSON sidecar with
the resolved parameters.  Exit codes: 0 success, 2 config problem (message
carries the offending key path), 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .errors import ConfigError, NonConvergenceError, StiffnessError
from .evolve import power_spectrum, sector_spectrum, steady_state
from .fock import (
    FockSpace,
    annihilation,
    number,
    weighted_truncated_annihilation,
)
from .liouvillian import build_coupled, build_single
from .meanfield import default_sector_boundary, potential, radii
from .measures import (
    DEFAULT_M,
    mutual_information,
    p1,
    p1_sector,
    p2,
    p2_sector,
    sync_strength,
    wigner,
)
from .params import OscillatorParams
from .states import coherent_ket, expect
from .sweep import SweepSpec, blockade_scan, run_sweep
from .trajectories import residence_stats, run_ensemble, safe_dt

__all__ = ["main"]


# ---------------------------------------------------------------------------
# output plumbing

def _fmt(value) -> str:
    """Canonical cell text: shortest round-trip float repr, radians only."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return str(int(value))
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return ""
    return str(value)


def _csv_bytes(header, rows) -> bytes:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue().encode("utf-8")


class OutputSet:
    """Collects CSV tables and writes them with one JSON sidecar."""

    def __init__(self, command: str, out_dir: str | None, stem: str,
                 meta: dict):
        self.command = command
        self.dir = Path(out_dir) if out_dir else None
        self.stem = stem
        self.meta = meta
        self.files: dict[str, dict] = {}
        self.t0 = time.time()

    def add_table(self, suffix: str, header, rows) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        name = f"{self.stem}_{suffix}.csv" if suffix else f"{self.stem}.csv"
        data = _csv_bytes(header, rows)
        (self.dir / name).write_bytes(data)
        self.files[name] = {
            "rows": len(rows),
            "columns": list(header),
            "sha256": hashlib.sha256(data).hexdigest(),
        }

    def finish(self) -> None:
        if self.dir is None:
            return
        sidecar = {
            "command": self.command,
            "version": __version__,
            "files": self.files,
            "wall_time_s": round(time.time() - self.t0, 3),
            **self.meta,
        }
        text = json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
        (self.dir / f"{self.stem}.json").write_text(text)


# ---------------------------------------------------------------------------
# shared helpers

def _solver(cfg: RunConfig, args) -> dict:
    s = dict(cfg.doc.get("solver", {}))
    if args.cutoff is not None:
        s["cutoff"] = args.cutoff
    if args.threads is not None:
        s["threads"] = args.threads
    return s


def _space_single(cfg: RunConfig, args, p: OscillatorParams,
                  need_sectors: bool) -> FockSpace:
    s = _solver(cfg, args)
    if "cutoff" not in s:
        raise ConfigError("missing required config key: solver.cutoff")
    boundary = s.get("sector_boundary")
    if boundary is None and need_sectors:
        boundary = default_sector_boundary(p)
    return FockSpace(cutoff=int(s["cutoff"]), sector_boundary=boundary)


def _spaces_coupled(cfg: RunConfig, args, cp, need_sectors: bool):
    s = _solver(cfg, args)
    if "cutoff" not in s:
        raise ConfigError("missing required config key: solver.cutoff")
    na = int(s["cutoff"])
    nb = int(s.get("cutoff_b", na))
    ba = bb = s.get("sector_boundary")
    if ba is None and need_sectors:
        ba = default_sector_boundary(cp.osc_a)
        bb = default_sector_boundary(cp.osc_b)
    return (
        FockSpace(cutoff=na, sector_boundary=ba),
        FockSpace(cutoff=nb, sector_boundary=bb),
    )


def _steady_single(cfg: RunConfig, args, need_sectors: bool = False):
    p = cfg.single_params()
    space = _space_single(cfg, args, p, need_sectors)
    tol = float(_solver(cfg, args).get("tol", 1e-10))
    rho = steady_state(build_single(p, space), tol=tol)
    if rho is None:
        raise NonConvergenceError("steady-state solve did not converge")
    return p, space, rho


def _steady_coupled(cfg: RunConfig, args, need_sectors: bool = False):
    cp = cfg.coupled_params()
    sp_a, sp_b = _spaces_coupled(cfg, args, cp, need_sectors)
    tol = float(_solver(cfg, args).get("tol", 1e-10))
    rho = steady_state(build_coupled(cp, sp_a, sp_b), tol=tol)
    if rho is None:
        raise NonConvergenceError("steady-state solve did not converge")
    return cp, sp_a, sp_b, rho


def _grid_points(args) -> int:
    return args.grid if args.grid is not None else DEFAULT_M


def _print_dist(label: str, dist) -> None:
    smax, argmax, n_max = sync_strength(dist)
    print(f"{label}: max={_fmt(smax)} argmax={_fmt(argmax)} n_maxima={n_max}")


def _dist_rows(dist):
    return list(zip(dist.phases.tolist(), dist.values.tolist()))


# ---------------------------------------------------------------------------
# subcommands

def _cmd_meanfield(cfg: RunConfig, args, out: OutputSet) -> int:
    p = cfg.single_params()
    rr = radii(p)
    if rr.degenerate:
        roots = " ".join(_fmt(r) for r in rr.roots)
        print(f"degenerate: stable radii {roots}")
    else:
        print(f"r1={rr.r1:.3f} r_c={rr.rc:.3f} r2={rr.r2:.3f}")
        pot = potential(p)
        print(
            f"dV1={_fmt(pot.barrier_inner)} dV2={_fmt(pot.barrier_outer)}"
        )
    pot = potential(p)
    top = (1.25 * rr.r2) if not rr.degenerate else (
        2.0 * max(rr.roots) if rr.roots else 2.0
    )
    grid = np.linspace(0.0, top, 400)
    out.add_table("potential", ("r", "V"),
                  [(float(r), float(pot(r))) for r in grid])
    out.finish()
    return 0


def _cmd_steady(cfg: RunConfig, args, out: OutputSet) -> int:
    p, space, rho = _steady_single(cfg, args)
    n_op = number(space)
    mean_n = expect(n_op, rho).real
    purity = float(np.real(np.trace(rho.mat @ rho.mat)))
    print(f"mean_n={_fmt(mean_n)} purity={_fmt(purity)}")
    pops = np.real(np.diagonal(rho.mat))
    out.add_table("populations", ("n", "population"),
                  list(enumerate(pops.tolist())))
    out.finish()
    return 0


def _cmd_wigner(cfg: RunConfig, args, out: OutputSet) -> int:
    p, space, rho = _steady_single(cfg, args)
    s = _solver(cfg, args)
    extent = s.get("wigner_extent")
    if extent is None:
        rr = radii(p)
        top = rr.r2 if not rr.degenerate else max(rr.roots, default=1.0)
        extent = 2.0 * top + 1.0
    n_pts = int(s.get("wigner_points", 141))
    axis = np.linspace(-float(extent), float(extent), n_pts)
    field = wigner(rho, axis)
    print(f"integral={_fmt(field.integral())} "
          f"w_max={_fmt(float(field.values.max()))}")
    rows = [
        (float(x), float(pp), float(field.values[i, j]))
        for i, x in enumerate(field.x)
        for j, pp in enumerate(field.p)
    ]
    out.add_table("", ("x", "p", "w"), rows)
    out.finish()
    return 0


def _cmd_phase(cfg: RunConfig, args, out: OutputSet) -> int:
    p, space, rho = _steady_single(cfg, args, need_sectors=True)
    M = _grid_points(args)
    dist = p1(rho, M)
    _print_dist("p1", dist)
    out.add_table("p1", ("phase_rad", "value"), _dist_rows(dist))
    if space.sector_boundary is not None:
        for sector in ("in", "out"):
            d = p1_sector(rho, sector, space, M)
            _print_dist(f"p1_{sector}", d)
            out.add_table(f"p1_{sector}", ("phase_rad", "value"),
                          _dist_rows(d))
    out.finish()
    return 0


def _cmd_phase2(cfg: RunConfig, args, out: OutputSet) -> int:
    cp, sp_a, sp_b, rho = _steady_coupled(cfg, args, need_sectors=True)
    M = _grid_points(args)
    dist = p2(rho, M)
    _print_dist("p2", dist)
    out.add_table("p2", ("phase_rad", "value"), _dist_rows(dist))
    for alpha, beta in (("in", "in"), ("in", "out"), ("out", "in"),
                        ("out", "out")):
        d = p2_sector(rho, alpha, beta, sp_a, sp_b, M)
        _print_dist(f"p2_{alpha}_{beta}", d)
        out.add_table(f"p2_{alpha}_{beta}", ("phase_rad", "value"),
                      _dist_rows(d))
    out.finish()
    return 0


def _cmd_spectrum(cfg: RunConfig, args, out: OutputSet) -> int:
    p, space, rho = _steady_single(cfg, args, need_sectors=True)
    s = _solver(cfg, args)
    lv = build_single(p, space)
    gamma1 = p.gamma1 if p.gamma1 > 0 else 1.0
    d_tau = float(s.get("d_tau", 0.02 / gamma1))
    tau_max = s.get("tau_max")
    omega_max = float(s.get("omega_max", 10.0 * gamma1))
    n_omega = int(s.get("n_omega", 801))
    omegas = np.linspace(-omega_max, omega_max, n_omega)
    ops = [("full", annihilation(space))]
    if space.sector_boundary is not None:
        ops += [
            ("in", weighted_truncated_annihilation(space, "in")),
            ("out", weighted_truncated_annihilation(space, "out")),
        ]
    for label, op in ops:
        spec_res = sector_spectrum(
            lv, rho, op, omegas, d_tau=d_tau,
            tau_max=float(tau_max) if tau_max is not None else None,
        )
        peak = omegas[int(np.argmax(spec_res.values))]
        print(f"S_{label}: peak_omega={_fmt(float(peak))} "
              f"peak_value={_fmt(float(spec_res.values.max()))}")
        out.add_table(f"s_{label}", ("omega", "value"),
                      list(zip(omegas.tolist(), spec_res.values.tolist())))
    out.finish()
    return 0


def _cmd_traject(cfg: RunConfig, args, out: OutputSet) -> int:
    p = cfg.single_params()
    space = _space_single(cfg, args, p, need_sectors=False)
    s = _solver(cfg, args)
    dt = float(s["dt"]) if "dt" in s else safe_dt(p, space)
    t_final = float(s.get("t_final", 100.0))
    n_traj = int(s.get("n_traj", 1))
    sample = float(s.get("sample_interval", 0.5))
    workers = int(s.get("threads", 1))
    rr = radii(p)
    psi0 = coherent_ket(space, rr.r2 if not rr.degenerate else 1.0)
    records = run_ensemble(p, space, psi0, dt, t_final, n_traj,
                           master_seed=args.seed, workers=workers,
                           sample_interval=sample, record_jumps=False)
    rows = []
    for i, rec in enumerate(records):
        rows += [
            (i, float(t), float(r), float(c), float(n))
            for t, r, c, n in zip(rec.times, rec.amplitude, rec.coherence,
                                  rec.occupation)
        ]
    out.add_table("", ("trajectory", "time", "radius", "coherence",
                       "occupation"), rows)
    if not rr.degenerate:
        stats = [residence_stats(rec, rr.rc) for rec in records]
        f_in = float(np.mean([st.fraction_inner for st in stats]))
        f_out = float(np.mean([st.fraction_outer for st in stats]))
        crossings = int(sum(st.crossings for st in stats))
        print(f"fraction_inner={_fmt(f_in)} fraction_outer={_fmt(f_out)} "
              f"crossings={crossings}")
    print(f"n_traj={n_traj} dt={_fmt(dt)} "
          f"max_step_prob={_fmt(max(r.max_step_prob for r in records))}")
    out.finish()
    return 0


def _cmd_mutinfo(cfg: RunConfig, args, out: OutputSet) -> int:
    cp, sp_a, sp_b, rho = _steady_coupled(cfg, args, need_sectors=True)
    rows = [("mutual_info", mutual_information(rho))]
    for alpha, beta in (("in", "in"), ("in", "out"), ("out", "in"),
                        ("out", "out")):
        rows.append((
            f"mutual_info_{alpha}_{beta}",
            mutual_information(rho, (alpha, beta), sp_a, sp_b),
        ))
    for name, val in rows:
        print(f"{name}={_fmt(float(val))}")
    out.add_table("", ("measure", "value"),
                  [(n, float(v)) for n, v in rows])
    out.finish()
    return 0


def _sweep_spec(cfg: RunConfig, args) -> SweepSpec:
    cfg.require("sweep.axis1", "sweep.measures")
    s = _solver(cfg, args)
    if "cutoff" not in s:
        raise ConfigError("missing required config key: solver.cutoff")
    measures = tuple(cfg.get("sweep.measures"))
    coupled_needed = (
        "coupling" in cfg.doc
        or any(m.startswith(("p2", "mutual_info")) or m.endswith(("_a", "_b"))
               for m in measures)
    )
    fixed = cfg.coupled_params() if coupled_needed else cfg.single_params()
    cutoff = int(s["cutoff"])
    cutoffs = (
        (cutoff, int(s.get("cutoff_b", cutoff)))
        if coupled_needed
        else cutoff
    )
    return SweepSpec(
        axis1=cfg.axis("axis1"),
        axis2=cfg.axis("axis2"),
        fixed=fixed,
        measures=measures,
        cutoffs=cutoffs,
        boundary=s.get("sector_boundary"),
        grid_points=_grid_points(args),
        tol=float(s.get("tol", 1e-10)),
        warm_start=bool(cfg.get("sweep.warm_start", False)),
        workers=int(s.get("threads", 1)),
        check_convergence=bool(cfg.get("sweep.check_convergence", False)),
    )


def _emit_sweep(result, out: OutputSet) -> int:
    out.meta["provenance"] = _jsonable(result.provenance)
    out.add_table("", result.COLUMNS, result.table())
    n_fail = sum(1 for r in result.rows if not r.ok)
    print(f"rows={len(result.rows)} failed={n_fail} "
          f"fingerprint={result.provenance['spec_fingerprint']}")
    out.finish()
    return 0


def _cmd_sweep(cfg: RunConfig, args, out: OutputSet) -> int:
    return _emit_sweep(run_sweep(_sweep_spec(cfg, args)), out)


def _cmd_blockade(cfg: RunConfig, args, out: OutputSet) -> int:
    return _emit_sweep(blockade_scan(_sweep_spec(cfg, args)), out)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# validate

def _validate_pair(sidecar_path: Path) -> list[str]:
    problems = []
    try:
        meta = json.loads(sidecar_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return [f"{sidecar_path}: unreadable sidecar ({exc})"]
    for name, info in meta.get("files", {}).items():
        fpath = sidecar_path.parent / name
        if not fpath.exists():
            problems.append(f"{fpath}: listed in sidecar but missing")
            continue
        data = fpath.read_bytes()
        digest = hashlib.sha256(data).hexdigest()
        if digest != info.get("sha256"):
            problems.append(f"{fpath}: checksum mismatch")
            continue
        reader = csv.reader(io.StringIO(data.decode("utf-8")))
        rows = list(reader)
        if not rows:
            problems.append(f"{fpath}: empty file")
            continue
        header, body = rows[0], rows[1:]
        if header != info.get("columns"):
            problems.append(f"{fpath}: header mismatch")
        if len(body) != info.get("rows"):
            problems.append(
                f"{fpath}: row count {len(body)} != recorded {info.get('rows')}"
            )
        rebuilt = _csv_bytes(header, body)
        if rebuilt != data:
            problems.append(f"{fpath}: not canonical (round-trip differs)")
    return problems


def _cmd_validate(args) -> int:
    targets: list[Path] = []
    for raw in args.paths:
        path = Path(raw)
        if path.is_dir():
            targets += sorted(path.glob("*.json"))
        else:
            targets.append(path)
    if not targets:
        print("validate: no sidecar files found", file=sys.stderr)
        return 2
    problems = []
    for sidecar in targets:
        problems += _validate_pair(sidecar)
    if problems:
        for line in problems:
            print(line, file=sys.stderr)
        return 2
    print(f"validated {len(targets)} output set(s): ok")
    return 0


# ---------------------------------------------------------------------------
# entry point

_COMMANDS = {
    "meanfield": _cmd_meanfield,
    "steady": _cmd_steady,
    "wigner": _cmd_wigner,
    "phase": _cmd_phase,
    "phase2": _cmd_phase2,
    "spectrum": _cmd_spectrum,
    "traject": _cmd_traject,
    "mutinfo": _cmd_mutinfo,
    "sweep": _cmd_sweep,
    "blockade": _cmd_blockade,
}


def _build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", help="YAML or JSON run description")
    shared.add_argument("--out", help="output directory for CSV + sidecar")
    shared.add_argument("--seed", type=int, default=0,
                        help="master seed for stochastic subcommands")
    shared.add_argument("--threads", type=int, default=None,
                        help="worker count override")
    shared.add_argument("--cutoff", type=int, default=None,
                        help="Fock cutoff override")
    shared.add_argument("--grid", type=int, default=None,
                        help="phase-grid points override")
    parser = argparse.ArgumentParser(
        prog="twinlc",
        description="Twin-limit-cycle oscillator simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sub.add_parser(name, parents=[shared])
    val = sub.add_parser("validate")
    val.add_argument("paths", nargs="+",
                     help="sidecar JSON files or output directories")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "validate":
        return _cmd_validate(args)
    try:
        if not args.config:
            raise ConfigError("missing required flag: --config")
        cfg = load_config(args.config)
        stem = cfg.get("output.stem", args.command)
        meta = {
            "config": cfg.doc,
            "config_path": cfg.source,
            "seed": args.seed,
        }
        out = OutputSet(args.command, args.out, stem, meta)
        return _COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NonConvergenceError, StiffnessError, FloatingPointError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
