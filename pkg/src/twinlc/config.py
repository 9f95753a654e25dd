"""Config documents for the command-line front end.

A run is described by one YAML (or JSON) document with the sections
``oscillator_a``, ``oscillator_b``, ``coupling``, ``solver``, ``sweep`` and
``output``.  All rates are in units of the first oscillator's linear gain.
Unknown keys are rejected and missing required keys are reported, both with
their full dotted path, so a typo never silently falls back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .params import CoupledParams, OscillatorParams

__all__ = ["RunConfig", "load_config", "SCHEMA"]

_OSC_KEYS = {
    "delta": float,
    "kerr": float,
    "drive": float,
    "drive_im": float,
    "gamma1": float,
    "gamma2": float,
    "gamma3": float,
    "gamma4": float,
}

_AXIS_KEYS = {
    "name": str,
    "lo": float,
    "hi": float,
    "n": int,
    "grid": list,
}

SCHEMA = {
    "oscillator_a": _OSC_KEYS,
    "oscillator_b": _OSC_KEYS,
    "coupling": {"g": float},
    "solver": {
        "cutoff": int,
        "cutoff_b": int,
        "sector_boundary": int,
        "tol": float,
        "dt": float,
        "t_final": float,
        "sample_interval": float,
        "n_traj": int,
        "d_tau": float,
        "tau_max": float,
        "omega_max": float,
        "n_omega": int,
        "threads": int,
        "wigner_extent": float,
        "wigner_points": int,
    },
    "sweep": {
        "axis1": _AXIS_KEYS,
        "axis2": _AXIS_KEYS,
        "measures": list,
        "warm_start": bool,
        "check_convergence": bool,
    },
    "output": {"stem": str},
}


def _check_keys(doc: dict, schema: dict, path: str = "") -> None:
    for key, val in doc.items():
        full = f"{path}{key}"
        if key not in schema:
            raise ConfigError(f"unknown config key: {full}")
        want = schema[key]
        if isinstance(want, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"config key {full} must be a section/mapping")
            _check_keys(val, want, full + ".")
        elif want is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"config key {full} must be a number")
        elif want is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise ConfigError(f"config key {full} must be an integer")
        elif want is bool:
            if not isinstance(val, bool):
                raise ConfigError(f"config key {full} must be true/false")
        elif want is list:
            if not isinstance(val, list):
                raise ConfigError(f"config key {full} must be a list")
        elif want is str:
            if not isinstance(val, str):
                raise ConfigError(f"config key {full} must be a string")


@dataclass(frozen=True)
class RunConfig:
    """Validated config document plus typed accessors."""

    doc: dict
    source: str

    def require(self, *paths: str) -> None:
        """Raise naming the first missing dotted key path."""
        for path in paths:
            node = self.doc
            for part in path.split("."):
                if not isinstance(node, dict) or part not in node:
                    raise ConfigError(f"missing required config key: {path}")
                node = node[part]

    def get(self, path: str, default=None):
        node = self.doc
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                return default
            node = node[part]
        return node

    # -- parameter records -------------------------------------------------
    def _oscillator(self, section: str) -> OscillatorParams:
        sec = self.doc.get(section, {})
        drive = complex(sec.get("drive", 0.0), sec.get("drive_im", 0.0))
        return OscillatorParams(
            delta=float(sec.get("delta", 0.0)),
            kerr=float(sec.get("kerr", 0.0)),
            drive=drive,
            gamma1=float(sec.get("gamma1", 0.0)),
            gamma2=float(sec.get("gamma2", 0.0)),
            gamma3=float(sec.get("gamma3", 0.0)),
            gamma4=float(sec.get("gamma4", 0.0)),
        )

    def single_params(self) -> OscillatorParams:
        self.require("oscillator_a")
        return self._oscillator("oscillator_a")

    def coupled_params(self) -> CoupledParams:
        self.require("oscillator_a", "coupling.g")
        osc_a = self._oscillator("oscillator_a")
        osc_b = (
            self._oscillator("oscillator_b")
            if "oscillator_b" in self.doc
            else None
        )
        return CoupledParams(
            osc_a=osc_a, osc_b=osc_b, coupling=float(self.doc["coupling"]["g"])
        )

    # -- sweep -------------------------------------------------------------
    def axis(self, which: str) -> tuple[str, tuple[float, ...]] | None:
        sec = self.get(f"sweep.{which}")
        if sec is None:
            return None
        if "name" not in sec:
            raise ConfigError(f"missing required config key: sweep.{which}.name")
        if "grid" in sec:
            grid = tuple(float(v) for v in sec["grid"])
        else:
            for k in ("lo", "hi", "n"):
                if k not in sec:
                    raise ConfigError(
                        f"missing required config key: sweep.{which}.{k}"
                    )
            grid = tuple(np.linspace(sec["lo"], sec["hi"], int(sec["n"])))
        return (str(sec["name"]), grid)


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a YAML or JSON config document."""
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text()
    if p.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {p}: {exc}") from exc
    else:
        try:
            doc = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"invalid YAML in {p}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"config root must be a mapping, got {type(doc).__name__}")
    _check_keys(doc, SCHEMA)
    return RunConfig(doc=doc, source=str(p))
