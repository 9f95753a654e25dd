"""Parameter containers for single and coupled oscillators.

Rates are quoted in units of the first-order gain of oscillator A, so a
typical single-oscillator setup has ``gamma1=1.0``.  The model is an
anharmonic oscillator with linear (``gamma1``) and cubic (``gamma3``)
incoherent gain competing with quadratic (``gamma2``) and quartic
(``gamma4``) incoherent loss, optionally driven (``drive``) and detuned
(``delta``) in the frame of the drive, with Kerr coefficient ``kerr``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import ConfigError

__all__ = ["OscillatorParams", "CoupledParams"]


@dataclass(frozen=True)
class OscillatorParams:
    """Single-oscillator parameters.

    delta:  detuning of the oscillator from the drive/rotating frame.
    kerr:   Kerr (anharmonicity) coefficient.
    drive:  complex drive amplitude; 0 for an autonomous oscillator.
    gamma1: one-photon gain rate.
    gamma2: two-photon loss rate.
    gamma3: three-photon gain rate.
    gamma4: four-photon loss rate.
    """

    delta: float = 0.0
    kerr: float = 0.0
    drive: complex = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    gamma3: float = 0.0
    gamma4: float = 0.0

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "gamma4"):
            rate = getattr(self, name)
            if rate < 0:
                raise ConfigError(f"{name} must be non-negative, got {rate}")
        if self.gamma1 == self.gamma2 == self.gamma3 == self.gamma4 == 0:
            raise ConfigError("at least one dissipative rate must be positive")

    @classmethod
    def from_gamma(cls, gamma, delta=0.0, kerr=0.0, drive=0.0) -> "OscillatorParams":
        g1, g2, g3, g4 = gamma
        return cls(delta=delta, kerr=kerr, drive=drive,
                   gamma1=g1, gamma2=g2, gamma3=g3, gamma4=g4)

    @property
    def gamma(self) -> tuple[float, float, float, float]:
        return (self.gamma1, self.gamma2, self.gamma3, self.gamma4)

    @property
    def has_two_cycles(self) -> bool:
        """True when the classical radial flow supports two stable rings.

        Requires all four rates nonzero and three distinct positive roots of
        the radial cubic (in r^2); evaluated through the mean-field module.
        """
        from . import meanfield

        if min(self.gamma) <= 0:
            return False
        return not meanfield.radii(self).degenerate


@dataclass(frozen=True)
class CoupledParams:
    """Two oscillators A and B with excitation-exchange coupling."""

    osc_a: OscillatorParams
    osc_b: OscillatorParams = None  # type: ignore[assignment]
    coupling: float = 0.0

    def __post_init__(self):
        if self.osc_b is None:
            object.__setattr__(self, "osc_b", self.osc_a)
        if not isinstance(self.osc_a, OscillatorParams) or not isinstance(
            self.osc_b, OscillatorParams
        ):
            raise ConfigError("osc_a and osc_b must be OscillatorParams")

    @property
    def detuning_difference(self) -> float:
        """Detuning of B relative to A."""
        return self.osc_b.delta - self.osc_a.delta

    @property
    def identical(self) -> bool:
        return self.osc_a == self.osc_b


def param_names() -> tuple[str, ...]:
    """Names of the scalar fields on OscillatorParams, for sweep axes."""
    return tuple(f.name for f in fields(OscillatorParams))
