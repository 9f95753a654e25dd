"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid or incomplete configuration (bad parameter values, unknown
    keys, missing required entries)."""


class NonConvergenceError(RuntimeError):
    """A solver failed to reach a converged answer: singular or ill-posed
    steady-state problem, population piling up at the Fock cutoff, or an
    iterative fallback that ran out of time."""


class StiffnessError(RuntimeError):
    """Time integration failed because the step size collapsed; typically the
    problem is too stiff for the explicit integrator at this cutoff."""


class EmptySectorError(ValueError):
    """A Fock-sector operator was requested for a sector that contains no
    levels at the current cutoff/boundary combination."""
