"""Small shared helpers."""

from __future__ import annotations

import numpy as np


def wrap_angle(x):
    """Reduce an angle (or array of angles) to the interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def angles_close(a: float, b: float, tol: float) -> bool:
    """Compare two angles modulo 2 pi."""
    return abs(float(wrap_angle(a - b))) <= tol
