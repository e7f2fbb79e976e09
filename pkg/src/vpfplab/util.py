"""Small numeric helpers shared across modules."""

from __future__ import annotations

import numpy as np

__all__ = ["bernoulli", "xlogx", "fmt"]


def bernoulli(s):
    """B(s) = s / (exp(s) - 1), the exponential-fitting weight.

    Evaluated with expm1 away from zero and a Taylor branch below 1e-6
    (next term is s**3/720, far below double rounding).  Accepts scalars
    or arrays.
    """
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 1e-6
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        direct = s / np.expm1(s)
    series = 1.0 - 0.5 * s + s * s / 12.0
    out = np.where(small, series, direct)
    if out.ndim == 0:
        return float(out)
    return out


def xlogx(a: np.ndarray) -> np.ndarray:
    """s*log(s) extended by 0 at s = 0."""
    a = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(a > 0.0, a * np.log(np.where(a > 0.0, a, 1.0)), 0.0)
    return out


def fmt(x: float) -> str:
    """Fixed float formatting for deterministic CSV output."""
    return format(float(x), ".17g")
