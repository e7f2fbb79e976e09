"""NumPy reference kernels for the hot phase-space loops.

The compiled module ``_impl_c`` implements the same four entry points with
identical loop order; either backend can serve every caller.  All routines
are pure (inputs are never mutated) and use fixed summation order.
"""

from __future__ import annotations

import numpy as np

BACKEND = "py"


def advect_x(f: np.ndarray, c: np.ndarray) -> np.ndarray:
    """First-order upwind in x with zero inflow at both walls.

    f: (nx, nv), c: (nv,) signed Courant numbers v*dt/(eps*dx), |c| <= 1.
    Mass leaving through a wall is simply lost here; the caller reinjects
    it through the reflection operator.
    """
    cp = np.where(c > 0.0, c, 0.0)
    cm = np.where(c < 0.0, -c, 0.0)
    out = f * (1.0 - (cp + cm))
    out[1:, :] += cp * f[:-1, :]
    out[:-1, :] += cm * f[1:, :]
    return out


def advect_v(f: np.ndarray, c: np.ndarray) -> np.ndarray:
    """First-order upwind in v, closed (zero-flux) at +-vmax.

    f: (nx, nv), c: (nx,) signed Courant numbers a*dt/dv, |c| <= 1.
    Closing both end faces conserves mass per spatial cell exactly.
    """
    cp = np.where(c > 0.0, c, 0.0)[:, None]
    cm = np.where(c < 0.0, -c, 0.0)[:, None]
    # interior face fluxes, upwinded by the sign of c
    g = cp * f[:, :-1] - cm * f[:, 1:]
    out = f.copy()
    out[:, :-1] -= g
    out[:, 1:] += g
    return out


def fp_apply(f: np.ndarray, fa: np.ndarray, fb: np.ndarray,
             dv: float) -> np.ndarray:
    """Divergence of the collision flux F_k = fa_k*f_k + fb_k*f_{k+1}.

    fa, fb: (nv-1,) face coefficients; zero flux through the end faces.
    Returns an array of f's shape; the velocity sum of the output
    telescopes to zero.
    """
    flux = fa * f[..., :-1] + fb * f[..., 1:]
    out = np.empty_like(f)
    out[..., 0] = flux[..., 0]
    out[..., 1:-1] = flux[..., 1:] - flux[..., :-1]
    out[..., -1] = -flux[..., -1]
    out /= dv
    return out


def thomas_shared(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray,
                  rhs: np.ndarray) -> np.ndarray:
    """Tridiagonal solve with one matrix shared by every row of rhs.

    lower, upper: (n-1,), diag: (n,), rhs: (m, n).  No pivoting: every
    system in this package is an M-matrix (positive diagonal, nonpositive
    off-diagonals, nonnegative column sums), for which elimination runs
    entirely in nonnegative arithmetic and therefore maps nonnegative
    right-hand sides to nonnegative solutions exactly.
    """
    n = diag.shape[0]
    w = np.empty(n)
    gl = np.empty(n - 1)
    w[0] = diag[0]
    if w[0] <= 0.0:
        raise RuntimeError("non-positive pivot at cell 0")
    for k in range(1, n):
        gl[k - 1] = lower[k - 1] / w[k - 1]
        w[k] = diag[k] - gl[k - 1] * upper[k - 1]
        if w[k] <= 0.0:
            raise RuntimeError(f"non-positive pivot at cell {k}")
    y = np.empty_like(rhs)
    y[:, 0] = rhs[:, 0]
    for k in range(1, n):
        y[:, k] = rhs[:, k] - gl[k - 1] * y[:, k - 1]
    out = np.empty_like(rhs)
    out[:, n - 1] = y[:, n - 1] / w[n - 1]
    for k in range(n - 2, -1, -1):
        out[:, k] = (y[:, k] - upper[k] * out[:, k + 1]) / w[k]
    return out
