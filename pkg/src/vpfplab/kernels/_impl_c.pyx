# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels for the hot phase-space loops.

Mirror of ``_impl_py``: same four entry points, same arithmetic order
per output element, so the two backends agree to the last bit on the
same inputs.  Inputs are never mutated.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "c"


def advect_x(f, c):
    """First-order upwind in x with zero inflow at both walls."""
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t nx = fv.shape[0], nv = fv.shape[1]
    out_arr = np.empty((nx, nv), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t j, k
    cdef double ck, cp, cm, acc
    for k in range(nv):
        ck = cv[k]
        cp = ck if ck > 0.0 else 0.0
        cm = -ck if ck < 0.0 else 0.0
        for j in range(nx):
            acc = fv[j, k] * (1.0 - (cp + cm))
            if j > 0:
                acc = acc + cp * fv[j - 1, k]
            if j < nx - 1:
                acc = acc + cm * fv[j + 1, k]
            out[j, k] = acc
    return out_arr


def advect_v(f, c):
    """First-order upwind in v, closed (zero-flux) at +-vmax."""
    cdef double[:, ::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef double[::1] cv = np.ascontiguousarray(c, dtype=np.float64)
    cdef Py_ssize_t nx = fv.shape[0], nv = fv.shape[1]
    out_arr = np.empty((nx, nv), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    g_arr = np.empty(nv - 1, dtype=np.float64)
    cdef double[::1] g = g_arr
    cdef Py_ssize_t j, k
    cdef double cj, cp, cm, acc
    for j in range(nx):
        cj = cv[j]
        cp = cj if cj > 0.0 else 0.0
        cm = -cj if cj < 0.0 else 0.0
        for k in range(nv - 1):
            g[k] = cp * fv[j, k] - cm * fv[j, k + 1]
        for k in range(nv):
            acc = fv[j, k]
            if k < nv - 1:
                acc = acc - g[k]
            if k > 0:
                acc = acc + g[k - 1]
            out[j, k] = acc
    return out_arr


def fp_apply(f, fa, fb, double dv):
    """Divergence of the collision flux F_k = fa_k*f_k + fb_k*f_{k+1}."""
    f2 = np.ascontiguousarray(f, dtype=np.float64)
    shape = f2.shape
    # No negative tuple indices here: wraparound is off for this module.
    f2 = f2.reshape(-1, shape[len(shape) - 1])
    cdef double[:, ::1] fv = f2
    cdef double[::1] fav = np.ascontiguousarray(fa, dtype=np.float64)
    cdef double[::1] fbv = np.ascontiguousarray(fb, dtype=np.float64)
    cdef Py_ssize_t m = fv.shape[0], nv = fv.shape[1]
    out_arr = np.empty((m, nv), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    flux_arr = np.empty(nv - 1, dtype=np.float64)
    cdef double[::1] flux = flux_arr
    cdef Py_ssize_t r, k
    for r in range(m):
        for k in range(nv - 1):
            flux[k] = fav[k] * fv[r, k] + fbv[k] * fv[r, k + 1]
        out[r, 0] = flux[0] / dv
        for k in range(1, nv - 1):
            out[r, k] = (flux[k] - flux[k - 1]) / dv
        out[r, nv - 1] = (-flux[nv - 2]) / dv
    return out_arr.reshape(shape)


def thomas_shared(lower, diag, upper, rhs):
    """Tridiagonal solve with one matrix shared by every row of rhs."""
    cdef double[::1] lo = np.ascontiguousarray(lower, dtype=np.float64)
    cdef double[::1] dg = np.ascontiguousarray(diag, dtype=np.float64)
    cdef double[::1] up = np.ascontiguousarray(upper, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(rhs, dtype=np.float64)
    cdef Py_ssize_t n = dg.shape[0], m = b.shape[0]
    w_arr = np.empty(n, dtype=np.float64)
    gl_arr = np.empty(n - 1, dtype=np.float64)
    cdef double[::1] w = w_arr
    cdef double[::1] gl = gl_arr
    cdef Py_ssize_t r, k
    w[0] = dg[0]
    if w[0] <= 0.0:
        raise RuntimeError("non-positive pivot at cell 0")
    for k in range(1, n):
        gl[k - 1] = lo[k - 1] / w[k - 1]
        w[k] = dg[k] - gl[k - 1] * up[k - 1]
        if w[k] <= 0.0:
            raise RuntimeError(f"non-positive pivot at cell {k}")
    out_arr = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for r in range(m):
        out[r, 0] = b[r, 0]
        for k in range(1, n):
            out[r, k] = b[r, k] - gl[k - 1] * out[r, k - 1]
        out[r, n - 1] = out[r, n - 1] / w[n - 1]
        for k in range(n - 2, -1, -1):
            out[r, k] = (out[r, k] - up[k] * out[r, k + 1]) / w[k]
    return out_arr
