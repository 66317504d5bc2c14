# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementation of the hot kernels.

Same contract as ``_ref``: weighted normal equations + Cholesky. The dense
accumulation and the per-resample refit loop run without the GIL, which is
what makes bootstrap-heavy runs fast.
"""
import numpy as np

cimport cython
from libc.math cimport NAN


cdef int _accumulate(const double[:, ::1] X, const double[::1] y,
                     const double[::1] w, int has_w,
                     const long long[::1] rows, Py_ssize_t n_rows,
                     double* gram, double* rhs, int p) noexcept nogil:
    """Fill gram = X'WX (row-major, full) and rhs = X'Wy over the given rows."""
    cdef Py_ssize_t r, i
    cdef int j, k
    cdef double wi, xij
    for j in range(p):
        rhs[j] = 0.0
        for k in range(p):
            gram[j * p + k] = 0.0
    for r in range(n_rows):
        i = <Py_ssize_t> rows[r]
        if i < 0:
            continue
        wi = w[i] if has_w else 1.0
        for j in range(p):
            xij = wi * X[i, j]
            rhs[j] += xij * y[i]
            for k in range(j, p):
                gram[j * p + k] += xij * X[i, k]
    for j in range(p):
        for k in range(j):
            gram[j * p + k] = gram[k * p + j]
    return 0


cdef int _cholesky(double* a, int p) noexcept nogil:
    """In-place lower Cholesky of the row-major p*p matrix a. 0 on success."""
    cdef int i, j, k
    cdef double s
    for j in range(p):
        s = a[j * p + j]
        for k in range(j):
            s -= a[j * p + k] * a[j * p + k]
        if s <= 0.0:
            return -1
        a[j * p + j] = s ** 0.5
        for i in range(j + 1, p):
            s = a[i * p + j]
            for k in range(j):
                s -= a[i * p + k] * a[j * p + k]
            a[i * p + j] = s / a[j * p + j]
    return 0


cdef void _cho_solve(const double* L, const double* b, double* x, int p) noexcept nogil:
    """Solve L L' x = b with L lower triangular (row-major)."""
    cdef int i, k
    cdef double s
    for i in range(p):
        s = b[i]
        for k in range(i):
            s -= L[i * p + k] * x[k]
        x[i] = s / L[i * p + i]
    for i in range(p - 1, -1, -1):
        s = x[i]
        for k in range(i + 1, p):
            s -= L[k * p + i] * x[k]
        x[i] = s / L[i * p + i]


def ols_solve(X, y, w=None):
    """See ``_ref.ols_solve``; identical contract."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef int has_w = w is not None
    cdef double[::1] wv
    if has_w:
        wv = np.ascontiguousarray(w, dtype=np.float64)
    else:
        wv = np.empty(0)
    cdef int p = Xv.shape[1]
    cdef Py_ssize_t n = Xv.shape[0]

    all_rows_arr = np.arange(n, dtype=np.int64)
    cdef long long[::1] all_rows = all_rows_arr
    gram_arr = np.empty((p, p))
    cdef double[:, ::1] gram = gram_arr
    rhs_arr = np.empty(p)
    cdef double[::1] rhs = rhs_arr
    coef_arr = np.empty(p)
    cdef double[::1] coef = coef_arr
    inv_arr = np.empty((p, p))
    cdef double[:, ::1] inv = inv_arr
    unit_arr = np.zeros(p)
    cdef double[::1] unit = unit_arr
    col_arr = np.empty(p)
    cdef double[::1] col = col_arr

    cdef int status, j, k
    cdef Py_ssize_t i
    cdef double rss = 0.0, resid, wi
    with nogil:
        _accumulate(Xv, yv, wv, has_w, all_rows, n, &gram[0, 0], &rhs[0], p)
        status = _cholesky(&gram[0, 0], p)
        if status == 0:
            _cho_solve(&gram[0, 0], &rhs[0], &coef[0], p)
            for j in range(p):
                unit[j] = 1.0
                _cho_solve(&gram[0, 0], &unit[0], &col[0], p)
                unit[j] = 0.0
                # the inverse is symmetric, so column j doubles as row j
                for k in range(p):
                    inv[j, k] = col[k]
            for i in range(n):
                resid = yv[i]
                for j in range(p):
                    resid -= Xv[i, j] * coef[j]
                wi = wv[i] if has_w else 1.0
                rss += wi * resid * resid
    if status != 0:
        raise np.linalg.LinAlgError("design matrix is not positive definite")
    return coef_arr, rss, inv_arr


def bootstrap_ols(X, y, w, idx, target):
    """See ``_ref.bootstrap_ols``; identical contract."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef int has_w = w is not None
    cdef double[::1] wv
    if has_w:
        wv = np.ascontiguousarray(w, dtype=np.float64)
    else:
        wv = np.empty(0)
    cdef long long[:, ::1] idxv = np.ascontiguousarray(idx, dtype=np.int64)
    cdef int p = Xv.shape[1]
    cdef int tcol = target
    cdef Py_ssize_t n_boot = idxv.shape[0]
    cdef Py_ssize_t m = idxv.shape[1]

    out_arr = np.empty(n_boot)
    cdef double[::1] out = out_arr
    gram_arr = np.empty((p, p))
    cdef double[:, ::1] gram = gram_arr
    rhs_arr = np.empty(p)
    cdef double[::1] rhs = rhs_arr
    coef_arr = np.empty(p)
    cdef double[::1] coef = coef_arr

    cdef Py_ssize_t b
    cdef int status
    with nogil:
        for b in range(n_boot):
            _accumulate(Xv, yv, wv, has_w, idxv[b], m, &gram[0, 0], &rhs[0], p)
            status = _cholesky(&gram[0, 0], p)
            if status == 0:
                _cho_solve(&gram[0, 0], &rhs[0], &coef[0], p)
                out[b] = coef[tcol]
            else:
                out[b] = NAN
    return out_arr
