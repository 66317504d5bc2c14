"""Pure-numpy reference implementation of the hot kernels.

Selected automatically when the compiled extension is unavailable (or when
``ESTIMAND_LAB_BACKEND=python``). Must stay algorithmically identical to
``_core.pyx``: weighted normal equations factored by Cholesky. The two
backends agree to floating-point noise (~1e-12 relative), not bit-for-bit;
tests pin the agreement tolerance.
"""
import numpy as np
import scipy.linalg


def ols_solve(X, y, w=None):
    """Weighted least squares via normal equations.

    Parameters
    ----------
    X : (n, p) float64 design matrix
    y : (n,) float64 response
    w : (n,) float64 nonnegative weights, or None for unit weights

    Returns
    -------
    coef : (p,) solution of (X'WX) coef = X'Wy
    rss : weighted residual sum of squares
    xtx_inv : (p, p) inverse of X'WX

    Raises
    ------
    numpy.linalg.LinAlgError
        If X'WX is not positive definite (rank-deficient design).
    """
    if w is None:
        Xw = X
        yw = y
    else:
        Xw = X * w[:, None]
        yw = y * w
    gram = X.T @ Xw
    rhs = X.T @ yw
    lower = np.linalg.cholesky(gram)
    coef = scipy.linalg.cho_solve((lower, True), rhs, check_finite=False)
    xtx_inv = scipy.linalg.cho_solve(
        (lower, True), np.eye(gram.shape[0]), check_finite=False
    )
    resid = y - X @ coef
    rss = float(resid @ (resid if w is None else w * resid))
    return coef, rss, xtx_inv


def bootstrap_ols(X, y, w, idx, target):
    """Target coefficient of a weighted OLS refit on each bootstrap resample.

    Parameters
    ----------
    X, y, w : full-sample design, response and weights (w may be None)
    idx : (B, m) int64 resample row indices; entries < 0 are skipped
        (participants that the estimator's record filter discarded).
    target : column index of the coefficient to collect

    Returns
    -------
    (B,) float64 array; NaN marks resamples with a singular design.
    """
    n_boot = idx.shape[0]
    out = np.empty(n_boot)
    for b in range(n_boot):
        take = idx[b]
        take = take[take >= 0]
        Xb = X[take]
        yb = y[take]
        wb = None if w is None else w[take]
        try:
            coef, _, _ = ols_solve(Xb, yb, wb)
            out[b] = coef[target]
        except np.linalg.LinAlgError:
            out[b] = np.nan
    return out
