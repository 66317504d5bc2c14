"""Backend-parity and correctness checks for the hot kernels."""
import numpy as np
import pytest

from estimand_lab import _kernels
from estimand_lab._kernels import _ref


def _problem(rng, n=80, p=4, weighted=False):
    X = rng.standard_normal((n, p))
    X[:, 0] = 1.0
    beta = rng.standard_normal(p)
    y = X @ beta + 0.3 * rng.standard_normal(n)
    w = np.abs(rng.standard_normal(n)) + 0.1 if weighted else None
    return X, y, w


@pytest.mark.parametrize("weighted", [False, True])
def test_ols_solve_matches_lstsq(rng, weighted):
    X, y, w = _problem(rng, weighted=weighted)
    coef, rss, xtx_inv = _kernels.ols_solve(X, y, w)
    sw = np.ones(len(y)) if w is None else np.sqrt(w)
    expected, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    assert np.allclose(coef, expected, rtol=1e-9, atol=1e-12)
    resid = y - X @ coef
    assert np.isclose(rss, resid @ (resid if w is None else w * resid), rtol=1e-9)
    gram = X.T @ X if w is None else X.T @ (X * w[:, None])
    assert np.allclose(xtx_inv @ gram, np.eye(X.shape[1]), atol=1e-8)


def test_normal_equations_residual_small(rng):
    X, y, w = _problem(rng, n=200, p=5)
    coef, _, _ = _kernels.ols_solve(X, y, w)
    lhs = X.T @ X @ coef
    rhs = X.T @ y
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs) < 1e-8


def test_singular_design_raises(rng):
    X = np.ones((10, 2))  # duplicated constant column
    y = rng.standard_normal(10)
    with pytest.raises(np.linalg.LinAlgError):
        _kernels.ols_solve(X, y)


@pytest.mark.parametrize("weighted", [False, True])
def test_backends_agree(rng, weighted):
    if _kernels.BACKEND != "compiled":
        pytest.skip("compiled backend unavailable")
    from estimand_lab._kernels import _core

    for _ in range(20):
        X, y, w = _problem(rng, n=60, p=5, weighted=weighted)
        c1 = _core.ols_solve(X, y, w)
        c2 = _ref.ols_solve(X, y, w)
        assert np.allclose(c1[0], c2[0], rtol=1e-9, atol=1e-12)
        assert np.isclose(c1[1], c2[1], rtol=1e-9)
        assert np.allclose(c1[2], c2[2], rtol=1e-8, atol=1e-12)


def test_bootstrap_backends_agree_and_skip_negative_indices(rng):
    X, y, w = _problem(rng, n=50, p=3, weighted=True)
    idx = rng.integers(0, 50, size=(40, 50)).astype(np.int64)
    idx[:, ::7] = -1  # dropped rows
    out_ref = _ref.bootstrap_ols(X, y, w, idx, 1)
    assert np.isfinite(out_ref).all()
    if _kernels.BACKEND == "compiled":
        from estimand_lab._kernels import _core

        out_core = _core.bootstrap_ols(X, y, w, idx, 1)
        assert np.allclose(out_core, out_ref, rtol=1e-9, atol=1e-12)
    # resample b solved on exactly the rows idx[b] >= 0
    take = idx[0][idx[0] >= 0]
    coef, _, _ = _ref.ols_solve(X[take], y[take], w[take])
    assert np.isclose(out_ref[0], coef[1], rtol=1e-12)


def test_bootstrap_singular_resample_yields_nan():
    X = np.column_stack([np.ones(6), np.array([0, 0, 0, 1, 1, 1.0])])
    y = np.arange(6, dtype=float)
    idx = np.array([[0, 1, 2, 0, 1, 2], [0, 1, 2, 3, 4, 5]], dtype=np.int64)
    out = _ref.bootstrap_ols(X, y, None, idx, 1)
    assert np.isnan(out[0])  # treatment constant in the resample
    assert np.isfinite(out[1])
