"""Observed-data estimators for each intercurrent-event strategy.

Every estimator consumes only :class:`ObservedTable` columns (the latent
table never enters), reduces to one or more weighted least-squares fits of
the endpoint on treatment and baseline covariates, and reports the
treatment coefficient. Uncertainty comes either from the model-based OLS
standard error or from the stratified nonparametric bootstrap
(:func:`bootstrap_ci`).

Estimators that reduce to a single least-squares fit expose their design
reduction so the bootstrap can refit resamples through the compiled kernel
instead of rebuilding tables in Python.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.stats

from . import _kernels
from .errors import (
    BootstrapInstabilityError,
    InestimableError,
    MonotonicityViolationError,
    SingularDesignError,
)
from .potential_outcomes import (
    CASE_1,
    CASE_2,
    CASE_3,
    CASE_NONE,
    DEATH_NONE,
    ENDPOINT_SCALE,
    ObservedTable,
)
from .rng import make_generator, split_seed

__all__ = [
    "Formula",
    "OlsFit",
    "EstimateResult",
    "ols_fit",
    "estimate_treatment_policy",
    "estimate_hypothetical",
    "estimate_composite",
    "estimate_while_on_treatment",
    "estimate_principal_stratum",
    "estimate_confounder_adjusted",
    "bootstrap_ci",
    "bootstrap_plan",
    "execute_plan",
    "ESTIMATORS",
]


@dataclass(frozen=True)
class Formula:
    """Covariate selector for the outcome regression (treatment always enters)."""

    confounders: bool = True
    m: bool = False
    time: bool = False


@dataclass
class OlsFit:
    """Least-squares solution of the normal equations."""

    coefficients: np.ndarray
    column_names: tuple
    residual_variance: float
    cov: np.ndarray  # sigma^2 (X'WX)^-1
    n_used: int
    dropped: tuple = ()

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.column_names.index(name)])

    def se(self, name: str) -> float:
        i = self.column_names.index(name)
        return float(np.sqrt(max(self.cov[i, i], 0.0)))

    @property
    def dof(self) -> int:
        return self.n_used - len(self.column_names)


@dataclass
class EstimateResult:
    """Point estimate with uncertainty and replication metadata."""

    point: float
    std_error: float
    ci_low: float
    ci_high: float
    n_used: int
    n_imputations: int
    strategy: str


@dataclass
class _Design:
    """A fully materialized least-squares problem plus its row provenance."""

    X: np.ndarray
    y: np.ndarray
    w: np.ndarray | None
    names: tuple
    rows: np.ndarray        # global table row index per design row
    strategy: str
    n_table: int
    dropped: tuple = ()

    @property
    def target(self) -> int:
        return self.names.index("treatment")

    def row_map(self) -> np.ndarray:
        """global row index -> design row, or -1 for unused rows."""
        out = np.full(self.n_table, -1, dtype=np.int64)
        out[self.rows] = np.arange(len(self.rows))
        return out


def _build_design(table: ObservedTable, y: np.ndarray, formula: Formula,
                  strategy: str, time_indicator: np.ndarray | None = None,
                  weights: np.ndarray | None = None) -> _Design:
    """Assemble [intercept, treatment, ...] over rows with a finite endpoint.

    Non-treatment columns with zero variance are dropped with a warning; a
    constant treatment column raises :class:`SingularDesignError`.
    """
    mask = np.isfinite(y)
    if weights is not None:
        mask &= weights > 0
    rows = np.flatnonzero(mask)
    cols = [np.ones(rows.size), table.x_obs[rows].astype(float)]
    names = ["intercept", "treatment"]
    if formula.confounders:
        for j in range(table.k):
            cols.append(table.c[rows, j])
            names.append(f"c{j + 1}")
    if formula.m:
        cols.append(table.m_obs[rows].astype(float))
        names.append("m")
    if formula.time:
        if time_indicator is None:
            raise ValueError("formula.time requires a time indicator column")
        cols.append(time_indicator[rows].astype(float))
        names.append("time_t1")

    kept_cols, kept_names, dropped = [], [], []
    for name, col in zip(names, cols):
        if name != "intercept" and col.size and col.min() == col.max():
            if name == "treatment":
                raise SingularDesignError(
                    "treatment", "singular design: the treatment column is constant"
                )
            dropped.append(name)
            continue
        kept_cols.append(col)
        kept_names.append(name)
    if dropped:
        warnings.warn(
            f"dropping zero-variance column(s) {', '.join(dropped)} from the design",
            stacklevel=3,
        )
    X = np.ascontiguousarray(np.column_stack(kept_cols))
    return _Design(
        X=X,
        y=np.ascontiguousarray(y[rows], dtype=float),
        w=None if weights is None else np.ascontiguousarray(weights[rows], dtype=float),
        names=tuple(kept_names),
        rows=rows,
        strategy=strategy,
        n_table=table.n,
        dropped=tuple(dropped),
    )


def _fit_design(design: _Design) -> OlsFit:
    n, p = design.X.shape
    if n < p + 1:
        raise InestimableError(
            f"{design.strategy}: {n} usable records cannot support {p} coefficients"
        )
    try:
        coef, rss, xtx_inv = _kernels.ols_solve(design.X, design.y, design.w)
    except np.linalg.LinAlgError:
        raise _locate_singular_column(design.X, design.names) from None
    dof = n - p
    resid_var = rss / dof if dof > 0 else 0.0
    return OlsFit(
        coefficients=np.asarray(coef, dtype=float),
        column_names=design.names,
        residual_variance=float(max(resid_var, 0.0)),
        cov=np.asarray(xtx_inv) * max(resid_var, 0.0),
        n_used=n,
        dropped=getattr(design, "dropped", ()),
    )


def _locate_singular_column(X: np.ndarray, names: tuple) -> SingularDesignError:
    rank = 0
    for j in range(X.shape[1]):
        new_rank = np.linalg.matrix_rank(X[:, : j + 1])
        if new_rank == rank:
            return SingularDesignError(names[j])
        rank = new_rank
    return SingularDesignError(names[-1])


def _result_from_fit(fit: OlsFit, strategy: str, level: float = 0.95,
                     n_imputations: int = 0) -> EstimateResult:
    point = fit.coef("treatment")
    se = fit.se("treatment")
    half = _t_quantile(fit.dof, level) * se
    return EstimateResult(
        point=point,
        std_error=se,
        ci_low=point - half,
        ci_high=point + half,
        n_used=fit.n_used,
        n_imputations=n_imputations,
        strategy=strategy,
    )


def _t_quantile(dof: float, level: float) -> float:
    q = 0.5 + level / 2.0
    if not np.isfinite(dof) or dof <= 0:
        return float(scipy.stats.norm.ppf(q))
    return float(scipy.stats.t.ppf(q, dof))


# --- the canonical operations -------------------------------------------------


def ols_fit(table: ObservedTable, formula: Formula = Formula(),
            endpoint: str = "y2") -> OlsFit:
    """Least squares of the observed endpoint on treatment (+ covariates)."""
    y = table.y2_obs if endpoint == "y2" else table.y1_obs
    return _fit_design(_build_design(table, y, formula, "ols"))


def estimate_treatment_policy(table: ObservedTable,
                              formula: Formula = Formula()) -> EstimateResult:
    """Concomitant therapy folded into the regime: regress y2 as observed."""
    design = _design_treatment_policy(table, formula)
    return _result_from_fit(_fit_design(design), "treatment_policy")


def _design_treatment_policy(table, formula=Formula()):
    return _build_design(table, table.y2_obs, formula, "treatment_policy")


def estimate_composite(table: ObservedTable, worst: float = 10.0) -> EstimateResult:
    """Deaths recoded to the worst endpoint category, then regression."""
    design = _design_composite(table, worst)
    return _result_from_fit(_fit_design(design), "composite")


def _design_composite(table, worst=10.0):
    lo, hi = ENDPOINT_SCALE
    if not lo <= worst <= hi:
        raise ValueError(f"worst must lie within the endpoint scale [{lo:g}, {hi:g}]")
    y = table.y2_obs.copy()
    y[table.death_obs != DEATH_NONE] = worst
    return _build_design(table, y, Formula(), "composite")


def estimate_while_on_treatment(table: ObservedTable,
                                adjust_time: bool = True) -> EstimateResult:
    """Last assessment before the event: y2 when available, else y1."""
    design = _design_while_on_treatment(table, adjust_time)
    return _result_from_fit(_fit_design(design), "while_on_treatment")


def _design_while_on_treatment(table, adjust_time=True):
    use_y1 = ~np.isfinite(table.y2_obs) & np.isfinite(table.y1_obs)
    y = np.where(use_y1, table.y1_obs, table.y2_obs)
    return _build_design(
        table, y, Formula(time=adjust_time), "while_on_treatment",
        time_indicator=use_y1.astype(float),
    )


def estimate_confounder_adjusted(table: ObservedTable) -> EstimateResult:
    """Concomitant therapy entered as a regression covariate."""
    design = _design_confounder_adjusted(table)
    return _result_from_fit(_fit_design(design), "confounder_adjusted")


def _design_confounder_adjusted(table):
    return _build_design(table, table.y2_obs, Formula(m=True), "confounder_adjusted")


def estimate_hypothetical(table: ObservedTable, n_imputations: int = 20,
                          seed: int = 0) -> EstimateResult:
    """Multiple imputation of endpoints 'had the event not occurred'.

    The second assessment is set to missing for therapy users (case 1) and
    deaths (cases 2 and 3); arm-specific linear imputation models are fitted
    on event-free records, with the first assessment as an auxiliary
    covariate when it exists. Stochastic imputations (prediction plus a
    normal residual draw) complete the dataset ``n_imputations`` times and
    the per-imputation fits are pooled with the standard combining rules.
    """
    missing = np.isin(table.case, (CASE_1, CASE_2, CASE_3))
    return _mi_fit(table, table.y2_obs.copy(), missing, Formula(),
                   n_imputations=n_imputations, seed=seed, strategy="hypothetical")


def _mi_fit(table: ObservedTable, y: np.ndarray, missing: np.ndarray,
            formula: Formula, n_imputations: int, seed: int, strategy: str,
            weights: np.ndarray | None = None,
            time_indicator: np.ndarray | None = None) -> EstimateResult:
    """Shared multiple-imputation engine for the hypothetical strategy.

    ``y`` is the working endpoint (possibly recoded by earlier pipeline
    steps); rows in ``missing`` are replaced by draws from arm-specific
    regressions of the uncensored second assessment on confounders (and the
    first assessment where available), fitted on event-free records.
    """
    if n_imputations < 1:
        raise ValueError("n_imputations must be >= 1")
    y = y.copy()
    y[missing] = np.nan

    def final_fit(values):
        return _fit_design(_build_design(table, values, formula, strategy,
                                         time_indicator=time_indicator,
                                         weights=weights))

    if not missing.any():
        return _result_from_fit(final_fit(y), strategy)

    rng = make_generator(seed)
    models = {}
    for arm in (0, 1):
        free = (table.case == CASE_NONE) & (table.x_obs == arm) & np.isfinite(table.y2_obs)
        n_free = int(free.sum())
        if n_free < table.k + 3:
            raise InestimableError(
                f"{strategy}: arm {arm} has {n_free} event-free records, "
                f"need at least {table.k + 3} to fit the imputation model"
            )
        rows = np.flatnonzero(free)
        base = [np.ones(rows.size)] + [table.c[rows, j] for j in range(table.k)]
        with_aux = np.column_stack(base + [table.y1_obs[rows]])
        without_aux = np.column_stack(base)
        models[arm] = (
            _imputation_model(with_aux, table.y2_obs[rows]),
            _imputation_model(without_aux, table.y2_obs[rows]),
        )

    points, variances, n_used = [], [], 0
    for _ in range(n_imputations):
        completed = y.copy()
        for arm in (0, 1):
            model_aux, model_plain = models[arm]
            need = missing & (table.x_obs == arm)
            has_aux = need & np.isfinite(table.y1_obs)
            for rows_mask, model, use_aux in (
                (has_aux, model_aux, True),
                (need & ~np.isfinite(table.y1_obs), model_plain, False),
            ):
                rows = np.flatnonzero(rows_mask)
                if rows.size == 0:
                    continue
                base = [np.ones(rows.size)] + [table.c[rows, j] for j in range(table.k)]
                if use_aux:
                    base.append(table.y1_obs[rows])
                pred = np.column_stack(base) @ model[0]
                completed[rows] = pred + model[1] * rng.standard_normal(rows.size)
        fit = final_fit(completed)
        points.append(fit.coef("treatment"))
        variances.append(fit.se("treatment") ** 2)
        n_used = fit.n_used

    result = _combine_imputations(np.array(points), np.array(variances), n_used)
    result.strategy = strategy
    return result


def _imputation_model(X, y):
    """(coefficients, residual sd) of the imputation regression."""
    coef, rss, _ = _kernels.ols_solve(np.ascontiguousarray(X), np.ascontiguousarray(y))
    dof = X.shape[0] - X.shape[1]
    sd = np.sqrt(rss / dof) if dof > 0 else 0.0
    return np.asarray(coef), float(sd)


def _combine_imputations(points: np.ndarray, variances: np.ndarray,
                         n_used: int, level: float = 0.95) -> EstimateResult:
    m = len(points)
    point = float(points.mean())
    within = float(variances.mean())
    between = float(points.var(ddof=1)) if m > 1 else 0.0
    total = within + (1.0 + 1.0 / m) * between
    se = float(np.sqrt(total))
    if between > 0 and m > 1:
        dof = (m - 1) * (1.0 + within / ((1.0 + 1.0 / m) * between)) ** 2
    else:
        dof = np.inf
    half = _t_quantile(dof, level) * se
    return EstimateResult(
        point=point,
        std_error=se,
        ci_low=point - half,
        ci_high=point + half,
        n_used=n_used,
        n_imputations=m,
        strategy="hypothetical",
    )


def estimate_principal_stratum(table: ObservedTable) -> EstimateResult:
    """Effect among participants who would tolerate both treatments.

    Under monotone tolerability the experimental-arm tolerators are exactly
    that stratum, so their outcomes identify the treated mean directly. The
    control-arm tolerators are a mixture; each is weighted by the ratio of
    the arm-specific tolerability scores (the estimated probability of
    stratum membership given control-arm tolerance, valid under principal
    ignorability). The weighted regression of y2 on treatment and
    confounders over all tolerators yields the stratum effect; with
    everybody tolerant all weights are 1 and it degenerates to the plain fit.
    """
    design = _design_principal_stratum(table)
    return _result_from_fit(_fit_design(design), "principal_stratum")


def _principal_weights(table: ObservedTable) -> np.ndarray:
    """Per-record analysis weights for the tolerate-both stratum.

    Experimental-arm tolerators get weight 1, control-arm tolerators the
    clipped score ratio, everyone else 0. Raises on an estimated stratum
    share of zero or on score evidence against monotone tolerability.
    """
    exp_arm = table.x_obs == 1
    ctl_arm = ~exp_arm
    cov = np.column_stack([np.ones(table.n)] + [table.c[:, j] for j in range(table.k)])

    score_exp = _tolerability_score(cov, table.t_obs, exp_arm, "experimental")
    score_ctl = _tolerability_score(cov, table.t_obs, ctl_arm, "control")

    pi_exp = float(score_exp.mean())
    pi_ctl = float(score_ctl.mean())
    if pi_exp * table.n < 1.0:
        raise InestimableError(
            "principal_stratum: estimated stratum proportion is zero"
        )
    if pi_ctl <= 0 or pi_exp / pi_ctl > 1.02:
        raise MonotonicityViolationError(
            f"estimated tolerator share is larger under the experimental treatment "
            f"({pi_exp:.3f} > {pi_ctl:.3f}); monotone tolerability is untenable"
        )

    tolerates = table.t_obs == 1
    weights = np.zeros(table.n)
    weights[exp_arm & tolerates] = 1.0
    ratio = score_exp / np.maximum(score_ctl, 1e-12)
    weights[ctl_arm & tolerates] = np.clip(ratio[ctl_arm & tolerates], 0.0, 1.0)
    return weights


def _check_tolerator_support(table: ObservedTable, weights: np.ndarray,
                             y: np.ndarray) -> None:
    usable = np.isfinite(y) & (weights > 0)
    for arm, label in ((1, "experimental"), (0, "control")):
        if not (usable & (table.x_obs == arm)).any():
            raise InestimableError(
                f"principal_stratum: no usable tolerator in the {label} arm"
            )


def _design_principal_stratum(table: ObservedTable) -> _Design:
    weights = _principal_weights(table)
    _check_tolerator_support(table, weights, table.y2_obs)
    w = None if np.all(weights == 1.0) else weights
    return _build_design(table, table.y2_obs, Formula(), "principal_stratum",
                         weights=w)


def _tolerability_score(cov: np.ndarray, t_obs: np.ndarray, arm_mask: np.ndarray,
                        label: str) -> np.ndarray:
    rows = np.flatnonzero(arm_mask)
    if rows.size == 0:
        raise InestimableError(f"principal_stratum: the {label} arm is empty")
    y = t_obs[rows].astype(float)
    if y.min() == y.max():
        return np.full(cov.shape[0], y[0])
    beta = _logistic_irls(cov[rows], y)
    return _expit(cov @ beta)


def _expit(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _logistic_irls(X, y, max_iter=60, tol=1e-10):
    beta = np.zeros(X.shape[1])
    for _ in range(max_iter):
        p = _expit(X @ beta)
        w = np.maximum(p * (1.0 - p), 1e-12)
        grad = X.T @ (y - p)
        hess = X.T @ (X * w[:, None])
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        beta = beta + step
        if np.max(np.abs(step)) < tol:
            break
    return beta


# --- bootstrap ----------------------------------------------------------------

ESTIMATORS = {
    "treatment_policy": estimate_treatment_policy,
    "hypothetical": estimate_hypothetical,
    "composite": estimate_composite,
    "while_on_treatment": estimate_while_on_treatment,
    "principal_stratum": estimate_principal_stratum,
    "confounder_adjusted": estimate_confounder_adjusted,
}

_DESIGN_REDUCTIONS = {
    "treatment_policy": _design_treatment_policy,
    "composite": _design_composite,
    "while_on_treatment": _design_while_on_treatment,
    "confounder_adjusted": _design_confounder_adjusted,
    "principal_stratum": _design_principal_stratum,
}


def bootstrap_ci(table: ObservedTable, estimator: str, n_boot: int = 400,
                 level: float = 0.95, seed: int = 0, **options) -> EstimateResult:
    """Percentile interval from arm-stratified resampling of whole participants.

    Estimators that reduce to a single weighted least-squares fit are
    re-solved through the kernel backend; the others are re-run record-wise.
    A resample whose refit fails is dropped; more than 10% failures raises
    :class:`BootstrapInstabilityError`.
    """
    if n_boot < 100:
        raise ValueError("n_boot must be >= 100")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")

    full = ESTIMATORS[estimator](table, **options)
    idx = _stratified_indices(table, n_boot, seed)

    if estimator in _DESIGN_REDUCTIONS and estimator != "principal_stratum":
        design = _DESIGN_REDUCTIONS[estimator](table, **options)
        row_map = design.row_map()
        points = _kernels.bootstrap_ols(
            design.X, design.y, design.w, row_map[idx], design.target
        )
    else:
        points = np.empty(n_boot)
        for b in range(n_boot):
            try:
                points[b] = ESTIMATORS[estimator](table.take(idx[b]), **options).point
            except Exception:
                points[b] = np.nan

    ok = np.isfinite(points)
    failure_rate = 1.0 - ok.mean()
    if failure_rate > 0.10:
        raise BootstrapInstabilityError(failure_rate, n_boot)
    points = points[ok]

    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(points, [alpha, 1.0 - alpha])
    spread = float(points.std(ddof=1)) if points.size > 1 else 0.0
    return EstimateResult(
        point=full.point,
        std_error=spread,
        ci_low=float(lo),
        ci_high=float(hi),
        n_used=full.n_used,
        n_imputations=full.n_imputations,
        strategy=full.strategy,
    )


def _stratified_indices(table: ObservedTable, n_boot: int, seed: int) -> np.ndarray:
    """(n_boot, n) global row indices, resampled within each arm."""
    rng = make_generator(seed)
    parts = []
    for arm in (0, 1):
        rows = np.flatnonzero(table.r_obs == arm)
        if rows.size:
            parts.append(rows[rng.integers(0, rows.size, size=(n_boot, rows.size))])
    return np.concatenate(parts, axis=1)


def bootstrap_plan(table: ObservedTable, plan, n_boot: int = 400,
                   level: float = 0.95, seed: int = 0) -> EstimateResult:
    """Percentile bootstrap of an arbitrary analysis plan.

    Plans that reduce to a single unweighted fit go through the kernel;
    plans with imputation, stratum weighting or an analysis-set restriction
    re-run :func:`execute_plan` on each resample (weights and imputation
    models are legitimately re-estimated per resample).
    """
    if n_boot < 100:
        raise ValueError("n_boot must be >= 100")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    full = execute_plan(plan, table, seed=seed)
    idx = _stratified_indices(table, n_boot, seed)

    reducible = not (plan.impute_therapy or plan.impute_death
                     or plan.principal_stratum
                     or plan.population[0] == "analysis_set")
    if reducible:
        design = _plan_design(plan, table)
        row_map = design.row_map()
        points = _kernels.bootstrap_ols(
            design.X, design.y, design.w, row_map[idx], design.target
        )
    else:
        points = np.empty(n_boot)
        for b in range(n_boot):
            try:
                points[b] = execute_plan(
                    plan, table.take(idx[b]), seed=split_seed(seed, b + 1)
                ).point
            except Exception:
                points[b] = np.nan

    ok = np.isfinite(points)
    failure_rate = 1.0 - ok.mean()
    if failure_rate > 0.10:
        raise BootstrapInstabilityError(failure_rate, n_boot)
    points = points[ok]
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(points, [alpha, 1.0 - alpha])
    return EstimateResult(
        point=full.point,
        std_error=float(points.std(ddof=1)) if points.size > 1 else 0.0,
        ci_low=float(lo),
        ci_high=float(hi),
        n_used=full.n_used,
        n_imputations=full.n_imputations,
        strategy=full.strategy,
    )


def _plan_design(plan, table: ObservedTable) -> _Design:
    """Design reduction for plans without imputation or stratum weighting."""
    y = table.y2_obs.copy()
    time_indicator = None
    if plan.composite_worst is not None:
        y[table.death_obs != DEATH_NONE] = plan.composite_worst
    elif plan.while_on_treatment:
        use_y1 = ~np.isfinite(y) & np.isfinite(table.y1_obs)
        y = np.where(use_y1, table.y1_obs, y)
        time_indicator = use_y1.astype(float)
    formula = Formula(m=plan.adjust_m,
                      time=plan.while_on_treatment and plan.adjust_time)
    return _build_design(table, y, formula, plan.estimator_name,
                         time_indicator=time_indicator)


# --- composed analysis plans ----------------------------------------------------


def execute_plan(plan, table: ObservedTable, seed: int = 0) -> EstimateResult:
    """Run a parsed analysis plan on observed records.

    Steps apply in the fixed order: analysis-set restriction, composite
    recoding, while-on-treatment selection, hypothetical imputation,
    stratum weighting, regression adjustment. A plan with a single declared
    strategy reproduces the corresponding canonical estimator exactly.
    """
    from .analysis_sets import build_sets  # local import, avoids a cycle

    if plan.population[0] == "analysis_set":
        table = table.subset(build_sets(table).mask(plan.population[1]))

    y = table.y2_obs.copy()
    time_indicator = None
    if plan.composite_worst is not None:
        lo, hi = ENDPOINT_SCALE
        if not lo <= plan.composite_worst <= hi:
            raise ValueError(
                f"worst must lie within the endpoint scale [{lo:g}, {hi:g}]"
            )
        y[table.death_obs != DEATH_NONE] = plan.composite_worst
    elif plan.while_on_treatment:
        use_y1 = ~np.isfinite(y) & np.isfinite(table.y1_obs)
        y = np.where(use_y1, table.y1_obs, y)
        time_indicator = use_y1.astype(float)

    missing = np.zeros(table.n, dtype=bool)
    if plan.impute_therapy:
        missing |= table.case == CASE_1
    if plan.impute_death:
        missing |= (table.case == CASE_2) | (table.case == CASE_3)

    weights = None
    if plan.principal_stratum:
        weights = _principal_weights(table)
        _check_tolerator_support(table, weights, np.where(missing, 0.0, y))
        missing &= weights > 0
        if np.all(weights == 1.0):
            weights = None

    formula = Formula(m=plan.adjust_m,
                      time=plan.while_on_treatment and plan.adjust_time)

    if plan.impute_therapy or plan.impute_death:
        return _mi_fit(table, y, missing, formula, plan.n_imputations, seed,
                       strategy=plan.estimator_name, weights=weights,
                       time_indicator=time_indicator)
    fit = _fit_design(_build_design(table, y, formula, plan.estimator_name,
                                    time_indicator=time_indicator, weights=weights))
    return _result_from_fit(fit, plan.estimator_name)
