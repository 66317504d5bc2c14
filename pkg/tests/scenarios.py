"""Shared scenario configurations for tests and the acceptance suite.

Each builder returns a ScenarioConfig engineered so that a specific
oracle-vs-estimator property holds (or visibly fails, for the falsification
scenarios). Magnitudes were calibrated once against the Monte Carlo
standard errors used by the acceptance criteria.
"""
from estimand_lab.dgp import ScenarioConfig

BASE_SEED = 987654321


def no_ice(n=2000, seed=BASE_SEED, **kw):
    """Randomized trial, full compliance, no intercurrent events."""
    defaults = dict(
        n=n, k=2, seed=seed,
        alpha1=4.5, alpha2=4.5, tau1=1.0, tau2=1.0,
        gamma=(0.5, -0.4), rho=0.5, sigma=1.0,
    )
    defaults.update(kw)
    return ScenarioConfig(**defaults)


def observational(n=2000, seed=BASE_SEED, **kw):
    """Uptake driven by confounders: the randomization assumption fails."""
    defaults = dict(
        design="observational", m_mode="pre",
        lambda_=(0.0, 0.0, 1.2, -1.0),
        gamma=(0.8, -0.7),
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def therapy(n=2000, seed=BASE_SEED, rate_intercept=-0.6, **kw):
    """Arm-imbalanced concomitant therapy with a real endpoint effect."""
    defaults = dict(
        delta_m=1.2,
        m_logit=(rate_intercept, 1.4, 0.5, 0.0),
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def deaths(n=2000, seed=BASE_SEED, **kw):
    """Arm-imbalanced mortality by the second assessment."""
    defaults = dict(
        death_logit=(-2.2, 1.1, 0.6, 0.0),
        death_before_t1_frac=0.5,
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def therapy_and_deaths(n=2000, seed=BASE_SEED, **kw):
    """Mixed intercurrent events at a ~0.3 therapy rate (imputation scenario)."""
    defaults = dict(
        delta_m=1.2,
        m_logit=(-1.0, 0.6, 0.4, 0.0),
        death_logit=(-2.8, 0.6, 0.4, 0.0),
        death_before_t1_frac=0.5,
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def case3_rich(n=2000, seed=BASE_SEED, **kw):
    """Deaths between assessments only, independent of arm, c-driven.

    tau1 != tau2 so mixing first-assessment endpoints genuinely moves the
    while-on-treatment estimand away from the plain effect.
    """
    defaults = dict(
        alpha1=4.5, alpha2=4.5, tau1=0.4, tau2=1.2,
        death_logit=(-0.8, 0.0, 0.7, -0.4),
        death_before_t1_frac=0.0,
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def tolerability(n=3000, seed=BASE_SEED, broken_ignorability=False, **kw):
    """Monotone tolerability with a c-driven stratum; optional hidden driver."""
    defaults = dict(
        tol_logit=(0.5, 0.9, -0.6),
        tol_control_shift=1.3,
        monotone_tolerability=True,
        withdraw_prob=0.6,
        tol_confound=1.0 if broken_ignorability else 0.0,
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def confounder_m(n=2000, seed=BASE_SEED, **kw):
    """Therapy as a baseline confounder of uptake and outcome (observational)."""
    defaults = dict(
        design="observational", m_mode="pre",
        delta_m=1.5,
        m_logit=(-0.4, 0.0, 0.6, 0.0),
        lambda_=(-0.3, 1.6, 0.5, -0.4),
        gamma=(0.5, -0.4),
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)


def deviations(n=2000, seed=BASE_SEED, neutral=False, **kw):
    """Protocol deviations: neutral (pure noise) or arm/therapy/c-driven."""
    if neutral:
        mech = (-1.2, 0.0, 0.0, 0.0, 0.0)
    else:
        mech = (-2.5, 1.8, 2.2, 1.1, 0.0)
    defaults = dict(
        delta_m=1.2,
        m_logit=(-0.8, 1.0, 0.6, 0.0),
        deviation_mechanism=mech,
    )
    defaults.update(kw)
    return no_ice(n=n, seed=seed, **defaults)
