"""Exact estimand values computed from the latent potential-outcome table.

The oracle sees both treatment levels of every participant, so each
strategy's target quantity is a finite-population mean with no sampling
error: the reference every observed-data estimator is judged against.

Strategies compose in the same fixed order the estimators use: composite
recoding, then while-on-treatment selection, then hypothetical substitution
of therapy-free endpoints, then stratum restriction. Undeclared event kinds
leave the latent endpoints untouched (the treatment-policy reading).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EstimandUndefinedError
from .potential_outcomes import (
    DEATH_BETWEEN_T1_T2,
    DEATH_BY_T2_BEFORE_T1,
    DEATH_NONE,
    PotentialTable,
    PrincipalStratum,
    strata_of,
)
from .speclang import AnalysisPlan, EstimandSpec, plan_of

__all__ = ["EstimandValue", "oracle_estimand", "oracle_from_plan", "oracle_ate"]


@dataclass(frozen=True)
class EstimandValue:
    """Ground-truth estimand value and how it was computed."""

    value: float
    strategy: str
    population_size_used: int
    endpoint_used: str = "y2"


def oracle_estimand(pop: PotentialTable, spec: EstimandSpec) -> EstimandValue:
    """Exact value of the estimand declared by ``spec`` on this cohort."""
    return oracle_from_plan(pop, plan_of(spec))


def oracle_from_plan(pop: PotentialTable, plan: AnalysisPlan) -> EstimandValue:
    n = pop.n
    y = pop.y2_under.copy()            # (n, 2), indexed by treatment level
    avail = np.ones((n, 2), dtype=bool)
    from_y1 = np.zeros((n, 2), dtype=bool)
    recoded = np.zeros((n, 2), dtype=bool)

    if plan.composite_worst is not None:
        dead = pop.death_under != DEATH_NONE
        y[dead] = plan.composite_worst
        recoded = dead
    elif plan.while_on_treatment:
        between = pop.death_under == DEATH_BETWEEN_T1_T2
        y[between] = pop.y1_under[between]
        from_y1 = between
        avail[pop.death_under == DEATH_BY_T2_BEFORE_T1] = False

    if plan.impute_therapy:
        substitute = ~recoded & ~from_y1
        y[substitute] = pop.y2_free[substitute]
    # impute_death (hypothetical for death): the latent y2 already is the
    # value had the participant lived, so nothing to do.

    keep = avail[:, 0] & avail[:, 1]
    if plan.principal_stratum:
        keep &= strata_of(pop) == PrincipalStratum.P1
        if not keep.any():
            raise EstimandUndefinedError(
                "estimand undefined: no participant tolerates both treatments"
            )
    if not keep.any():
        raise EstimandUndefinedError(
            "estimand undefined: no participant has an assessment under both treatments"
        )

    diffs = y[keep, 1] - y[keep, 0]
    return EstimandValue(
        value=float(diffs.mean()),
        strategy=plan.estimator_name,
        population_size_used=int(keep.sum()),
        endpoint_used="y2",
    )


def oracle_ate(pop: PotentialTable, endpoint: str = "y2") -> float:
    """Plain average treatment effect: mean individual effect over the cohort."""
    pair = pop.y2_under if endpoint == "y2" else pop.y1_under
    return float((pair[:, 1] - pair[:, 0]).mean())
