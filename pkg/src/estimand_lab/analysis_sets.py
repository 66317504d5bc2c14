"""Nested analysis sets and the selection-bias demonstration.

The four sets nest by construction: the per-protocol set is contained in
the full analysis set, which is contained in the safety set, which is
contained in the intention-to-treat set. Restricting an analysis to a set
whose membership depends on arm and prognosis is exactly how randomization
breaks, which :func:`selection_bias_study` quantifies against the oracle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BalanceDiagnosticError
from .potential_outcomes import ObservedTable

SET_NAMES = ("itts", "ss", "fas", "pps")


@dataclass
class AnalysisSetAssignment:
    """Per-record membership masks, one per analysis set."""

    itts: np.ndarray
    ss: np.ndarray
    fas: np.ndarray
    pps: np.ndarray

    def mask(self, name: str) -> np.ndarray:
        if name not in SET_NAMES:
            raise ValueError(f"unknown analysis set {name!r}")
        return getattr(self, name)


def build_sets(table: ObservedTable) -> AnalysisSetAssignment:
    """Membership rules: enrollment, any dose, post-randomization data, deviation."""
    itts = table.enrolled.astype(bool)
    ss = itts & table.any_dose
    fas = ss & table.post_rand_data
    pps = fas & ~table.deviation.astype(bool)
    return AnalysisSetAssignment(itts=itts, ss=ss, fas=fas, pps=pps)


@dataclass
class BalanceReport:
    """Standardized mean differences of each confounder between arms."""

    set_name: str
    smd: np.ndarray
    flagged: np.ndarray
    degenerate: np.ndarray  # zero pooled variance, SMD reported as 0
    n_control: int
    n_treated: int
    threshold: float

    @property
    def max_abs_smd(self) -> float:
        return float(np.max(np.abs(self.smd))) if self.smd.size else 0.0

    @property
    def any_flagged(self) -> bool:
        return bool(self.flagged.any())


def randomization_balance_check(table: ObservedTable, set_name: str = "itts",
                                sets: AnalysisSetAssignment | None = None,
                                threshold: float = 0.1) -> BalanceReport:
    """Per-confounder standardized mean difference within one analysis set.

    Raises :class:`BalanceDiagnosticError` when either arm is empty within
    the set. A confounder with zero pooled variance gets SMD 0 and a
    degenerate flag instead of propagating NaN.
    """
    if sets is None:
        sets = build_sets(table)
    member = sets.mask(set_name)
    treated = member & (table.r_obs == 1)
    control = member & (table.r_obs == 0)
    n1, n0 = int(treated.sum()), int(control.sum())
    if n1 == 0 or n0 == 0:
        raise BalanceDiagnosticError(
            f"analysis set {set_name!r} has an empty arm (control={n0}, treated={n1})"
        )
    c1 = table.c[treated]
    c0 = table.c[control]
    mean_gap = c1.mean(axis=0) - c0.mean(axis=0)
    var1 = c1.var(axis=0, ddof=1) if n1 > 1 else np.zeros(table.k)
    var0 = c0.var(axis=0, ddof=1) if n0 > 1 else np.zeros(table.k)
    pooled = (var1 + var0) / 2.0
    degenerate = pooled <= 0.0
    smd = np.zeros(table.k)
    ok = ~degenerate
    smd[ok] = mean_gap[ok] / np.sqrt(pooled[ok])
    return BalanceReport(
        set_name=set_name,
        smd=smd,
        flagged=np.abs(smd) > threshold,
        degenerate=degenerate,
        n_control=n0,
        n_treated=n1,
        threshold=threshold,
    )


@dataclass
class SetComparison:
    """One estimator evaluated on FAS and PPS against the oracle."""

    oracle: float
    fas_point: float
    pps_point: float
    fas_gap: float
    pps_gap: float
    n_fas: int
    n_pps: int


def selection_bias_demo(table: ObservedTable, estimator, oracle_value: float) -> SetComparison:
    """Evaluate ``estimator`` on the FAS and PPS subsets of one dataset."""
    sets = build_sets(table)
    fas = estimator(table.subset(sets.fas))
    pps = estimator(table.subset(sets.pps))
    return SetComparison(
        oracle=oracle_value,
        fas_point=fas.point,
        pps_point=pps.point,
        fas_gap=fas.point - oracle_value,
        pps_gap=pps.point - oracle_value,
        n_fas=int(sets.fas.sum()),
        n_pps=int(sets.pps.sum()),
    )
