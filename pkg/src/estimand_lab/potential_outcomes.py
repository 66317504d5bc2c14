"""Latent potential-outcome data model and the consistency mapping.

A simulated cohort is stored column-wise (:class:`PotentialTable`) because
every downstream computation is vectorized; :class:`PotentialParticipant`
and :class:`ObservedRecord` are per-row views used by hand-built tables and
the scalar operations.

Pair-valued fields follow one convention throughout the package:

* ``x_under`` is indexed by randomized arm: ``(X(R=0), X(R=1))``.
* every other ``*_under`` pair is indexed by treatment level:
  ``y2_under = (Y2 under control treatment, Y2 under experimental treatment)``.

Under full compliance the two indexings coincide; in the observational
variant (uptake instead of assignment) the distinction matters and the
consistency rule composes them: ``x_obs = x_under[r]`` and, when uncensored,
``y2_obs = y2_under[x_obs]``.
"""
from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

import numpy as np

DEATH_NONE = 0
DEATH_BETWEEN_T1_T2 = 1
DEATH_BY_T2_BEFORE_T1 = 2
DEATH_LABELS = ("none", "between_t1_t2", "by_t2_before_t1")

CASE_NONE = 0
CASE_1 = 1  # concomitant therapy, full follow-up
CASE_2 = 2  # death by the second assessment, before the first
CASE_3 = 3  # death between the two assessments
CASE_4 = 4  # toxicity withdrawal, no assessments
CASE_LABELS = ("none", "case1", "case2", "case3", "case4")

ENDPOINT_SCALE = (0.0, 10.0)  # disability index ceiling used by composite recoding


class PrincipalStratum(enum.IntEnum):
    """Joint potential-tolerability stratum."""

    P1 = 1  # tolerates both treatments
    P2 = 2  # tolerates neither
    P3 = 3  # tolerates control only
    P4 = 4  # tolerates experimental only


@dataclass
class PotentialParticipant:
    """One row of the latent table (both arms known)."""

    id: int
    c: np.ndarray
    s: int
    r: int
    x_under: tuple[int, int]
    y1_under: tuple[float, float]
    y2_under: tuple[float, float]
    y1_free: tuple[float, float]  # endpoints with concomitant therapy forced off
    y2_free: tuple[float, float]
    m_under: tuple[int, int]
    death_under: tuple[int, int]
    t_under: tuple[int, int]
    w_under: tuple[int, int]  # toxicity withdrawal indicator per treatment
    dev_under: tuple[int, int]
    any_dose: bool = True
    post_rand_data: bool = True


@dataclass
class ObservedRecord:
    """Single-world view produced by :func:`derive_observed`."""

    id: int
    c: np.ndarray
    r_obs: int
    x_obs: int
    m_obs: int
    death_obs: int
    t_obs: int
    y1_obs: float | None
    y2_obs: float | None
    figure2_case: str
    enrolled: bool
    any_dose: bool
    post_rand_data: bool
    protocol_deviation: bool


def _pairs(arr):
    return np.asarray(arr)


@dataclass
class PotentialTable:
    """Column-wise latent cohort. Shapes: (n,), (n, k) or (n, 2) as noted."""

    ids: np.ndarray          # (n,) int
    c: np.ndarray            # (n, k) float
    s: np.ndarray            # (n,) int
    r: np.ndarray            # (n,) int
    x_under: np.ndarray      # (n, 2) int, indexed by arm
    y1_under: np.ndarray     # (n, 2) float, indexed by treatment
    y2_under: np.ndarray     # (n, 2) float
    y1_free: np.ndarray      # (n, 2) float
    y2_free: np.ndarray      # (n, 2) float
    m_under: np.ndarray      # (n, 2) int
    death_under: np.ndarray  # (n, 2) int codes DEATH_*
    t_under: np.ndarray      # (n, 2) int
    w_under: np.ndarray      # (n, 2) int
    dev_under: np.ndarray    # (n, 2) int
    any_dose: np.ndarray     # (n,) bool
    post_rand_data: np.ndarray  # (n,) bool

    def __post_init__(self):
        n = len(self.ids)
        for f in dataclasses.fields(self):
            arr = getattr(self, f.name)
            if arr.shape[0] != n:
                raise ValueError(f"column {f.name} has {arr.shape[0]} rows, expected {n}")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def k(self) -> int:
        return self.c.shape[1]

    def participant(self, i: int) -> PotentialParticipant:
        return PotentialParticipant(
            id=int(self.ids[i]),
            c=self.c[i].copy(),
            s=int(self.s[i]),
            r=int(self.r[i]),
            x_under=(int(self.x_under[i, 0]), int(self.x_under[i, 1])),
            y1_under=(float(self.y1_under[i, 0]), float(self.y1_under[i, 1])),
            y2_under=(float(self.y2_under[i, 0]), float(self.y2_under[i, 1])),
            y1_free=(float(self.y1_free[i, 0]), float(self.y1_free[i, 1])),
            y2_free=(float(self.y2_free[i, 0]), float(self.y2_free[i, 1])),
            m_under=(int(self.m_under[i, 0]), int(self.m_under[i, 1])),
            death_under=(int(self.death_under[i, 0]), int(self.death_under[i, 1])),
            t_under=(int(self.t_under[i, 0]), int(self.t_under[i, 1])),
            w_under=(int(self.w_under[i, 0]), int(self.w_under[i, 1])),
            dev_under=(int(self.dev_under[i, 0]), int(self.dev_under[i, 1])),
            any_dose=bool(self.any_dose[i]),
            post_rand_data=bool(self.post_rand_data[i]),
        )

    def participants(self):
        return [self.participant(i) for i in range(self.n)]

    @classmethod
    def from_participants(cls, rows: list[PotentialParticipant]) -> "PotentialTable":
        return cls(
            ids=np.array([p.id for p in rows], dtype=np.int64),
            c=np.array([p.c for p in rows], dtype=float).reshape(len(rows), -1),
            s=np.array([p.s for p in rows], dtype=np.int8),
            r=np.array([p.r for p in rows], dtype=np.int8),
            x_under=_pairs([p.x_under for p in rows]).astype(np.int8),
            y1_under=_pairs([p.y1_under for p in rows]).astype(float),
            y2_under=_pairs([p.y2_under for p in rows]).astype(float),
            y1_free=_pairs([p.y1_free for p in rows]).astype(float),
            y2_free=_pairs([p.y2_free for p in rows]).astype(float),
            m_under=_pairs([p.m_under for p in rows]).astype(np.int8),
            death_under=_pairs([p.death_under for p in rows]).astype(np.int8),
            t_under=_pairs([p.t_under for p in rows]).astype(np.int8),
            w_under=_pairs([p.w_under for p in rows]).astype(np.int8),
            dev_under=_pairs([p.dev_under for p in rows]).astype(np.int8),
            any_dose=np.array([p.any_dose for p in rows], dtype=bool),
            post_rand_data=np.array([p.post_rand_data for p in rows], dtype=bool),
        )


@dataclass
class ObservedTable:
    """Column-wise observed dataset; censored endpoints are NaN."""

    ids: np.ndarray
    c: np.ndarray
    r_obs: np.ndarray
    x_obs: np.ndarray
    m_obs: np.ndarray
    death_obs: np.ndarray
    t_obs: np.ndarray
    y1_obs: np.ndarray
    y2_obs: np.ndarray
    case: np.ndarray  # figure-2 case codes CASE_*
    enrolled: np.ndarray
    any_dose: np.ndarray
    post_rand_data: np.ndarray
    deviation: np.ndarray

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def k(self) -> int:
        return self.c.shape[1]

    def record(self, i: int) -> ObservedRecord:
        y1 = float(self.y1_obs[i])
        y2 = float(self.y2_obs[i])
        return ObservedRecord(
            id=int(self.ids[i]),
            c=self.c[i].copy(),
            r_obs=int(self.r_obs[i]),
            x_obs=int(self.x_obs[i]),
            m_obs=int(self.m_obs[i]),
            death_obs=int(self.death_obs[i]),
            t_obs=int(self.t_obs[i]),
            y1_obs=None if np.isnan(y1) else y1,
            y2_obs=None if np.isnan(y2) else y2,
            figure2_case=CASE_LABELS[int(self.case[i])],
            enrolled=bool(self.enrolled[i]),
            any_dose=bool(self.any_dose[i]),
            post_rand_data=bool(self.post_rand_data[i]),
            protocol_deviation=bool(self.deviation[i]),
        )

    def records(self):
        return [self.record(i) for i in range(self.n)]

    def subset(self, mask: np.ndarray) -> "ObservedTable":
        return ObservedTable(
            **{
                f.name: getattr(self, f.name)[mask]
                for f in dataclasses.fields(self)
            }
        )

    def take(self, indices: np.ndarray) -> "ObservedTable":
        """Row selection by (possibly repeated) integer index, e.g. a resample."""
        return self.subset(np.asarray(indices))


def assign_case(m_obs, death_obs, w_obs):
    """Figure-2 case decision table (total over all combinations).

    Death categories dominate: death before the first assessment is case 2
    and death between assessments is case 3 regardless of other events.
    Among survivors, a toxicity withdrawal is case 4 and concomitant-therapy
    use with full follow-up is case 1.
    """
    m_obs = np.asarray(m_obs)
    death_obs = np.asarray(death_obs)
    w_obs = np.asarray(w_obs)
    case = np.zeros(m_obs.shape, dtype=np.int8)
    alive = death_obs == DEATH_NONE
    case[death_obs == DEATH_BY_T2_BEFORE_T1] = CASE_2
    case[death_obs == DEATH_BETWEEN_T1_T2] = CASE_3
    case[alive & (w_obs == 1)] = CASE_4
    case[alive & (w_obs == 0) & (m_obs == 1)] = CASE_1
    return case


def derive_observed_table(pop: PotentialTable) -> ObservedTable:
    """Vectorized consistency rule: select the realized arm, censor by case.

    Only the components indexed by the realized assignment/treatment are
    read; the counterfactual half of every pair never reaches the output.
    """
    rows = np.arange(pop.n)
    r = pop.r.astype(np.int64)
    x_obs = pop.x_under[rows, r]
    xi = x_obs.astype(np.int64)
    m_obs = pop.m_under[rows, xi]
    death_obs = pop.death_under[rows, xi]
    t_obs = pop.t_under[rows, xi]
    w_obs = pop.w_under[rows, xi]
    dev_obs = pop.dev_under[rows, xi]
    case = assign_case(m_obs, death_obs, w_obs)

    y1 = pop.y1_under[rows, xi].copy()
    y2 = pop.y2_under[rows, xi].copy()
    y1[(case == CASE_2) | (case == CASE_4)] = np.nan
    y2[(death_obs != DEATH_NONE) | (case == CASE_4)] = np.nan

    return ObservedTable(
        ids=pop.ids.copy(),
        c=pop.c.copy(),
        r_obs=pop.r.copy(),
        x_obs=x_obs.astype(np.int8),
        m_obs=m_obs.astype(np.int8),
        death_obs=death_obs.astype(np.int8),
        t_obs=t_obs.astype(np.int8),
        y1_obs=y1,
        y2_obs=y2,
        case=case,
        enrolled=np.ones(pop.n, dtype=bool),
        any_dose=pop.any_dose.copy(),
        post_rand_data=pop.post_rand_data.copy(),
        deviation=dev_obs.astype(bool),
    )


def derive_observed(p: PotentialParticipant) -> ObservedRecord:
    """Consistency rule for a single participant (total function)."""
    table = derive_observed_table(PotentialTable.from_participants([p]))
    return table.record(0)


def individual_effect(p: PotentialParticipant, endpoint: str) -> float:
    """Treated-minus-control difference of the selected potential endpoint."""
    if endpoint == "y1":
        pair = p.y1_under
    elif endpoint == "y2":
        pair = p.y2_under
    else:
        raise ValueError(f"endpoint must be 'y1' or 'y2', got {endpoint!r}")
    return pair[1] - pair[0]


def individual_effects(pop: PotentialTable, endpoint: str = "y2") -> np.ndarray:
    """Vector of treated-minus-control differences over the cohort."""
    if endpoint == "y1":
        pair = pop.y1_under
    elif endpoint == "y2":
        pair = pop.y2_under
    else:
        raise ValueError(f"endpoint must be 'y1' or 'y2', got {endpoint!r}")
    return pair[:, 1] - pair[:, 0]


def stratum_of(p: PotentialParticipant) -> PrincipalStratum:
    """Principal stratum from the joint potential tolerabilities."""
    return PrincipalStratum(int(_STRATUM_CODE[p.t_under[0], p.t_under[1]]))


_STRATUM_CODE = np.array(
    [
        [PrincipalStratum.P2, PrincipalStratum.P4],
        [PrincipalStratum.P3, PrincipalStratum.P1],
    ],
    dtype=np.int8,
)


def strata_of(pop: PotentialTable) -> np.ndarray:
    """Per-participant stratum codes (values of :class:`PrincipalStratum`)."""
    return _STRATUM_CODE[pop.t_under[:, 0], pop.t_under[:, 1]]
