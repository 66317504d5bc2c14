"""Replication sweeps: many simulated trials, one summary.

Every replication derives its own seed from the root seed via
:func:`~estimand_lab.rng.split_seed`, so sweeps are reproducible and can run
on a thread pool without affecting results; output order follows the
replication index regardless of scheduling. ``ESTIMAND_LAB_THREADS`` caps
the pool.
"""
from __future__ import annotations

import dataclasses
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dgp import ScenarioConfig, simulate_population
from .potential_outcomes import derive_observed_table
from .rng import split_seed

__all__ = ["GapStudy", "run_replications", "gap_study", "worker_count"]


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("ESTIMAND_LAB_THREADS", "")
    if env:
        limit = max(1, int(env))
    else:
        limit = min(4, os.cpu_count() or 1)
    return max(1, min(limit, n_tasks))


def run_replications(cfg: ScenarioConfig, reps: int, fn, threads: int | None = None):
    """Evaluate ``fn(rep_index, rep_cfg)`` for each replication, in order.

    ``rep_cfg`` is the scenario with its seed replaced by the replication
    substream seed; results are returned ordered by replication index.
    """
    seeds = [split_seed(cfg.seed, r) for r in range(reps)]

    def work(r):
        return fn(r, dataclasses.replace(cfg, seed=seeds[r]))

    n_workers = threads if threads is not None else worker_count(reps)
    if n_workers <= 1:
        return [work(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(work, range(reps)))


@dataclass
class GapStudy:
    """Estimator points against the per-replication oracle values."""

    points: np.ndarray
    oracles: np.ndarray

    @property
    def n_ok(self) -> int:
        return int(np.isfinite(self.points).sum())

    @property
    def n_failed(self) -> int:
        return len(self.points) - self.n_ok

    @property
    def gaps(self) -> np.ndarray:
        ok = np.isfinite(self.points)
        return self.points[ok] - self.oracles[ok]

    @property
    def mean_point(self) -> float:
        return float(np.nanmean(self.points))

    @property
    def mean_gap(self) -> float:
        return float(self.gaps.mean())

    @property
    def mc_se(self) -> float:
        """Monte Carlo standard error of the mean gap."""
        g = self.gaps
        if len(g) < 2:
            return 0.0
        return float(g.std(ddof=1) / np.sqrt(len(g)))

    def within(self, k: float = 3.0) -> bool:
        """|mean gap| <= k * MC-SE (the acceptance statistic)."""
        return abs(self.mean_gap) <= k * self.mc_se

    def exceeds(self, k: float = 3.0) -> bool:
        return abs(self.mean_gap) > k * self.mc_se


def gap_study(cfg: ScenarioConfig, reps: int, estimate_fn, oracle_fn,
              threads: int | None = None) -> GapStudy:
    """Replicate (simulate, derive, estimate, oracle) and collect the gaps.

    ``estimate_fn(observed_table, seed)`` returns a point (float or an
    object with ``.point``); exceptions mark the replication as failed.
    ``oracle_fn(potential_table)`` returns the ground truth for that cohort.
    """

    def one(r, rep_cfg):
        pop = simulate_population(rep_cfg)
        obs = derive_observed_table(pop)
        oracle = oracle_fn(pop)
        try:
            est = estimate_fn(obs, rep_cfg.seed)
            point = est.point if hasattr(est, "point") else float(est)
        except Exception:
            point = np.nan
        return point, float(oracle)

    results = run_replications(cfg, reps, one, threads=threads)
    points = np.array([p for p, _ in results])
    oracles = np.array([o for _, o in results])
    return GapStudy(points=points, oracles=oracles)
