"""Seed-driven data-generating processes.

One :class:`ScenarioConfig` fully determines a cohort: identical configs
(including the seed) reproduce bit-identical :class:`PotentialTable` output.
Randomness comes from a Philox counter-based generator keyed by the config
seed (replication sweeps derive per-replication seeds with
:func:`estimand_lab.rng.split_seed`).

The same fixed sequence of raw draws is consumed for every configuration,
so two configs that differ only in mechanism coefficients share their
structural noise (common random numbers). That is what makes oracle
invariance checks exact: raising an intercurrent-event rate cannot move the
therapy-free endpoints.

Structural endpoint model (per assessment t in {1, 2}, treatment x):

    y_t(x) = clip( alpha_t + tau_t * x + gamma . c + u_coef * U
                   + sigma * eps_t , 0, 10 )
    y2 additionally gains delta_m * M(x) before clipping.

eps_1 and eps_2 share a participant-level component (correlation ``rho``)
and are common to both treatment levels, so with no intercurrent events the
individual effect is exactly tau_t for everyone.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .potential_outcomes import (
    DEATH_BETWEEN_T1_T2,
    DEATH_BY_T2_BEFORE_T1,
    PotentialTable,
)
from .rng import make_generator, split_seed

__all__ = [
    "ScenarioConfig",
    "simulate_population",
    "split_seed",
    "load_config",
    "save_config",
    "parse_config_text",
    "config_to_text",
]


def _expit(z):
    return 1.0 / (1.0 + np.exp(-z))


@dataclass
class ScenarioConfig:
    """Full DGP parameterization.

    Vector fields and their layouts (k = confounder dimension):

    * ``gamma``: (k,) confounder effect on both endpoints.
    * ``lambda_``: (2 + k,) uptake logit ``[intercept, m, c...]``
      (observational design only; file key ``lambda``).
    * ``m_logit``: (2 + k,) therapy logit ``[intercept, arm, c...]``;
      the arm slope must be 0 when ``m_mode='pre'``.
    * ``death_logit``: (2 + k,) death-by-t2 logit ``[intercept, arm, c...]``.
    * ``tol_logit``: (1 + k,) experimental-treatment tolerability logit
      ``[intercept, c...]``.
    * ``deviation_mechanism``: (3 + k,) protocol-deviation logit
      ``[intercept, arm, m, c...]``.
    """

    n: int = 1000
    k: int = 2
    seed: int = 1
    alpha1: float = 5.0
    alpha2: float = 5.0
    tau1: float = 1.0
    tau2: float = 1.0
    gamma: tuple = (0.5, -0.4)
    rho: float = 0.5
    sigma: float = 1.0
    design: str = "randomized"  # or "observational" (uptake replaces assignment)
    lambda_: tuple = (0.0, 0.0, 0.0, 0.0)
    m_mode: str = "post"  # "post": therapy after treatment start; "pre": baseline trait
    delta_m: float = 0.0
    m_logit: tuple = (-30.0, 0.0, 0.0, 0.0)
    death_logit: tuple = (-30.0, 0.0, 0.0, 0.0)
    death_before_t1_frac: float = 0.5
    tol_logit: tuple = (30.0, 0.0, 0.0)
    tol_control_shift: float = 0.0
    monotone_tolerability: bool = True
    tol_confound: float = 0.0  # unobserved driver of tolerability and endpoints
    withdraw_prob: float = 0.0
    deviation_mechanism: tuple = (-30.0, 0.0, 0.0, 0.0, 0.0)
    nodose_prob: float = 0.0
    nodata_prob: float = 0.0

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.design not in ("randomized", "observational"):
            raise ConfigError(f"design must be randomized|observational, got {self.design!r}")
        if self.m_mode not in ("pre", "post"):
            raise ConfigError(f"m_mode must be pre|post, got {self.m_mode!r}")
        if self.design == "observational" and self.m_mode == "post":
            raise ConfigError(
                "observational design requires m_mode=pre "
                "(uptake depends on M, so M cannot depend on the taken treatment)"
            )
        if self.m_mode == "pre" and self.m_logit[1] != 0.0:
            raise ConfigError("m_logit arm slope must be 0 when m_mode=pre")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError("rho must be in [0, 1]")
        if self.tol_control_shift < 0:
            raise ConfigError("tol_control_shift must be >= 0 (monotone direction)")
        for name, lo, hi in (
            ("death_before_t1_frac", 0.0, 1.0),
            ("withdraw_prob", 0.0, 1.0),
            ("nodose_prob", 0.0, 1.0),
            ("nodata_prob", 0.0, 1.0),
        ):
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ConfigError(f"{name} must be in [{lo}, {hi}], got {v}")
        lengths = {
            "gamma": self.k,
            "lambda_": 2 + self.k,
            "m_logit": 2 + self.k,
            "death_logit": 2 + self.k,
            "tol_logit": 1 + self.k,
            "deviation_mechanism": 3 + self.k,
        }
        for name, want in lengths.items():
            vec = getattr(self, name)
            if len(vec) != want:
                raise ConfigError(f"{name} must have length {want}, got {len(vec)}")
            if not all(math.isfinite(v) for v in vec):
                raise ConfigError(f"{name} contains a non-finite value")
        for name in ("alpha1", "alpha2", "tau1", "tau2", "delta_m", "sigma",
                     "tol_confound", "tol_control_shift"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} is not finite")


def simulate_population(cfg: ScenarioConfig) -> PotentialTable:
    """Materialize a fully-populated latent cohort for one scenario."""
    cfg.validate()
    n, k = cfg.n, cfg.k
    rng = make_generator(cfg.seed)

    # Fixed draw order; every stream is drawn regardless of configuration so
    # that coefficient-only config changes share random numbers.
    c = rng.standard_normal((n, k))
    z_shared = rng.standard_normal(n)
    z_t1 = rng.standard_normal(n)
    z_t2 = rng.standard_normal(n)
    u_latent = rng.standard_normal(n)
    u_r = rng.random(n)
    u_uptake = rng.random(n)
    u_m = rng.random(n)
    u_death = rng.random(n)
    u_death_split = rng.random(n)
    u_tol = rng.random(n)
    u_tol2 = rng.random(n)
    u_withdraw = rng.random(n)
    u_dev = rng.random(n)
    u_nodose = rng.random(n)
    u_nodata = rng.random(n)

    r = (u_r < 0.5).astype(np.int8)

    eps1 = math.sqrt(cfg.rho) * z_shared + math.sqrt(1.0 - cfg.rho) * z_t1
    eps2 = math.sqrt(cfg.rho) * z_shared + math.sqrt(1.0 - cfg.rho) * z_t2

    gamma_c = c @ np.asarray(cfg.gamma, dtype=float)
    confound = cfg.tol_confound * u_latent

    # tolerability: shared-uniform coupling keeps the margins logistic under
    # both treatments while enforcing T(exp)=1 => T(ctl)=1 when monotone
    tol_lin = cfg.tol_logit[0] + c @ np.asarray(cfg.tol_logit[1:], dtype=float) + confound
    p_tol_exp = _expit(tol_lin)
    p_tol_ctl = _expit(tol_lin + cfg.tol_control_shift)
    t_exp = (u_tol < p_tol_exp).astype(np.int8)
    if cfg.monotone_tolerability:
        t_ctl = (u_tol < p_tol_ctl).astype(np.int8)
    else:
        t_ctl = (u_tol2 < p_tol_ctl).astype(np.int8)
    t_under = np.stack([t_ctl, t_exp], axis=1)

    # concomitant therapy
    m_c = c @ np.asarray(cfg.m_logit[2:], dtype=float)
    if cfg.m_mode == "pre":
        m_both = (u_m < _expit(cfg.m_logit[0] + m_c)).astype(np.int8)
        m_under = np.stack([m_both, m_both], axis=1)
    else:
        m0 = (u_m < _expit(cfg.m_logit[0] + m_c)).astype(np.int8)
        m1 = (u_m < _expit(cfg.m_logit[0] + cfg.m_logit[1] + m_c)).astype(np.int8)
        m_under = np.stack([m0, m1], axis=1)

    # treatment uptake
    if cfg.design == "randomized":
        x_under = np.tile(np.array([0, 1], dtype=np.int8), (n, 1))
    else:
        lam = np.asarray(cfg.lambda_, dtype=float)
        p_x = _expit(lam[0] + lam[1] * m_under[:, 0] + c @ lam[2:])
        uptake = (u_uptake < p_x).astype(np.int8)
        x_under = np.stack([uptake, uptake], axis=1)

    # endpoints per treatment level
    y1_free = np.empty((n, 2))
    y2_free = np.empty((n, 2))
    y1_under = np.empty((n, 2))
    y2_under = np.empty((n, 2))
    lo, hi = 0.0, 10.0
    for x in (0, 1):
        base1 = cfg.alpha1 + cfg.tau1 * x + gamma_c + confound + cfg.sigma * eps1
        base2 = cfg.alpha2 + cfg.tau2 * x + gamma_c + confound + cfg.sigma * eps2
        y1_free[:, x] = np.clip(base1, lo, hi)
        y2_free[:, x] = np.clip(base2, lo, hi)
        y1_under[:, x] = y1_free[:, x]  # therapy starts after the first assessment
        y2_under[:, x] = np.clip(base2 + cfg.delta_m * m_under[:, x], lo, hi)

    # death: nested draws (die by t2? then before t1?), coupled across arms
    d_c = c @ np.asarray(cfg.death_logit[2:], dtype=float)
    before_t1 = u_death_split < cfg.death_before_t1_frac
    death_under = np.zeros((n, 2), dtype=np.int8)
    for x in (0, 1):
        dies = u_death < _expit(cfg.death_logit[0] + cfg.death_logit[1] * x + d_c)
        death_under[:, x] = np.where(
            dies, np.where(before_t1, DEATH_BY_T2_BEFORE_T1, DEATH_BETWEEN_T1_T2), 0
        )

    # toxicity withdrawal: only intolerant participants may withdraw
    withdraws = u_withdraw < cfg.withdraw_prob
    w_under = ((1 - t_under) * withdraws[:, None]).astype(np.int8)

    # protocol deviation
    dev = np.asarray(cfg.deviation_mechanism, dtype=float)
    dev_c = c @ dev[3:]
    dev_under = np.empty((n, 2), dtype=np.int8)
    for x in (0, 1):
        p_dev = _expit(dev[0] + dev[1] * x + dev[2] * m_under[:, x] + dev_c)
        dev_under[:, x] = (u_dev < p_dev).astype(np.int8)

    return PotentialTable(
        ids=np.arange(1, n + 1, dtype=np.int64),
        c=c,
        s=np.ones(n, dtype=np.int8),
        r=r,
        x_under=x_under,
        y1_under=y1_under,
        y2_under=y2_under,
        y1_free=y1_free,
        y2_free=y2_free,
        m_under=m_under,
        death_under=death_under,
        t_under=t_under,
        w_under=w_under,
        dev_under=dev_under,
        any_dose=u_nodose >= cfg.nodose_prob,
        post_rand_data=(u_nodose >= cfg.nodose_prob) & (u_nodata >= cfg.nodata_prob),
    )


# --- flat key=value serialization -----------------------------------------

_VECTOR_FIELDS = {"gamma", "lambda_", "m_logit", "death_logit", "tol_logit",
                  "deviation_mechanism"}
_INT_FIELDS = {"n", "k", "seed"}
_BOOL_FIELDS = {"monotone_tolerability"}
_STR_FIELDS = {"design", "m_mode"}


def _field_key(name: str) -> str:
    return "lambda" if name == "lambda_" else name


def _field_name(key: str) -> str:
    return "lambda_" if key == "lambda" else key


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse the flat ``key=value`` scenario format (# starts a comment)."""
    known = {_field_key(f.name): f.name for f in dataclasses.fields(ScenarioConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, rhs = line.partition("=")
        key = key.strip()
        rhs = rhs.strip()
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name = known[key]
        if name in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if name in _VECTOR_FIELDS:
                values[name] = tuple(float(v) for v in rhs.split(",")) if rhs else ()
            elif name in _INT_FIELDS:
                values[name] = int(rhs)
            elif name in _BOOL_FIELDS:
                if rhs not in ("true", "false"):
                    raise ValueError(f"expected true|false, got {rhs!r}")
                values[name] = rhs == "true"
            elif name in _STR_FIELDS:
                values[name] = rhs
            else:
                values[name] = float(rhs)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    cfg = ScenarioConfig(**values)
    cfg.validate()
    return cfg


def config_to_text(cfg: ScenarioConfig) -> str:
    """Canonical flat rendering (field order of the dataclass)."""
    lines = []
    for f in dataclasses.fields(ScenarioConfig):
        value = getattr(cfg, f.name)
        if f.name in _VECTOR_FIELDS:
            rendered = ",".join(f"{v:.17g}" for v in value)
        elif f.name in _BOOL_FIELDS:
            rendered = "true" if value else "false"
        elif f.name in _INT_FIELDS:
            rendered = str(value)
        elif f.name in _STR_FIELDS:
            rendered = value
        else:
            rendered = f"{value:.17g}"
        lines.append(f"{_field_key(f.name)}={rendered}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def save_config(cfg: ScenarioConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_to_text(cfg))
