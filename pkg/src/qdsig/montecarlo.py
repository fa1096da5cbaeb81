"""Seeded Monte Carlo runs of the protocol checked against the analytic bounds.

Trials are processed in blocks of ``block`` trials. Block ``b`` draws from
``numpy.random.default_rng([seed, b])``, so a run is reproducible for a
given ``(seed, block)`` whatever order the blocks are evaluated in.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import beta

from . import protocol
from .alphabet import ChannelParams, honest_error
from .protocol import HONEST, REPUDIATE, AdversaryConfig
from .security import (NoSecurityError, forging_bound, p_min, repudiation_bound, robustness_bound,
                       thresholds)


def binomial_interval(k: int, n: int, confidence: float = 0.95) -> tuple[float, float]:
    """Two-sided Clopper-Pearson interval."""
    a = 1.0 - confidence
    lo = 0.0 if k == 0 else float(beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def binomial_upper(k: int, n: int, confidence: float = 0.95) -> float:
    """One-sided Clopper-Pearson upper limit."""
    return 1.0 if k == n else float(beta.ppf(confidence, k + 1, n - k))


def theory_security(ch: ChannelParams) -> tuple[float, float]:
    """``(p_err, C_min)`` for a heterodyne channel from its theory cost matrix."""
    e = honest_error(ch)
    return e, e + p_min(ch.alpha_p) * (0.5 - e)


@dataclass(frozen=True)
class MonteCarloConfig:
    adversary: AdversaryConfig
    L: int
    trials: int
    seed: int
    channel: Optional[ChannelParams] = None
    s_a: Optional[float] = None
    s_v: Optional[float] = None
    block: int = 1000

    def __post_init__(self):
        protocol.check_length(self.L)
        if self.trials < 1 or self.block < 1:
            raise ValueError("trials and block size must be positive")
        if (self.s_a is None or self.s_v is None) and self.channel is None:
            raise ValueError("thresholds must be given when no channel is configured")
        if self.adversary.role == HONEST and self.channel is None:
            raise ValueError("an honest run needs a channel")

    def resolved_thresholds(self) -> tuple[float, float]:
        """Explicit thresholds, falling back to equal-risk values for the channel."""
        if self.s_a is not None and self.s_v is not None:
            s_a, s_v = self.s_a, self.s_v
        else:
            d_a, d_v = thresholds(*theory_security(self.channel))
            s_a = d_a if self.s_a is None else self.s_a
            s_v = d_v if self.s_v is None else self.s_v
        if not s_v > s_a:
            raise ValueError(f"s_v={s_v} must exceed s_a={s_a}")
        return s_a, s_v


def _block_events(cfg: MonteCarloConfig, n: int, rng: np.random.Generator, s_a: float, s_v: float):
    adv = cfg.adversary
    if adv.role == HONEST:
        bob, charlie = protocol.honest_trials(n, cfg.L, cfg.channel, cfg.channel, s_a, s_v, rng)
        return ~bob, ~charlie
    if adv.role == REPUDIATE:
        return protocol.repudiation_trials(n, adv.p_B, adv.p_C, s_a, s_v, cfg.L, rng), None
    return protocol.forging_trials(n, adv.mismatch_prob, s_v, cfg.L, rng), None


def run_monte_carlo(cfg: MonteCarloConfig) -> dict:
    """Run the configured scenario and compare its event rate with the analytic bound.

    The counted event is honest rejection by Bob, successful repudiation, or
    successful forgery. For honest runs the check is ``rate <= bound``; for
    attacks it is the one-sided 95% Clopper-Pearson upper limit ``<= bound``.
    """
    s_a, s_v = cfg.resolved_thresholds()
    adv = cfg.adversary
    if adv.role == HONEST:
        event = "honest_rejection"
        bound = robustness_bound(honest_error(cfg.channel), s_a, cfg.L)
    elif adv.role == REPUDIATE:
        event = "repudiation"
        bound = repudiation_bound(s_a, s_v, cfg.L)
    else:
        event = "forgery"
        try:
            bound = forging_bound(adv.mismatch_prob, s_v, cfg.L)
        except NoSecurityError:
            bound = 1.0

    successes = 0
    charlie_rejections = 0
    n_blocks = -(-cfg.trials // cfg.block)
    for b in range(n_blocks):
        n = min(cfg.block, cfg.trials - b * cfg.block)
        rng = np.random.default_rng([cfg.seed, b])
        hits, extra = _block_events(cfg, n, rng, s_a, s_v)
        successes += int(hits.sum())
        if extra is not None:
            charlie_rejections += int(extra.sum())

    rate = successes / cfg.trials
    lo, hi = binomial_interval(successes, cfg.trials)
    upper = binomial_upper(successes, cfg.trials)
    ok = rate <= bound if adv.role == HONEST else upper <= bound
    report = {
        "trials": cfg.trials,
        "successes": successes,
        "rate": rate,
        "bound": bound,
        "seed": cfg.seed,
        "event": event,
        "L": cfg.L,
        "s_a": s_a,
        "s_v": s_v,
        "ci95": [lo, hi],
        "upper95": upper,
        "pass": bool(ok),
    }
    if adv.role == HONEST:
        report["charlie_rejections"] = charlie_rejections
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"
