"""Bayesian decision rules on posterior null probabilities.

R1 controls the posterior expected FDR at alpha via a step-up rule on the
cumulative mean of sorted probabilities; R2 thresholds raw probabilities at
1/(lambda2+1); R3 bounds the posterior expected count of false discoveries
via a step-up rule on the cumulative sum. All three are threshold rules.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import HypothesisSpec


@dataclass(frozen=True)
class DecisionOutcome:
    delta: np.ndarray  # boolean rejection mask
    rule: str
    threshold: float  # pi cutoff actually applied (reject iff pi < threshold)
    fdr_bar: float
    fnr_bar: float
    fd_bar: float
    fn_bar: float

    @property
    def n_rejected(self) -> int:
        return int(self.delta.sum())


def _validate_pi(pi) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 1 or len(pi) == 0:
        raise ValueError("need a non-empty 1-d vector of posterior null probabilities")
    if np.any(~np.isfinite(pi)) or np.any(pi < 0) or np.any(pi > 1):
        raise ValueError("posterior null probabilities must lie in [0, 1]")
    return pi


def posterior_null_probs(rr_draws: np.ndarray, spec: HypothesisSpec) -> np.ndarray:
    """Fraction of posterior risk-ratio draws in the null region, per region.

    rr_draws is (S, M): S draws for each of M regions.
    """
    rr = np.asarray(rr_draws, dtype=float)
    if rr.ndim != 2 or rr.shape[0] == 0:
        raise ValueError("rr_draws must be a non-empty (draws, regions) matrix")
    return spec.null_mask(rr).mean(axis=0)


def posterior_summaries(delta, pi) -> tuple[float, float, float, float]:
    """Posterior expected (FDR, FNR, FD, FN) for a decision vector."""
    pi = _validate_pi(pi)
    delta = np.asarray(delta, dtype=bool)
    if delta.shape != pi.shape:
        raise ValueError("delta and pi must have the same length")
    m = len(pi)
    n_rej = delta.sum()
    fd = float(pi[delta].sum())
    fn = float((1.0 - pi[~delta]).sum())
    fdr = fd / max(1, n_rej)
    fnr = fn / max(1, m - n_rej)
    return fdr, fnr, fd, fn


def _outcome(delta: np.ndarray, pi: np.ndarray, rule: str, threshold: float) -> DecisionOutcome:
    fdr, fnr, fd, fn = posterior_summaries(delta, pi)
    return DecisionOutcome(
        delta=delta, rule=rule, threshold=threshold, fdr_bar=fdr, fnr_bar=fnr, fd_bar=fd, fn_bar=fn
    )


def _stable_order(pi: np.ndarray) -> np.ndarray:
    # ties broken by region index for determinism
    return np.argsort(pi, kind="stable")


def _prefix_reject(pi: np.ndarray, order: np.ndarray, r: int) -> tuple[np.ndarray, float]:
    delta = np.zeros(len(pi), dtype=bool)
    if r > 0:
        delta[order[:r]] = True
        threshold = float(pi[order[r]]) if r < len(pi) else float(np.inf)
    else:
        threshold = float(pi[order[0]]) if len(pi) else 0.0
    return delta, threshold


def rule_r1(pi, alpha: float) -> DecisionOutcome:
    """Reject the r1 smallest pi where the running mean stays <= alpha."""
    pi = _validate_pi(pi)
    if not 0 < alpha < 1:
        raise ValueError("alpha must be in (0, 1)")
    order = _stable_order(pi)
    cum_mean = np.cumsum(pi[order]) / np.arange(1, len(pi) + 1)
    qualifying = np.nonzero(cum_mean <= alpha)[0]
    r1 = int(qualifying[-1]) + 1 if len(qualifying) else 0
    delta, threshold = _prefix_reject(pi, order, r1)
    return _outcome(delta, pi, "R1", threshold)


def rule_r2(pi, lambda2: float) -> DecisionOutcome:
    """Reject where pi < 1/(lambda2 + 1) (strict at the boundary)."""
    pi = _validate_pi(pi)
    if lambda2 <= 0:
        raise ValueError("lambda2 must be positive")
    threshold = 1.0 / (lambda2 + 1.0)
    return _outcome(pi < threshold, pi, "R2", threshold)


def rule_r3(pi, gamma: float) -> DecisionOutcome:
    """Reject the r3 smallest pi where the running sum stays <= gamma.

    Always rejects at least floor(gamma) tests, even when all pi = 1.
    """
    pi = _validate_pi(pi)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    order = _stable_order(pi)
    qualifying = np.nonzero(np.cumsum(pi[order]) <= gamma)[0]
    r3 = int(qualifying[-1]) + 1 if len(qualifying) else 0
    delta, threshold = _prefix_reject(pi, order, r3)
    return _outcome(delta, pi, "R3", threshold)


# ---------------------------------------------------------------------------
# multi-category classification (five hypothesis families per region)

CATEGORIES = (
    "dec2x",
    "dec",
    "no-change",
    "no-change-some-dec",
    "no-change-some-inc",
    "inc",
    "inc2x",
    "inconclusive",
)


def hypothesis_family(l_absence: float, u_absence: float) -> dict[str, HypothesisSpec]:
    """The five nulls tested per region for the multi-category field."""
    return {
        "h1": HypothesisSpec("ratio-outside-interval", interval=(l_absence, u_absence)),
        "h2": HypothesisSpec("ratio-geq", c=0.5),
        "h3": HypothesisSpec("ratio-geq", c=1.0),
        "h4": HypothesisSpec("ratio-leq", c=1.0),
        "h5": HypothesisSpec("ratio-leq", c=2.0),
    }


@dataclass(frozen=True)
class MultiCategoryResult:
    categories: list[str]
    pi: dict[str, np.ndarray]  # per-hypothesis posterior null probabilities
    rejected: dict[str, np.ndarray]  # per-hypothesis R1 rejection masks
    contradictory: np.ndarray = field(default=None)


def categorize_rejections(rej: dict[str, bool]) -> tuple[str, bool]:
    """Map one region's rejection pattern to a category label.

    Precedence: magnitude-2x statements, then direction, then no-change
    combinations, then plain no-change; anything contradictory (evidence
    for an increase together with evidence for a decrease, or a no-change
    conclusion together with a 2x claim) is flagged inconclusive.
    """
    inc = rej["h4"] or rej["h5"]
    dec = rej["h2"] or rej["h3"]
    if inc and dec:
        return "inconclusive", True
    if rej["h1"] and (rej["h2"] or rej["h5"]):
        return "inconclusive", True
    if rej["h5"]:
        return "inc2x", False
    if rej["h2"]:
        return "dec2x", False
    if rej["h1"] and rej["h4"]:
        return "no-change-some-inc", False
    if rej["h1"] and rej["h3"]:
        return "no-change-some-dec", False
    if rej["h1"]:
        return "no-change", False
    if rej["h4"]:
        return "inc", False
    if rej["h3"]:
        return "dec", False
    return "inconclusive", False


def multi_category(
    rr_draws: np.ndarray, l_absence: float, u_absence: float, alpha: float
) -> MultiCategoryResult:
    """Run R1 separately for each hypothesis family and map the per-region
    rejection patterns to the eight-category field."""
    if not 0 < l_absence < 1 < u_absence:
        raise ValueError("need 0 < l_absence < 1 < u_absence")
    family = hypothesis_family(l_absence, u_absence)
    pi = {name: posterior_null_probs(rr_draws, spec) for name, spec in family.items()}
    rejected = {name: rule_r1(p, alpha).delta for name, p in pi.items()}
    m = rr_draws.shape[1]
    categories, flags = [], []
    for i in range(m):
        cat, flag = categorize_rejections({name: bool(rejected[name][i]) for name in family})
        categories.append(cat)
        flags.append(flag)
    return MultiCategoryResult(
        categories=categories, pi=pi, rejected=rejected, contradictory=np.array(flags)
    )


# ---------------------------------------------------------------------------
# decisions.json


def decisions_to_json(
    region_ids: list[str],
    outcome: DecisionOutcome,
    pi: np.ndarray,
    multi: MultiCategoryResult | None = None,
) -> str:
    regions = []
    for i, rid in enumerate(region_ids):
        entry = {
            "region_id": rid,
            "pi": round(float(pi[i]), 12),
            "delta": int(outcome.delta[i]),
        }
        if multi is not None:
            entry["pi_multi"] = {k: round(float(v[i]), 12) for k, v in multi.pi.items()}
            entry["category"] = multi.categories[i]
            entry["contradictory"] = bool(multi.contradictory[i])
        regions.append(entry)
    threshold = outcome.threshold
    doc = {
        "rule": outcome.rule,
        "threshold": threshold if math.isfinite(threshold) else None,
        "summary": {
            "fdr_bar": outcome.fdr_bar,
            "fnr_bar": outcome.fnr_bar,
            "fd_bar": outcome.fd_bar,
            "fn_bar": outcome.fn_bar,
            "n_rejected": outcome.n_rejected,
        },
        "regions": regions,
    }
    return json.dumps(doc, indent=2, sort_keys=True)
