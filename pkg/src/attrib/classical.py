"""Frequentist baselines: likelihood-ratio test for the risk-ratio null and
the Benjamini-Hochberg / Bonferroni multiplicity procedures.

The restricted MLE follows the Farr-Mann closed form on the null boundary
p_F = c * p_C. Written coherently for the null H: p_F / p_C <= c: the
unconstrained optimum is reused when it already satisfies the null, and the
boundary solution is used otherwise.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats


def _binom_loglik(z: int, n: int, p: float) -> float:
    # 0*log(0) == 0 convention
    out = 0.0
    if z > 0:
        if p <= 0:
            return -math.inf
        out += z * math.log(p)
    if n - z > 0:
        if p >= 1:
            return -math.inf
        out += (n - z) * math.log1p(-p)
    return out


def restricted_mle(z_f: int, n_f: int, z_c: int, n_c: int, c: float) -> tuple[float, float]:
    """Constrained MLE of (p_F, p_C) on the boundary p_F = c * p_C.

    Solves the stationarity quadratic for q = p_C and keeps the admissible
    root (higher constrained likelihood if both qualify).
    """
    zs = z_f + z_c
    a = c * (n_f + n_c)
    b = -((1.0 + c) * zs + c * (n_f - z_f) + (n_c - z_c))
    if zs == 0:
        return 0.0, 0.0
    disc = b * b - 4.0 * a * zs
    disc = max(disc, 0.0)
    roots = [(-b - math.sqrt(disc)) / (2.0 * a), (-b + math.sqrt(disc)) / (2.0 * a)]
    q_max = min(1.0, 1.0 / c)
    best, best_ll = None, -math.inf
    for q in roots:
        q = min(max(q, 1e-15), q_max - 1e-15)
        ll = _binom_loglik(z_f, n_f, c * q) + _binom_loglik(z_c, n_c, q)
        if ll > best_ll:
            best, best_ll = q, ll
    return c * best, best


def lrt_statistic(z_f: int, n_f: int, z_c: int, n_c: int, c: float = 1.0) -> float:
    """-2 log likelihood-ratio for H: p_F / p_C <= c.

    Zero whenever the unconstrained MLE already satisfies the null (the
    null is then never rejected).
    """
    if c <= 0:
        raise ValueError("threshold c must be positive")
    p_f_hat = z_f / n_f
    p_c_hat = z_c / n_c
    if p_f_hat <= c * p_c_hat:
        return 0.0
    p_f_r, p_c_r = restricted_mle(z_f, n_f, z_c, n_c, c)
    ll_free = _binom_loglik(z_f, n_f, p_f_hat) + _binom_loglik(z_c, n_c, p_c_hat)
    ll_rest = _binom_loglik(z_f, n_f, p_f_r) + _binom_loglik(z_c, n_c, p_c_r)
    return max(0.0, 2.0 * (ll_free - ll_rest))


def lrt_pvalue(stat: float) -> float:
    """Upper-tail chi-square(1) probability of the LRT statistic."""
    if stat < 0:
        raise ValueError("statistic must be non-negative")
    return float(stats.chi2.sf(stat, df=1))


def _validate_pvalues(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or np.any(p > 1) or np.any(~np.isfinite(p)):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def bh_procedure(p, alpha: float) -> np.ndarray:
    """Benjamini-Hochberg step-up: reject the k smallest p-values where
    k = max{j : p_(j) <= j * alpha / M}. Returns a boolean rejection mask.
    Ties are ordered stably by index.
    """
    p = _validate_pvalues(p)
    m = len(p)
    order = np.argsort(p, kind="stable")
    thresh = alpha * np.arange(1, m + 1) / m
    ok = np.nonzero(p[order] <= thresh)[0]
    reject = np.zeros(m, dtype=bool)
    if len(ok):
        reject[order[: ok[-1] + 1]] = True
    return reject


def bonferroni_procedure(p, alpha: float) -> np.ndarray:
    """Reject where p_i <= alpha / M (boolean mask; ties at the bound reject)."""
    p = _validate_pvalues(p)
    return p <= alpha / len(p)
