"""Model definitions M1-M9 and RNB: parameter spaces, log-likelihood,
log-priors, and the CAR / Leroux / Gaussian-process structure builders.

Every model shares the binomial likelihood with p_ki = invlogit(mu_k +
beta_ki); they differ in the prior for the region effects beta_k. The two
scenarios are a priori independent and share only the model class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .core import DataError, RegionSet, ScenarioCounts
from .distributions import (
    GdpParams,
    SkewTParams,
    gdp_logpdf,
    matern_correlation,
    skewt_logpdf,
)
from .eof import EofBasis

MODEL_IDS = ("m1", "m2", "m3", "m4", "m5", "m6", "m7", "m8", "m9", "rnb")

# EOF truncations for the fixed-truncation models
EOF_TRUNCATION = {"m7": 30, "m8": 10, "m9": 50}

MU_PRIOR_SD = 10.0
SCALE_PRIOR_UPPER = 100.0  # uniform upper bound for tau, sigma, sigma_alpha, r
GDP_SHAPE = 1.0  # fixed shape for the sparsity prior


@dataclass(frozen=True)
class ModelSpec:
    """A model id plus its fixed settings."""

    model_id: str
    eof_p: int | None = None  # truncation for m7/m8/m9; None = all columns (rnb)
    matern_smoothness: float = 0.5  # fixed for m6 fitting

    def __post_init__(self):
        if self.model_id not in MODEL_IDS:
            raise ValueError(f"unknown model {self.model_id!r}")
        if self.model_id in EOF_TRUNCATION and self.eof_p is None:
            object.__setattr__(self, "eof_p", EOF_TRUNCATION[self.model_id])

    @property
    def uses_eofs(self) -> bool:
        return self.model_id in ("m7", "m8", "m9", "rnb")

    @property
    def needs_geometry(self) -> bool:
        return self.model_id in ("m4", "m5", "m6")


@dataclass
class ScenarioParams:
    """Parameter block for one scenario of one model; unused fields stay None."""

    mu: float = 0.0
    beta: np.ndarray | None = None  # region effects (m2-m6) or total H a + xi (eof models)
    alpha: np.ndarray | None = None  # EOF coefficients
    xi: np.ndarray | None = None  # EOF residuals
    tau: float | None = None
    sigma: float | None = None
    delta: float | None = None
    inv_nu: float | None = None
    lam: float | None = None
    phi: float | None = None
    sigma_alpha: float | None = None
    r: float | None = None


def inv_logit(eta: np.ndarray) -> np.ndarray:
    return special.expit(eta)


def binomial_logpmf(z: np.ndarray, n: np.ndarray, eta: np.ndarray) -> np.ndarray:
    """Per-region binomial log-pmf on the logit scale (stable in eta)."""
    return (
        special.gammaln(n + 1)
        - special.gammaln(z + 1)
        - special.gammaln(n - z + 1)
        + z * eta
        - n * np.logaddexp(0.0, eta)
    )


def scenario_effects(params: ScenarioParams, spec: ModelSpec, basis: EofBasis | None) -> np.ndarray:
    if spec.uses_eofs:
        if basis is None:
            raise DataError(f"model {spec.model_id} needs an EOF basis")
        return basis.h @ params.alpha + params.xi
    return params.beta


def log_likelihood(
    counts: ScenarioCounts,
    params_f: ScenarioParams,
    params_c: ScenarioParams,
    spec: ModelSpec,
    basis_f: EofBasis | None = None,
    basis_c: EofBasis | None = None,
) -> float:
    """Binomial log-likelihood summed over regions and both scenarios."""
    eta_f = params_f.mu + scenario_effects(params_f, spec, basis_f)
    eta_c = params_c.mu + scenario_effects(params_c, spec, basis_c)
    return float(
        binomial_logpmf(counts.z_f, counts.n_f, eta_f).sum()
        + binomial_logpmf(counts.z_c, counts.n_c, eta_c).sum()
    )


# ---------------------------------------------------------------------------
# structure builders


def car_precision(regions: RegionSet) -> np.ndarray:
    """Intrinsic CAR precision pattern Q = D - A (degree minus adjacency)."""
    m = regions.m
    q = np.zeros((m, m))
    for i, nbrs in enumerate(regions.adjacency):
        q[i, i] = len(nbrs)
        for j in nbrs:
            q[i, j] = -1.0
    return q


def car_log_density(beta: np.ndarray, tau2: float, q: np.ndarray) -> float:
    """Intrinsic CAR log density on the (M-1)-dimensional contrast subspace.

    Uses the M-1 nonzero eigenvalues of Q; invariant to adding a constant
    to beta (the improper direction).
    """
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    m = len(beta)
    w = np.linalg.eigvalsh((q + q.T) / 2.0)
    nonzero = w[w > 1e-10 * max(w[-1], 1.0)]
    if len(nonzero) != m - 1:
        raise DataError("adjacency graph must be connected (Q rank M-1)")
    quad = float(beta @ q @ beta)
    return (
        -0.5 * (m - 1) * math.log(2.0 * math.pi * tau2)
        + 0.5 * float(np.log(nonzero).sum())
        - quad / (2.0 * tau2)
    )


def leroux_precision(lam: float, tau2: float, q: np.ndarray) -> np.ndarray:
    """Convex combination of exchangeable and CAR precisions,
    tau^-2 [(1-lam) I + lam Q]; full rank for lam in [0, 1)."""
    if not 0 <= lam < 1:
        raise ValueError("lambda must be in [0, 1)")
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    return ((1.0 - lam) * np.eye(q.shape[0]) + lam * q) / tau2


def gp_covariance(
    centroids: np.ndarray, tau2: float, phi: float, nu_smooth: float = 0.5, jitter: float = 1e-8
) -> np.ndarray:
    """Matern covariance over centroid chord distances with diagonal tau2
    (plus a small jitter so Cholesky factorization succeeds)."""
    if tau2 <= 0:
        raise ValueError("tau2 must be positive")
    cent = np.asarray(centroids, dtype=float)
    diff = cent[:, None, :] - cent[None, :, :]
    d = np.sqrt((diff**2).sum(axis=2))
    cov = tau2 * matern_correlation(d, phi, nu_smooth)
    return cov + jitter * tau2 * np.eye(len(cent))


def mvn_logpdf_precision(x: np.ndarray, prec: np.ndarray) -> float:
    """Mean-zero Gaussian log density from a precision matrix (Cholesky)."""
    m = len(x)
    chol = np.linalg.cholesky(prec)
    logdet_prec = 2.0 * float(np.log(np.diag(chol)).sum())
    quad = float(x @ prec @ x)
    return -0.5 * (m * math.log(2.0 * math.pi) - logdet_prec + quad)


def mvn_logpdf_covariance(x: np.ndarray, cov: np.ndarray) -> float:
    m = len(x)
    chol = np.linalg.cholesky(cov)
    y = linalg.solve_triangular(chol, x, lower=True)
    logdet = 2.0 * float(np.log(np.diag(chol)).sum())
    return -0.5 * (m * math.log(2.0 * math.pi) + logdet + float(y @ y))


def max_centroid_distance(regions: RegionSet) -> float:
    return float(regions.pairwise_distances().max())


# ---------------------------------------------------------------------------
# priors


def _log_uniform(value: float, lo: float, hi: float) -> float:
    if not lo < value < hi:
        return -math.inf
    return -math.log(hi - lo)


def _log_normal_pdf(value: float, sd: float) -> float:
    return -0.5 * math.log(2.0 * math.pi * sd * sd) - value * value / (2.0 * sd * sd)


def log_prior(
    spec: ModelSpec,
    params: ScenarioParams,
    regions: RegionSet | None = None,
    basis: EofBasis | None = None,
    q: np.ndarray | None = None,
) -> float:
    """Log prior for one scenario's parameter block; -inf outside support."""
    mid = spec.model_id
    if mid == "m1":
        return 0.0  # conjugate path, no hierarchical parameters

    out = 0.0
    if mid != "m4":  # CAR fixes mu = 0 for identifiability
        out += _log_normal_pdf(params.mu, MU_PRIOR_SD)

    if mid == "m2":
        out += _log_uniform(params.tau, 0.0, SCALE_PRIOR_UPPER)
        if not math.isfinite(out):
            return -math.inf
        out += float(
            np.sum(-0.5 * math.log(2.0 * math.pi * params.tau**2) - params.beta**2 / (2 * params.tau**2))
        )
        return out

    if mid == "m3":
        out += _log_uniform(params.sigma, 0.0, SCALE_PRIOR_UPPER)
        out += _log_uniform(params.delta, -1.0, 1.0)
        out += _log_uniform(params.inv_nu, 0.0, 1.0)
        if not math.isfinite(out):
            return -math.inf
        st = SkewTParams(0.0, params.sigma, params.delta, 1.0 / params.inv_nu)
        return out + float(np.sum(skewt_logpdf(params.beta, st)))

    if mid == "m4":
        out += _log_uniform(params.tau, 0.0, SCALE_PRIOR_UPPER)
        if not math.isfinite(out):
            return -math.inf
        if q is None:
            q = car_precision(regions)
        return out + car_log_density(params.beta, params.tau**2, q)

    if mid == "m5":
        out += _log_uniform(params.tau, 0.0, SCALE_PRIOR_UPPER)
        out += _log_uniform(params.lam, 0.0, 1.0)
        if not math.isfinite(out):
            return -math.inf
        if q is None:
            q = car_precision(regions)
        prec = leroux_precision(params.lam, params.tau**2, q)
        return out + mvn_logpdf_precision(params.beta, prec)

    if mid == "m6":
        c_phi = 0.5 * max_centroid_distance(regions)
        out += _log_uniform(params.tau, 0.0, SCALE_PRIOR_UPPER)
        out += _log_uniform(params.phi, 0.0, c_phi)
        if not math.isfinite(out):
            return -math.inf
        cov = gp_covariance(regions.centroids, params.tau**2, params.phi, spec.matern_smoothness)
        return out + mvn_logpdf_covariance(params.beta, cov)

    # EOF models: m7/m8/m9 (Gaussian coefficients) and rnb (GDP coefficients),
    # both with skew-t residuals
    out += _log_uniform(params.sigma, 0.0, SCALE_PRIOR_UPPER)
    out += _log_uniform(params.delta, -1.0, 1.0)
    out += _log_uniform(params.inv_nu, 0.0, 1.0)
    if mid == "rnb":
        out += _log_uniform(params.r, 0.0, SCALE_PRIOR_UPPER)
        if not math.isfinite(out):
            return -math.inf
        out += float(np.sum(gdp_logpdf(params.alpha, GdpParams(GDP_SHAPE, params.r))))
    else:
        out += _log_uniform(params.sigma_alpha, 0.0, SCALE_PRIOR_UPPER)
        if not math.isfinite(out):
            return -math.inf
        out += float(
            np.sum(
                -0.5 * math.log(2.0 * math.pi * params.sigma_alpha**2)
                - params.alpha**2 / (2 * params.sigma_alpha**2)
            )
        )
    st = SkewTParams(0.0, params.sigma, params.delta, 1.0 / params.inv_nu)
    return out + float(np.sum(skewt_logpdf(params.xi, st)))


def build_region_probs(
    params_f: ScenarioParams,
    params_c: ScenarioParams,
    spec: ModelSpec,
    basis_f: EofBasis | None = None,
    basis_c: EofBasis | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-region (p_F, p_C, RR) implied by a parameter configuration."""
    p_f = inv_logit(params_f.mu + scenario_effects(params_f, spec, basis_f))
    p_c = inv_logit(params_c.mu + scenario_effects(params_c, spec, basis_c))
    return p_f, p_c, p_f / p_c
