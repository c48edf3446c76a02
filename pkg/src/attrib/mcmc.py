"""Adaptive Metropolis-within-Gibbs sampler for every model family.

One chain is strictly sequential. Scalar hyperparameters use random-walk
proposals (log scale for positive parameters, with the Jacobian term);
region effects with conditionally independent priors are updated in a
single vectorized element-wise sweep, while spatially coupled effects
(CAR, Leroux, GP) and EOF coefficients cycle one component at a time with
incremental quadratic-form updates. Proposal scales adapt toward a 0.44
acceptance rate during burn-in only and are frozen afterward.

M1 bypasses MCMC entirely: its posterior is conjugate Beta and is sampled
directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, special

from .core import DataError, RegionSet, ScenarioCounts
from .distributions import GdpParams, SkewTParams, gdp_logpdf, skewt_logpdf
from .eof import EofBasis
from .models import (
    GDP_SHAPE,
    MU_PRIOR_SD,
    SCALE_PRIOR_UPPER,
    ModelSpec,
    car_precision,
    gp_covariance,
    max_centroid_distance,
)


def _binom_ll(z, n, eta):
    # binomial log-likelihood without the combinatorial constant, which
    # cancels in every Metropolis ratio
    return z * eta - n * np.logaddexp(0.0, eta)

ADAPT_TARGET = 0.44


@dataclass(frozen=True)
class ChainConfig:
    """Chain schedule. Defaults store (iterations - burn_in) / thin = 4000
    draws, enough to keep the Monte Carlo error of posterior null
    probabilities under 0.01."""

    iterations: int = 20000
    burn_in: int = 4000
    thin: int = 4
    seed: int = 0
    adapt_interval: int = 50
    initial_scale: float = 0.5

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("need 0 <= burn_in < iterations")
        if self.thin < 1:
            raise ValueError("thinning must be >= 1")

    @property
    def n_stored(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class PosteriorDraws:
    """Stored posterior draws of per-region probabilities, plus diagnostics."""

    p_f: np.ndarray  # (S, M)
    p_c: np.ndarray  # (S, M)
    diagnostics: dict = field(default_factory=dict)

    @property
    def rr(self) -> np.ndarray:
        return self.p_f / self.p_c

    @property
    def n_draws(self) -> int:
        return self.p_f.shape[0]


def effective_sample_size(series) -> float:
    """Initial-positive-sequence (Geyer) autocovariance estimator.

    A constant series has zero autocovariance everywhere and is assigned
    ESS equal to its length by convention.
    """
    x = np.asarray(series, dtype=float)
    n = len(x)
    if n < 10:
        raise ValueError("need at least 10 samples")
    x = x - x.mean()
    var = float(x @ x) / n
    if var == 0.0:
        return float(n)
    # FFT autocovariances
    m = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:n].real / n
    rho = acov / acov[0]
    # sum adjacent pairs while positive
    total = rho[0]
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair <= 0:
            break
        total += 2.0 * pair
        t += 2
    return float(min(n, n / max(total, 1.0 / n)))


class _Adapt:
    """Per-block proposal scale with diminishing adaptation during burn-in."""

    def __init__(self, size, initial: float):
        self.log_scale = np.full(size, math.log(initial)) if size else math.log(initial)
        self.accepted = np.zeros(size) if size else 0.0
        self.tried = 0
        self.batches = 0
        self.vector = bool(size)

    @property
    def scale(self):
        return np.exp(self.log_scale)

    def record(self, accepted):
        self.accepted = self.accepted + accepted
        self.tried += 1

    def adapt(self):
        if self.tried == 0:
            return
        self.batches += 1
        step = min(0.25, 1.0 / math.sqrt(self.batches))
        rate = self.accepted / self.tried
        if self.vector:
            self.log_scale += np.where(rate > ADAPT_TARGET, step, -step)
        else:
            self.log_scale += step if rate > ADAPT_TARGET else -step
        self.accepted = np.zeros_like(self.accepted)
        self.tried = 0

    def rate(self):
        if self.tried == 0:
            return float("nan")
        r = self.accepted / self.tried
        return float(np.mean(r))


class _ScenarioSampler:
    """Metropolis-within-Gibbs for one scenario of one hierarchical model."""

    def __init__(
        self,
        spec: ModelSpec,
        z: np.ndarray,
        n: np.ndarray,
        regions: RegionSet | None,
        basis: EofBasis | None,
        rng: np.random.Generator,
        initial_scale: float,
    ):
        self.spec = spec
        self.mid = spec.model_id
        self.z = z.astype(float)
        self.n = n.astype(float)
        self.m = len(z)
        self.regions = regions
        self.rng = rng

        if spec.uses_eofs:
            if basis is None:
                raise DataError(f"model {self.mid} needs an EOF basis")
            if spec.eof_p is not None:
                basis = basis.truncated(min(spec.eof_p, basis.p))
            if basis.h.shape[0] != self.m:
                raise DataError("EOF basis rows must match the number of regions")
        self.basis = basis
        self.p = basis.p if spec.uses_eofs else 0

        if spec.needs_geometry:
            if regions is None or regions.m != self.m:
                raise DataError(f"model {self.mid} needs a region set matching the counts")
            if self.mid in ("m4", "m5"):
                regions.require_connected()
                self.q = car_precision(regions)
                self.degrees = regions.degrees().astype(float)
                self.q_eigs = np.linalg.eigvalsh(self.q)
            if self.mid == "m6":
                self.c_phi = 0.5 * max_centroid_distance(regions)

        # --- initial state
        pooled = (self.z.sum() + 0.5) / (self.n.sum() + 1.0)
        self.mu = 0.0 if self.mid == "m4" else float(special.logit(pooled))
        self.beta = np.zeros(self.m)  # region effects, or skew-t residuals xi for EOF models
        self.alpha = np.zeros(self.p)
        self.tau = 0.5
        self.sigma = 0.5
        self.delta = 0.0
        self.inv_nu = 0.5
        self.lam = 0.5
        self.phi = self.c_phi / 4.0 if self.mid == "m6" else None
        self.sigma_alpha = 0.5
        self.r = 1.0

        self.eta = self._eta()
        self.ll = _binom_ll(self.z, self.n, self.eta)
        if self.mid == "m6":
            self._refresh_gp()

        # --- adaptation state
        self.adapts: dict[str, _Adapt] = {"beta": _Adapt(self.m, initial_scale)}
        if self.mid != "m4":
            self.adapts["mu"] = _Adapt(0, initial_scale)
        if self.mid in ("m2", "m4", "m5", "m6"):
            self.adapts["tau"] = _Adapt(0, initial_scale)
        if self.mid in ("m3", "m7", "m8", "m9", "rnb"):
            self.adapts["shape"] = _Adapt(0, 0.25)
        if self.mid == "m5":
            self.adapts["lam"] = _Adapt(0, initial_scale)
        if self.mid == "m6":
            self.adapts["phi"] = _Adapt(0, initial_scale)
        if self.mid in ("m7", "m8", "m9"):
            self.adapts["alpha"] = _Adapt(self.p, initial_scale)
            self.adapts["sigma_alpha"] = _Adapt(0, initial_scale)
        if self.mid == "rnb":
            self.adapts["alpha"] = _Adapt(self.p, initial_scale)
            self.adapts["r"] = _Adapt(0, initial_scale)

    # -- helpers -----------------------------------------------------------

    def _eta(self) -> np.ndarray:
        effects = self.basis.h @ self.alpha + self.beta if self.spec.uses_eofs else self.beta
        return self.mu + effects

    def _skewt_params(self) -> SkewTParams:
        return SkewTParams(0.0, self.sigma, self.delta, 1.0 / self.inv_nu)

    def _beta_prior_terms(self, beta, sigma=None, delta=None, inv_nu=None, tau=None):
        """Per-element log prior of the iid effect/residual vector."""
        if self.mid == "m2":
            t = self.tau if tau is None else tau
            return -0.5 * math.log(2 * math.pi * t * t) - beta**2 / (2 * t * t)
        st = SkewTParams(
            0.0,
            self.sigma if sigma is None else sigma,
            self.delta if delta is None else delta,
            1.0 / (self.inv_nu if inv_nu is None else inv_nu),
        )
        return skewt_logpdf(beta, st)

    def _refresh_gp(self):
        cov = gp_covariance(
            self.regions.centroids, self.tau**2, self.phi, self.spec.matern_smoothness
        )
        chol = np.linalg.cholesky(cov)
        self.gp_prec = linalg.cho_solve((chol, True), np.eye(self.m))
        self.gp_logdet_cov = 2.0 * float(np.log(np.diag(chol)).sum())
        self.gp_prec_beta = self.gp_prec @ self.beta

    def _gp_prior(self, quad=None):
        if quad is None:
            quad = float(self.beta @ self.gp_prec_beta)
        return -0.5 * (self.m * math.log(2 * math.pi) + self.gp_logdet_cov + quad)

    def _car_quad(self, beta) -> float:
        total = 0.0
        for i, nbrs in enumerate(self.regions.adjacency):
            for j in nbrs:
                if i < j:
                    total += (beta[i] - beta[j]) ** 2
        return total

    # -- update steps ------------------------------------------------------

    def update_mu(self):
        ad = self.adapts["mu"]
        prop = self.mu + ad.scale * self.rng.standard_normal()
        eta_new = self.eta + (prop - self.mu)
        ll_new = _binom_ll(self.z, self.n, eta_new)
        log_ratio = float(ll_new.sum() - self.ll.sum()) + (self.mu**2 - prop**2) / (
            2 * MU_PRIOR_SD**2
        )
        accept = math.log(self.rng.random()) < log_ratio
        if accept:
            self.mu, self.eta, self.ll = prop, eta_new, ll_new
        ad.record(1.0 if accept else 0.0)

    def update_effects_iid(self):
        """Vectorized element-wise sweep; valid because the likelihood and
        the iid prior both factorize over regions."""
        ad = self.adapts["beta"]
        prop = self.beta + ad.scale * self.rng.standard_normal(self.m)
        eta_new = self.eta + (prop - self.beta)
        ll_new = _binom_ll(self.z, self.n, eta_new)
        log_ratio = (ll_new - self.ll) + (self._beta_prior_terms(prop) - self._beta_prior_terms(self.beta))
        accept = np.log(self.rng.random(self.m)) < log_ratio
        self.beta = np.where(accept, prop, self.beta)
        self.eta = np.where(accept, eta_new, self.eta)
        self.ll = np.where(accept, ll_new, self.ll)
        ad.record(accept.astype(float))

    def update_effects_car(self):
        """Sequential sweep for CAR/Leroux effects (neighbor-coupled prior)."""
        ad = self.adapts["beta"]
        scales = ad.scale
        steps = scales * self.rng.standard_normal(self.m)
        logu = np.log(self.rng.random(self.m))
        accepted = np.zeros(self.m)
        tau2 = self.tau**2
        lam = 1.0 if self.mid == "m4" else self.lam
        for i in range(self.m):
            b_old = self.beta[i]
            b_new = b_old + steps[i]
            nbr_sum = sum(self.beta[j] for j in self.regions.adjacency[i])
            d_quad = self.degrees[i] * (b_new**2 - b_old**2) - 2.0 * (b_new - b_old) * nbr_sum
            if self.mid == "m5":
                d_quad = (1.0 - lam) * (b_new**2 - b_old**2) + lam * d_quad
            d_prior = -d_quad / (2.0 * tau2)
            eta_new = self.eta[i] + (b_new - b_old)
            ll_new = _binom_ll(self.z[i], self.n[i], eta_new)
            if logu[i] < float(ll_new - self.ll[i]) + d_prior:
                self.beta[i] = b_new
                self.eta[i] = eta_new
                self.ll[i] = ll_new
                accepted[i] = 1.0
        ad.record(accepted)

    def update_effects_gp(self):
        ad = self.adapts["beta"]
        steps = ad.scale * self.rng.standard_normal(self.m)
        logu = np.log(self.rng.random(self.m))
        accepted = np.zeros(self.m)
        prec = self.gp_prec
        for i in range(self.m):
            b_old = self.beta[i]
            b_new = b_old + steps[i]
            diff = b_new - b_old
            d_quad = prec[i, i] * (b_new**2 - b_old**2) + 2.0 * diff * (
                self.gp_prec_beta[i] - prec[i, i] * b_old
            )
            eta_new = self.eta[i] + diff
            ll_new = _binom_ll(self.z[i], self.n[i], eta_new)
            if logu[i] < float(ll_new - self.ll[i]) - 0.5 * d_quad:
                self.beta[i] = b_new
                self.eta[i] = eta_new
                self.ll[i] = ll_new
                self.gp_prec_beta += prec[:, i] * diff
                accepted[i] = 1.0
        ad.record(accepted)

    def update_alpha(self):
        """Sequential sweep over EOF coefficients (likelihood-coupled)."""
        ad = self.adapts["alpha"]
        steps = ad.scale * self.rng.standard_normal(self.p)
        logu = np.log(self.rng.random(self.p))
        accepted = np.zeros(self.p)
        gdp = GdpParams(GDP_SHAPE, self.r) if self.mid == "rnb" else None
        for l in range(self.p):
            a_old = self.alpha[l]
            a_new = a_old + steps[l]
            if gdp is not None:
                d_prior = float(gdp_logpdf(a_new, gdp) - gdp_logpdf(a_old, gdp))
            else:
                d_prior = (a_old**2 - a_new**2) / (2.0 * self.sigma_alpha**2)
            eta_new = self.eta + self.basis.h[:, l] * (a_new - a_old)
            ll_new = _binom_ll(self.z, self.n, eta_new)
            if logu[l] < float(ll_new.sum() - self.ll.sum()) + d_prior:
                self.alpha[l] = a_new
                self.eta = eta_new
                self.ll = ll_new
                accepted[l] = 1.0
        ad.record(accepted)

    def _scalar_rw(self, name, value, log_scale_prop: bool):
        ad = self.adapts[name]
        if log_scale_prop:
            prop = value * math.exp(ad.scale * self.rng.standard_normal())
            jac = math.log(prop / value)
        else:
            prop = value + ad.scale * self.rng.standard_normal()
            jac = 0.0
        return ad, prop, jac

    def update_tau(self):
        ad, prop, jac = self._scalar_rw("tau", self.tau, True)
        if not 0 < prop < SCALE_PRIOR_UPPER:
            ad.record(0.0)
            return
        if self.mid == "m2":
            d_prior = float(
                self._beta_prior_terms(self.beta, tau=prop).sum()
                - self._beta_prior_terms(self.beta).sum()
            )
        elif self.mid in ("m4", "m5"):
            if self.mid == "m4":
                quad = self._car_quad(self.beta)
                rank = self.m - 1
            else:
                quad = (1.0 - self.lam) * float(self.beta @ self.beta) + self.lam * self._car_quad(
                    self.beta
                )
                rank = self.m
            d_prior = -rank * math.log(prop / self.tau) - quad / 2.0 * (
                1.0 / prop**2 - 1.0 / self.tau**2
            )
        else:  # m6
            old = self._gp_prior()
            tau_save = self.tau
            self.tau = prop
            self._refresh_gp()
            d_prior = self._gp_prior() - old
            if math.log(self.rng.random()) < d_prior + jac:
                ad.record(1.0)
            else:
                self.tau = tau_save
                self._refresh_gp()
                ad.record(0.0)
            return
        if math.log(self.rng.random()) < d_prior + jac:
            self.tau = prop
            ad.record(1.0)
        else:
            ad.record(0.0)

    def update_lambda(self):
        ad, prop, _ = self._scalar_rw("lam", self.lam, False)
        if not 0.0 <= prop < 1.0:
            ad.record(0.0)
            return
        quad_i = float(self.beta @ self.beta)
        quad_q = self._car_quad(self.beta)
        tau2 = self.tau**2

        def half_logpost(lam):
            logdet = float(np.log((1.0 - lam) + lam * self.q_eigs).sum())
            quad = ((1.0 - lam) * quad_i + lam * quad_q) / tau2
            return 0.5 * logdet - 0.5 * quad

        if math.log(self.rng.random()) < half_logpost(prop) - half_logpost(self.lam):
            self.lam = prop
            ad.record(1.0)
        else:
            ad.record(0.0)

    def update_phi(self):
        ad, prop, jac = self._scalar_rw("phi", self.phi, True)
        if not 0 < prop < self.c_phi:
            ad.record(0.0)
            return
        old = self._gp_prior()
        phi_save = self.phi
        self.phi = prop
        self._refresh_gp()
        if math.log(self.rng.random()) < self._gp_prior() - old + jac:
            ad.record(1.0)
        else:
            self.phi = phi_save
            self._refresh_gp()
            ad.record(0.0)

    def update_shape_block(self):
        """Joint random walk on (sigma, delta, 1/nu) of the skew-t prior."""
        ad = self.adapts["shape"]
        s = ad.scale
        sigma_p = self.sigma * math.exp(s * self.rng.standard_normal())
        delta_p = self.delta + s * self.rng.standard_normal()
        inv_nu_p = self.inv_nu + s * self.rng.standard_normal()
        jac = math.log(sigma_p / self.sigma)
        if not (0 < sigma_p < SCALE_PRIOR_UPPER and -1 < delta_p < 1 and 0 < inv_nu_p < 1):
            ad.record(0.0)
            return
        target = self.beta  # xi for EOF models, beta for m3
        d_prior = float(
            self._beta_prior_terms(target, sigma=sigma_p, delta=delta_p, inv_nu=inv_nu_p).sum()
            - self._beta_prior_terms(target).sum()
        )
        if math.log(self.rng.random()) < d_prior + jac:
            self.sigma, self.delta, self.inv_nu = sigma_p, delta_p, inv_nu_p
            ad.record(1.0)
        else:
            ad.record(0.0)

    def update_sigma_alpha(self):
        ad, prop, jac = self._scalar_rw("sigma_alpha", self.sigma_alpha, True)
        if not 0 < prop < SCALE_PRIOR_UPPER:
            ad.record(0.0)
            return
        ss = float(self.alpha @ self.alpha)
        d_prior = -self.p * math.log(prop / self.sigma_alpha) - ss / 2.0 * (
            1.0 / prop**2 - 1.0 / self.sigma_alpha**2
        )
        if math.log(self.rng.random()) < d_prior + jac:
            self.sigma_alpha = prop
            ad.record(1.0)
        else:
            ad.record(0.0)

    def update_gdp_rate(self):
        ad, prop, jac = self._scalar_rw("r", self.r, True)
        if not 0 < prop < SCALE_PRIOR_UPPER:
            ad.record(0.0)
            return
        d_prior = float(
            gdp_logpdf(self.alpha, GdpParams(GDP_SHAPE, prop)).sum()
            - gdp_logpdf(self.alpha, GdpParams(GDP_SHAPE, self.r)).sum()
        )
        if math.log(self.rng.random()) < d_prior + jac:
            self.r = prop
            ad.record(1.0)
        else:
            ad.record(0.0)

    # -- one full iteration --------------------------------------------------

    def step(self):
        mid = self.mid
        if mid != "m4":
            self.update_mu()
        if mid in ("m2", "m3"):
            self.update_effects_iid()
            if mid == "m2":
                self.update_tau()
            else:
                self.update_shape_block()
        elif mid in ("m4", "m5"):
            self.update_effects_car()
            self.update_tau()
            if mid == "m5":
                self.update_lambda()
        elif mid == "m6":
            self.update_effects_gp()
            self.update_tau()
            self.update_phi()
        else:  # EOF models
            self.update_alpha()
            self.update_effects_iid()
            self.update_shape_block()
            if mid == "rnb":
                self.update_gdp_rate()
            else:
                self.update_sigma_alpha()

    def adapt(self):
        for ad in self.adapts.values():
            ad.adapt()

    def probs(self) -> np.ndarray:
        return special.expit(self.eta)

    def acceptance_rates(self) -> dict[str, float]:
        return {name: ad.rate() for name, ad in self.adapts.items()}


def _rng_for(seed: int, chain_id: int, scenario: int) -> np.random.Generator:
    # counter-based stream: reproducible independent of scheduling
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain_id, scenario)))


def sample_m1(counts: ScenarioCounts, n_draws: int, rng: np.random.Generator, a: float = 1.0, b: float = 1.0) -> PosteriorDraws:
    """Closed-form conjugate path for the independent beta-binomial model."""
    p_f = rng.beta(counts.z_f + a, counts.n_f - counts.z_f + b, size=(n_draws, counts.m))
    p_c = rng.beta(counts.z_c + a, counts.n_c - counts.z_c + b, size=(n_draws, counts.m))
    return PosteriorDraws(p_f=p_f, p_c=p_c, diagnostics={"model": "m1", "conjugate": True})


def run_chain(
    spec: ModelSpec,
    counts: ScenarioCounts,
    regions: RegionSet | None = None,
    basis_f: EofBasis | None = None,
    basis_c: EofBasis | None = None,
    cfg: ChainConfig = ChainConfig(),
    chain_id: int = 0,
) -> PosteriorDraws:
    """Draw from the posterior of a model given scenario counts.

    The two scenarios are conditionally independent and are advanced in
    lockstep from separate, deterministic RNG streams.
    """
    if spec.model_id == "m1":
        return sample_m1(counts, cfg.n_stored, _rng_for(cfg.seed, chain_id, 0))

    samplers = []
    for scenario, (z, n, basis) in enumerate(
        [(counts.z_f, counts.n_f, basis_f), (counts.z_c, counts.n_c, basis_c)]
    ):
        rng = _rng_for(cfg.seed, chain_id, scenario)
        samplers.append(
            _ScenarioSampler(spec, z, n, regions, basis, rng, cfg.initial_scale)
        )

    n_stored = cfg.n_stored
    p_f = np.empty((n_stored, counts.m))
    p_c = np.empty((n_stored, counts.m))
    mu_trace = np.empty((cfg.iterations, 2))
    stored = 0
    for it in range(cfg.iterations):
        for s in samplers:
            s.step()
        mu_trace[it] = [samplers[0].mu, samplers[1].mu]
        in_burn = it < cfg.burn_in
        if in_burn and (it + 1) % cfg.adapt_interval == 0:
            for s in samplers:
                s.adapt()
        if not in_burn and (it - cfg.burn_in) % cfg.thin == cfg.thin - 1 and stored < n_stored:
            p_f[stored] = samplers[0].probs()
            p_c[stored] = samplers[1].probs()
            stored += 1

    post = mu_trace[cfg.burn_in :]
    diagnostics = {
        "model": spec.model_id,
        "acceptance": {
            "factual": samplers[0].acceptance_rates(),
            "counterfactual": samplers[1].acceptance_rates(),
        },
        "ess_mu": {
            "factual": effective_sample_size(post[:, 0]),
            "counterfactual": effective_sample_size(post[:, 1]),
        },
        "geweke_mu": {
            "factual": _geweke_z(post[:, 0]),
            "counterfactual": _geweke_z(post[:, 1]),
        },
    }
    return PosteriorDraws(p_f=p_f[:stored], p_c=p_c[:stored], diagnostics=diagnostics)


def write_draws(draws: PosteriorDraws, region_ids: list[str], path: str) -> None:
    """Long-format draws CSV: sample,region_id,p_f,p_c,rr."""
    import pandas as pd

    s, m = draws.p_f.shape
    pd.DataFrame(
        {
            "sample": np.repeat(np.arange(s), m),
            "region_id": np.tile(np.asarray(region_ids, dtype=object), s),
            "p_f": draws.p_f.ravel(),
            "p_c": draws.p_c.ravel(),
            "rr": draws.rr.ravel(),
        }
    ).to_csv(path, index=False, float_format="%.12g")


def read_draws(path: str) -> tuple[list[str], PosteriorDraws]:
    import pandas as pd

    df = pd.read_csv(path, dtype={"region_id": str})
    for col in ("sample", "region_id", "p_f", "p_c"):
        if col not in df.columns:
            raise DataError(f"{path}: missing column {col!r}")
    ids = df[df["sample"] == 0]["region_id"].tolist()
    m = len(ids)
    s = df["sample"].max() + 1
    if len(df) != s * m:
        raise DataError(f"{path}: ragged draws file")
    return ids, PosteriorDraws(
        p_f=df["p_f"].to_numpy().reshape(s, m), p_c=df["p_c"].to_numpy().reshape(s, m)
    )


def _geweke_z(series: np.ndarray) -> float:
    """First-10% vs last-50% mean z-score (burn-in sanity flag, not fatal)."""
    n = len(series)
    a = series[: max(n // 10, 10)]
    b = series[n // 2 :]
    va = np.var(a) / effective_sample_size(a) if len(a) >= 10 else np.var(a) / len(a)
    vb = np.var(b) / effective_sample_size(b)
    denom = math.sqrt(max(va + vb, 1e-300))
    return float((a.mean() - b.mean()) / denom)
