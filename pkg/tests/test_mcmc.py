import numpy as np
import pytest
from scipy import integrate, special, stats

from attrib.core import ScenarioCounts, fibonacci_sphere_regions
from attrib.eof import compute_eofs
from attrib.mcmc import (
    ChainConfig,
    effective_sample_size,
    read_draws,
    run_chain,
    sample_m1,
    write_draws,
)
from attrib.models import ModelSpec

FAST = ChainConfig(iterations=3000, burn_in=1000, thin=2, seed=11)


def small_counts(m=8, seed=0):
    rng = np.random.default_rng(seed)
    p_f = special.expit(rng.normal(-2.0, 0.7, m))
    p_c = special.expit(rng.normal(-2.5, 0.7, m))
    return ScenarioCounts(
        z_f=rng.binomial(100, p_f),
        n_f=np.full(m, 100),
        z_c=rng.binomial(100, p_c),
        n_c=np.full(m, 100),
    )


class TestConjugateModel:
    def test_marginals_are_beta(self):
        counts = ScenarioCounts(z_f=[7], n_f=[40], z_c=[2], n_c=[40])
        draws = sample_m1(counts, 50_000, np.random.default_rng(0))
        for x, z in [(draws.p_f[:, 0], 7), (draws.p_c[:, 0], 2)]:
            ks = stats.kstest(x, stats.beta(z + 1, 40 - z + 1).cdf).statistic
            assert ks < 0.01

    def test_independent_across_regions(self):
        counts = small_counts(6)
        draws = sample_m1(counts, 20_000, np.random.default_rng(1))
        corr = np.corrcoef(draws.p_f.T)
        off = corr[~np.eye(6, dtype=bool)]
        assert np.max(np.abs(off)) < 0.03

    def test_rr_is_ratio(self):
        counts = small_counts(4)
        draws = sample_m1(counts, 1000, np.random.default_rng(2))
        assert np.allclose(draws.rr, draws.p_f / draws.p_c)


def _m2_single_region_posterior_mean(z, n):
    """2-D quadrature oracle for M2 with one region.

    With one region the linear predictor is eta = mu + beta with
    eta | tau ~ N(0, 10^2 + tau^2), tau ~ U(0, 100). The posterior mean of
    p = invlogit(eta) follows from integrating the binomial likelihood
    against that prior.
    """

    def joint(eta, tau):
        var = 100.0 + tau**2
        log_prior = -0.5 * np.log(2 * np.pi * var) - eta**2 / (2 * var)
        log_lik = z * eta - n * np.logaddexp(0.0, eta)
        return np.exp(log_prior + log_lik)

    num, _ = integrate.dblquad(
        lambda t, e: special.expit(e) * joint(e, t), -25, 25, 0, 100, epsabs=1e-12
    )
    den, _ = integrate.dblquad(lambda t, e: joint(e, t), -25, 25, 0, 100, epsabs=1e-12)
    return num / den


class TestHierarchicalSampler:
    def test_m2_single_region_matches_quadrature(self):
        z_f, z_c, n = 9, 3, 60
        counts = ScenarioCounts(z_f=[z_f], n_f=[n], z_c=[z_c], n_c=[n])
        cfg = ChainConfig(iterations=24_000, burn_in=4000, thin=2, seed=5)
        draws = run_chain(ModelSpec("m2"), counts, cfg=cfg)
        want_f = _m2_single_region_posterior_mean(z_f, n)
        want_c = _m2_single_region_posterior_mean(z_c, n)
        assert draws.p_f[:, 0].mean() == pytest.approx(want_f, abs=0.01)
        assert draws.p_c[:, 0].mean() == pytest.approx(want_c, abs=0.01)

    @pytest.mark.parametrize("mid", ["m2", "m3", "m4", "m5", "m6"])
    def test_spatial_models_run_and_stay_in_bounds(self, mid):
        counts = small_counts(10)
        regions = fibonacci_sphere_regions(10)
        draws = run_chain(ModelSpec(mid), counts, regions=regions, cfg=FAST)
        assert draws.p_f.shape == (FAST.n_stored, 10)
        for arr in (draws.p_f, draws.p_c):
            assert np.all((arr > 0) & (arr < 1))

    @pytest.mark.parametrize("mid", ["m8", "rnb"])
    def test_eof_models_run(self, mid):
        counts = small_counts(10)
        regions = fibonacci_sphere_regions(10)
        cov = np.exp(-regions.pairwise_distances())
        basis = compute_eofs(cov)
        draws = run_chain(
            ModelSpec(mid), counts, regions=regions, basis_f=basis, basis_c=basis, cfg=FAST
        )
        assert draws.p_f.shape == (FAST.n_stored, 10)
        assert np.all(np.isfinite(draws.rr))

    def test_posterior_concentrates_near_observed_rates(self):
        counts = small_counts(10, seed=3)
        draws = run_chain(ModelSpec("m2"), counts, cfg=FAST)
        post = draws.p_f.mean(axis=0)
        observed = counts.z_f / counts.n_f
        pooled = counts.z_f.sum() / counts.n_f.sum()
        # shrinkage: posterior means sit between raw and pooled rates
        assert np.max(np.abs(post - observed)) < 0.06
        assert np.mean(np.abs(post - pooled)) <= np.mean(np.abs(observed - pooled)) + 1e-6

    def test_deterministic_given_seed(self):
        counts = small_counts(6)
        a = run_chain(ModelSpec("m2"), counts, cfg=FAST)
        b = run_chain(ModelSpec("m2"), counts, cfg=FAST)
        assert np.array_equal(a.p_f, b.p_f)
        assert np.array_equal(a.p_c, b.p_c)

    def test_seed_changes_output(self):
        counts = small_counts(6)
        other = ChainConfig(iterations=FAST.iterations, burn_in=FAST.burn_in, thin=FAST.thin, seed=99)
        a = run_chain(ModelSpec("m2"), counts, cfg=FAST)
        b = run_chain(ModelSpec("m2"), counts, cfg=other)
        assert not np.array_equal(a.p_f, b.p_f)

    def test_acceptance_rates_reported(self):
        counts = small_counts(8)
        draws = run_chain(ModelSpec("m2"), counts, cfg=FAST)
        acc = draws.diagnostics["acceptance"]["factual"]
        assert acc, "factual scenario must report acceptance rates"
        for rate in acc.values():
            assert 0.0 <= rate <= 1.0


class TestEffectiveSampleSize:
    def test_iid_series(self):
        x = np.random.default_rng(0).standard_normal(20_000)
        assert effective_sample_size(x) == pytest.approx(20_000, rel=0.1)

    def test_ar1_series(self):
        rho = 0.8
        rng = np.random.default_rng(1)
        n = 100_000
        x = np.empty(n)
        x[0] = rng.standard_normal()
        eps = rng.standard_normal(n) * np.sqrt(1 - rho**2)
        for i in range(1, n):
            x[i] = rho * x[i - 1] + eps[i]
        want = n * (1 - rho) / (1 + rho)
        assert effective_sample_size(x) == pytest.approx(want, rel=0.15)

    def test_constant_series(self):
        assert effective_sample_size(np.full(500, 3.2)) == 500

    def test_never_exceeds_length_materially(self):
        x = np.random.default_rng(5).standard_normal(5000)
        assert effective_sample_size(x) <= 5000 * 1.2


class TestDrawsIo:
    def test_round_trip(self, tmp_path):
        counts = small_counts(5)
        draws = sample_m1(counts, 200, np.random.default_rng(3))
        ids = [f"r{i}" for i in range(5)]
        path = str(tmp_path / "draws.csv")
        write_draws(draws, ids, path)
        ids2, back = read_draws(path)
        assert ids2 == ids
        assert np.allclose(back.p_f, draws.p_f, atol=1e-10)
        assert np.allclose(back.rr, draws.rr, atol=1e-8)
