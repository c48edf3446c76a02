import numpy as np
import pytest

from attrib.core import (
    DataError,
    EnsembleField,
    HypothesisSpec,
    RegionSet,
    ScenarioCounts,
    compute_counts,
    event_thresholds,
    fibonacci_sphere_regions,
    null_indicator,
    parse_hypothesis,
    read_counts,
    read_regions,
    write_counts,
    write_regions,
)


def small_regions():
    return fibonacci_sphere_regions(12)


class TestRegionSet:
    def test_centroids_are_unit_vectors(self):
        r = small_regions()
        assert np.allclose(np.linalg.norm(r.centroids, axis=1), 1.0, atol=1e-9)

    def test_adjacency_symmetric_and_irreflexive(self):
        r = small_regions()
        for i, nbrs in enumerate(r.adjacency):
            assert i not in nbrs
            for j in nbrs:
                assert i in r.adjacency[j]

    def test_connected(self):
        small_regions().require_connected()

    def test_disconnected_graph_rejected(self):
        r = small_regions()
        broken = RegionSet(
            ids=r.ids, centroids=r.centroids, adjacency=tuple(() for _ in r.ids)
        )
        with pytest.raises(DataError):
            broken.require_connected()

    def test_degrees_match_adjacency(self):
        r = small_regions()
        assert list(r.degrees()) == [len(n) for n in r.adjacency]

    def test_non_unit_centroid_rejected(self):
        r = small_regions()
        bad = r.centroids.copy()
        bad[0] *= 2.0
        with pytest.raises(DataError):
            RegionSet(ids=r.ids, centroids=bad, adjacency=r.adjacency)

    def test_pairwise_distances_are_chord_lengths(self):
        r = small_regions()
        d = r.pairwise_distances()
        assert d.shape == (r.m, r.m)
        assert np.allclose(d, d.T)
        assert np.allclose(np.diag(d), 0.0)
        i, j = 0, r.m - 1
        assert d[i, j] == pytest.approx(np.linalg.norm(r.centroids[i] - r.centroids[j]))
        assert d.max() <= 2.0 + 1e-12


class TestScenarioCounts:
    def test_valid(self):
        c = ScenarioCounts(z_f=[1, 2], n_f=[5, 5], z_c=[0, 5], n_c=[5, 5])
        assert c.m == 2

    def test_counts_above_trials_rejected(self):
        with pytest.raises(DataError):
            ScenarioCounts(z_f=[6], n_f=[5], z_c=[0], n_c=[5])

    def test_negative_counts_rejected(self):
        with pytest.raises(DataError):
            ScenarioCounts(z_f=[-1], n_f=[5], z_c=[0], n_c=[5])


class TestHypothesis:
    def test_parse_leq(self):
        h = parse_hypothesis("rr<=5")
        assert h.kind == "ratio-leq" and h.c == 5.0

    def test_parse_geq(self):
        h = parse_hypothesis("rr>=1")
        assert h.kind == "ratio-geq" and h.c == 1.0

    def test_parse_interval(self):
        h = parse_hypothesis("rr outside (0.5,2)")
        assert h.kind == "ratio-outside-interval"
        assert h.interval == (0.5, 2.0)

    @pytest.mark.parametrize("text", ["rr<5", "rr outside (2,0.5)", "pf<=1", ""])
    def test_parse_rejects_malformed(self, text):
        with pytest.raises((ValueError, DataError)):
            parse_hypothesis(text)

    def test_interval_bounds_must_straddle_one(self):
        with pytest.raises(ValueError):
            HypothesisSpec("ratio-outside-interval", interval=(1.5, 2.0))

    def test_null_mask_leq(self):
        h = HypothesisSpec("ratio-leq", c=2.0)
        rr = np.array([0.5, 2.0, 2.5])
        assert list(h.null_mask(rr)) == [True, True, False]

    def test_null_mask_geq(self):
        h = HypothesisSpec("ratio-geq", c=1.0)
        rr = np.array([0.5, 1.0, 2.5])
        assert list(h.null_mask(rr)) == [False, True, True]

    def test_null_mask_interval(self):
        h = HypothesisSpec("ratio-outside-interval", interval=(0.5, 2.0))
        rr = np.array([0.4, 0.5, 1.0, 2.0, 3.0])
        assert list(h.null_mask(rr)) == [True, True, False, True, True]


class TestEventFields:
    def test_thresholds_use_linear_interpolation_quantile(self):
        history = np.arange(1.0, 11.0).reshape(1, 10)
        thr = event_thresholds(history, 0.9)
        assert thr[0] == pytest.approx(np.quantile(history[0], 0.9, method="linear"))

    def test_thresholds_need_two_values(self):
        with pytest.raises(DataError):
            event_thresholds(np.ones((3, 1)), 0.9)

    def test_compute_counts_strict_inequality(self):
        field = EnsembleField(values=np.array([[1.0, 2.0, 2.0, 3.0]]), direction="exceed")
        z = compute_counts(field, np.array([2.0]))
        assert z[0] == 1  # ties at the threshold are not events

    def test_compute_counts_fall_below(self):
        field = EnsembleField(values=np.array([[1.0, 2.0, 3.0]]), direction="fall-below")
        z = compute_counts(field, np.array([2.0]))
        assert z[0] == 1

    def test_null_indicator_matches_hypothesis(self):
        h = HypothesisSpec("ratio-geq", c=1.0)
        assert null_indicator(h, 0.5) == 0
        assert null_indicator(h, 1.5) == 1


class TestCsvRoundTrips:
    def test_regions_round_trip(self, tmp_path):
        r = small_regions()
        rp, ap = str(tmp_path / "regions.csv"), str(tmp_path / "adjacency.csv")
        write_regions(r, rp, ap)
        back = read_regions(rp, ap)
        assert back.ids == r.ids
        assert np.allclose(back.centroids, r.centroids)
        assert back.adjacency == r.adjacency

    def test_counts_round_trip(self, tmp_path):
        ids = ["a", "b", "c"]
        c = ScenarioCounts(z_f=[1, 2, 3], n_f=[9, 9, 9], z_c=[0, 4, 5], n_c=[9, 9, 9])
        path = str(tmp_path / "counts.csv")
        write_counts(ids, c, path)
        ids2, c2 = read_counts(path)
        assert ids2 == ids
        for name in ("z_f", "n_f", "z_c", "n_c"):
            assert np.array_equal(getattr(c2, name), getattr(c, name))

    def test_read_counts_missing_column(self, tmp_path):
        path = tmp_path / "counts.csv"
        path.write_text("region_id,z_f,n_f\na,1,2\n")
        with pytest.raises(DataError):
            read_counts(str(path))


class TestSyntheticRegions:
    def test_deterministic(self):
        a, b = fibonacci_sphere_regions(20), fibonacci_sphere_regions(20)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.adjacency == b.adjacency

    def test_requested_size(self):
        assert fibonacci_sphere_regions(68).m == 68
