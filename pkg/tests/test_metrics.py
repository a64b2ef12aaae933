import itertools
import math
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import assert_series_consistent, constant_dataset, series_from_moduli
from slipmeter.errors import InsufficientDataError, ParameterError, ParseError
from slipmeter.kinematics import VehicleSpec
from slipmeter.metrics import (
    compare,
    decimate,
    distortion_series,
    kinetic_energy,
    mann_whitney,
    read_series_csv,
    series_from_slip,
    summarize,
    write_series_csv,
)
from slipmeter.reference import (
    HUSKY,
    ICE_OVER_GRAVEL_FACTOR,
    ICE_OVER_SNOW_FACTOR,
    MEDIAN_HUSKY_SNOW,
    MEDIAN_HUSKY_TILE,
    MEDIAN_WARTHOG_GRAVEL,
    MEDIAN_WARTHOG_ICE,
    WARTHOG,
)


def brute_force_two_sided(a, b):
    """Enumerate every way sample A can occupy pooled rank positions.

    Independent oracle for the exact Mann-Whitney path: returns the integer
    tail counts and the two-sided p built from them.
    """
    n1, n2 = len(a), len(b)
    total_positions = n1 + n2
    u_obs = sum(1 for x in a for y in b if x > y)
    dist = {}
    for positions in itertools.combinations(range(total_positions), n1):
        u = sum(p - k for k, p in enumerate(sorted(positions)))
        dist[u] = dist.get(u, 0) + 1
    total = comb(total_positions, n1)
    tail_le = sum(c for u, c in dist.items() if u <= u_obs)
    tail_ge = sum(c for u, c in dist.items() if u >= u_obs)
    return u_obs, min(1.0, 2.0 * min(tail_le, tail_ge) / total)


class TestDistortionSeries:
    def test_perfect_tracking_gives_zero_moduli(self, testbot):
        ds = constant_dataset(testbot, 2.0, 2.0, vx=0.6, vy=0.0, omega=0.0)
        series = distortion_series(ds)
        np.testing.assert_array_equal(series.modulus, 0.0)
        assert_series_consistent(series)

    def test_constant_offset(self, testbot):
        # f_x = 0.3 * 2 = 0.6, observed 0.5: modulus 0.1 everywhere
        ds = constant_dataset(testbot, 2.0, 2.0, vx=0.5, vy=0.0, omega=0.0)
        series = distortion_series(ds)
        np.testing.assert_allclose(series.modulus, 0.1, atol=1e-15)
        assert_series_consistent(series)

    def test_stationary(self, testbot):
        ds = constant_dataset(testbot, 0.0, 0.0, vx=0.0, vy=0.0, omega=0.0)
        np.testing.assert_array_equal(distortion_series(ds).modulus, 0.0)

    def test_angular_weight_applied(self, testbot):
        ds = constant_dataset(testbot, -2.0, 2.0, vx=0.0, vy=0.0, omega=0.0)
        # pure rotation command: f_omega = 1.0, slip entirely angular
        series = distortion_series(ds, angular_weight=0.5)
        np.testing.assert_allclose(series.modulus, 0.5, atol=1e-15)

    def test_stride_decimates(self, testbot):
        ds = constant_dataset(testbot, 2.0, 2.0, vx=0.5, vy=0.0, omega=0.0, n=20)
        assert len(distortion_series(ds, stride=3)) == 7

    def test_empty_dataset_rejected(self, testbot):
        ds = constant_dataset(testbot, 2.0, 2.0, vx=0.5, vy=0.0, omega=0.0, n=0)
        with pytest.raises(InsufficientDataError):
            distortion_series(ds)

    def test_vehicle_required(self, testbot):
        ds = constant_dataset(None, 2.0, 2.0, vx=0.5, vy=0.0, omega=0.0)
        with pytest.raises(ParameterError):
            distortion_series(ds)

    def test_bad_stride(self, testbot):
        ds = constant_dataset(testbot, 2.0, 2.0, vx=0.5, vy=0.0, omega=0.0)
        with pytest.raises(ParameterError):
            distortion_series(ds, stride=0)


class TestSummarize:
    def test_odd_length_exact_quantiles(self):
        stats = summarize(series_from_moduli([1, 2, 3, 4, 5]))
        assert stats.median == 3.0
        assert stats.q25 == 2.0
        assert stats.q75 == 4.0
        assert stats.mean == 3.0
        assert stats.max == 5.0
        assert stats.n == 5

    def test_all_equal(self):
        stats = summarize(series_from_moduli([0.7] * 10))
        assert stats.median == stats.mean == stats.max == 0.7

    def test_two_sample_interpolated_median(self):
        # type-7 linear interpolation: median of [0, 10] is 5
        assert summarize(series_from_moduli([0.0, 10.0])).median == 5.0

    def test_quantile_ordering_invariant(self):
        rng = np.random.default_rng(3)
        stats = summarize(series_from_moduli(rng.exponential(size=101)))
        assert stats.q25 <= stats.median <= stats.q75 <= stats.max

    def test_empty_rejected(self):
        with pytest.raises(InsufficientDataError):
            summarize(series_from_moduli([]))


class TestKineticEnergy:
    def test_husky(self):
        assert kinetic_energy(HUSKY) == 37.5

    def test_warthog(self):
        assert kinetic_energy(WARTHOG) == 5875.0

    def test_scales_with_speed_squared(self):
        spec = VehicleSpec("v", mass=8.0, v_max=3.0)
        assert kinetic_energy(spec) == 0.5 * 8.0 * 9.0


class TestMannWhitney:
    def test_textbook_separated_samples(self):
        result = mann_whitney([1.0, 2.0, 3.0], [10.0, 11.0, 12.0])
        assert result.method == "exact"
        assert result.u_statistic == 0.0
        assert result.p_value == 0.1

    def test_exact_matches_brute_force_for_all_small_sizes(self):
        rng = np.random.default_rng(42)
        for n1, n2 in itertools.product(range(1, 6), repeat=2):
            for _ in range(3):
                a = rng.normal(size=n1)
                b = rng.normal(loc=rng.uniform(-2, 2), size=n2)
                assert np.unique(np.concatenate([a, b])).size == n1 + n2
                result = mann_whitney(a, b)
                u_expected, p_expected = brute_force_two_sided(list(a), list(b))
                assert result.method == "exact"
                assert result.u_statistic == u_expected
                assert result.p_value == p_expected

    def test_identical_samples_not_significant(self):
        sample = [0.3, 1.2, 2.4, 0.8]
        result = mann_whitney(sample, sample)
        assert result.method == "normal"  # ties force the approximation
        assert result.p_value >= 0.95

    def test_u_statistics_sum_to_product(self):
        rng = np.random.default_rng(11)
        a, b = rng.normal(size=8), rng.normal(size=13)
        u_ab = mann_whitney(a, b).u_statistic
        u_ba = mann_whitney(b, a).u_statistic
        assert u_ab + u_ba == len(a) * len(b)
        assert 0.0 <= u_ab <= len(a) * len(b)

    def test_symmetric_p_value(self):
        rng = np.random.default_rng(12)
        a, b = rng.normal(size=7), rng.normal(size=9)
        assert mann_whitney(a, b).p_value == mann_whitney(b, a).p_value

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(13)
        a, b = rng.normal(size=6), rng.normal(size=10)
        base = mann_whitney(a, b)
        for transform in (lambda x: 3.0 * x + 7.0, np.exp, lambda x: np.arctan(x) * 2.0):
            mapped = mann_whitney(transform(np.asarray(a)), transform(np.asarray(b)))
            assert mapped.u_statistic == base.u_statistic
            assert mapped.p_value == base.p_value

    def test_large_samples_use_normal_path(self):
        rng = np.random.default_rng(14)
        a, b = rng.normal(size=30, loc=0.0), rng.normal(size=30, loc=1.0)
        result = mann_whitney(a, b)
        assert result.method == "normal"
        assert result.p_value < 0.01

    def test_normal_approximation_close_to_exact(self):
        # Sanity guard at moderate sizes: tie-free, n1*n2 <= 400
        rng = np.random.default_rng(15)
        worst = 0.0
        for n1, n2 in ((5, 8), (8, 8), (10, 12), (12, 15), (19, 20), (20, 20)):
            for _ in range(5):
                a = rng.normal(size=n1)
                b = rng.normal(loc=rng.uniform(-1.5, 1.5), size=n2)
                exact = mann_whitney(a, b)
                assert exact.method == "exact"
                from slipmeter.metrics import _approx_two_sided_p

                approx = _approx_two_sided_p(
                    exact.u_statistic, n1, n2, np.concatenate([a, b])
                )
                worst = max(worst, abs(approx - exact.p_value))
        assert worst < 0.03

    def test_empty_sample_rejected(self):
        with pytest.raises(InsufficientDataError):
            mann_whitney([], [1.0])

    def test_all_tied_pooled_sample(self):
        result = mann_whitney([1.0, 1.0], [1.0, 1.0])
        assert result.p_value == 1.0


class TestCompare:
    def test_identical_series_indistinguishable(self):
        s = series_from_moduli([0.3, 1.2, 2.4, 0.8, 0.5])
        result = compare(s, s)
        assert result.p_value >= 0.95
        assert not result.significant
        assert result.median_ratio == 1.0

    def test_reference_median_ratio(self):
        a = series_from_moduli([MEDIAN_HUSKY_TILE] * 9, name="husky_tile")
        b = series_from_moduli([MEDIAN_HUSKY_SNOW] * 9, name="husky_snow")
        result = compare(a, b)
        assert result.median_ratio == pytest.approx(1.608, abs=0.01)

    def test_separated_series_significant(self):
        a = series_from_moduli(np.linspace(0.1, 0.5, 12))
        b = series_from_moduli(np.linspace(2.0, 3.0, 12))
        result = compare(a, b)
        assert result.significant
        assert result.median_b > result.median_a

    def test_zero_median_denominator_flagged(self):
        a = series_from_moduli([0.0] * 11)
        b = series_from_moduli([1.0] * 11)
        result = compare(a, b)
        assert math.isinf(result.median_ratio)
        assert result.ratio_degenerate

    def test_both_zero_medians_flagged_nan(self):
        a = series_from_moduli([0.0] * 5)
        result = compare(a, a)
        assert math.isnan(result.median_ratio)
        assert result.ratio_degenerate

    def test_alpha_validated(self):
        s = series_from_moduli([1.0, 2.0])
        with pytest.raises(ParameterError):
            compare(s, s, alpha=1.5)

    def test_empty_series_rejected(self):
        s = series_from_moduli([1.0])
        with pytest.raises(InsufficientDataError):
            compare(s, series_from_moduli([]))


class TestScaleProperty:
    @given(k_exponent=st.integers(-3, 6))
    def test_power_of_two_scaling_is_exact(self, k_exponent):
        k = 2.0**k_exponent
        rng = np.random.default_rng(21)
        gx, gy, gom = rng.normal(size=(3, 40))
        base = series_from_slip("base", np.arange(40) * 0.05, gx, gy, gom)
        scaled = series_from_slip("scaled", np.arange(40) * 0.05, k * gx, k * gy, k * gom)
        s0, s1 = summarize(base), summarize(scaled)
        assert s1.median == k * s0.median
        assert s1.q25 == k * s0.q25
        assert s1.q75 == k * s0.q75
        assert s1.mean == k * s0.mean
        assert s1.max == k * s0.max

    def test_generic_positive_scaling(self):
        k = 3.7
        rng = np.random.default_rng(22)
        gx, gy, gom = rng.normal(size=(3, 25))
        base = series_from_slip("base", np.arange(25) * 0.05, gx, gy, gom)
        scaled = series_from_slip("scaled", np.arange(25) * 0.05, k * gx, k * gy, k * gom)
        s0, s1 = summarize(base), summarize(scaled)
        for name in ("median", "q25", "q75", "mean", "max"):
            assert getattr(s1, name) == pytest.approx(k * getattr(s0, name), rel=1e-12)


class TestReferenceRatios:
    def test_snow_over_tile_matches_stated_factor(self):
        assert MEDIAN_HUSKY_SNOW / MEDIAN_HUSKY_TILE == pytest.approx(1.608, abs=0.01)

    def test_warthog_factors(self):
        assert MEDIAN_WARTHOG_ICE / MEDIAN_HUSKY_SNOW == pytest.approx(ICE_OVER_SNOW_FACTOR, rel=1e-12)
        assert MEDIAN_WARTHOG_ICE / MEDIAN_WARTHOG_GRAVEL == pytest.approx(
            ICE_OVER_GRAVEL_FACTOR, rel=1e-12
        )
        assert MEDIAN_WARTHOG_ICE < MEDIAN_WARTHOG_GRAVEL

    def test_mass_and_speed_ratios(self):
        assert abs(WARTHOG.mass / HUSKY.mass - 6.2) < 0.1
        assert WARTHOG.v_max / HUSKY.v_max == 5.0


class TestSeriesCsv:
    def test_round_trip(self, tmp_path, testbot):
        ds = constant_dataset(testbot, 1.0, 3.0, vx=0.5, vy=0.02, omega=0.4, n=17)
        series = distortion_series(ds, angular_weight=0.8)
        path = tmp_path / "run.distortion.csv"
        write_series_csv(series, path)
        loaded = read_series_csv(path, angular_weight=0.8)
        np.testing.assert_array_equal(loaded.modulus, series.modulus)
        np.testing.assert_array_equal(loaded.gx, series.gx)
        assert_series_consistent(loaded)

    def test_write_is_byte_stable(self, tmp_path, testbot):
        ds = constant_dataset(testbot, 1.0, 3.0, vx=0.5, vy=0.02, omega=0.4, n=17)
        series = distortion_series(ds)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_series_csv(series, p1)
        write_series_csv(read_series_csv(p1), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_wrong_angular_weight_detected(self, tmp_path, testbot):
        ds = constant_dataset(testbot, -2.0, 2.0, vx=0.0, vy=0.0, omega=0.0, n=5)
        series = distortion_series(ds, angular_weight=0.5)
        path = tmp_path / "run.csv"
        write_series_csv(series, path)
        with pytest.raises(ParseError):
            read_series_csv(path, angular_weight=1.0)

    def test_decimate(self):
        s = series_from_moduli(np.arange(10.0))
        d = decimate(s, 4)
        np.testing.assert_array_equal(d.modulus, [0.0, 4.0, 8.0])
