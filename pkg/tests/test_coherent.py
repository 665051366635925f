import math

import numpy as np
import pytest

from cvkeyrate import (
    BlockParams,
    EnergyTestConfig,
    coherent_epsilon,
    coherent_rate_bounds,
    composable_rate_bounds,
    dimension_bound,
    dimension_penalty,
    min_energy_test_uses,
)
from cvkeyrate.coherent import collective_epsilon_for_target

from oracle import phi_via_loggamma

EPS32 = 2.0**-32


class TestEnergyTestConfig:
    def test_default_thresholds(self):
        et = EnergyTestConfig.with_default_thresholds(30.0, 10**6)
        assert et.d_a == et.d_b == pytest.approx(15.0 + 2.0 / 1000.0, rel=1e-12)
        assert et.p_en == 1.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(test_uses=0, d_a=1.0, d_b=1.0),
            dict(test_uses=10, d_a=0.0, d_b=1.0),
            dict(test_uses=10, d_a=1.0, d_b=1.0, p_en=0.0),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            EnergyTestConfig(**kwargs)


class TestDimensionBound:
    def test_floor_at_one(self):
        assert dimension_bound(10**6, 10**5, 0.0, 0.0, 1e-9) == 1.0

    def test_large_block_limit(self):
        n = k = 10**14
        value = dimension_bound(n, k, 1.0, 1.0, 1e-9)
        assert value / (n * 2.0) == pytest.approx(1.0, rel=1e-5)

    def test_too_small_energy_test_rejected(self):
        eps = 1e-9
        k_min = min_energy_test_uses(eps)
        with pytest.raises(ValueError, match="k >="):
            dimension_bound(10**6, k_min - 5, 1.0, 1.0, eps)
        assert math.isfinite(dimension_bound(10**6, k_min, 1.0, 1.0, eps))

    def test_monotone_in_key_uses_and_test_uses(self):
        eps = 1e-9
        values_n = [dimension_bound(n, 10**5, 15.0, 15.0, eps) for n in [10**5, 10**6, 10**7]]
        assert values_n[0] < values_n[1] < values_n[2]
        values_k = [dimension_bound(10**6, k, 15.0, 15.0, eps) for k in [10**3, 10**4, 10**6]]
        assert values_k[0] > values_k[1] > values_k[2]


class TestDimensionPenalty:
    def test_unit_dimension(self):
        # C(5, 4) = 5, ceil(log2 5) = 3
        assert dimension_penalty(1.0) == 6

    def test_clamped_below_one(self):
        assert dimension_penalty(0.0) == 6
        assert dimension_penalty(-3.0) == 6

    def test_fractional_rounds_up(self):
        assert dimension_penalty(1.0001) == dimension_penalty(2)

    def test_matches_loggamma_route(self):
        ks = list(range(1, 200)) + list(
            np.random.default_rng(5).integers(200, 10**4, size=60)
        )
        for k in ks:
            assert dimension_penalty(int(k)) == phi_via_loggamma(int(k))

    def test_huge_dimension_no_overflow(self):
        k = 10**12
        phi = dimension_penalty(k)
        # C(K+4,4) ~ K^4/24: the bit length matches the analytic estimate
        expected = 2 * math.ceil(4 * math.log2(k) - math.log2(24))
        assert abs(phi - expected) <= 2
        assert phi_via_loggamma(k) == phi


class TestCoherentEpsilon:
    def test_unit_dimension(self):
        assert coherent_epsilon(1.0, EPS32) == pytest.approx(EPS32 / 50.0, rel=1e-15)

    def test_zero_epsilon(self):
        assert coherent_epsilon(5.0, 0.0) == 0.0

    def test_target_inversion(self):
        k_dim = 1.8e8
        eps_needed = collective_epsilon_for_target(k_dim, EPS32)
        assert coherent_epsilon(k_dim, eps_needed) == pytest.approx(EPS32, rel=1e-12)


class TestCoherentRateBounds:
    def _bp(self, **kwargs):
        return BlockParams.split(10_000_000, 1_000_000, adc_bits=14, **kwargs)

    def test_gap_is_scaled_bit(self):
        bp = self._bp()
        et = EnergyTestConfig(test_uses=10**6, d_a=15.0, d_b=15.0, p_en=0.9)
        bounds = coherent_rate_bounds(bp, et, 0.1, 120.0, -95.0, 200.0)
        expected = bp.p_ps * 0.9 * bp.p_ec / (bp.n_total + 10**6)
        assert bounds.ub - bounds.lb == pytest.approx(expected, rel=1e-9, abs=5e-16)

    def test_penalty_free_limit_collapses(self):
        bp = self._bp()
        collective = composable_rate_bounds(bp, 0.1, 120.0, -95.0)
        for k in [10**4, 10**3, 10**2, 1]:
            et = EnergyTestConfig(test_uses=k, d_a=15.0, d_b=15.0, p_en=1.0)
            bounds = coherent_rate_bounds(bp, et, 0.1, 120.0, -95.0, 0.0)
            scale = bp.n_total / (bp.n_total + k)
            assert bounds.ub == pytest.approx(collective.ub * scale, rel=1e-12)
        # k -> 0 limit approaches the collective bound from below
        et1 = EnergyTestConfig(test_uses=1, d_a=15.0, d_b=15.0)
        assert coherent_rate_bounds(bp, et1, 0.1, 120.0, -95.0, 0.0).ub == pytest.approx(
            collective.ub, rel=1e-6
        )

    def test_never_beats_rescaled_collective(self):
        bp = self._bp()
        rng = np.random.default_rng(99)
        for _ in range(50):
            rate = float(rng.uniform(-0.2, 0.5))
            aep = float(rng.uniform(50.0, 300.0))
            k = int(rng.integers(10**3, 5 * 10**6))
            phi = float(rng.integers(0, 400))
            et = EnergyTestConfig(test_uses=k, d_a=15.0, d_b=15.0, p_en=1.0)
            coh = coherent_rate_bounds(bp, et, rate, aep, -95.0, phi)
            coll = composable_rate_bounds(bp, rate, aep, -95.0)
            assert coh.ub <= coll.ub * bp.n_total / (bp.n_total + k) + 1e-15

    def test_negative_penalty_rejected(self):
        et = EnergyTestConfig(test_uses=10, d_a=1.0, d_b=1.0)
        with pytest.raises(ValueError):
            coherent_rate_bounds(self._bp(), et, 0.1, 120.0, -95.0, -1.0)
