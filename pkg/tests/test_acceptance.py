"""Acceptance suite: runs every criterion at its stated tolerance.

Each criterion prints one PASS/FAIL line (run with ``pytest -s`` to see
them).  Criteria 1 and 2 assert figure-level positivity anchors that the
formula set cannot reach at the stated block size; the supplementary
tests at the end demonstrate the same qualitative claims at the block
sizes where they are decidable.
"""
from __future__ import annotations

import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

import oracle

from cvkeyrate import (
    Attack,
    BlockParams,
    ChannelParams,
    Detection,
    Scenario,
    SimConfig,
    SweepPoint,
    TailBound,
    aep_penalty,
    asymptotic_rate,
    bosonic_entropy,
    chi2_deviations,
    dimension_penalty,
    eve_conditional_cm,
    eve_output_cm,
    eve_tmsv_variance,
    evaluate_optimized,
    evaluate_point,
    hash_offset,
    holevo_bound,
    legacy_rate_lb,
    mutual_information,
    optimize_modulation,
    rate_objective,
    run_points,
    symplectic_eigenvalues,
    transmissivity_from_db,
)
from cvkeyrate.finite_size import composable_rate_bounds, SecurityEpsilons

EPS32 = 2.0**-32
BETA = 0.98
P_EC = 0.95
CHANNEL = dict(excess_noise=0.01, det_efficiency=0.6, elec_noise=0.1)
ADC_BITS = {Detection.HOMODYNE: 7, Detection.HETERODYNE: 14}


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except AssertionError:
        print(f"\nACCEPTANCE CRITERION {number}: FAIL - {description}")
        raise
    print(f"\nACCEPTANCE CRITERION {number}: PASS - {description}")


def _fig_block(detection: Detection, n_total: int = 10_000_000) -> BlockParams:
    return BlockParams.split(
        n_total, n_total // 10, adc_bits=ADC_BITS[detection], p_ec=P_EC, beta=BETA
    )


def _channel(loss_db: float, v: float = 1.0) -> ChannelParams:
    return ChannelParams.from_db(loss_db, mod_variance=v, **CHANNEL)


def _optimized_sweep(detection: Detection, loss_grid) -> list:
    scenario = Scenario(detection=detection)
    block = _fig_block(detection)
    points = [
        SweepPoint(
            scenario=scenario,
            channel=_channel(float(db)),
            block=block,
            optimize_v=True,
        )
        for db in loss_grid
    ]
    return run_points(points)


@pytest.fixture(scope="module")
def sweeps():
    grid = np.arange(0.5, 40.0 + 0.25, 0.5)
    started = time.monotonic()
    result = {det: _optimized_sweep(det, grid) for det in Detection}
    elapsed = time.monotonic() - started
    return result, elapsed


class TestCriterion1:
    """Loss-sweep reproduction: ordering, bound gap, oracle match, runtime,
    and positivity at 7 dB."""

    def test_criterion_1(self, sweeps):
        with criterion(1, "loss-sweep reproduction with optimized modulation"):
            rows_by_det, elapsed = sweeps
            assert elapsed < 60.0, f"sweep took {elapsed:.1f} s (budget 60 s)"

            for det, rows in rows_by_det.items():
                assert all(r.error == "" for r in rows)
                for r in rows:
                    gap = r.rate_ub_raw - r.rate_lb_raw
                    assert gap == pytest.approx(P_EC / 10_000_000, rel=1e-9, abs=5e-16)
                    # the improved bound dominates the previous-generation one
                    assert r.rate_lb_raw >= r.rate_legacy_raw - 1e-12
                    if r.rate_ub_raw > 0.0 or r.rate_legacy_raw > 0.0:
                        assert r.rate_ub_raw > r.rate_legacy_raw

            # extended-precision oracle at 10 sampled sweep points
            samples = [(Detection.HOMODYNE, db) for db in (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)]
            samples += [(Detection.HETERODYNE, db) for db in (1.0, 2.0, 3.0, 4.0)]
            for det, db in samples:
                rows = rows_by_det[det]
                row = next(r for r in rows if abs(r.loss_db - db) < 1e-9)
                ref = oracle.rate_point(
                    V=row.mod_variance,
                    loss_db=db,
                    xi=CHANNEL["excess_noise"],
                    eta=CHANNEL["det_efficiency"],
                    u_el=CHANNEL["elec_noise"],
                    v0=det.v0,
                    adc_bits=ADC_BITS[det],
                    n_total=10_000_000,
                    n_pe=1_000_000,
                    beta=BETA,
                    p_ec=P_EC,
                    eps=EPS32,
                )
                for build, key in [
                    (row.rate_ub_raw, "rate_ub"),
                    (row.rate_legacy_raw, "rate_legacy"),
                ]:
                    reference = float(ref[key])
                    assert build == pytest.approx(reference, rel=1e-9), (
                        f"{det.value} at {db} dB: {key} build={build!r} oracle={reference!r}"
                    )

            # positivity at 7 dB for both detections
            for det, rows in rows_by_det.items():
                row = next(r for r in rows if abs(r.loss_db - 7.0) < 1e-9)
                assert row.rate_ub_raw > 0.0, (
                    f"{det.value}: improved upper bound at 7 dB is {row.rate_ub_raw:.6f} "
                    f"(V={row.mod_variance:.3f}); the AEP correction plus worst-case "
                    "parameter-estimation penalties exceed the attainable asymptotic "
                    "rate at N=1e7, m=1e6"
                )


class TestCriterion2:
    """Block-size threshold: improved rates positive at strictly smaller N."""

    GRID = (100_000, 300_000, 1_000_000, 3_000_000, 10_000_000)

    @staticmethod
    def _first_positive(detection: Detection, grid, attr: str, target: str):
        scenario = Scenario(detection=detection)
        channel = _channel(7.0)
        for n_total in grid:
            report, _ = evaluate_optimized(
                scenario, channel, _fig_block(detection, n_total), target=target
            )
            if getattr(report, attr) > 0.0:
                return n_total
        return None

    def test_criterion_2(self):
        with criterion(2, "positive rate reached at strictly smaller block size"):
            for det in Detection:
                improved = self._first_positive(det, self.GRID, "rate_ub_raw", "ub")
                legacy = self._first_positive(det, self.GRID, "rate_legacy_raw", "legacy")
                assert improved is not None, (
                    f"{det.value}: the improved bound is not positive anywhere on "
                    f"N in {self.GRID} at 7 dB (worst-case PE plus AEP penalties); "
                    "the threshold ordering is undecidable on this grid"
                )
                assert legacy is None or improved < legacy, (
                    f"{det.value}: improved first positive at N={improved}, "
                    f"legacy at N={legacy}"
                )


class TestCriterion3:
    """Monte Carlo variance validation against the analytic formulas."""

    def test_criterion_3(self):
        from cvkeyrate import validate_variances

        with criterion(3, "empirical estimator variances match analytic within 10%"):
            cfg = SimConfig(
                channel=_channel(7.0, v=30.0),
                detection=Detection.HOMODYNE,
                n_pe=100_000,
                trials=10_000,
                seed=20_240_807,
            )
            started = time.monotonic()
            report = validate_variances(cfg, c_pe=0)
            elapsed = time.monotonic() - started
            assert elapsed < 120.0, f"validation took {elapsed:.1f} s (budget 120 s)"
            assert abs(report.var_t_ratio - 1.0) <= 0.10, report.to_text()
            assert abs(report.var_sz2_ratio - 1.0) <= 0.10, report.to_text()
            assert report.passed is True


class TestCriterion4:
    """Tail coverage of the worst-case bounds."""

    def test_criterion_4(self):
        from cvkeyrate import validate_tail_coverage

        with criterion(4, "worst-case bounds miss at the prescribed rate"):
            cfg = SimConfig(
                channel=_channel(7.0, v=30.0),
                detection=Detection.HOMODYNE,
                n_pe=10_000,
                trials=100_000,
                seed=424_242,
            )
            eps_pe = 1e-2
            gauss = validate_tail_coverage(cfg, eps_pe=eps_pe, tail=TailBound.GAUSSIAN)
            chi2 = validate_tail_coverage(cfg, eps_pe=eps_pe, tail=TailBound.CHI_SQUARED)
            se = math.sqrt(eps_pe * (1.0 - eps_pe) / cfg.trials)
            assert abs(gauss.miss_any - eps_pe) <= 3.0 * se, gauss.to_text()
            # per-parameter one-sided rates stay within the bound
            assert gauss.miss_t <= eps_pe + 3.0 * se
            assert gauss.miss_sz2 <= eps_pe + 3.0 * se
            # the chi-squared tail bound over-covers
            assert chi2.miss_any < gauss.miss_any
            assert chi2.miss_any < eps_pe


class TestCriterion5:
    """Closed-form spot checks at stated tolerances."""

    def test_criterion_5(self):
        with criterion(5, "closed-form spot checks"):
            assert hash_offset(EPS32, EPS32) == pytest.approx(-95.0, abs=1e-12)
            aep_ref = float(oracle.aep_penalty(EPS32, 7))
            assert abs(aep_penalty(EPS32, 7) - aep_ref) <= 1e-3
            assert round(aep_ref, 2) == 120.44 or abs(aep_ref - 120.44) < 0.01
            assert dimension_penalty(1) == 6
            assert bosonic_entropy(3.0) == pytest.approx(2.0, abs=1e-12)
            assert transmissivity_from_db(7.0) == pytest.approx(0.1995262315, abs=1e-9)
            assert chi2_deviations(math.exp(-2.0)) == pytest.approx(2.0, abs=1e-12)


class TestCriterion6:
    """Property suites over randomized parameter grids."""

    @staticmethod
    def _random_channels(count, seed, v_max=60.0):
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(count):
            out.append(
                ChannelParams.from_transmissivity(
                    transmissivity=float(rng.uniform(0.02, 0.98)),
                    excess_noise=float(rng.uniform(0.0, 0.15)),
                    det_efficiency=float(rng.uniform(0.3, 1.0)),
                    elec_noise=float(rng.uniform(0.0, 0.4)),
                    mod_variance=float(rng.uniform(0.5, v_max)),
                )
            )
        return out

    def test_criterion_6(self):
        with criterion(6, "physicality, ordering and optimizer property suites"):
            channels = self._random_channels(1000, seed=61_803)
            rng = np.random.default_rng(271_828)

            # physical covariance matrices and non-negative Holevo bound
            for i, ch in enumerate(channels):
                det = Detection.HOMODYNE if i % 2 == 0 else Detection.HETERODYNE
                omega = eve_tmsv_variance(ch.transmissivity, ch.excess_noise)
                total = symplectic_eigenvalues(
                    eve_output_cm(ch.mod_variance, ch.transmissivity, omega)
                )
                cond = symplectic_eigenvalues(eve_conditional_cm(ch, omega, det))
                assert total.nu_minus >= 1.0 - 1e-9
                assert cond.nu_minus >= 1.0 - 1e-9
                assert holevo_bound(ch, det) >= 0.0

            # improved lower bound never loses to the previous-generation bound
            eps = SecurityEpsilons()
            for ch in channels[:300]:
                det = Detection.HOMODYNE
                n_total = int(rng.integers(10**5, 10**8))
                block = BlockParams.split(
                    n_total,
                    max(1, n_total // int(rng.integers(5, 20))),
                    adc_bits=int(rng.integers(4, 16)),
                    p_ec=float(rng.uniform(0.5, 1.0)),
                    beta=float(rng.uniform(0.7, 1.0)),
                )
                rate = asymptotic_rate(
                    block.beta,
                    mutual_information(ch, det),
                    holevo_bound(ch, det),
                )
                bounds = composable_rate_bounds(
                    block, rate, aep_penalty(eps.s, block.adc_bits), hash_offset(eps.h, eps.cor)
                )
                assert legacy_rate_lb(block, rate, eps) <= bounds.lb + 1e-15

            # coherent-attack bound never beats the rescaled collective bound
            heterodyne_grid = self._random_channels(200, seed=314_159, v_max=40.0)
            block = _fig_block(Detection.HETERODYNE)
            collective = Scenario(detection=Detection.HETERODYNE)
            coherent = Scenario(detection=Detection.HETERODYNE, attack=Attack.COHERENT)
            for ch in heterodyne_grid:
                coll_row = evaluate_point(collective, ch, block)
                coh_row = evaluate_point(coherent, ch, block)
                scale = block.n_total / coh_row.n_extended
                assert coh_row.rate_ub_raw <= coll_row.rate_ub_raw * scale + 1e-15

            # optimizer matches an exhaustive 1e4-point grid to the grid pitch
            settings = [
                (Detection.HOMODYNE, 3.0),
                (Detection.HOMODYNE, 7.0),
                (Detection.HETERODYNE, 5.0),
            ]
            grid_points = 10_000
            v_lo, v_hi = 0.01, 1e4
            ratio = (v_hi / v_lo) ** (1.0 / (grid_points - 1))
            grid = v_lo * ratio ** np.arange(grid_points)
            for det, db in settings:
                objective = rate_objective(
                    Scenario(detection=det), _channel(db), _fig_block(det), "lb"
                )
                values = [objective(float(v)) for v in grid]
                best = int(np.argmax(values))
                result = optimize_modulation(objective, (v_lo, v_hi))
                assert abs(math.log(result.v_opt / grid[best])) <= math.log(ratio) * 1.01, (
                    f"{det.value} at {db} dB: optimizer {result.v_opt} vs grid {grid[best]}"
                )
                assert result.rate_opt >= values[best] - 1e-12


class TestQualitativeClaims:
    """The improved-bound claims, demonstrated where the rates are decidable.

    At 7 dB the zero crossings sit just above N=1e7 (homodyne ~1.4e7,
    heterodyne ~3.7e7), so the ordering claims are shown on an extended
    block-size grid.
    """

    EXTENDED_GRID = (15_000_000, 25_000_000, 40_000_000, 60_000_000)

    def test_positive_within_curve_support(self):
        for det, db in [(Detection.HOMODYNE, 6.0), (Detection.HETERODYNE, 4.0)]:
            report, _ = evaluate_optimized(
                Scenario(detection=det), _channel(db), _fig_block(det)
            )
            assert report.rate_ub_raw > 0.0
            assert report.rate_ub_raw > report.rate_legacy_raw

    def test_improved_bound_positive_at_strictly_smaller_block_size(self):
        for det in Detection:
            improved = TestCriterion2._first_positive(
                det, self.EXTENDED_GRID, "rate_ub_raw", "ub"
            )
            legacy = TestCriterion2._first_positive(
                det, self.EXTENDED_GRID, "rate_legacy_raw", "legacy"
            )
            assert improved is not None and legacy is not None
            assert improved < legacy, (
                f"{det.value}: improved first positive at N={improved}, legacy at {legacy}"
            )
