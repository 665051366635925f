"""End-to-end rate evaluation: one record per protocol configuration.

Composes channel, estimation, asymptotic and finite-size pieces into a
``RateReport`` row, optionally optimizing the modulation variance, and
runs sweeps over loss or block size with optional parallelism.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import Callable, Sequence

from .channel import ChannelParams, Detection
from .coherent import (
    EnergyTestConfig,
    coherent_epsilon,
    coherent_rate_bounds,
    dimension_bound,
    dimension_penalty,
)
from .estimation import (
    EstimationError,
    PEConfig,
    TailBound,
    estimate_worst_case,
)
from .finite_size import (
    AepForm,
    BlockParams,
    SecurityEpsilons,
    aep_penalty,
    composable_rate_bounds,
    hash_offset,
    key_length_ub,
    legacy_rate_lb,
    total_epsilon,
)
from .gaussian import asymptotic_rate, holevo_bound, mutual_information
from .optimize import OptimizeResult, optimize_modulation


class Attack(Enum):
    COLLECTIVE = "collective"
    COHERENT = "coherent"


OPTIMIZE_TARGETS = ("lb", "ub", "legacy")


@dataclass(frozen=True)
class Scenario:
    """Protocol-level settings that stay fixed across a sweep."""

    detection: Detection
    attack: Attack = Attack.COLLECTIVE
    epsilons: SecurityEpsilons = field(default_factory=SecurityEpsilons)
    c_pe: int = 0
    tail: TailBound = TailBound.GAUSSIAN
    aep_form: AepForm = AepForm.EXACT
    n_params: int = 2
    energy_test_uses: int | None = None
    threshold_margin: float = 2.0
    p_en: float = 1.0
    d_a: float | None = None
    d_b: float | None = None

    def __post_init__(self) -> None:
        if self.attack is Attack.COHERENT and self.detection is not Detection.HETERODYNE:
            raise ValueError("the coherent-attack extension applies to heterodyne only")

    @property
    def effective_tail(self) -> TailBound:
        # Coherent attacks require the stricter chi-squared tail bound.
        if self.attack is Attack.COHERENT:
            return TailBound.CHI_SQUARED
        return self.tail


@dataclass(frozen=True)
class RateReport:
    """One evaluated configuration; the unit row of all outputs."""

    protocol: str
    attack: str
    loss_db: float
    transmissivity: float
    excess_noise: float
    det_efficiency: float
    elec_noise: float
    mod_variance: float
    n_total: int
    n_key: int
    n_pe: int
    n_blocks: int
    adc_bits: int
    beta: float
    p_ec: float
    p_ps: float
    eps_cor: float
    eps_s: float
    eps_h: float
    eps_pe: float
    deviations: float = math.nan
    t_wc: float = math.nan
    xi_wc: float = math.nan
    mutual_info: float = math.nan
    holevo: float = math.nan
    rate_asym: float = math.nan
    aep_penalty: float = math.nan
    hash_offset: float = math.nan
    dim_penalty: float | None = None
    key_bits_ub: float = math.nan
    rate_ub_raw: float = math.nan
    rate_lb_raw: float = math.nan
    rate_legacy_raw: float = math.nan
    rate_ub: float = math.nan
    rate_lb: float = math.nan
    rate_legacy: float = math.nan
    eps_total: float = math.nan
    eps_coherent: float | None = None
    energy_test_uses: int | None = None
    dimension_bound: float | None = None
    n_extended: int = 0
    error: str = ""


COLUMNS: tuple[str, ...] = tuple(f.name for f in fields(RateReport))


def _energy_test(scenario: Scenario, ch: ChannelParams, bp: BlockParams) -> EnergyTestConfig:
    k = scenario.energy_test_uses if scenario.energy_test_uses is not None else bp.n_total // 10
    if scenario.d_a is not None or scenario.d_b is not None:
        default = ch.mod_variance / 2.0 + scenario.threshold_margin / math.sqrt(k)
        return EnergyTestConfig(
            test_uses=k,
            d_a=scenario.d_a if scenario.d_a is not None else default,
            d_b=scenario.d_b if scenario.d_b is not None else default,
            p_en=scenario.p_en,
        )
    return EnergyTestConfig.with_default_thresholds(
        ch.mod_variance, k, margin=scenario.threshold_margin, p_en=scenario.p_en
    )


def evaluate_point(scenario: Scenario, ch: ChannelParams, bp: BlockParams) -> RateReport:
    """Evaluate one configuration; raises on invalid or infeasible inputs."""
    det = scenario.detection
    eps = scenario.epsilons
    pe_cfg = PEConfig(
        n_pe=bp.n_pe,
        n_blocks=bp.n_blocks,
        v0=det.v0,
        c_pe=scenario.c_pe,
        tail=scenario.effective_tail,
        eps_pe=eps.pe,
    )
    wc = estimate_worst_case(ch, pe_cfg)
    info = mutual_information(ch, det)
    chi = holevo_bound(ch.with_channel(wc.t_wc, wc.xi_wc), det)
    rate_pe = asymptotic_rate(bp.beta, info, chi)

    aep = aep_penalty(eps.s, bp.adc_bits, scenario.aep_form)
    offset = hash_offset(eps.h, eps.cor)
    eps_tot = total_epsilon(eps, bp.p_ec, scenario.n_params)
    key_bits = key_length_ub(bp.n_key, rate_pe, aep, offset)
    legacy_raw = legacy_rate_lb(bp, rate_pe, eps, scenario.aep_form)

    if scenario.attack is Attack.COLLECTIVE:
        bounds = composable_rate_bounds(bp, rate_pe, aep, offset)
        phi = None
        k_dim = None
        eps_coh = None
        test_uses = None
        n_extended = bp.n_total
    else:
        et = _energy_test(scenario, ch, bp)
        k_dim = dimension_bound(bp.n_key, et.test_uses, et.d_a, et.d_b, eps_tot)
        phi = dimension_penalty(k_dim)
        eps_coh = coherent_epsilon(k_dim, eps_tot)
        bounds = coherent_rate_bounds(bp, et, rate_pe, aep, offset, phi)
        test_uses = et.test_uses
        n_extended = bp.n_total + et.test_uses

    return RateReport(
        protocol=det.value,
        attack=scenario.attack.value,
        loss_db=ch.loss_db,
        transmissivity=ch.transmissivity,
        excess_noise=ch.excess_noise,
        det_efficiency=ch.det_efficiency,
        elec_noise=ch.elec_noise,
        mod_variance=ch.mod_variance,
        n_total=bp.n_total,
        n_key=bp.n_key,
        n_pe=bp.n_pe,
        n_blocks=bp.n_blocks,
        adc_bits=bp.adc_bits,
        beta=bp.beta,
        p_ec=bp.p_ec,
        p_ps=bp.p_ps,
        eps_cor=eps.cor,
        eps_s=eps.s,
        eps_h=eps.h,
        eps_pe=eps.pe,
        deviations=wc.deviations,
        t_wc=wc.t_wc,
        xi_wc=wc.xi_wc,
        mutual_info=info,
        holevo=chi,
        rate_asym=rate_pe,
        aep_penalty=aep,
        hash_offset=offset,
        dim_penalty=phi,
        key_bits_ub=key_bits,
        rate_ub_raw=bounds.ub,
        rate_lb_raw=bounds.lb,
        rate_legacy_raw=legacy_raw,
        rate_ub=max(bounds.ub, 0.0),
        rate_lb=max(bounds.lb, 0.0),
        rate_legacy=max(legacy_raw, 0.0),
        eps_total=eps_tot,
        eps_coherent=eps_coh,
        energy_test_uses=test_uses,
        dimension_bound=k_dim,
        n_extended=n_extended,
        error="",
    )


def rate_objective(
    scenario: Scenario, ch_base: ChannelParams, bp: BlockParams, target: str = "lb"
) -> Callable[[float], float]:
    """Total objective over the modulation variance for the optimizer.

    Infeasible variances (e.g. PE statistics too weak at tiny V) map to
    -inf instead of raising.
    """
    if target not in OPTIMIZE_TARGETS:
        raise ValueError(f"target must be one of {OPTIMIZE_TARGETS}, got {target!r}")

    def objective(v: float) -> float:
        try:
            report = evaluate_point(scenario, ch_base.with_mod_variance(v), bp)
        except ValueError:
            return -math.inf
        return {
            "lb": report.rate_lb_raw,
            "ub": report.rate_ub_raw,
            "legacy": report.rate_legacy_raw,
        }[target]

    return objective


def evaluate_optimized(
    scenario: Scenario,
    ch_base: ChannelParams,
    bp: BlockParams,
    v_range: tuple[float, float] = (0.01, 1e4),
    target: str = "lb",
) -> tuple[RateReport, OptimizeResult]:
    """Optimize the modulation variance, then report at the optimum."""
    result = optimize_modulation(rate_objective(scenario, ch_base, bp, target), v_range)
    if not math.isfinite(result.rate_opt):
        raise EstimationError(
            "no feasible modulation variance in range "
            f"[{v_range[0]}, {v_range[1]}] for this configuration"
        )
    report = evaluate_point(scenario, ch_base.with_mod_variance(result.v_opt), bp)
    return report, result


@dataclass(frozen=True)
class SweepPoint:
    """One unit of sweep work, self-contained for worker processes."""

    scenario: Scenario
    channel: ChannelParams
    block: BlockParams
    optimize_v: bool = False
    v_range: tuple[float, float] = (0.01, 1e4)
    target: str = "lb"


def _failed_report(pt: SweepPoint, message: str) -> RateReport:
    return RateReport(
        protocol=pt.scenario.detection.value,
        attack=pt.scenario.attack.value,
        loss_db=pt.channel.loss_db,
        transmissivity=pt.channel.transmissivity,
        excess_noise=pt.channel.excess_noise,
        det_efficiency=pt.channel.det_efficiency,
        elec_noise=pt.channel.elec_noise,
        mod_variance=pt.channel.mod_variance,
        n_total=pt.block.n_total,
        n_key=pt.block.n_key,
        n_pe=pt.block.n_pe,
        n_blocks=pt.block.n_blocks,
        adc_bits=pt.block.adc_bits,
        beta=pt.block.beta,
        p_ec=pt.block.p_ec,
        p_ps=pt.block.p_ps,
        eps_cor=pt.scenario.epsilons.cor,
        eps_s=pt.scenario.epsilons.s,
        eps_h=pt.scenario.epsilons.h,
        eps_pe=pt.scenario.epsilons.pe,
        n_extended=pt.block.n_total,
        error=message,
    )


def evaluate_sweep_point(pt: SweepPoint) -> RateReport:
    """Evaluate one sweep point, turning math failures into in-row errors."""
    try:
        if pt.optimize_v:
            report, _ = evaluate_optimized(
                pt.scenario, pt.channel, pt.block, pt.v_range, pt.target
            )
        else:
            report = evaluate_point(pt.scenario, pt.channel, pt.block)
        return report
    except ValueError as exc:
        return _failed_report(pt, str(exc))


def run_points(points: Sequence[SweepPoint], workers: int = 1) -> list[RateReport]:
    """Evaluate sweep points, preserving input order regardless of workers."""
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    if workers == 1 or len(points) <= 1:
        return [evaluate_sweep_point(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(evaluate_sweep_point, points))


def build_channel(
    loss_db: float,
    excess_noise: float,
    det_efficiency: float,
    elec_noise: float,
    mod_variance: float,
) -> ChannelParams:
    """Convenience constructor mirroring the standard dB-first workflow."""
    return ChannelParams.from_db(
        loss_db, excess_noise, det_efficiency, elec_noise, mod_variance
    )


__all__ = [
    "Attack",
    "COLUMNS",
    "OPTIMIZE_TARGETS",
    "RateReport",
    "Scenario",
    "SweepPoint",
    "build_channel",
    "evaluate_optimized",
    "evaluate_point",
    "evaluate_sweep_point",
    "rate_objective",
    "run_points",
]
