"""Parameter estimation: estimator deviations, worst-case channel values.

The sacrificed signals give maximum-likelihood estimators for the
transmissivity and the noise; the security analysis then uses values
shifted a number of standard deviations in the pessimistic direction
(lower transmissivity, higher excess noise).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy.special import ndtri

from .channel import ChannelParams, Detection
from .gaussian import asymptotic_rate, holevo_bound, mutual_information


class TailBound(Enum):
    """How the deviation multiplier is derived from the PE failure probability.

    GAUSSIAN treats the estimators as Gaussian and inverts the two-sided
    tail mass; CHI_SQUARED uses the looser chi-squared tail bound required
    under stricter conditions (coherent attacks).
    """

    GAUSSIAN = "gaussian"
    CHI_SQUARED = "chi2"


class EstimationError(ValueError):
    """Worst-case construction failed; carries the PE count that would fix it."""

    def __init__(self, message: str, min_pooled: int | None = None):
        super().__init__(message)
        self.min_pooled = min_pooled


@dataclass(frozen=True)
class PEConfig:
    """Parameter-estimation configuration.

    ``n_pe`` signals per block are pooled over ``n_blocks`` blocks of a
    stable session.  ``c_pe`` selects the estimator-variance branch: 0
    assumes Alice's modulation variance is known exactly, 2 does not.
    """

    n_pe: int
    n_blocks: int = 1
    v0: int = 1
    c_pe: int = 0
    tail: TailBound = TailBound.GAUSSIAN
    eps_pe: float = 2.0**-32

    def __post_init__(self) -> None:
        if self.n_pe < 1 or self.n_blocks < 1:
            raise ValueError("n_pe and n_blocks must be >= 1")
        if self.pooled < 2:
            raise ValueError("pooled PE count n_pe * n_blocks must be >= 2")
        if self.v0 not in (1, 2):
            raise ValueError(f"v0 must be 1 or 2, got {self.v0}")
        if self.c_pe not in (0, 2):
            raise ValueError(f"c_pe must be 0 or 2, got {self.c_pe}")
        if not 0.0 < self.eps_pe < 1.0:
            raise ValueError(f"eps_pe must be in (0, 1), got {self.eps_pe}")

    @property
    def pooled(self) -> int:
        return self.n_pe * self.n_blocks


@dataclass(frozen=True)
class WorstCaseParams:
    """Estimators plus their pessimistic shifts."""

    t_hat: float
    xi_hat: float
    t_wc: float
    xi_wc: float
    deviations: float

    def __post_init__(self) -> None:
        if self.t_wc <= 0.0:
            raise ValueError(f"worst-case transmissivity must be > 0, got {self.t_wc}")


def gaussian_deviations(eps_pe: float) -> float:
    """Deviation multiplier sqrt(2) * erfinv(1 - eps_pe).

    Equals the standard-normal quantile at two-sided tail mass eps_pe;
    evaluated through the inverse normal CDF, which keeps full precision
    for very small eps_pe.
    """
    if not 0.0 < eps_pe < 1.0:
        raise ValueError(f"eps_pe must be in (0, 1), got {eps_pe}")
    return float(-ndtri(eps_pe / 2.0))


def chi2_deviations(eps_pe: float) -> float:
    """Deviation multiplier sqrt(2 * ln(1/eps_pe)) from the chi-squared tail bound."""
    if not 0.0 < eps_pe < 1.0:
        raise ValueError(f"eps_pe must be in (0, 1), got {eps_pe}")
    return math.sqrt(2.0 * math.log(1.0 / eps_pe))


def deviations(eps_pe: float, tail: TailBound) -> float:
    if tail is TailBound.GAUSSIAN:
        return gaussian_deviations(eps_pe)
    return chi2_deviations(eps_pe)


def transmissivity_std(ch: ChannelParams, pe: PEConfig) -> float:
    """Standard deviation of the transmissivity estimator.

    (2T / sqrt(V0*m)) * sqrt(c_pe + (xi + (V0 + u_el)/(eta*T)) / V) with m
    the pooled PE count.
    """
    if ch.mod_variance <= 0.0:
        raise ValueError("transmissivity estimation requires mod_variance > 0")
    v0 = float(pe.v0)
    snr_inv = (
        ch.excess_noise
        + (v0 + ch.elec_noise) / (ch.det_efficiency * ch.transmissivity)
    ) / ch.mod_variance
    return (
        2.0
        * ch.transmissivity
        / math.sqrt(v0 * pe.pooled)
        * math.sqrt(pe.c_pe + snr_inv)
    )


def excess_noise_std(ch: ChannelParams, t_wc: float, pe: PEConfig) -> float:
    """Standard deviation attached to the worst-case excess noise.

    sqrt(2/(V0*m)) * (eta*T*xi + V0 + u_el) / (eta * T_wc) with m the
    pooled PE count.
    """
    if t_wc <= 0.0:
        raise ValueError(f"t_wc must be > 0, got {t_wc}")
    v0 = float(pe.v0)
    noise_var = (
        ch.det_efficiency * ch.transmissivity * ch.excess_noise + v0 + ch.elec_noise
    )
    return math.sqrt(2.0 / (v0 * pe.pooled)) * noise_var / (ch.det_efficiency * t_wc)


def worst_case(
    t_hat: float,
    xi_hat: float,
    std_t: float,
    std_xi: float,
    w: float,
) -> WorstCaseParams:
    """Shift the estimators w standard deviations in the pessimistic direction.

    T_wc = T_hat - w*std_t and xi_wc = (T_hat/T_wc)*xi_hat + w*std_xi.
    A non-positive T_wc means the PE statistics are insufficient; the error
    reports the factor by which the pooled count must grow.
    """
    if w < 0.0:
        raise ValueError(f"deviation multiplier must be >= 0, got {w}")
    t_wc = t_hat - w * std_t
    if t_wc <= 0.0:
        scale = (w * std_t / t_hat) ** 2
        raise EstimationError(
            f"worst-case transmissivity {t_wc} <= 0: insufficient PE statistics; "
            f"increase the pooled PE count by a factor > {scale:.4g}"
        )
    xi_wc = (t_hat / t_wc) * xi_hat + w * std_xi
    return WorstCaseParams(
        t_hat=t_hat, xi_hat=xi_hat, t_wc=t_wc, xi_wc=xi_wc, deviations=w
    )


def estimate_worst_case(ch: ChannelParams, pe: PEConfig) -> WorstCaseParams:
    """Analytic PE: estimators pinned at the configured channel values.

    This is the mode used for rate curves: T_hat = T and xi_hat = xi, with
    the deviations computed from the analytic estimator variances at those
    values.  Simulated estimators come from the montecarlo module instead.
    """
    w = deviations(pe.eps_pe, pe.tail)
    std_t = transmissivity_std(ch, pe)
    t_wc = ch.transmissivity - w * std_t
    if t_wc <= 0.0:
        v0 = float(pe.v0)
        snr_inv = (
            ch.excess_noise
            + (v0 + ch.elec_noise) / (ch.det_efficiency * ch.transmissivity)
        ) / ch.mod_variance
        min_pooled = math.floor(4.0 * w * w * (pe.c_pe + snr_inv) / v0) + 1
        raise EstimationError(
            f"worst-case transmissivity {t_wc} <= 0 at pooled PE count {pe.pooled}; "
            f"need at least {min_pooled} pooled PE signals",
            min_pooled=min_pooled,
        )
    std_xi = excess_noise_std(ch, t_wc, pe)
    return worst_case(ch.transmissivity, ch.excess_noise, std_t, std_xi, w)


def estimated_rate(
    ch_hat: ChannelParams, wc: WorstCaseParams, det: Detection, beta: float
) -> float:
    """PE-adapted asymptotic rate: beta*I at the estimators minus chi at the worst case."""
    ch_at_hat = ch_hat.with_channel(wc.t_hat, max(wc.xi_hat, 0.0))
    ch_at_wc = ch_hat.with_channel(wc.t_wc, wc.xi_wc)
    info = mutual_information(ch_at_hat, det)
    chi = holevo_bound(ch_at_wc, det)
    return asymptotic_rate(beta, info, chi)
