"""Collective-to-coherent security extension for the heterodyne protocol.

An energy test over k extra states bounds the effective signal-space
dimension K; security against coherent attacks then costs a key-length
penalty of Phi bits, a rescaled security parameter, and the extended block
N' = N + k.  Only the accounting is modeled; the test itself is not
simulated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .finite_size import BlockParams, RateBounds, key_length_ub


@dataclass(frozen=True)
class EnergyTestConfig:
    """Energy-test accounting: test size, thresholds and success probability."""

    test_uses: int
    d_a: float
    d_b: float
    p_en: float = 1.0

    def __post_init__(self) -> None:
        if self.test_uses < 1:
            raise ValueError(f"test_uses must be >= 1, got {self.test_uses}")
        if self.d_a <= 0.0 or self.d_b <= 0.0:
            raise ValueError("energy thresholds d_a and d_b must be > 0")
        if not 0.0 < self.p_en <= 1.0:
            raise ValueError(f"p_en must be in (0, 1], got {self.p_en}")

    @classmethod
    def with_default_thresholds(
        cls, mod_variance: float, test_uses: int, margin: float = 2.0, p_en: float = 1.0
    ) -> "EnergyTestConfig":
        """Thresholds at the mean photon number V/2 plus margin/sqrt(k).

        The O(k^-1/2) slack constant is not pinned by theory; 2.0 is a
        conservative default and remains configurable.
        """
        d = mod_variance / 2.0 + margin / math.sqrt(test_uses)
        return cls(test_uses=test_uses, d_a=d, d_b=d, p_en=p_en)


def min_energy_test_uses(eps: float) -> int:
    """Smallest k keeping the dimension-bound denominator positive."""
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    return math.floor(2.0 * math.log(8.0 / eps)) + 1


def dimension_bound(n_key: int, test_uses: int, d_a: float, d_b: float, eps: float) -> float:
    """Effective dimension K certified by the energy test.

    K = max{1, n(d_a + d_b) * (1 + 2 sqrt(L/2n) + L/n) / (1 - 2 sqrt(L/2k))}
    with L = ln(8/eps).  ``eps`` is the total security parameter of the
    collective-attack analysis.
    """
    if n_key < 1:
        raise ValueError(f"n_key must be >= 1, got {n_key}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must be in (0, 1), got {eps}")
    log_term = math.log(8.0 / eps)
    denom = 1.0 - 2.0 * math.sqrt(log_term / (2.0 * test_uses))
    if denom <= 0.0:
        raise ValueError(
            f"energy test too small: k = {test_uses} gives a non-positive dimension "
            f"denominator; need k >= {min_energy_test_uses(eps)}"
        )
    numer = 1.0 + 2.0 * math.sqrt(log_term / (2.0 * n_key)) + log_term / n_key
    return max(1.0, n_key * (d_a + d_b) * numer / denom)


def dimension_penalty(k_dim: float) -> int:
    """Key-length penalty Phi = 2 * ceil(log2 C(K+4, 4)) in bits.

    K is real-valued by construction but enters a binomial coefficient; it
    is rounded up to the next integer so the penalty is never understated.
    Exact integer arithmetic keeps this correct for K up to 1e12 and
    beyond.
    """
    if not math.isfinite(k_dim):
        raise ValueError(f"dimension bound must be finite, got {k_dim}")
    k_int = max(1, math.ceil(k_dim))
    binom = math.comb(k_int + 4, 4)
    return 2 * (binom - 1).bit_length()


def coherent_epsilon(k_dim: float, eps: float) -> float:
    """Rescaled security parameter eps' = K^4 * eps / 50.

    A value >= 1 means the coherent-attack claim is vacuous at this eps;
    it is reported rather than rejected so sweeps can show the crossover.
    """
    if eps < 0.0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    return k_dim**4 * eps / 50.0


def collective_epsilon_for_target(k_dim: float, eps_coherent_target: float) -> float:
    """Collective eps needed so the coherent claim lands on a target eps'."""
    if eps_coherent_target <= 0.0:
        raise ValueError("target eps' must be > 0")
    return 50.0 * eps_coherent_target / k_dim**4


def coherent_rate_bounds(
    bp: BlockParams,
    et: EnergyTestConfig,
    rate_asym: float,
    aep: float,
    offset: float,
    penalty_bits: float,
) -> RateBounds:
    """Raw coherent-attack rate bounds over the extended block N' = N + k.

    ub = p_ps * p_en * p_ec * [n*R_inf - sqrt(n)*aep + offset - Phi] / N'
    and lb = ub - p_ps * p_en * p_ec / N'.  With Phi = 0 and k = 0 this
    collapses to the collective-attack bounds.
    """
    if penalty_bits < 0.0:
        raise ValueError(f"penalty_bits must be >= 0, got {penalty_bits}")
    n_extended = bp.n_total + et.test_uses
    bracket = key_length_ub(bp.n_key, rate_asym, aep, offset) - penalty_bits
    scale = bp.p_ps * et.p_en * bp.p_ec / n_extended
    return RateBounds(ub=scale * bracket, lb=scale * (bracket - 1.0))
