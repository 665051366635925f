"""Deterministic maximization of the key rate over the modulation variance.

A coarse log-spaced grid guards against multi-modality, then golden-section
refinement polishes the best bracket.  Ties break toward smaller variance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

V_MIN_LIMIT = 0.01
V_MAX_LIMIT = 1e4
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizeResult:
    v_opt: float
    rate_opt: float
    evaluations: int
    bracket: tuple[float, float]


def optimize_modulation(
    objective: Callable[[float], float],
    v_range: tuple[float, float] = (V_MIN_LIMIT, V_MAX_LIMIT),
    grid_points: int = 60,
    tol: float = 1e-3,
) -> OptimizeResult:
    """Maximize ``objective`` over the modulation variance in ``v_range``.

    The objective must be total on the range (return -inf rather than
    raise for infeasible points).  Result is deterministic and never worse
    than the best coarse-grid point; the final variance is re-evaluated so
    the reported rate is exactly objective(v_opt).
    """
    v_min, v_max = v_range
    if not (v_min < v_max):
        raise ValueError(f"empty or inverted range ({v_min}, {v_max})")
    if v_min < V_MIN_LIMIT or v_max > V_MAX_LIMIT:
        raise ValueError(
            f"range must lie within [{V_MIN_LIMIT}, {V_MAX_LIMIT}], got ({v_min}, {v_max})"
        )
    if grid_points < 3:
        raise ValueError(f"grid_points must be >= 3, got {grid_points}")

    evaluations = 0

    def evaluate(v: float) -> float:
        nonlocal evaluations
        evaluations += 1
        return objective(v)

    # Coarse scan on a log grid; strict > keeps the smallest V on ties.
    ratio = (v_max / v_min) ** (1.0 / (grid_points - 1))
    grid = [v_min * ratio**i for i in range(grid_points - 1)] + [v_max]
    values = [evaluate(v) for v in grid]
    best_idx = 0
    for i in range(1, grid_points):
        if values[i] > values[best_idx]:
            best_idx = i
    best_v, best_val = grid[best_idx], values[best_idx]

    lo = grid[max(best_idx - 1, 0)]
    hi = grid[min(best_idx + 1, grid_points - 1)]

    def consider(v: float, val: float) -> None:
        nonlocal best_v, best_val
        if val > best_val or (val == best_val and v < best_v):
            best_v, best_val = v, val

    # Golden-section refinement; >= keeps the left interval on ties.
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = evaluate(c), evaluate(d)
    consider(c, fc)
    consider(d, fd)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = evaluate(c)
            consider(c, fc)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = evaluate(d)
            consider(d, fd)

    rate_opt = evaluate(best_v)
    return OptimizeResult(
        v_opt=best_v, rate_opt=rate_opt, evaluations=evaluations, bracket=(lo, hi)
    )
