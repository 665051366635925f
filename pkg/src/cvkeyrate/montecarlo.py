"""Monte Carlo oracle for the parameter-estimation statistics.

Simulates the classical Gaussian regression y = sqrt(eta*T)*x + z and
checks the analytic estimator variances and worst-case tail coverage
against empirical trial ensembles.  No quantum states or attacks are
simulated; this is the brute-force counterpart to the analytic
estimation module.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams, Detection
from .estimation import PEConfig, TailBound, deviations, transmissivity_std

GENERATOR = "philox"
CHUNK_TRIALS = 1024

ESTIMATOR_STRICT = "strict"
ESTIMATOR_SIMPLE = "simple"
_C_PE_BY_ESTIMATOR = {ESTIMATOR_STRICT: 2, ESTIMATOR_SIMPLE: 0}


@dataclass(frozen=True)
class SimConfig:
    """One simulation campaign: channel, detection, PE size, trials, seed."""

    channel: ChannelParams
    detection: Detection
    n_pe: int
    trials: int
    seed: int
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_pe < 2:
            raise ValueError(f"n_pe must be >= 2, got {self.n_pe}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")

    @property
    def samples(self) -> int:
        """Data points per trial: V0 * m."""
        return self.detection.v0 * self.n_pe


@dataclass(frozen=True)
class TrialEstimates:
    """Estimators from one trial.

    A negative recovered excess noise is a legitimate statistical
    fluctuation and is reported as-is.
    """

    c_hat: float
    t_hat: float
    sz2_hat: float
    xi_hat: float


def noise_variance(ch: ChannelParams, det: Detection) -> float:
    """Variance of the regression noise z: eta*T*xi + u_el + V0."""
    return (
        ch.det_efficiency * ch.transmissivity * ch.excess_noise
        + ch.elec_noise
        + float(det.v0)
    )


def _trial_rng(seed: int, index: int) -> np.random.Generator:
    # Counter-based keying: stream (seed, index) is reproducible no matter
    # how trials are distributed over workers.
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _draw(cfg: SimConfig, index: int) -> tuple[np.ndarray, np.ndarray]:
    n = cfg.samples
    buf = _trial_rng(cfg.seed, index).standard_normal(2 * n)
    x = buf[:n] * math.sqrt(cfg.channel.mod_variance)
    z = buf[n:] * math.sqrt(noise_variance(cfg.channel, cfg.detection))
    return x, z


def simulate_samples(cfg: SimConfig, index: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Paired samples (x, y) for one trial; deterministic given (seed, index)."""
    x, z = _draw(cfg, index)
    root = math.sqrt(cfg.channel.det_efficiency * cfg.channel.transmissivity)
    return x, root * x + z


def estimate_parameters(
    x: np.ndarray,
    y: np.ndarray,
    ch: ChannelParams,
    det: Detection,
    estimator: str = ESTIMATOR_STRICT,
) -> TrialEstimates:
    """Recover (C, T, sigma_z^2, xi) from one batch of paired samples.

    ``strict`` uses the raw sample covariance (variance branch c_pe = 2);
    ``simple`` substitutes Alice's exactly-known modulation variance for
    the empirical one (branch c_pe = 0).
    """
    n = x.size
    if n < 2 or y.size != n:
        raise ValueError("need at least two paired samples")
    sx2 = ch.mod_variance
    if sx2 <= 0.0:
        raise ValueError("estimation requires mod_variance > 0")
    eta = ch.det_efficiency
    root = math.sqrt(eta * ch.transmissivity)
    if estimator == ESTIMATOR_STRICT:
        c_hat = float(x @ y) / n
    elif estimator == ESTIMATOR_SIMPLE:
        c_hat = root * sx2 + float(x @ (y - root * x)) / n
    else:
        raise ValueError(f"unknown estimator variant {estimator!r}")
    t_hat = c_hat * c_hat / (eta * sx2 * sx2)
    resid = y - math.sqrt(eta * t_hat) * x
    sz2_hat = float(resid @ resid) / n
    xi_hat = (sz2_hat - ch.elec_noise - float(det.v0)) / (eta * t_hat)
    return TrialEstimates(c_hat=c_hat, t_hat=t_hat, sz2_hat=sz2_hat, xi_hat=xi_hat)


def _run_chunk(cfg: SimConfig, start: int, stop: int, estimator: str) -> np.ndarray:
    out = np.empty((stop - start, 2))
    for i in range(start, stop):
        x, y = simulate_samples(cfg, i)
        est = estimate_parameters(x, y, cfg.channel, cfg.detection, estimator)
        out[i - start, 0] = est.t_hat
        out[i - start, 1] = est.sz2_hat
    return out


def run_trials(cfg: SimConfig, estimator: str = ESTIMATOR_STRICT) -> np.ndarray:
    """(trials, 2) array of per-trial (t_hat, sz2_hat), in trial order.

    Trials carry independent counter-based streams, so the result is
    identical for any worker count.
    """
    bounds = list(range(0, cfg.trials, CHUNK_TRIALS)) + [cfg.trials]
    spans = list(zip(bounds[:-1], bounds[1:]))
    if cfg.workers == 1 or len(spans) == 1:
        chunks = [_run_chunk(cfg, a, b, estimator) for a, b in spans]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_chunk, cfg, a, b, estimator) for a, b in spans]
            chunks = [f.result() for f in futures]
    return np.concatenate(chunks, axis=0)


@dataclass(frozen=True)
class VarianceReport:
    """Empirical vs analytic estimator variances over a trial ensemble."""

    seed: int
    generator: str
    n_pe: int
    trials: int
    detection: str
    estimator: str
    c_pe: int
    var_t_empirical: float
    var_t_analytic: float
    var_t_ratio: float
    var_sz2_empirical: float
    var_sz2_analytic: float
    var_sz2_ratio: float
    tolerance: float
    passed: bool | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_dict().items())


@dataclass(frozen=True)
class CoverageReport:
    """Worst-case bound miss rates over a trial ensemble.

    ``miss_t`` and ``miss_sz2`` are the one-sided per-parameter rates;
    ``miss_any`` is the rate at which the joint worst-case bound fails on
    either parameter.  For the Gaussian deviation rule each one-sided rate
    sits near eps_pe/2 (the rule inverts a two-sided mass), so the joint
    rate is the one comparable to eps_pe.
    """

    seed: int
    generator: str
    n_pe: int
    trials: int
    detection: str
    estimator: str
    c_pe: int
    tail: str
    eps_pe: float
    deviations: float
    miss_t: float
    miss_sz2: float
    miss_any: float
    binom_se: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.to_dict().items())


def _pe_config(cfg: SimConfig, c_pe: int) -> PEConfig:
    return PEConfig(n_pe=cfg.n_pe, n_blocks=1, v0=cfg.detection.v0, c_pe=c_pe)


def validate_variances(cfg: SimConfig, c_pe: int = 0, tolerance: float = 0.10) -> VarianceReport:
    """Compare empirical Var(t_hat) and Var(sz2_hat) against the analytic formulas.

    The estimator variant is matched to the requested variance branch.
    The pass flag applies the tolerance only when the ensemble is large
    enough (>= 1e4 trials) for it to be meaningful.
    """
    estimator = ESTIMATOR_SIMPLE if c_pe == 0 else ESTIMATOR_STRICT
    values = run_trials(cfg, estimator)
    var_t_emp = float(np.var(values[:, 0], ddof=1))
    var_sz2_emp = float(np.var(values[:, 1], ddof=1))
    std_t = transmissivity_std(cfg.channel, _pe_config(cfg, c_pe))
    var_t_ana = std_t * std_t
    sz2 = noise_variance(cfg.channel, cfg.detection)
    var_sz2_ana = 2.0 * sz2 * sz2 / cfg.samples
    ratio_t = var_t_emp / var_t_ana
    ratio_sz2 = var_sz2_emp / var_sz2_ana
    passed: bool | None = None
    if cfg.trials >= 10_000:
        passed = abs(ratio_t - 1.0) <= tolerance and abs(ratio_sz2 - 1.0) <= tolerance
    return VarianceReport(
        seed=cfg.seed,
        generator=GENERATOR,
        n_pe=cfg.n_pe,
        trials=cfg.trials,
        detection=cfg.detection.value,
        estimator=estimator,
        c_pe=c_pe,
        var_t_empirical=var_t_emp,
        var_t_analytic=var_t_ana,
        var_t_ratio=ratio_t,
        var_sz2_empirical=var_sz2_emp,
        var_sz2_analytic=var_sz2_ana,
        var_sz2_ratio=ratio_sz2,
        tolerance=tolerance,
        passed=passed,
    )


def validate_tail_coverage(
    cfg: SimConfig,
    eps_pe: float,
    tail: TailBound,
    c_pe: int = 2,
) -> CoverageReport:
    """Measure how often the worst-case bounds miss the true parameters.

    A transmissivity miss is T < t_hat - w*sigma_T; a noise miss is
    sigma_z^2 > sz2_hat + w*sqrt(V_z).  Deviations use the analytic
    standard deviations at the true channel values.
    """
    if not 0.0 < eps_pe < 1.0:
        raise ValueError(f"eps_pe must be in (0, 1), got {eps_pe}")
    estimator = ESTIMATOR_SIMPLE if c_pe == 0 else ESTIMATOR_STRICT
    values = run_trials(cfg, estimator)
    w = deviations(eps_pe, tail)
    std_t = transmissivity_std(cfg.channel, _pe_config(cfg, c_pe))
    sz2 = noise_variance(cfg.channel, cfg.detection)
    std_sz2 = math.sqrt(2.0 * sz2 * sz2 / cfg.samples)
    t_true = cfg.channel.transmissivity
    miss_t_mask = t_true < values[:, 0] - w * std_t
    miss_sz2_mask = sz2 > values[:, 1] + w * std_sz2
    return CoverageReport(
        seed=cfg.seed,
        generator=GENERATOR,
        n_pe=cfg.n_pe,
        trials=cfg.trials,
        detection=cfg.detection.value,
        estimator=estimator,
        c_pe=c_pe,
        tail=tail.value,
        eps_pe=eps_pe,
        deviations=w,
        miss_t=float(np.mean(miss_t_mask)),
        miss_sz2=float(np.mean(miss_sz2_mask)),
        miss_any=float(np.mean(miss_t_mask | miss_sz2_mask)),
        binom_se=math.sqrt(eps_pe * (1.0 - eps_pe) / cfg.trials),
    )
