"""Run configuration: JSON file + dotted-path command-line overrides.

A config is a nested key/value document; ``--set section.key=value``
overrides any leaf, with values parsed as JSON when possible.  Resolution
validates everything up front and reports violations with their field
path.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .channel import ChannelParams, Detection
from .estimation import TailBound
from .finite_size import AepForm, BlockParams, SecurityEpsilons
from .pipeline import (
    OPTIMIZE_TARGETS,
    Attack,
    Scenario,
    SweepPoint,
)

EPS_DEFAULT = 2.0**-32

DEFAULTS: dict[str, Any] = {
    "protocol": "homodyne",
    "attack": "collective",
    "channel": {
        "loss_db": 7.0,
        "excess_noise": 0.01,
        "det_efficiency": 0.6,
        "elec_noise": 0.1,
    },
    "block": {
        "n_total": 10_000_000,
        "n_pe": None,  # defaults to n_total // 10
        "n_blocks": 1,
        "adc_bits": None,  # defaults to 7 (homodyne) / 14 (heterodyne)
        "p_ec": 0.95,
        "beta": 0.98,
        "p_ps": 1.0,
    },
    "epsilons": {
        "cor": EPS_DEFAULT,
        "s": EPS_DEFAULT,
        "h": EPS_DEFAULT,
        "pe": EPS_DEFAULT,
    },
    "pe": {
        "c_pe": 0,
        "tail": "gaussian",
        "n_params": 2,
    },
    "energy_test": {
        "test_uses": None,  # defaults to n_total // 10
        "threshold_margin": 2.0,
        "p_en": 1.0,
        "d_a": None,
        "d_b": None,
    },
    "modulation": {
        "optimize": True,
        "fixed_v": None,
        "v_min": 0.01,
        "v_max": 1e4,
        "target": "lb",
    },
    "aep_form": "exact",
    "sweep": {
        "loss_db": None,  # list of dB values
        "block_size": None,  # list of N values (PE fraction preserved)
    },
    "montecarlo": {
        "n_pe": 100_000,
        "trials": 10_000,
        "eps_pe": 1e-2,
        "c_pe": 0,
        "tail": "gaussian",
        "coverage_c_pe": 2,
    },
    "workers": 1,
    "seed": 0,
    "output": {
        "path": None,
        "format": "csv",
        "plot": None,
    },
}


class ConfigError(ValueError):
    """Configuration violation, tagged with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def load_config(path: str | Path | None) -> dict:
    """Merge an optional JSON config file over the built-in defaults."""
    merged = copy.deepcopy(DEFAULTS)
    if path is not None:
        with open(path) as handle:
            try:
                user = json.load(handle)
            except json.JSONDecodeError as exc:
                raise ConfigError(str(path), f"not valid JSON ({exc})") from exc
        if not isinstance(user, dict):
            raise ConfigError(str(path), "top level must be a JSON object")
        _deep_merge(merged, user, "")
    return merged


def _deep_merge(base: dict, override: dict, prefix: str) -> None:
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(path, "unknown configuration key")
        if isinstance(base[key], dict) and isinstance(value, dict):
            _deep_merge(base[key], value, path + ".")
        else:
            base[key] = value


def apply_overrides(config: dict, assignments: list[str]) -> dict:
    """Apply repeatable ``key.path=value`` overrides; values parse as JSON."""
    for assignment in assignments:
        if "=" not in assignment:
            raise ConfigError(assignment, "override must look like key.path=value")
        dotted, text = assignment.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = config
        parts = dotted.split(".")
        for part in parts[:-1]:
            if not isinstance(node.get(part), dict):
                raise ConfigError(dotted, "unknown configuration section")
            node = node[part]
        if parts[-1] not in node:
            raise ConfigError(dotted, "unknown configuration key")
        node[parts[-1]] = value
    return config


def _require_number(config: dict, path: str, minimum=None, maximum=None) -> float:
    value = _lookup(config, path)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(path, "must be finite")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(path, f"must be <= {maximum}, got {value}")
    return value


def _require_int(config: dict, path: str, minimum=None) -> int:
    value = _require_number(config, path, minimum=minimum)
    if value != int(value):
        raise ConfigError(path, f"expected an integer, got {value}")
    return int(value)


def _lookup(config: dict, path: str):
    node: Any = config
    for part in path.split("."):
        node = node[part]
    return node


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: scenario + base channel/block + sweep + IO."""

    scenario: Scenario
    channel: ChannelParams
    block: BlockParams
    optimize_v: bool
    v_range: tuple[float, float]
    target: str
    sweep_loss_db: tuple[float, ...] | None
    sweep_block_size: tuple[int, ...] | None
    workers: int
    seed: int
    output_path: str | None
    output_format: str
    plot_path: str | None
    raw: dict


def resolve_config(config: dict) -> RunConfig:
    """Validate the merged document and build the domain objects."""
    protocol = _lookup(config, "protocol")
    if protocol not in ("homodyne", "heterodyne"):
        raise ConfigError("protocol", f"must be homodyne or heterodyne, got {protocol!r}")
    detection = Detection(protocol)

    attack_name = _lookup(config, "attack")
    if attack_name not in ("collective", "coherent"):
        raise ConfigError("attack", f"must be collective or coherent, got {attack_name!r}")
    attack = Attack(attack_name)
    if attack is Attack.COHERENT and detection is not Detection.HETERODYNE:
        raise ConfigError("attack", "coherent attack requires protocol=heterodyne")

    loss_db = _require_number(config, "channel.loss_db", minimum=0.0)
    excess_noise = _require_number(config, "channel.excess_noise", minimum=0.0)
    det_efficiency = _require_number(config, "channel.det_efficiency", minimum=1e-12, maximum=1.0)
    elec_noise = _require_number(config, "channel.elec_noise", minimum=0.0)

    n_total = _require_int(config, "block.n_total", minimum=2)
    n_pe_raw = _lookup(config, "block.n_pe")
    n_pe = n_total // 10 if n_pe_raw is None else _require_int(config, "block.n_pe", minimum=1)
    if n_pe >= n_total:
        raise ConfigError("block.n_pe", f"must be < block.n_total = {n_total}, got {n_pe}")
    adc_raw = _lookup(config, "block.adc_bits")
    if adc_raw is None:
        adc_bits = 7 if detection is Detection.HOMODYNE else 14
    else:
        adc_bits = _require_int(config, "block.adc_bits", minimum=1)

    try:
        block = BlockParams.split(
            n_total,
            n_pe,
            n_blocks=_require_int(config, "block.n_blocks", minimum=1),
            adc_bits=adc_bits,
            p_ec=_require_number(config, "block.p_ec", minimum=1e-12, maximum=1.0),
            beta=_require_number(config, "block.beta", minimum=0.0, maximum=1.0),
            p_ps=_require_number(config, "block.p_ps", minimum=1e-12, maximum=1.0),
        )
    except ValueError as exc:
        raise ConfigError("block", str(exc)) from exc

    try:
        epsilons = SecurityEpsilons(
            cor=_require_number(config, "epsilons.cor"),
            s=_require_number(config, "epsilons.s"),
            h=_require_number(config, "epsilons.h"),
            pe=_require_number(config, "epsilons.pe"),
        )
    except ValueError as exc:
        raise ConfigError("epsilons", str(exc)) from exc

    c_pe = _require_int(config, "pe.c_pe")
    if c_pe not in (0, 2):
        raise ConfigError("pe.c_pe", f"must be 0 or 2, got {c_pe}")
    tail_name = _lookup(config, "pe.tail")
    if tail_name not in ("gaussian", "chi2"):
        raise ConfigError("pe.tail", f"must be gaussian or chi2, got {tail_name!r}")

    aep_name = _lookup(config, "aep_form")
    if aep_name not in ("exact", "approximate"):
        raise ConfigError("aep_form", f"must be exact or approximate, got {aep_name!r}")

    et_uses_raw = _lookup(config, "energy_test.test_uses")
    et_uses = None if et_uses_raw is None else _require_int(config, "energy_test.test_uses", minimum=1)
    d_a_raw = _lookup(config, "energy_test.d_a")
    d_b_raw = _lookup(config, "energy_test.d_b")

    try:
        scenario = Scenario(
            detection=detection,
            attack=attack,
            epsilons=epsilons,
            c_pe=c_pe,
            tail=TailBound.GAUSSIAN if tail_name == "gaussian" else TailBound.CHI_SQUARED,
            aep_form=AepForm.EXACT if aep_name == "exact" else AepForm.APPROXIMATE,
            n_params=_require_int(config, "pe.n_params", minimum=0),
            energy_test_uses=et_uses,
            threshold_margin=_require_number(config, "energy_test.threshold_margin", minimum=0.0),
            p_en=_require_number(config, "energy_test.p_en", minimum=1e-12, maximum=1.0),
            d_a=None if d_a_raw is None else _require_number(config, "energy_test.d_a", minimum=1e-12),
            d_b=None if d_b_raw is None else _require_number(config, "energy_test.d_b", minimum=1e-12),
        )
    except ValueError as exc:
        raise ConfigError("attack", str(exc)) from exc

    optimize_v = _lookup(config, "modulation.optimize")
    if not isinstance(optimize_v, bool):
        raise ConfigError("modulation.optimize", f"expected true/false, got {optimize_v!r}")
    fixed_v_raw = _lookup(config, "modulation.fixed_v")
    if not optimize_v and fixed_v_raw is None:
        raise ConfigError("modulation.fixed_v", "required when modulation.optimize is false")
    fixed_v = 1.0 if fixed_v_raw is None else _require_number(config, "modulation.fixed_v", minimum=0.0)
    v_min = _require_number(config, "modulation.v_min", minimum=0.0)
    v_max = _require_number(config, "modulation.v_max", minimum=0.0)
    if v_min >= v_max:
        raise ConfigError("modulation.v_min", f"must be < modulation.v_max, got [{v_min}, {v_max}]")
    target = _lookup(config, "modulation.target")
    if target not in OPTIMIZE_TARGETS:
        raise ConfigError("modulation.target", f"must be one of {OPTIMIZE_TARGETS}, got {target!r}")

    try:
        channel = ChannelParams.from_db(
            loss_db, excess_noise, det_efficiency, elec_noise, fixed_v
        )
    except ValueError as exc:
        raise ConfigError("channel", str(exc)) from exc

    sweep_loss = _resolve_sweep_list(config, "sweep.loss_db", float)
    sweep_block = _resolve_sweep_list(config, "sweep.block_size", int)
    if sweep_loss is not None and sweep_block is not None:
        raise ConfigError("sweep", "choose one of sweep.loss_db or sweep.block_size")

    fmt = _lookup(config, "output.format")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"must be csv or json, got {fmt!r}")

    seed = _require_int(config, "seed", minimum=0)
    if seed >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")

    return RunConfig(
        scenario=scenario,
        channel=channel,
        block=block,
        optimize_v=optimize_v,
        v_range=(v_min, v_max),
        target=target,
        sweep_loss_db=sweep_loss,
        sweep_block_size=sweep_block,
        workers=_require_int(config, "workers", minimum=1),
        seed=seed,
        output_path=_lookup(config, "output.path"),
        output_format=fmt,
        plot_path=_lookup(config, "output.plot"),
        raw=config,
    )


def _resolve_sweep_list(config: dict, path: str, kind):
    values = _lookup(config, path)
    if values is None:
        return None
    if not isinstance(values, list) or len(values) == 0:
        raise ConfigError(path, "must be a non-empty list")
    out = []
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ConfigError(f"{path}[{i}]", f"expected a number, got {v!r}")
        if kind is int and float(v) != int(v):
            raise ConfigError(f"{path}[{i}]", f"expected an integer, got {v}")
        out.append(kind(v))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError(path, "values must be strictly increasing")
    return tuple(out)


def sweep_points(run: RunConfig) -> list[SweepPoint]:
    """Expand a run config into ordered sweep work units.

    A block-size sweep preserves the base PE fraction n_pe / n_total and
    the protocol-dependent ADC resolution.
    """
    base_kwargs = dict(
        scenario=run.scenario,
        optimize_v=run.optimize_v,
        v_range=run.v_range,
        target=run.target,
    )
    if run.sweep_loss_db is not None:
        points = []
        for loss_db in run.sweep_loss_db:
            channel = ChannelParams.from_db(
                loss_db,
                run.channel.excess_noise,
                run.channel.det_efficiency,
                run.channel.elec_noise,
                run.channel.mod_variance,
            )
            points.append(SweepPoint(channel=channel, block=run.block, **base_kwargs))
        return points
    if run.sweep_block_size is not None:
        pe_fraction = run.block.n_pe / run.block.n_total
        points = []
        for n_total in run.sweep_block_size:
            n_pe = max(1, round(n_total * pe_fraction))
            if n_pe >= n_total:
                raise ConfigError(
                    "sweep.block_size", f"{n_total} leaves no key-generation uses"
                )
            block = BlockParams.split(
                n_total,
                n_pe,
                n_blocks=run.block.n_blocks,
                adc_bits=run.block.adc_bits,
                p_ec=run.block.p_ec,
                beta=run.block.beta,
                p_ps=run.block.p_ps,
            )
            points.append(SweepPoint(channel=run.channel, block=block, **base_kwargs))
        return points
    return [SweepPoint(channel=run.channel, block=run.block, **base_kwargs)]
