"""Thermal-loss channel with trusted detection.

All variances are in shot-noise units (vacuum quadrature variance = 1).
The untrusted channel is parametrized by transmissivity and excess noise;
the detector contributes a trusted efficiency and electronic noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

DB_ROUNDTRIP_RTOL = 1e-12


class Detection(Enum):
    """Bob's measurement: one quadrature (homodyne) or both (heterodyne)."""

    HOMODYNE = "homodyne"
    HETERODYNE = "heterodyne"

    @property
    def v0(self) -> int:
        """Number of measured quadratures per channel use."""
        return 1 if self is Detection.HOMODYNE else 2


def transmissivity_from_db(loss_db: float) -> float:
    """Convert a channel loss in dB to a transmissivity in (0, 1]."""
    if not math.isfinite(loss_db) or loss_db < 0.0:
        raise ValueError(f"loss_db must be finite and >= 0, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def loss_db_from_transmissivity(transmissivity: float) -> float:
    """Inverse of :func:`transmissivity_from_db`."""
    if not 0.0 < transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in (0, 1], got {transmissivity}")
    return -10.0 * math.log10(transmissivity)


def eve_tmsv_variance(transmissivity: float, excess_noise: float) -> float:
    """Variance of the two-mode squeezed vacuum Eve injects to dilate the channel.

    The beam-splitter dilation requires the injected variance
    T*xi/(1-T) + 1.  At T = 1 the dilation diverges unless the channel is
    noiseless, in which case the injected state is vacuum.
    """
    if not 0.0 < transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in (0, 1], got {transmissivity}")
    if excess_noise < 0.0:
        raise ValueError(f"excess_noise must be >= 0, got {excess_noise}")
    if transmissivity == 1.0:
        if excess_noise == 0.0:
            return 1.0
        raise ValueError(
            "channel dilation is undefined at transmissivity 1 with excess noise "
            f"{excess_noise}; reduce loss_db > 0 or set excess_noise = 0"
        )
    return transmissivity * excess_noise / (1.0 - transmissivity) + 1.0


@dataclass(frozen=True)
class ChannelParams:
    """Channel plus trusted-detector parameters, shot-noise units throughout.

    ``loss_db`` and ``transmissivity`` are stored together and must agree;
    use :meth:`from_db` or :meth:`from_transmissivity` to build one from
    the other.
    """

    loss_db: float
    transmissivity: float
    excess_noise: float
    det_efficiency: float
    elec_noise: float
    mod_variance: float

    def __post_init__(self) -> None:
        if not 0.0 < self.transmissivity <= 1.0:
            raise ValueError(f"transmissivity must be in (0, 1], got {self.transmissivity}")
        if self.loss_db < 0.0:
            raise ValueError(f"loss_db must be >= 0, got {self.loss_db}")
        derived = transmissivity_from_db(self.loss_db)
        if abs(derived - self.transmissivity) > DB_ROUNDTRIP_RTOL * self.transmissivity:
            raise ValueError(
                f"loss_db={self.loss_db} and transmissivity={self.transmissivity} disagree "
                f"(expected transmissivity {derived})"
            )
        if self.excess_noise < 0.0:
            raise ValueError(f"excess_noise must be >= 0, got {self.excess_noise}")
        if not 0.0 < self.det_efficiency <= 1.0:
            raise ValueError(f"det_efficiency must be in (0, 1], got {self.det_efficiency}")
        if self.elec_noise < 0.0:
            raise ValueError(f"elec_noise must be >= 0, got {self.elec_noise}")
        if self.mod_variance < 0.0:
            raise ValueError(f"mod_variance must be >= 0, got {self.mod_variance}")

    @classmethod
    def from_db(
        cls,
        loss_db: float,
        excess_noise: float,
        det_efficiency: float,
        elec_noise: float,
        mod_variance: float,
    ) -> "ChannelParams":
        return cls(
            loss_db=loss_db,
            transmissivity=transmissivity_from_db(loss_db),
            excess_noise=excess_noise,
            det_efficiency=det_efficiency,
            elec_noise=elec_noise,
            mod_variance=mod_variance,
        )

    @classmethod
    def from_transmissivity(
        cls,
        transmissivity: float,
        excess_noise: float,
        det_efficiency: float,
        elec_noise: float,
        mod_variance: float,
    ) -> "ChannelParams":
        return cls(
            loss_db=loss_db_from_transmissivity(transmissivity),
            transmissivity=transmissivity,
            excess_noise=excess_noise,
            det_efficiency=det_efficiency,
            elec_noise=elec_noise,
            mod_variance=mod_variance,
        )

    def with_mod_variance(self, mod_variance: float) -> "ChannelParams":
        return ChannelParams(
            loss_db=self.loss_db,
            transmissivity=self.transmissivity,
            excess_noise=self.excess_noise,
            det_efficiency=self.det_efficiency,
            elec_noise=self.elec_noise,
            mod_variance=mod_variance,
        )

    def with_channel(self, transmissivity: float, excess_noise: float) -> "ChannelParams":
        """Same detector and modulation, different untrusted channel."""
        return ChannelParams.from_transmissivity(
            transmissivity=transmissivity,
            excess_noise=excess_noise,
            det_efficiency=self.det_efficiency,
            elec_noise=self.elec_noise,
            mod_variance=self.mod_variance,
        )
