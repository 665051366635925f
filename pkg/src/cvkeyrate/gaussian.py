"""Asymptotic security quantities for the Gaussian-modulated protocols.

Covariance matrices are 4x4 real symmetric arrays over two bosonic modes
with quadrature ordering (q1, p1, q2, p2), shot-noise units.  A matrix is
physical iff every symplectic eigenvalue is >= 1.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .channel import ChannelParams, Detection, eve_tmsv_variance

SYMMETRY_ATOL = 1e-12
PHYSICALITY_TOL = 1e-9

# Standard two-mode symplectic form for the (q1, p1, q2, p2) ordering.
SYMPLECTIC_FORM = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0, 0.0],
    ]
)

_I2 = np.eye(2)
_Z2 = np.diag([1.0, -1.0])


class SymplecticSpectrum(NamedTuple):
    nu_plus: float
    nu_minus: float


def bosonic_entropy(nu: float) -> float:
    """Von Neumann entropy (bits) of a thermal mode with symplectic eigenvalue nu.

    h(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2),
    continuous at nu = 1 with h(1) = 0.  Values within ``PHYSICALITY_TOL``
    below 1 are clamped to 1; anything lower is unphysical.
    """
    if nu < 1.0 - PHYSICALITY_TOL:
        raise ValueError(f"symplectic eigenvalue must be >= 1, got {nu}")
    if nu <= 1.0:
        return 0.0
    x = (nu - 1.0) / 2.0
    # (1+x)*log2(1+x) via log1p keeps full precision as nu -> 1.
    return (1.0 + x) * math.log1p(x) / math.log(2.0) - x * math.log2(x)


def mutual_information(ch: ChannelParams, det: Detection) -> float:
    """Alice-Bob mutual information in bits per channel use.

    (V0/2) * log2[1 + V / (xi + (V0 + u_el)/(eta*T))] with V0 = 1 for
    homodyne and V0 = 2 for heterodyne.
    """
    v0 = float(det.v0)
    denom = ch.excess_noise + (v0 + ch.elec_noise) / (
        ch.det_efficiency * ch.transmissivity
    )
    return (v0 / 2.0) * math.log2(1.0 + ch.mod_variance / denom)


def eve_output_cm(mod_variance: float, transmissivity: float, omega: float) -> np.ndarray:
    """Covariance matrix of Eve's two output modes (kept TMSV arm, beam-splitter arm).

    Block form [[omega*I, psi*Z], [psi*Z, phi*I]] with
    psi = sqrt(T*(omega^2 - 1)) and phi = T*omega + (1 - T)*(V + 1).
    """
    if omega < 1.0:
        raise ValueError(f"TMSV variance must be >= 1, got {omega}")
    if not 0.0 < transmissivity <= 1.0:
        raise ValueError(f"transmissivity must be in (0, 1], got {transmissivity}")
    if mod_variance < 0.0:
        raise ValueError(f"mod_variance must be >= 0, got {mod_variance}")
    psi = math.sqrt(transmissivity * max(omega * omega - 1.0, 0.0))
    phi = transmissivity * omega + (1.0 - transmissivity) * (mod_variance + 1.0)
    cm = np.zeros((4, 4))
    cm[:2, :2] = omega * _I2
    cm[2:, 2:] = phi * _I2
    cm[:2, 2:] = psi * _Z2
    cm[2:, :2] = psi * _Z2
    return cm


def eve_conditional_cm(ch: ChannelParams, omega: float, det: Detection) -> np.ndarray:
    """Eve's covariance matrix conditioned on Bob's measurement outcome.

    Homodyne subtracts a rank-one update on the measured quadrature,
    b^-1 [[g^2 P, g*t P], [g*t P, t^2 P]] with P = diag(1, 0); heterodyne
    subtracts (b+1)^-1 [[g^2 I, g*t Z], [g*t Z, t^2 I]].  Here
    b = T*eta*(V + xi) + 1 + u_el, g = sqrt(eta*(1-T)*(omega^2 - 1)) and
    t = sqrt(eta*T*(1-T)) * (omega - V - 1).
    """
    big_t = ch.transmissivity
    if big_t >= 1.0:
        raise ValueError("conditional covariance requires transmissivity < 1")
    eta = ch.det_efficiency
    v = ch.mod_variance
    b = big_t * eta * (v + ch.excess_noise) + 1.0 + ch.elec_noise
    g = math.sqrt(eta * (1.0 - big_t) * max(omega * omega - 1.0, 0.0))
    t = math.sqrt(eta * big_t * (1.0 - big_t)) * (omega - v - 1.0)

    correction = np.zeros((4, 4))
    if det is Detection.HOMODYNE:
        correction[0, 0] = g * g
        correction[0, 2] = correction[2, 0] = g * t
        correction[2, 2] = t * t
        cm = eve_output_cm(v, big_t, omega) - correction / b
    else:
        correction[0, 0] = correction[1, 1] = g * g
        correction[2, 2] = correction[3, 3] = t * t
        correction[0, 2] = correction[2, 0] = g * t
        correction[1, 3] = correction[3, 1] = -g * t
        cm = eve_output_cm(v, big_t, omega) - correction / (b + 1.0)

    spectrum = symplectic_eigenvalues(cm)
    if spectrum.nu_minus < 1.0 - PHYSICALITY_TOL:
        raise ValueError(
            f"conditional covariance matrix is unphysical (nu_minus = {spectrum.nu_minus}); "
            "check channel parameters"
        )
    return cm


def symplectic_eigenvalues(cm: np.ndarray) -> SymplecticSpectrum:
    """Symplectic spectrum of a two-mode covariance matrix.

    Computed as the moduli of the eigenvalues of i*Omega*V, which handles
    matrices outside the standard form (e.g. the homodyne conditional CM).
    Returned sorted descending.
    """
    cm = np.asarray(cm, dtype=float)
    if cm.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {cm.shape}")
    if not np.allclose(cm, cm.T, rtol=0.0, atol=SYMMETRY_ATOL):
        raise ValueError("covariance matrix is not symmetric")
    moduli = np.sort(np.abs(np.linalg.eigvals(SYMPLECTIC_FORM @ cm)))[::-1]
    # Eigenvalues come in +/- pairs; average each pair for stability.
    return SymplecticSpectrum(
        nu_plus=float((moduli[0] + moduli[1]) / 2.0),
        nu_minus=float((moduli[2] + moduli[3]) / 2.0),
    )


def standard_form_spectrum(a: float, b: float, c: float) -> SymplecticSpectrum:
    """Closed-form symplectic spectrum of [[a*I, c*Z], [c*Z, b*I]].

    nu_pm^2 = (Delta +/- sqrt(Delta^2 - 4 det)) / 2 with
    Delta = a^2 + b^2 - 2 c^2 and det = (a*b - c^2)^2.  Used as a
    cross-check against :func:`symplectic_eigenvalues` on standard-form
    inputs.
    """
    delta = a * a + b * b - 2.0 * c * c
    det = (a * b - c * c) ** 2
    root = math.sqrt(max(delta * delta - 4.0 * det, 0.0))
    return SymplecticSpectrum(
        nu_plus=math.sqrt((delta + root) / 2.0),
        nu_minus=math.sqrt(max((delta - root) / 2.0, 0.0)),
    )


def is_physical(cm: np.ndarray, tol: float = PHYSICALITY_TOL) -> bool:
    return symplectic_eigenvalues(cm).nu_minus >= 1.0 - tol


def holevo_bound(ch: ChannelParams, det: Detection) -> float:
    """Eve's Holevo information on Bob's outcome, in bits per use.

    h(nu+) + h(nu-) over Eve's output CM minus the same sum over her
    conditional CM.  Negative results beyond float noise indicate a bug or
    unphysical parameters and are rejected; tiny negatives are clamped to 0.
    """
    if ch.transmissivity == 1.0:
        if ch.excess_noise == 0.0:
            return 0.0
        raise ValueError("transmissivity 1 with excess noise has no channel dilation")
    omega = eve_tmsv_variance(ch.transmissivity, ch.excess_noise)
    total = symplectic_eigenvalues(
        eve_output_cm(ch.mod_variance, ch.transmissivity, omega)
    )
    conditional = symplectic_eigenvalues(eve_conditional_cm(ch, omega, det))
    chi = (
        bosonic_entropy(total.nu_plus)
        + bosonic_entropy(total.nu_minus)
        - bosonic_entropy(conditional.nu_plus)
        - bosonic_entropy(conditional.nu_minus)
    )
    if chi < -PHYSICALITY_TOL:
        raise ValueError(f"Holevo bound came out negative ({chi}); unphysical input")
    return max(chi, 0.0)


def asymptotic_rate(beta: float, mutual_info: float, holevo: float) -> float:
    """Asymptotic key rate beta*I - chi in bits per use.

    May be negative; clamping happens at the key-rate reporting level.
    Also serves as the generic hook for protocols whose (I, chi) are
    computed externally.
    """
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must be in [0, 1], got {beta}")
    if mutual_info < 0.0 or holevo < 0.0:
        raise ValueError("mutual information and Holevo bound must be >= 0")
    return beta * mutual_info - holevo
