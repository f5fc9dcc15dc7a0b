"""Downlink beamformer designs and secrecy-rate evaluation.

All designs return unit-norm weight vectors.  The spoofing-aware designs
work from channel estimates and their error covariances through the
average-quotient surrogate; the jamming design zero-forces the estimated
eavesdropper direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .estimation import KIND_DIRECTION, KIND_FULL, ChannelEstimate
from .numerics import (
    dominant_gen_eigvec,
    eigh_psd,
    hermitize,
    householder_complement,
    loaded_solve,
    phase_normalize,
)

DESIGN_OPTIMAL = "optimal_grq"
DESIGN_LOWCOMPLEXITY = "low_complexity"
DESIGN_ZF = "zero_forcing"
DESIGN_MF = "matched_filter"


@dataclass(frozen=True)
class DownlinkParams:
    """Downlink power budget and receiver noise levels, all in watts."""

    p_b: float
    sigma_l2: float
    sigma_e2: float

    def __post_init__(self):
        if self.p_b <= 0 or self.sigma_l2 <= 0 or self.sigma_e2 <= 0:
            raise DimensionError("downlink powers must be positive")


@dataclass(frozen=True)
class Beamformer:
    v: np.ndarray
    design: str

    def __post_init__(self):
        norm = float(np.linalg.norm(self.v))
        if abs(norm - 1.0) > 1e-10:
            raise DimensionError(f"beamformer norm {norm} is not 1")


def link_rates(
    v: Beamformer | np.ndarray,
    h_l: np.ndarray,
    h_e: np.ndarray,
    dl: DownlinkParams,
) -> tuple[float, float]:
    """Per-link rates (nats): ln(1 + SNR) at the legitimate user and at Eve."""
    w = v.v if isinstance(v, Beamformer) else v
    snr_l = dl.p_b * abs(np.vdot(w, h_l)) ** 2 / dl.sigma_l2
    snr_e = dl.p_b * abs(np.vdot(w, h_e)) ** 2 / dl.sigma_e2
    return float(np.log1p(snr_l)), float(np.log1p(snr_e))


def secrecy_rate(
    v: Beamformer | np.ndarray,
    h_l: np.ndarray,
    h_e: np.ndarray,
    dl: DownlinkParams,
) -> float:
    """Secrecy rate in nats of a unit-norm beamformer against true channels.

    Returned raw; negative values mean the eavesdropper out-receives the
    legitimate user and callers clamp as a reporting choice.
    """
    r_l, r_e = link_rates(v, h_l, h_e, dl)
    return r_l - r_e


def surrogate_matrix(est: ChannelEstimate, p_b: float, sigma2: float) -> np.ndarray:
    """Average-quotient surrogate I + (p_B/sigma^2)(hhat hhat^H + mse)."""
    if est.kind != KIND_FULL:
        raise DimensionError("surrogate matrix needs a full-kind estimate")
    m = est.m
    outer = np.outer(est.hhat, est.hhat.conj())
    return np.eye(m) + (p_b / sigma2) * hermitize(outer + est.mse)


def grq_value(v: np.ndarray, h_bar_l: np.ndarray, h_bar_e: np.ndarray) -> float:
    """Generalized Rayleigh quotient v^H H_L v / v^H H_E v."""
    num = float(np.real(np.vdot(v, h_bar_l @ v)))
    den = float(np.real(np.vdot(v, h_bar_e @ v)))
    return num / den


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return phase_normalize(v / norm)


def matched_filter(est_l: ChannelEstimate) -> Beamformer:
    """Point at the estimated legitimate channel, ignoring the eavesdropper."""
    return Beamformer(_unit(est_l.hhat.astype(complex)), DESIGN_MF)


def sb_optimal(
    est_l: ChannelEstimate, est_e: ChannelEstimate, dl: DownlinkParams
) -> Beamformer:
    """Maximize the average-quotient surrogate exactly.

    The maximizer is the dominant generalized eigenvector of the pair of
    surrogate matrices.
    """
    h_bar_l = surrogate_matrix(est_l, dl.p_b, dl.sigma_l2)
    h_bar_e = surrogate_matrix(est_e, dl.p_b, dl.sigma_e2)
    v = dominant_gen_eigvec(h_bar_l, h_bar_e)
    return Beamformer(v, DESIGN_OPTIMAL)


def sb_lowcomplexity(
    est_l: ChannelEstimate, est_e: ChannelEstimate, dl: DownlinkParams
) -> Beamformer:
    """Maximize a lower bound of the surrogate quotient: whiten then match.

    The direction is H_E^{-1} hhat_L.  The inverse splits into a fixed part
    B = I + (p_B/sigma_E^2) mse_E and a rank-one update from the estimate,
    inverted with the Sherman-Morrison identity so only B needs a solve.
    """
    if est_e.kind != KIND_FULL:
        raise DimensionError("low-complexity design needs a full-kind Eve estimate")
    m = est_l.m
    c = dl.p_b / dl.sigma_e2
    b = np.eye(m) + c * hermitize(est_e.mse)
    mu = np.sqrt(c) * est_e.hhat
    b_inv_h = loaded_solve(b, est_l.hhat.astype(complex))
    b_inv_mu = loaded_solve(b, mu.astype(complex))
    denom = 1.0 + float(np.real(np.vdot(mu, b_inv_mu)))
    v_raw = b_inv_h - b_inv_mu * (np.vdot(mu, b_inv_h) / denom)
    return Beamformer(_unit(v_raw), DESIGN_LOWCOMPLEXITY)


def zf_pja(
    est_l: ChannelEstimate, dir_e: ChannelEstimate, dl: DownlinkParams
) -> Beamformer:
    """Transmit only in the orthogonal complement of the jammer's direction.

    Within the complement, picks the direction maximizing the expected
    received power hhat_L hhat_L^H + mse_L.
    """
    if dir_e.kind != KIND_DIRECTION:
        raise DimensionError("zero-forcing needs a direction-only Eve estimate")
    m = est_l.m
    if m < 2:
        raise DimensionError("zero-forcing needs at least two antennas")
    u = dir_e.hhat
    if abs(np.linalg.norm(u) - 1.0) > 1e-8:
        raise DimensionError("eavesdropper direction must be unit norm")
    p = householder_complement(u)
    target = hermitize(np.outer(est_l.hhat, est_l.hhat.conj()) + est_l.mse)
    reduced = hermitize(p.conj().T @ target @ p)
    _, vecs = eigh_psd(reduced)
    v = _unit(p @ vecs[:, -1])
    leak = abs(np.vdot(u, v))
    if leak > 1e-10:
        raise ArithmeticError(f"null-space leakage {leak:.3e} exceeds 1e-10")
    return Beamformer(v, DESIGN_ZF)
