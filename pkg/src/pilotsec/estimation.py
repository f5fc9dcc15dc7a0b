"""MMSE/LMMSE channel estimators for both links, under spoofing and jamming.

Full-kind estimates carry the posterior error covariance alongside the
estimate; direction-only estimates carry a unit vector and no error model.
Eve's channel is only observable up to a phase, so its estimators target a
rotated copy; everything downstream consumes phase-invariant products.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .numerics import eigh_psd, hermitize, loaded_solve, phase_normalize
from .training import TrainingParams, cov_lu_obs, cov_mixed_obs

KIND_FULL = "full"
KIND_DIRECTION = "direction"

FLAG_DEGENERATE = "degenerate"


@dataclass
class ChannelEstimate:
    """A channel estimate with its error model.

    ``mse`` is the posterior error covariance for full-kind estimates and
    None for direction-only ones, whose ``hhat`` is unit norm.
    """

    hhat: np.ndarray
    mse: np.ndarray | None
    kind: str = KIND_FULL
    flags: set = field(default_factory=set)

    @property
    def m(self) -> int:
        return self.hhat.shape[0]


def _linear_mmse(prior: np.ndarray, kernel: np.ndarray, y: np.ndarray, gain: float = 1.0):
    """Estimate gain*prior*kernel^{-1} y with mse prior - gain^2 prior kernel^{-1} prior."""
    hhat = gain * (prior @ loaded_solve(kernel, y))
    mse = hermitize(prior - gain**2 * (prior @ loaded_solve(kernel, prior)))
    return hhat, mse


def mmse_hl_psa(
    y_l: np.ndarray,
    hit: bool,
    k: int,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
) -> ChannelEstimate:
    """Estimate the legitimate channel from its identified observation.

    On a hit the observation also carries a K-pilot spoofed component, so
    the whitening kernel includes Eve's scaled covariance; on a miss the
    observation is clean and the kernel is legitimate-plus-noise only.
    """
    if hit:
        kernel = cov_mixed_obs(r_l, r_e, params, k)
    else:
        kernel = cov_lu_obs(r_l, params)
    hhat, mse = _linear_mmse(r_l, kernel, y_l)
    return ChannelEstimate(hhat, mse, KIND_FULL)


def mmse_he_psa_single(
    y_l: np.ndarray,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
) -> ChannelEstimate:
    """Estimate Eve's channel from the shared hit observation (one spoofed pilot).

    The estimate targets the phase-rotated copy of the channel that actually
    appears in the observation; the rotation is unobservable and harmless to
    the beamformers, which use only quadratic products.
    """
    beta = np.sqrt(params.beta2_psa(1))
    kernel = cov_mixed_obs(r_l, r_e, params, 1)
    hhat, mse = _linear_mmse(r_e, kernel, y_l, gain=beta)
    return ChannelEstimate(hhat, mse, KIND_FULL)


def combine_eve_obs(obs) -> np.ndarray:
    """Coherently average Eve-only observations into one virtual observation.

    Each observation holds the same channel under its own random phase, so
    each is rotated to agree with the first before averaging.  A zero inner
    product leaves the rotation at unity.
    """
    rows = np.atleast_2d(np.asarray(obs, dtype=complex))
    q_e = rows.shape[0]
    if q_e < 1:
        raise DimensionError("need at least one observation to combine")
    acc = rows[0].astype(complex).copy()
    for i in range(1, q_e):
        inner = np.vdot(rows[i], rows[0])
        kappa = inner / abs(inner) if inner != 0.0 else 1.0
        acc += kappa * rows[i]
    return acc / q_e


def mmse_he_psa_multi(
    y_e: np.ndarray,
    q_e: int,
    k: int,
    r_e: np.ndarray,
    params: TrainingParams,
) -> ChannelEstimate:
    """Estimate Eve's channel from the combined observation of Q_E spoofed pilots.

    The combined observation behaves like a single observation whose noise
    power is reduced by the averaging factor Q_E.
    """
    if q_e < 1:
        raise DimensionError("q_e must be at least 1")
    beta2 = params.beta2_psa(k)
    beta = np.sqrt(beta2)
    m = r_e.shape[0]
    kernel = beta2 * r_e + (params.sigma_z2 / q_e) * np.eye(m)
    hhat, mse = _linear_mmse(r_e, kernel, y_e, gain=beta)
    return ChannelEstimate(hhat, mse, KIND_FULL)


def lmmse_hl_pja(
    y1: np.ndarray,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
) -> ChannelEstimate:
    """Estimate the legitimate channel under jamming, by the linear MMSE rule.

    The jamming contribution on the legitimate pilot has covariance
    (p_E / (tau p_L)) R_E; the combined interference term is not Gaussian,
    so this is the best linear estimator rather than the MMSE estimator.
    """
    m = r_l.shape[0]
    kernel = (
        r_l
        + (params.beta2_pja / params.tau) * r_e
        + params.sigma_z2 * np.eye(m)
    )
    hhat, mse = _linear_mmse(r_l, kernel, y1)
    return ChannelEstimate(hhat, mse, KIND_FULL)


def eve_direction_pja(y_e_mat: np.ndarray) -> ChannelEstimate:
    """Estimate the direction of Eve's channel from the jammed-only observations.

    Columns of the input share the direction of Eve's channel under random
    complex scalings; the dominant eigenvector of the outer-product sum
    recovers it.  An all-zero input returns the first coordinate direction
    with a degenerate flag.
    """
    y = np.atleast_2d(np.asarray(y_e_mat, dtype=complex))
    m = y.shape[0]
    if not np.any(y):
        e1 = np.zeros(m, dtype=complex)
        e1[0] = 1.0
        return ChannelEstimate(e1, None, KIND_DIRECTION, flags={FLAG_DEGENERATE})
    gram = hermitize(y @ y.conj().T)
    _, vecs = eigh_psd(gram)
    top = phase_normalize(vecs[:, -1])
    top = top / np.linalg.norm(top)
    return ChannelEstimate(top, None, KIND_DIRECTION)


def prior_estimate(r: np.ndarray) -> ChannelEstimate:
    """The estimate available with no observation: zero mean, prior covariance.

    Used when the detector infers that no attack is present but a defensive
    beamformer still wants an Eve error model.
    """
    m = r.shape[0]
    return ChannelEstimate(np.zeros(m, dtype=complex), hermitize(r.copy()), KIND_FULL)
