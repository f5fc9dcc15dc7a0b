"""Pilot sets, uplink frame synthesis, matched filtering, and pre-screening.

The base station allocates N orthogonal length-tau pilots; the legitimate user
picks one uniformly at random each coherence block. Matched-filtering the
received frame against every pilot yields N channel observations, exactly one
of which carries h_L.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionError
from .numerics import complex_normal

GENIE = "genie"


def dbm_to_watt(dbm: float) -> float:
    """Convert dBm to linear watts (config-boundary helper)."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class PilotSet:
    """N orthogonal pilots as columns of a tau x N matrix, X^H X = tau * I."""

    tau: int
    n: int
    x: np.ndarray

    def column(self, idx: int) -> np.ndarray:
        return self.x[:, idx]


def generate_pilots(tau: int, n: int) -> PilotSet:
    """First n columns of the tau-point DFT matrix (constant modulus, exact Gram)."""
    if not 1 <= n <= tau:
        raise DimensionError(f"need 1 <= N <= tau, got N={n}, tau={tau}")
    t = np.arange(tau)
    x = np.exp(-2j * np.pi * np.outer(t, np.arange(n)) / tau)
    return PilotSet(tau=tau, n=n, x=x)


@dataclass(frozen=True)
class TrainingParams:
    """Uplink training powers; all linear watts.

    sigma_z2 is the per-antenna noise power of a matched-filter observation,
    sigma_T2 / (tau * p_L); phi = 1/(tau*sqrt(p_L)) is the matched-filter gain.
    """

    tau: int
    p_l: float
    p_e: float
    sigma_t2: float

    def __post_init__(self):
        if self.tau < 1:
            raise ValueError("tau must be >= 1")
        if self.p_l <= 0 or self.sigma_t2 <= 0:
            raise ValueError("p_L and sigma_T2 must be > 0")
        if self.p_e < 0:
            raise ValueError("p_E must be >= 0")

    @property
    def phi(self) -> float:
        return 1.0 / (self.tau * np.sqrt(self.p_l))

    @property
    def sigma_z2(self) -> float:
        return self.sigma_t2 / (self.tau * self.p_l)

    def beta2_psa(self, k: int) -> float:
        """Squared amplitude of Eve's component per observation under a K-pilot spoof."""
        if k < 1:
            raise ValueError("K must be >= 1")
        return self.p_e / (k * self.p_l)

    @property
    def beta2_pja(self) -> float:
        return self.p_e / self.p_l


@dataclass
class ObservationSet:
    """The N matched-filter outputs plus ground truth for scoring.

    y has shape (N, M), row n = y_n. Truth fields are written by the
    simulation and read only by scoring code, never by detectors.
    """

    y: np.ndarray
    lu_index: int | None = None
    attack_kind: str = "none"  # none | psa | pja
    eve_pilots: tuple[int, ...] | None = None
    phases: np.ndarray | None = None
    jam_coeffs: np.ndarray | None = None
    hit: bool | None = None
    flags: set = field(default_factory=set)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]


def synthesize_uplink(
    pilots: PilotSet,
    lu_index: int,
    h_l: np.ndarray,
    h_e: np.ndarray,
    a: np.ndarray,
    params: TrainingParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received uplink frame Y_U = sqrt(p_L) h_L x_L^H + sqrt(p_E) h_E a^H + V.

    V has iid CN(0, sigma_T2) entries; a is Eve's length-tau sequence (zeros
    for no attack).
    """
    if pilots.tau != params.tau:
        raise DimensionError("pilot set and params disagree on tau")
    if not 0 <= lu_index < pilots.n:
        raise DimensionError(f"lu_index {lu_index} outside [0, {pilots.n})")
    h_l = np.asarray(h_l)
    h_e = np.asarray(h_e)
    a = np.asarray(a)
    if h_l.shape != h_e.shape or a.shape != (pilots.tau,):
        raise DimensionError("channel/attack vector shapes inconsistent")
    x_l = pilots.column(lu_index)
    y_u = np.sqrt(params.p_l) * np.outer(h_l, x_l.conj())
    y_u = y_u + np.sqrt(params.p_e) * np.outer(h_e, a.conj())
    y_u = y_u + np.sqrt(params.sigma_t2) * complex_normal((h_l.shape[0], pilots.tau), rng)
    return y_u


def matched_filter(y_u: np.ndarray, pilots: PilotSet, params: TrainingParams) -> ObservationSet:
    """Project the frame onto each pilot: y_n = phi * Y_U x_n (truth unfilled)."""
    y_u = np.asarray(y_u)
    if y_u.shape[1] != pilots.tau:
        raise DimensionError("frame length != tau")
    y = params.phi * (y_u @ pilots.x)  # (M, N)
    return ObservationSet(y=y.T.copy())


def prescreen(obs: ObservationSet, lam_c: float | str) -> list[int]:
    """Effective-set selection: indices with ||y_n||^2 strictly above lam_c.

    Genie mode (lam_c == "genie") keeps exactly the observations that truly
    contain legitimate or eavesdropper energy: the LU index, the spoofed
    pilot indices under PSA, and every index under PJA (jamming leaks into
    all matched-filter outputs).
    """
    if isinstance(lam_c, str):
        if lam_c != GENIE:
            raise ValueError(f"unknown prescreen mode {lam_c!r}")
        if obs.lu_index is None:
            raise ValueError("genie prescreen needs truth labels")
        keep = {obs.lu_index}
        if obs.attack_kind == "psa" and obs.eve_pilots:
            keep.update(obs.eve_pilots)
        elif obs.attack_kind == "pja":
            keep.update(range(obs.n))
        return sorted(keep)
    powers = np.sum(np.abs(obs.y) ** 2, axis=1)
    return [int(i) for i in np.nonzero(powers > lam_c)[0]]


def default_lambda_c(m: int, sigma_z2: float) -> float:
    """Four standard deviations above the pure-noise observation power mean."""
    return sigma_z2 * (m + 4.0 * np.sqrt(m))


def observation_indices(obs: ObservationSet, survivors: Sequence[int]) -> np.ndarray:
    """Rows of obs.y selected by the surviving indices, in ascending order."""
    idx = sorted(int(i) for i in survivors)
    return obs.y[idx, :]


# Observation covariance models under the matched-filter statistics; these are
# the building blocks for every detector, estimator, and analytic error rate.


def cov_lu_obs(r_l: np.ndarray, params: TrainingParams) -> np.ndarray:
    """Covariance of an observation carrying only the legitimate channel."""
    return r_l + params.sigma_z2 * np.eye(r_l.shape[0])


def cov_eve_part(r_e: np.ndarray, params: TrainingParams, k: int) -> np.ndarray:
    """Covariance of the spoofed component alone under a K-pilot spoof."""
    return params.beta2_psa(k) * r_e


def cov_eve_obs(r_e: np.ndarray, params: TrainingParams, k: int) -> np.ndarray:
    """Covariance of an Eve-only observation under a K-pilot spoof."""
    return params.beta2_psa(k) * r_e + params.sigma_z2 * np.eye(r_e.shape[0])


def cov_mixed_obs(
    r_l: np.ndarray, r_e: np.ndarray, params: TrainingParams, k: int
) -> np.ndarray:
    """Covariance of the hit observation (legitimate plus spoofed plus noise)."""
    m = r_l.shape[0]
    return r_l + params.beta2_psa(k) * r_e + params.sigma_z2 * np.eye(m)
