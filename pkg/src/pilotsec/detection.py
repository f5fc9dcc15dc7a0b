"""Attack-state detectors and legitimate-pilot identification rules.

Two families live here.  The likelihood-ratio family (``llr_k1``,
``gllr_k2``, ``detect_spoof_presence``, ``resolve_unknown_k``) needs the
channel covariances and works from the surviving observations after
prescreening.  The distance family (``identify_lu_psa``,
``identify_lu_pja``) is covariance-free and works directly on the
geometry of the observation rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import special

from .analysis import pf_pja_bound, pf_psa_bound
from .errors import DimensionError, TooFewObservationsError
from .numerics import hermitize, loaded_solve
from .training import (
    ObservationSet,
    TrainingParams,
    cov_eve_obs,
    cov_lu_obs,
    cov_mixed_obs,
)

FLAG_FALLBACK = "fallback_used"
FLAG_TIE = "tie"
FLAG_EMPTY_SET = "empty_effective_set"


class Hypothesis(Enum):
    """Binary hypothesis labels for the two-observation tests."""

    H0 = 0  # first observation carries the legitimate channel
    H1 = 1  # second observation carries the legitimate channel


class AttackState(Enum):
    NO_ATTACK = "no_attack"
    PSA_HIT = "psa_hit"
    PSA_MISS = "psa_miss"
    PJA = "pja"


@dataclass
class DetectionOutcome:
    """Result of an identification pass.

    ``lu_index`` is the pilot index claimed for the legitimate user (in the
    original 0..N-1 numbering), or None when no claim can be made.
    ``inferred_k`` is only populated by the unknown-K resolver.
    """

    lu_index: int | None
    inferred_state: AttackState | None = None
    inferred_k: int | None = None
    flags: set = field(default_factory=set)

    @property
    def fallback_used(self) -> bool:
        return FLAG_FALLBACK in self.flags


@dataclass(frozen=True)
class ThresholdSpec:
    """False-alarm target and the distance threshold calibrated from it."""

    eta: float
    eps: float

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise DimensionError("eta must lie strictly inside (0, 1)")
        if self.eps <= 0.0:
            raise DimensionError("eps must be positive")


def _quad(y: np.ndarray, r: np.ndarray) -> float:
    """y^H R^{-1} y as a real scalar, via a loaded Cholesky solve."""
    return float(np.real(np.vdot(y, loaded_solve(r, y))))


def llr_k1(
    y1: np.ndarray,
    y2: np.ndarray,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
) -> Hypothesis:
    """Likelihood-ratio test between two observations under a single-pilot spoof.

    Decides which of the two rows carries the legitimate channel when the
    other is known to carry the spoofed one.  Ties (statistic exactly zero)
    resolve to H0.  Antisymmetric: swapping the inputs flips the decision.
    """
    r_lz = cov_lu_obs(r_l, params)
    r_ez = cov_eve_obs(r_e, params, 1)
    t = (
        _quad(y1, r_ez)
        - _quad(y1, r_lz)
        + _quad(y2, r_lz)
        - _quad(y2, r_ez)
    )
    return Hypothesis.H0 if t >= 0.0 else Hypothesis.H1


def power_test(y1: np.ndarray, y2: np.ndarray) -> Hypothesis:
    """Pick the louder observation as the spoofed one.

    Under a two-pilot spoof the observation holding the legitimate channel
    also holds a spoofed component, so it carries more power.
    """
    return Hypothesis.H0 if np.sum(np.abs(y1) ** 2) >= np.sum(np.abs(y2) ** 2) else Hypothesis.H1


def _stacked_cov_blocks(
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
    k: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Covariance of the stacked pair under H0 at reference phase, and the
    blocks A, B, C of its inverse."""
    m = r_l.shape[0]
    r_g0 = np.zeros((2 * m, 2 * m), dtype=complex)
    r_g0[:m, :m] = cov_mixed_obs(r_l, r_e, params, k)
    r_g0[m:, m:] = cov_eve_obs(r_e, params, k)
    cross = params.beta2_psa(k) * r_e
    r_g0[:m, m:] = cross
    r_g0[m:, :m] = cross.conj().T
    inv = loaded_solve(r_g0, np.eye(2 * m, dtype=complex))
    a = hermitize(inv[:m, :m])
    b = hermitize(inv[m:, m:])
    c = inv[:m, m:]
    return r_g0, a, b, c


def gllr_k2(
    y1: np.ndarray,
    y2: np.ndarray,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
    k: int = 2,
) -> Hypothesis:
    """Generalized likelihood-ratio test for a two-pilot spoof.

    The unknown spoofing phase offset between the two observations is
    maximized out in closed form, which turns the cross terms into
    magnitudes.  Ties resolve to H0.
    """
    _, a, b, c = _stacked_cov_blocks(r_l, r_e, params, k)
    t = (
        _quad_form(y1, b - a)
        + _quad_form(y2, a - b)
        + 2.0 * abs(np.vdot(y1, c @ y2))
        - 2.0 * abs(np.vdot(y1, c.conj().T @ y2))
    )
    return Hypothesis.H0 if t >= 0.0 else Hypothesis.H1


def _quad_form(y: np.ndarray, mat: np.ndarray) -> float:
    return float(np.real(np.vdot(y, mat @ y)))


def min_phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Squared distance between u and v minimized over a phase rotation of v."""
    d = (
        float(np.sum(np.abs(u) ** 2))
        + float(np.sum(np.abs(v) ** 2))
        - 2.0 * abs(np.vdot(u, v))
    )
    return max(d, 0.0)


def min_scale_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Squared residual of u after projecting out the direction of v.

    Minimizes ||u - c v||^2 over complex c; a zero v leaves u untouched.
    """
    uu = float(np.sum(np.abs(u) ** 2))
    vv = float(np.sum(np.abs(v) ** 2))
    if vv == 0.0:
        return uu
    return max(uu - abs(np.vdot(v, u)) ** 2 / vv, 0.0)


def psa_threshold(m: int, sigma_z2: float, eta: float) -> ThresholdSpec:
    """Distance threshold whose false-alarm probability equals eta.

    The false-alarm curve is the regularized upper incomplete gamma
    Gamma(M, eps / (2 sigma_z^2)) / Gamma(M); this inverts it.
    """
    if not 0.0 < eta < 1.0:
        raise DimensionError("eta must lie strictly inside (0, 1)")
    eps = 2.0 * sigma_z2 * float(special.gammainccinv(m, eta))
    residual = abs(pf_psa_bound(eps, m, sigma_z2) - eta)
    if residual > 1e-10:
        raise ArithmeticError(
            f"threshold inversion residual {residual:.3e} exceeds 1e-10"
        )
    return ThresholdSpec(eta=eta, eps=eps)


def pja_threshold(m: int, sigma_z2: float, eta: float) -> ThresholdSpec:
    """Distance threshold whose false-alarm bound equals eta, by bisection.

    The bound is strictly decreasing in eps, from M at eps -> 0 toward 0,
    so a geometric bracket expansion always terminates.
    """
    if not 0.0 < eta < 1.0:
        raise DimensionError("eta must lie strictly inside (0, 1)")

    def f(eps: float) -> float:
        return pf_pja_bound(eps, m, sigma_z2) - eta

    lo = sigma_z2 * 1e-8
    hi = sigma_z2
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > sigma_z2 * 1e12:
            raise ArithmeticError("bracket expansion failed for pja threshold")
    while f(lo) < 0.0:
        lo *= 0.5
        if lo < sigma_z2 * 1e-16:
            raise ArithmeticError("bracket expansion failed for pja threshold")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(hi, 1.0):
            break
    eps = 0.5 * (lo + hi)
    if abs(pf_pja_bound(eps, m, sigma_z2) - eta) > 1e-10:
        raise ArithmeticError("pja threshold residual exceeds 1e-10")
    return ThresholdSpec(eta=eta, eps=eps)


def identify_lu_psa(
    obs: ObservationSet, survivors: Sequence[int], eps: float
) -> DetectionOutcome:
    """Pick the legitimate pilot among the survivors by ring distances.

    Spoofed observations agree up to a phase, so both ring distances at the
    legitimate position exceed the threshold while spoofed positions have at
    least one small neighbor distance.  If the ring rule does not isolate
    exactly one candidate, fall back to the index with the largest summed
    distance to all others and flag the outcome.
    """
    idx = sorted(int(i) for i in survivors)
    q = len(idx)
    if q < 3:
        raise TooFewObservationsError(
            f"ring identification needs at least 3 observations, got {q}"
        )
    rows = obs.y[idx, :]
    ring = np.array(
        [min_phase_distance(rows[i], rows[(i + 1) % q]) for i in range(q)]
    )
    candidates = [
        i for i in range(q) if ring[i] > eps and ring[(i - 1) % q] > eps
    ]
    flags: set = set()
    if len(candidates) == 1:
        pick = candidates[0]
    else:
        flags.add(FLAG_FALLBACK)
        scores = np.array(
            [
                sum(min_phase_distance(rows[i], rows[m]) for m in range(q) if m != i)
                for i in range(q)
            ]
        )
        pick = int(np.argmax(scores))
    return DetectionOutcome(lu_index=idx[pick], flags=flags)


def identify_lu_pja(obs: ObservationSet, eps: float) -> DetectionOutcome:
    """Pick the legitimate pilot under jamming by scale-invariant distances.

    Jammed-only observations are complex multiples of a common vector, so
    projecting one onto a neighbor leaves a small residual; the observation
    holding the legitimate channel resists projection in both directions.
    """
    n = obs.n
    if n < 3:
        raise TooFewObservationsError(
            f"jamming identification needs at least 3 observations, got {n}"
        )
    rows = obs.y
    d_next = np.array(
        [min_scale_distance(rows[i], rows[(i + 1) % n]) for i in range(n)]
    )
    d_prev = np.array(
        [min_scale_distance(rows[i], rows[(i - 1) % n]) for i in range(n)]
    )
    candidates = [i for i in range(n) if d_next[i] >= eps and d_prev[i] >= eps]
    flags: set = set()
    if len(candidates) == 1:
        pick = candidates[0]
    else:
        flags.add(FLAG_FALLBACK)
        scores = np.array(
            [
                sum(min_scale_distance(rows[i], rows[m]) for m in range(n) if m != i)
                for i in range(n)
            ]
        )
        pick = int(np.argmax(scores))
    return DetectionOutcome(lu_index=pick, inferred_state=AttackState.PJA, flags=flags)


def _ln_density(y: np.ndarray, r: np.ndarray) -> float:
    """Log density of a zero-mean circular Gaussian, dropping the -M ln(pi)."""
    sign, logdet = np.linalg.slogdet(r)
    if sign.real <= 0:
        raise ArithmeticError("covariance with nonpositive determinant")
    return -float(logdet.real) - _quad(y, r)


def detect_spoof_presence(
    y: np.ndarray,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
    k_hit: int = 1,
) -> AttackState:
    """Decide whether a single observation is legitimate-only or also spoofed.

    Compares the no-attack log density against the hit density with the
    spoofed component scaled for a k_hit-pilot spoof.  Ties resolve to
    no-attack.
    """
    ln_clean = _ln_density(y, cov_lu_obs(r_l, params))
    ln_hit = _ln_density(y, cov_mixed_obs(r_l, r_e, params, k_hit))
    return AttackState.NO_ATTACK if ln_clean >= ln_hit else AttackState.PSA_HIT


def resolve_unknown_k(
    obs: ObservationSet,
    survivors: Sequence[int],
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
    threshold: ThresholdSpec,
) -> DetectionOutcome:
    """Identify the legitimate pilot when the spoofed-pilot count is unknown.

    Dispatches on the survivor count Q_C.  One survivor means either a clean
    sole pilot or a single-pilot hit; two survivors need the joint-state
    comparison between a two-pilot hit and a one-pilot miss; three or more
    survivors feed the ring rule, after which a presence test on the claimed
    pilot splits hit from miss.
    """
    idx = sorted(int(i) for i in survivors)
    q = len(idx)

    if q == 0:
        return DetectionOutcome(
            lu_index=None, inferred_state=None, inferred_k=None,
            flags={FLAG_EMPTY_SET},
        )

    if q == 1:
        y = obs.y[idx[0]]
        state = detect_spoof_presence(y, r_l, r_e, params, k_hit=1)
        if state is AttackState.NO_ATTACK:
            return DetectionOutcome(idx[0], AttackState.NO_ATTACK, inferred_k=0)
        return DetectionOutcome(idx[0], AttackState.PSA_HIT, inferred_k=1)

    if q == 2:
        return _resolve_two_survivors(obs, idx, r_l, r_e, params)

    inner = identify_lu_psa(obs, idx, threshold.eps)
    y_lu = obs.y[inner.lu_index]
    state = detect_spoof_presence(y_lu, r_l, r_e, params, k_hit=q)
    if state is AttackState.PSA_HIT:
        return DetectionOutcome(
            inner.lu_index, AttackState.PSA_HIT, inferred_k=q, flags=inner.flags
        )
    return DetectionOutcome(
        inner.lu_index, AttackState.PSA_MISS, inferred_k=q - 1, flags=inner.flags
    )


def _resolve_two_survivors(
    obs: ObservationSet,
    idx: list,
    r_l: np.ndarray,
    r_e: np.ndarray,
    params: TrainingParams,
) -> DetectionOutcome:
    """Joint state-and-pilot decision for exactly two surviving observations.

    Candidate states: a two-pilot spoof hitting one of the survivors (the
    other is Eve-only), or a one-pilot spoof missing (one survivor clean,
    the other Eve-only).  Each candidate's likelihood is maximized over the
    unknown phase and the winners are compared; a tie keeps the miss state.
    """
    y1 = obs.y[idx[0]]
    y2 = obs.y[idx[1]]

    # Two-pilot hit: maximized joint log density for each pilot assignment.
    r_g0, a, b, c = _stacked_cov_blocks(r_l, r_e, params, 2)
    sign, logdet_g = np.linalg.slogdet(r_g0)
    if sign.real <= 0:
        raise ArithmeticError("stacked covariance with nonpositive determinant")
    q_h0 = (
        _quad_form(y1, a)
        + _quad_form(y2, b)
        - 2.0 * abs(np.vdot(y1, c @ y2))
    )
    q_h1 = (
        _quad_form(y1, b)
        + _quad_form(y2, a)
        - 2.0 * abs(np.vdot(y1, c.conj().T @ y2))
    )
    if q_h0 <= q_h1:
        lu_k2, quad_k2 = idx[0], q_h0
    else:
        lu_k2, quad_k2 = idx[1], q_h1
    ln_k2 = -float(logdet_g.real) - quad_k2

    # One-pilot miss: the two observations are independent, one clean and
    # one Eve-only, under each assignment.
    r_lz = cov_lu_obs(r_l, params)
    r_ez = cov_eve_obs(r_e, params, 1)
    ln_miss_0 = _ln_density(y1, r_lz) + _ln_density(y2, r_ez)
    ln_miss_1 = _ln_density(y2, r_lz) + _ln_density(y1, r_ez)
    if ln_miss_0 >= ln_miss_1:
        lu_k1, ln_k1 = idx[0], ln_miss_0
    else:
        lu_k1, ln_k1 = idx[1], ln_miss_1

    flags: set = set()
    if ln_k2 > ln_k1:
        return DetectionOutcome(lu_k2, AttackState.PSA_HIT, inferred_k=2, flags=flags)
    if ln_k2 == ln_k1:
        flags.add(FLAG_TIE)
    return DetectionOutcome(lu_k1, AttackState.PSA_MISS, inferred_k=1, flags=flags)
