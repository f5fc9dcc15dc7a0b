"""Tail probability of an indefinite Hermitian quadratic form of a standard
complex Gaussian vector.

x^H Omega x with x ~ CN(0, I) equals Q1 - Q2 where Q1 (Q2) is an independent
sum of Gamma variables built from the positive (negative) eigenvalues, each
|x_i|^2 being a unit exponential. Both sides are expanded as a single-scale
gamma mixture (Moschopoulos), whose nonnegative weights sum to one and give a
rigorous truncation bound; the cross tail P{G1 >= t + G2} has a closed form
for integer shapes that reduces to a Poisson/negative-binomial convolution.
A Monte Carlo oracle with the same eigenvalue reduction is provided for
validation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import TruncationFailure
from .numerics import hermitize

K_MAX = 500
ZERO_DROP_TOL = 1e-10
CLUSTER_TOL = 1e-8


@dataclass(frozen=True)
class SpectrumDecomposition:
    """Signed distinct eigenvalues with multiplicities.

    positive is sorted ascending; negative is sorted by |value| ascending
    (closest to zero first). dropped_zero_count counts eigenvalues treated
    as exact zeros; they do not affect the form's law.
    """

    positive: tuple[tuple[float, int], ...]
    negative: tuple[tuple[float, int], ...]
    dropped_zero_count: int
    dim: int

    @property
    def rho_positive(self) -> int:
        return sum(m for _, m in self.positive)

    @property
    def rho_negative(self) -> int:
        return sum(m for _, m in self.negative)


def _cluster(values: np.ndarray, cluster_tol: float) -> list[tuple[float, int]]:
    """Group sorted values whose relative gap is below cluster_tol."""
    out: list[tuple[float, int]] = []
    members: list[float] = []
    for v in values:
        if members and abs(v - members[-1]) > cluster_tol * max(abs(v), abs(members[-1])):
            out.append((float(np.mean(members)), len(members)))
            members = []
        members.append(float(v))
    if members:
        out.append((float(np.mean(members)), len(members)))
    return out


def spectrum_decompose(omega: np.ndarray, cluster_tol: float = CLUSTER_TOL) -> SpectrumDecomposition:
    """Eigenvalues of a Hermitian matrix, split by sign, clustered, zeros dropped."""
    omega = np.asarray(omega)
    w = np.linalg.eigvalsh(hermitize(omega))
    dim = w.size
    max_abs = float(np.max(np.abs(w))) if dim else 0.0
    if max_abs == 0.0:
        return SpectrumDecomposition((), (), dim, dim)
    kept = w[np.abs(w) > ZERO_DROP_TOL * max_abs]
    dropped = dim - kept.size
    pos = _cluster(np.sort(kept[kept > 0]), cluster_tol)
    # negatives clustered on |value|, ascending magnitude
    neg_mag = _cluster(np.sort(-kept[kept < 0]), cluster_tol)
    neg = tuple((-v, m) for v, m in neg_mag)
    return SpectrumDecomposition(tuple(pos), neg, dropped, dim)


def moschopoulos_weights(
    scales: np.ndarray, mults: np.ndarray, tol: float, k_max: int = K_MAX
) -> tuple[int, float, np.ndarray, float]:
    """Single-scale gamma mixture weights for a sum of Gamma(m_i, scale s_i).

    Returns (rho, s1, weights, tail_mass): the sum equals, in law, a mixture
    over k of Gamma(rho + k, scale s1) with the returned nonnegative weights;
    tail_mass = 1 - sum(weights) bounds the truncation error contribution.
    Raises TruncationFailure if the mass cannot reach 1 - tol within k_max.
    """
    scales = np.asarray(scales, dtype=float)
    mults = np.asarray(mults, dtype=float)
    s1 = float(scales.min())
    rho = int(round(mults.sum()))
    c0 = float(np.prod((s1 / scales) ** mults))
    ratios = 1.0 - s1 / scales  # all in [0, 1)
    delta = [1.0]
    weights = [c0]
    total = c0
    if total >= 1.0 - tol:
        return rho, s1, np.array(weights), max(0.0, 1.0 - total)
    gamma_k = []  # gamma_1..gamma_k
    for k in range(1, k_max + 1):
        gamma_k.append(float(np.sum(mults * ratios**k)) / k)
        nxt = sum(i * gamma_k[i - 1] * delta[k - i] for i in range(1, k + 1)) / k
        delta.append(nxt)
        weights.append(c0 * nxt)
        total += weights[-1]
        if total >= 1.0 - tol:
            return rho, s1, np.array(weights), max(0.0, 1.0 - total)
    raise TruncationFailure(
        f"gamma-mixture mass reached only {total:.6g} after {k_max} terms "
        "(eigenvalue spread too large for the requested tolerance)"
    )


def _poisson_pmf(lam: float, length: int) -> np.ndarray:
    k = np.arange(length)
    if lam == 0.0:
        out = np.zeros(length)
        out[0] = 1.0
        return out
    return np.exp(-lam + k * np.log(lam) - gammaln(k + 1))


def _negbin_mixture(l_max: int, shapes: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    """V_l = sum_k w_k * NegBin(l; shapes_k, p) for l = 0..l_max."""
    l_arr = np.arange(l_max + 1)
    ln_pmf = (
        gammaln(shapes[None, :] + l_arr[:, None])
        - gammaln(shapes[None, :])
        - gammaln(l_arr + 1)[:, None]
        + l_arr[:, None] * np.log1p(-p)
        + shapes[None, :] * np.log(p)
    )
    return np.exp(ln_pmf) @ w


def quadform_tail(
    omega: np.ndarray,
    t: float,
    tol: float = 1e-10,
    cluster_tol: float = CLUSTER_TOL,
    k_max: int = K_MAX,
) -> float:
    """P{x^H Omega x >= t} for x ~ CN(0, I), t >= 0, within tol."""
    if t < 0:
        raise ValueError("t must be >= 0")
    spec = spectrum_decompose(omega, cluster_tol)
    has_pos = bool(spec.positive)
    has_neg = bool(spec.negative)

    if not has_pos and not has_neg:
        return 1.0 if t == 0.0 else 0.0
    if not has_pos:
        # strictly negative form: never reaches t >= 0
        return 0.0

    pos_scales = np.array([v for v, _ in spec.positive])
    pos_mults = np.array([m for _, m in spec.positive])

    if not has_neg:
        rho, s1, w1, _ = moschopoulos_weights(pos_scales, pos_mults, tol, k_max)
        shapes = rho + np.arange(w1.size)
        return float(np.clip(w1 @ gammaincc(shapes, t / s1), 0.0, 1.0))

    neg_scales = np.array([-v for v, _ in spec.negative])
    neg_mults = np.array([m for _, m in spec.negative])
    rho1, a, w1, _ = moschopoulos_weights(pos_scales, pos_mults, 0.5 * tol, k_max)
    rho2, b, w2, _ = moschopoulos_weights(neg_scales, neg_mults, 0.5 * tol, k_max)

    # P = sum_i T1_i * (V * pois)_i: the closed-form cross tail for integer
    # shapes, with the k2-sum folded into a negative-binomial mixture V and
    # the (t/a)-powers into a Poisson pmf (exact regrouping of the retained
    # double-series terms).
    i_max = rho1 + w1.size - 2  # largest retained shape minus one
    v = _negbin_mixture(i_max, rho2 + np.arange(w2.size, dtype=float), w2, a / (a + b))
    pois = _poisson_pmf(t / a, i_max + 1)
    conv = np.convolve(v, pois)[: i_max + 1]
    cum_w1 = np.cumsum(w1)
    total_w1 = cum_w1[-1]
    i_arr = np.arange(i_max + 1)
    lo = np.maximum(0, i_arr - rho1 + 1)  # smallest retained k1 covering term i
    t1 = total_w1 - np.where(lo >= 1, cum_w1[np.maximum(lo - 1, 0)], 0.0)
    return float(np.clip(t1 @ conv, 0.0, 1.0))


def quadform_tail_mc(
    omega: np.ndarray,
    t: float,
    n_samples: int,
    rng: np.random.Generator,
    chunk: int = 1 << 18,
) -> tuple[float, float]:
    """Monte Carlo estimate of P{x^H Omega x >= t} with binomial standard error."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(omega)))
    hits = 0
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        q = rng.exponential(size=(n, w.size)) @ w
        hits += int(np.count_nonzero(q >= t))
        done += n
    p = hits / n_samples
    return p, float(np.sqrt(p * (1.0 - p) / n_samples))
