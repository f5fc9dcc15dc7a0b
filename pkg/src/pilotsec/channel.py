"""ULA spatial covariance construction and instantaneous channel draws.

A channel covariance is built from a power azimuth spectrum that is uniform
over one or more angular intervals: R = integral P(theta) a(theta)^H a(theta),
with a(theta) the 1 x M steering row vector and P normalized to unit mass, so
trace(R) = M and every diagonal entry is 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .numerics import eigh_psd, hermitize

HALF_PI = 0.5 * np.pi

# Fixed quadrature order per angular interval; resolves the steering-vector
# oscillation comfortably for M <= 128 (convergence is asserted in tests).
GL_ORDER = 2048


def steering_vector(theta: float, m: int) -> np.ndarray:
    """ULA steering vector, entry k = exp(-j*pi*k*sin(theta)), half-wavelength spacing."""
    if m < 1:
        raise DimensionError("antenna count must be positive")
    if not -HALF_PI <= theta <= HALF_PI:
        raise ValueError(f"angle {theta} outside [-pi/2, pi/2]")
    return np.exp(-1j * np.pi * np.arange(m) * np.sin(theta))


@dataclass(frozen=True)
class PowerAzimuthSpectrum:
    """Uniform power azimuth spectrum on a union of angular intervals.

    paths: list of (center, spread) in radians; each interval
    [center - spread/2, center + spread/2] is clipped to [-pi/2, pi/2].
    Spread-zero paths degrade to exact single-ray (rank-1) components.
    """

    paths: tuple[tuple[float, float], ...]

    def __init__(self, paths):
        object.__setattr__(self, "paths", tuple((float(c), float(s)) for c, s in paths))
        if not self.paths:
            raise ValueError("need at least one path")
        for center, spread in self.paths:
            if spread < 0:
                raise ValueError("angular spread must be >= 0")
            if not -HALF_PI <= center <= HALF_PI:
                raise ValueError(f"path center {center} outside [-pi/2, pi/2]")

    def intervals(self) -> list[tuple[float, float]]:
        """Clipped [lo, hi] per path; lo == hi marks a single-ray path."""
        out = []
        for center, spread in self.paths:
            lo = max(center - 0.5 * spread, -HALF_PI)
            hi = min(center + 0.5 * spread, HALF_PI)
            out.append((lo, hi))
        return out


def pas_from_degrees(paths_deg) -> PowerAzimuthSpectrum:
    """Convenience constructor: list of (center_deg, spread_deg)."""
    return PowerAzimuthSpectrum([(np.deg2rad(c), np.deg2rad(s)) for c, s in paths_deg])


@dataclass(frozen=True)
class CovarianceModel:
    """Spatial covariance with optional generating spectrum."""

    m: int
    r: np.ndarray
    pas: PowerAzimuthSpectrum | None = field(default=None, compare=False)

    def validate(self, rtol: float = 1e-6) -> None:
        eigh_psd(self.r)  # raises NotPSDError when badly indefinite
        tr = float(np.trace(self.r).real)
        if abs(tr - self.m) > rtol * self.m:
            raise ValueError(f"trace {tr} != M = {self.m}")


def identity_covariance(m: int) -> CovarianceModel:
    """Uncorrelated-antenna model R = I_M."""
    return CovarianceModel(m=m, r=np.eye(m, dtype=complex))


def covariance_from_pas(
    pas: PowerAzimuthSpectrum, m: int, gl_order: int = GL_ORDER
) -> CovarianceModel:
    """Spatial covariance R = integral P(theta) a(theta)^H a(theta) d(theta).

    P is uniform over the (clipped) path intervals with total mass 1. The
    integral uses fixed-order Gauss-Legendre per interval; a total interval
    length of zero degrades to an equal-weight mixture of exact rank-1 terms
    a(center)^H a(center).
    """
    intervals = pas.intervals()
    total_len = sum(hi - lo for lo, hi in intervals)
    r = np.zeros((m, m), dtype=complex)

    if total_len == 0.0:
        for lo, _ in intervals:
            a = steering_vector(lo, m)
            r += np.outer(a.conj(), a) / len(intervals)
        return CovarianceModel(m=m, r=hermitize(r), pas=pas)

    nodes, weights = np.polynomial.legendre.leggauss(gl_order)
    density = 1.0 / total_len  # xi: uniform over the union of intervals
    for lo, hi in intervals:
        if hi == lo:
            continue  # zero-measure path inside a nonzero-mass spectrum
        half = 0.5 * (hi - lo)
        theta = 0.5 * (hi + lo) + half * nodes
        # rows: steering vectors at each node
        a = np.exp(-1j * np.pi * np.outer(np.sin(theta), np.arange(m)))
        w = weights * half * density
        r += (a.conj().T * w) @ a
    return CovarianceModel(m=m, r=hermitize(r), pas=pas)
