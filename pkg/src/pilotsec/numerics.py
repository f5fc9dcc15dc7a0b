"""Complex Hermitian linear-algebra primitives and Gaussian sampling.

Everything here is a pure function; randomness enters only through an
explicitly passed numpy Generator.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import DimensionError, NotPSDError, SingularMatrixError

# Relative eigenvalue floor used when (pseudo-)inverting near-singular
# Hermitian matrices.
EIG_FLOOR = 1e-12


def hermitize(a: np.ndarray) -> np.ndarray:
    """Return the Hermitian part (A + A^H)/2."""
    a = np.asarray(a)
    return 0.5 * (a + a.conj().T)


def eigh_psd(h: np.ndarray, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a Hermitian PSD matrix, clamping small negative eigenvalues.

    Parameters
    ----------
    h : np.ndarray
        Hermitian matrix.
    tol : float
        Relative tolerance: raises NotPSDError if min eigenvalue < -tol * max.

    Returns
    -------
    (w, V) : eigenvalues ascending (clamped to >= 0) and unitary eigenvectors.
    """
    h = hermitize(h)
    w, v = np.linalg.eigh(h)
    scale = float(w[-1]) if w.size else 0.0
    if scale > 0 and w[0] < -tol * scale:
        raise NotPSDError(
            f"matrix is not PSD: min eigenvalue {w[0]:.3e} < -{tol:.0e} * {scale:.3e}"
        )
    return np.clip(w, 0.0, None), v


def hermitian_sqrt(h: np.ndarray) -> np.ndarray:
    """Hermitian square root S of a PSD matrix, S @ S = H."""
    w, v = eigh_psd(h)
    return hermitize((v * np.sqrt(w)) @ v.conj().T)


def complex_normal(shape, rng: np.random.Generator) -> np.ndarray:
    """iid standard circularly-symmetric complex Gaussian entries (unit variance)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_cn(r: np.ndarray, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw CN(0, R) vectors: R^{1/2} g with g standard complex Gaussian.

    Returns shape (M,) when size is None, else (size, M).
    """
    s = hermitian_sqrt(r)
    if size is None:
        return s @ complex_normal(s.shape[0], rng)
    return complex_normal((size, s.shape[0]), rng) @ s.T


def phase_normalize(v: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Rotate v by a global phase so its first nonzero entry is real positive."""
    v = np.asarray(v)
    mags = np.abs(v)
    if mags.size == 0 or mags.max() == 0.0:
        return v
    floor = tol if tol > 0 else 1e-12 * mags.max()
    idx = int(np.argmax(mags > floor))
    return v * np.exp(-1j * np.angle(v[idx]))


def loaded_solve(k: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve K x = y for Hermitian PSD K with a 1e-12 trace load.

    The load keeps rank-deficient covariance kernels invertible without
    visibly perturbing well-conditioned ones.
    """
    k = hermitize(k)
    m = k.shape[0]
    load = EIG_FLOOR * max(float(np.trace(k).real), 1.0)
    try:
        c = cho_factor(k + load * np.eye(m), lower=True)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"kernel not invertible: {exc}") from exc
    return cho_solve(c, y)


def pinv_sqrt_psd(b: np.ndarray) -> np.ndarray:
    """B^{-1/2} via eigendecomposition with a relative eigenvalue floor.

    Eigenvalues below EIG_FLOOR * lambda_max are treated as zero (pseudo-inverse).
    """
    w, v = eigh_psd(b)
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0.0:
        raise SingularMatrixError("matrix is identically zero")
    inv_sqrt = np.where(w > EIG_FLOOR * wmax, 1.0 / np.sqrt(np.maximum(w, EIG_FLOOR * wmax)), 0.0)
    return hermitize((v * inv_sqrt) @ v.conj().T)


def dominant_gen_eigvec(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unit-norm u maximizing the generalized Rayleigh quotient (u^H A u)/(u^H B u).

    B must be positive definite at working precision (near-singular B falls
    back to the floored pseudo-inverse). Phase fixed so the first nonzero
    entry is real positive.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch {a.shape} vs {b.shape}")
    w_b = pinv_sqrt_psd(b)
    w, v = np.linalg.eigh(hermitize(w_b @ a @ w_b))
    u = w_b @ v[:, -1]
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        raise SingularMatrixError("generalized eigenvector collapsed to zero")
    return phase_normalize(u / nrm)


def householder_complement(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis P (M x (M-1)) of the orthogonal complement of unit u.

    Built from the Householder reflector mapping u onto a multiple of e_1, so
    P^H u = 0 and P^H P = I exactly up to roundoff.
    """
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    if m < 2:
        raise DimensionError("need dimension >= 2 for a nontrivial complement")
    nrm = np.linalg.norm(u)
    if nrm == 0.0:
        raise DimensionError("zero vector has no distinguished complement")
    u = u / nrm
    phase = np.exp(1j * np.angle(u[0])) if u[0] != 0 else 1.0
    w = u.copy()
    w[0] += phase  # sign keeps ||w|| away from 0
    w /= np.linalg.norm(w)
    h = np.eye(m, dtype=complex) - 2.0 * np.outer(w, w.conj())
    return h[:, 1:]
