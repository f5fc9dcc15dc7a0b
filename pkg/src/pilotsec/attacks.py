"""Eavesdropper attack synthesis: pilot spoofing and pilot jamming.

A PSA realization spreads Eve's power uniformly over K pilots of the public
set, each with an independent uniform phase; a PJA realization is an iid
complex Gaussian sequence. A "hit" means the spoofed subset contains the
pilot the legitimate user happened to pick.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .numerics import complex_normal
from .training import PilotSet

KIND_NONE = "none"
KIND_PSA = "psa"
KIND_PJA = "pja"


@dataclass(frozen=True)
class AttackConfig:
    """Attack family and its knobs.

    kind: "none" | "psa" | "pja". K is the spoofed-pilot count (PSA only).
    pilots fixes the spoofed subset; None draws it uniformly each realization.
    zero_phases is a debug switch reproducing the phaseless-spoofing special
    case (strictly worse for Eve; kept for the cancellation demo).
    """

    kind: str = KIND_NONE
    k: int = 1
    pilots: tuple[int, ...] | None = None
    zero_phases: bool = False

    def __post_init__(self):
        if self.kind not in (KIND_NONE, KIND_PSA, KIND_PJA):
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.kind == KIND_PSA and self.k < 1:
            raise ValueError("PSA needs K >= 1")
        if self.pilots is not None:
            object.__setattr__(self, "pilots", tuple(int(i) for i in self.pilots))


@dataclass(frozen=True)
class AttackRealization:
    """One drawn attack sequence with its bookkeeping."""

    kind: str
    a: np.ndarray  # length-tau sequence (zeros for kind == "none")
    eve_pilots: tuple[int, ...] = ()
    phases: np.ndarray | None = None
    hit: bool = False

    def jam_coefficients(self, pilots: PilotSet) -> np.ndarray:
        """Per-pilot leakage mu_n = a^H x_n / tau (CN(0, 1/tau) under PJA)."""
        return (self.a.conj() @ pilots.x) / pilots.tau


def no_attack(tau: int) -> AttackRealization:
    return AttackRealization(kind=KIND_NONE, a=np.zeros(tau, dtype=complex))


def psa_attack(
    pilots: PilotSet,
    cfg: AttackConfig,
    rng: np.random.Generator,
    lu_index: int | None = None,
) -> AttackRealization:
    """Spoofing sequence a = sum over the spoofed subset of e^{j w} x_n / sqrt(K).

    The subset is drawn uniformly from size-K subsets unless fixed in cfg;
    phases are iid uniform on [0, 2pi). ||a||^2 = tau by construction.
    """
    if cfg.kind != KIND_PSA:
        raise ValueError("config is not a PSA attack")
    if cfg.k > pilots.n:
        raise DimensionError(f"K={cfg.k} exceeds pilot count N={pilots.n}")
    if cfg.pilots is not None:
        if len(cfg.pilots) != cfg.k or len(set(cfg.pilots)) != cfg.k:
            raise ValueError("fixed subset must hold K distinct indices")
        if any(not 0 <= p < pilots.n for p in cfg.pilots):
            raise ValueError("fixed subset index outside the pilot set")
        subset = tuple(sorted(cfg.pilots))
    else:
        subset = tuple(sorted(int(i) for i in rng.choice(pilots.n, size=cfg.k, replace=False)))
    omega = np.zeros(cfg.k) if cfg.zero_phases else rng.uniform(0.0, 2.0 * np.pi, size=cfg.k)
    a = (pilots.x[:, list(subset)] * np.exp(1j * omega)).sum(axis=1) / np.sqrt(cfg.k)
    hit = lu_index in subset if lu_index is not None else False
    return AttackRealization(kind=KIND_PSA, a=a, eve_pilots=subset, phases=omega, hit=hit)


def pja_attack(tau: int, rng: np.random.Generator) -> AttackRealization:
    """Jamming sequence a with iid CN(0, 1) entries."""
    if tau < 1:
        raise DimensionError("tau must be >= 1")
    return AttackRealization(kind=KIND_PJA, a=complex_normal(tau, rng))
