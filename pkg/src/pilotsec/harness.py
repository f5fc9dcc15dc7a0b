"""Monte Carlo experiment driver: error-rate and secrecy-rate campaigns.

Experiments are described by a flat config, optionally swept over one
variable.  Every trial draws its random stream from (seed, sweep index,
trial index), so results are bit-identical for a given config regardless
of how trials are scheduled across workers.
"""

from __future__ import annotations

import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .attacks import AttackConfig, AttackRealization, no_attack, pja_attack, psa_attack
from .beamforming import (
    Beamformer,
    DownlinkParams,
    link_rates,
    matched_filter as mf_beam,
    sb_lowcomplexity,
    sb_optimal,
    secrecy_rate,
    zf_pja,
)
from .channel import covariance_from_pas, identity_covariance, pas_from_degrees
from .detection import (
    AttackState,
    Hypothesis,
    ThresholdSpec,
    identify_lu_pja,
    identify_lu_psa,
    gllr_k2,
    llr_k1,
    power_test,
    pja_threshold,
    psa_threshold,
    resolve_unknown_k,
)
from .errors import ConfigError
from .estimation import (
    combine_eve_obs,
    eve_direction_pja,
    lmmse_hl_pja,
    mmse_he_psa_multi,
    mmse_he_psa_single,
    mmse_hl_psa,
    prior_estimate,
)
from .numerics import sample_cn
from .training import (
    GENIE,
    TrainingParams,
    dbm_to_watt,
    generate_pilots,
    matched_filter,
    prescreen,
    synthesize_uplink,
)

DETECTORS = ("llr_k1", "gllr_k2", "power_k2", "distance_psa", "distance_pja", "unknown_k")
DESIGNS = ("optimal", "lowcomplexity", "mf", "mf_conventional", "zf")
CONDITIONS = ("random", "hit", "miss")
ATTACK_KINDS = ("none", "psa", "pja")
SWEEPABLE = ("p_l_dbm", "p_e_dbm", "p_b_dbm", "attack_k", "m", "tau", "n", "eta", "trials")
_INT_FIELDS = {"attack_k", "m", "tau", "n", "trials"}

CSV_HEADER = "sweep_value,edr,edr_ci_lo,edr_ci_hi,mean_rs,mean_rl,mean_re,trials,seed"
TRIALS_HEADER = "trial,sweep_value,correct,state,rs,rl,re"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a campaign needs; defaults give a small spoofing run.

    Powers are in dBm and converted at the boundary; noise variances are
    linear watts.  ``fixed_beta2`` overrides p_e_dbm so that the spoofing
    amplitude ratio stays constant while K sweeps (p_E = beta^2 K p_L for
    spoofing, beta^2 p_L for jamming).  ``pas_*`` give the path list in
    degrees for the correlated channel model; None means identity
    covariance.  ``lambda_c`` is the prescreen level or "genie".
    """

    m: int = 16
    tau: int = 5
    n: int | None = None  # None -> tau
    trials: int = 2000
    seed: int = 20260816
    workers: int = 1
    p_l_dbm: float = 15.0
    p_e_dbm: float = 15.0
    p_b_dbm: float = 20.0
    sigma_t2: float = 1e-3
    sigma_l2: float = 1e-3
    sigma_e2: float = 1e-3
    attack_kind: str = "psa"
    attack_k: int = 1
    attack_condition: str = "random"
    fixed_beta2: float | None = None
    pas_lu: tuple | None = None
    pas_eve: tuple | None = None
    eta: float = 1e-3
    detector: str = "unknown_k"
    lambda_c: float | str = GENIE
    design: str = "optimal"
    clamp_rates: bool = True
    sweep_var: str | None = None
    sweep_grid: tuple = ()
    keep_records: bool = False

    @property
    def n_effective(self) -> int:
        return self.tau if self.n is None else self.n


@dataclass
class TrialRecord:
    trial: int
    sweep_value: float
    correct: bool | None  # None when the scheme makes no pilot decision
    state: str
    rs: float  # raw secrecy rate (nan for pure detection runs)
    rl: float
    re: float


@dataclass
class SweepPoint:
    sweep_value: float
    trials: int
    seed: int
    wrong: int
    decided: int  # trials that produced a pilot decision
    edr: float
    ci_lo: float
    ci_hi: float
    mean_rs: float
    mean_rl: float
    mean_re: float


@dataclass
class Summary:
    kind: str  # "edr" | "secrecy"
    sweep_var: str | None
    points: list
    records: list | None = None


def validate_config(cfg: ExperimentConfig) -> None:
    """Reject configs the pipeline cannot honor; raises ConfigError."""
    n_eff = cfg.n_effective
    if cfg.m < 1 or cfg.tau < 1 or cfg.trials < 1 or cfg.workers < 1:
        raise ConfigError("m, tau, trials, workers must all be >= 1")
    if not 1 <= n_eff <= cfg.tau:
        raise ConfigError(f"n={n_eff} must lie in [1, tau={cfg.tau}]")
    if not 0.0 < cfg.eta < 1.0:
        raise ConfigError("eta must lie strictly inside (0, 1)")
    if min(cfg.sigma_t2, cfg.sigma_l2, cfg.sigma_e2) <= 0.0:
        raise ConfigError("noise powers must be positive")
    if cfg.attack_kind not in ATTACK_KINDS:
        raise ConfigError(f"unknown attack kind {cfg.attack_kind!r}")
    if cfg.detector not in DETECTORS:
        raise ConfigError(f"unknown detector {cfg.detector!r}")
    if cfg.design not in DESIGNS:
        raise ConfigError(f"unknown design {cfg.design!r}")
    if cfg.attack_condition not in CONDITIONS:
        raise ConfigError(f"unknown attack condition {cfg.attack_condition!r}")
    if cfg.fixed_beta2 is not None and cfg.fixed_beta2 <= 0.0:
        raise ConfigError("fixed_beta2 must be positive when given")
    if isinstance(cfg.lambda_c, str) and cfg.lambda_c != GENIE:
        raise ConfigError(f"lambda_c must be a number or {GENIE!r}")
    if not isinstance(cfg.lambda_c, str) and cfg.lambda_c <= 0.0:
        raise ConfigError("numeric lambda_c must be positive")

    if cfg.attack_kind == "psa":
        if not 1 <= cfg.attack_k <= n_eff:
            raise ConfigError(f"attack_k={cfg.attack_k} outside [1, N={n_eff}]")
        if cfg.attack_condition == "miss" and cfg.attack_k > n_eff - 1:
            raise ConfigError("a miss needs at least one unspoofed pilot")

    if cfg.sweep_var is None:
        if cfg.sweep_grid:
            raise ConfigError("sweep_grid given without sweep_var")
    else:
        if cfg.sweep_var not in SWEEPABLE:
            raise ConfigError(f"cannot sweep {cfg.sweep_var!r}; pick from {SWEEPABLE}")
        if not cfg.sweep_grid:
            raise ConfigError("sweep_grid must be nonempty")


def _sweep_items(cfg: ExperimentConfig) -> list:
    """(sweep_value, per-point config) pairs; a single 0-labeled point if no sweep."""
    if cfg.sweep_var is None:
        return [(0.0, cfg)]
    out = []
    for raw in cfg.sweep_grid:
        value = int(raw) if cfg.sweep_var in _INT_FIELDS else float(raw)
        point = replace(cfg, **{cfg.sweep_var: value})
        validate_config(point)
        out.append((float(value), point))
    return out


@dataclass
class _PointAux:
    """Per-sweep-point precomputation shared by all trials."""

    r_l: np.ndarray
    r_e: np.ndarray
    params: TrainingParams
    pilots: object
    dl: DownlinkParams
    eps_psa: float | None
    eps_pja: float | None
    thr: ThresholdSpec | None


def _covariance(m: int, pas_deg) -> np.ndarray:
    if pas_deg is None:
        return identity_covariance(m).r
    return covariance_from_pas(pas_from_degrees(pas_deg), m).r


def training_params(cfg: ExperimentConfig) -> TrainingParams:
    """Training powers in linear units, honoring the fixed-beta override."""
    p_l = dbm_to_watt(cfg.p_l_dbm)
    if cfg.fixed_beta2 is not None:
        k = cfg.attack_k if cfg.attack_kind == "psa" else 1
        p_e = cfg.fixed_beta2 * k * p_l
    else:
        p_e = dbm_to_watt(cfg.p_e_dbm)
    return TrainingParams(tau=cfg.tau, p_l=p_l, p_e=p_e, sigma_t2=cfg.sigma_t2)


def _prepare_point(cfg: ExperimentConfig) -> _PointAux:
    params = training_params(cfg)
    r_l = _covariance(cfg.m, cfg.pas_lu)
    r_e = _covariance(cfg.m, cfg.pas_eve)
    dl = DownlinkParams(dbm_to_watt(cfg.p_b_dbm), cfg.sigma_l2, cfg.sigma_e2)
    eps_psa = eps_pja = None
    thr = None
    if cfg.attack_kind == "pja":
        eps_pja = pja_threshold(cfg.m, params.sigma_z2, cfg.eta).eps
    else:
        thr = psa_threshold(cfg.m, params.sigma_z2, cfg.eta)
        eps_psa = thr.eps
    pilots = generate_pilots(cfg.tau, cfg.n_effective)
    return _PointAux(r_l, r_e, params, pilots, dl, eps_psa, eps_pja, thr)


def _draw_attack(
    cfg: ExperimentConfig, pilots, lu: int, rng: np.random.Generator
) -> AttackRealization:
    if cfg.attack_kind == "none":
        return no_attack(cfg.tau)
    if cfg.attack_kind == "pja":
        return pja_attack(cfg.tau, rng)
    n = pilots.n
    k = cfg.attack_k
    subset = None
    if cfg.attack_condition != "random":
        others = [i for i in range(n) if i != lu]
        if cfg.attack_condition == "hit":
            extra = rng.choice(others, size=k - 1, replace=False) if k > 1 else []
            subset = tuple(sorted({lu, *(int(i) for i in extra)}))
        else:
            subset = tuple(sorted(int(i) for i in rng.choice(others, size=k, replace=False)))
    acfg = AttackConfig(kind="psa", k=k, pilots=subset)
    return psa_attack(pilots, acfg, rng, lu_index=lu)


def _synthesize(cfg, aux, lu, rng):
    """One full uplink draw: channels, attack, frame, matched filter."""
    realization = _draw_attack(cfg, aux.pilots, lu, rng)
    h_l = sample_cn(aux.r_l, rng)
    h_e = sample_cn(aux.r_e, rng)
    y_u = synthesize_uplink(aux.pilots, lu, h_l, h_e, realization.a, aux.params, rng)
    obs = matched_filter(y_u, aux.pilots, aux.params)
    obs.lu_index = lu
    obs.attack_kind = realization.kind
    obs.eve_pilots = realization.eve_pilots or None
    obs.phases = realization.phases
    obs.hit = realization.hit
    return realization, h_l, h_e, obs


def _edr_trial(cfg, aux, trial, sweep_value, rng) -> TrialRecord:
    lu = int(rng.integers(cfg.n_effective))
    _, _, _, obs = _synthesize(cfg, aux, lu, rng)
    det = cfg.detector
    state = ""
    if det in ("llr_k1", "gllr_k2", "power_k2"):
        idx = prescreen(obs, cfg.lambda_c)
        if len(idx) != 2:
            raise ArithmeticError(f"pair test expected 2 survivors, got {len(idx)}")
        y1, y2 = obs.y[idx[0]], obs.y[idx[1]]
        if det == "llr_k1":
            hyp = llr_k1(y1, y2, aux.r_l, aux.r_e, aux.params)
        elif det == "gllr_k2":
            hyp = gllr_k2(y1, y2, aux.r_l, aux.r_e, aux.params)
        else:
            hyp = power_test(y1, y2)
        picked = idx[0] if hyp is Hypothesis.H0 else idx[1]
        state = "pair"
    elif det == "distance_psa":
        idx = prescreen(obs, cfg.lambda_c)
        outcome = identify_lu_psa(obs, idx, aux.eps_psa)
        picked = outcome.lu_index
        state = "ring_fallback" if outcome.fallback_used else "ring"
    elif det == "distance_pja":
        outcome = identify_lu_pja(obs, aux.eps_pja)
        picked = outcome.lu_index
        state = "scale_fallback" if outcome.fallback_used else "scale"
    else:  # unknown_k
        idx = prescreen(obs, cfg.lambda_c)
        outcome = resolve_unknown_k(obs, idx, aux.r_l, aux.r_e, aux.params, aux.thr)
        picked = outcome.lu_index
        state = outcome.inferred_state.value if outcome.inferred_state else "undecided"
    correct = picked == lu
    return TrialRecord(trial, sweep_value, correct, state, float("nan"), float("nan"), float("nan"))


def _estimates_psa(cfg, aux, obs, survivors, outcome):
    """Channel estimates for both links given the resolved spoofing state."""
    if outcome.lu_index is None:
        return prior_estimate(aux.r_l), prior_estimate(aux.r_e)
    y_hat = obs.y[outcome.lu_index]
    state = outcome.inferred_state
    if state is AttackState.NO_ATTACK:
        est_l = mmse_hl_psa(y_hat, False, 1, aux.r_l, aux.r_e, aux.params)
        return est_l, prior_estimate(aux.r_e)
    eve_rows = [i for i in survivors if i != outcome.lu_index]
    k_hat = outcome.inferred_k if outcome.inferred_k else max(len(eve_rows), 1)
    if state is AttackState.PSA_HIT:
        est_l = mmse_hl_psa(y_hat, True, k_hat, aux.r_l, aux.r_e, aux.params)
        if not eve_rows:
            est_e = mmse_he_psa_single(y_hat, aux.r_l, aux.r_e, aux.params)
        else:
            y_e = combine_eve_obs(obs.y[eve_rows])
            est_e = mmse_he_psa_multi(y_e, len(eve_rows), k_hat, aux.r_e, aux.params)
        return est_l, est_e
    est_l = mmse_hl_psa(y_hat, False, 1, aux.r_l, aux.r_e, aux.params)
    if eve_rows:
        y_e = combine_eve_obs(obs.y[eve_rows])
        est_e = mmse_he_psa_multi(y_e, len(eve_rows), k_hat, aux.r_e, aux.params)
    else:
        est_e = prior_estimate(aux.r_e)
    return est_l, est_e


def _beam_psa(cfg, est_l, est_e, dl) -> Beamformer:
    if cfg.design == "optimal":
        return sb_optimal(est_l, est_e, dl)
    if cfg.design == "lowcomplexity":
        return sb_lowcomplexity(est_l, est_e, dl)
    return mf_beam(est_l)


def _secrecy_trial(cfg, aux, trial, sweep_value, rng) -> TrialRecord:
    lu = int(rng.integers(cfg.n_effective))
    _, h_l, h_e, obs = _synthesize(cfg, aux, lu, rng)

    if cfg.design == "mf_conventional":
        # Legacy receiver: trusts its single observation as attack-free.
        est_l = mmse_hl_psa(obs.y[lu], False, 1, aux.r_l, aux.r_e, aux.params)
        v = mf_beam(est_l)
        correct: bool | None = None
        state = "conventional"
    elif cfg.attack_kind == "pja":
        outcome = identify_lu_pja(obs, aux.eps_pja)
        correct = outcome.lu_index == lu
        state = "pja_fallback" if outcome.fallback_used else "pja"
        est_l = lmmse_hl_pja(obs.y[outcome.lu_index], aux.r_l, aux.r_e, aux.params)
        rest = [i for i in range(obs.n) if i != outcome.lu_index]
        if cfg.design == "zf" and rest:
            dir_e = eve_direction_pja(obs.y[rest].T)
            v = zf_pja(est_l, dir_e, aux.dl)
        else:
            v = mf_beam(est_l)
    else:
        survivors = prescreen(obs, cfg.lambda_c)
        outcome = resolve_unknown_k(obs, survivors, aux.r_l, aux.r_e, aux.params, aux.thr)
        correct = outcome.lu_index == lu
        state = outcome.inferred_state.value if outcome.inferred_state else "undecided"
        est_l, est_e = _estimates_psa(cfg, aux, obs, survivors, outcome)
        v = _beam_psa(cfg, est_l, est_e, aux.dl)

    rs = secrecy_rate(v, h_l, h_e, aux.dl)
    rl, re = link_rates(v, h_l, h_e, aux.dl)
    return TrialRecord(trial, sweep_value, correct, state, rs, rl, re)


def _run_block(args) -> list:
    """Worker entry: run trials [start, stop) of one sweep point."""
    cfg, kind, sweep_index, sweep_value, start, stop = args
    aux = _prepare_point(cfg)
    trial_fn = _edr_trial if kind == "edr" else _secrecy_trial
    out = []
    for t in range(start, stop):
        rng = np.random.default_rng([cfg.seed, sweep_index, t])
        out.append(trial_fn(cfg, aux, t, sweep_value, rng))
    return out


def _map_trials(cfg, kind, sweep_index, sweep_value) -> list:
    if cfg.workers == 1:
        return _run_block((cfg, kind, sweep_index, sweep_value, 0, cfg.trials))
    bounds = np.linspace(0, cfg.trials, cfg.workers + 1).astype(int)
    blocks = [
        (cfg, kind, sweep_index, sweep_value, int(lo), int(hi))
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(_run_block, blocks))
    return [rec for part in parts for rec in part]


def _effective_rs(rec: TrialRecord, clamp: bool) -> float:
    if rec.correct is False:
        return 0.0  # a wrong pilot decision forfeits the secrecy of the slot
    rs = rec.rs
    return max(0.0, rs) if clamp else rs


def _aggregate(cfg, sweep_value, records, kind) -> SweepPoint:
    decided = [r for r in records if r.correct is not None]
    wrong = sum(1 for r in decided if not r.correct)
    if decided:
        edr = wrong / len(decided)
        se = float(np.sqrt(edr * (1.0 - edr) / len(decided)))
        ci_lo, ci_hi = max(0.0, edr - 1.96 * se), min(1.0, edr + 1.96 * se)
    else:
        edr = ci_lo = ci_hi = float("nan")
    if kind == "secrecy":
        mean_rs = float(np.mean([_effective_rs(r, cfg.clamp_rates) for r in records]))
        mean_rl = float(np.mean([r.rl for r in records]))
        mean_re = float(np.mean([r.re for r in records]))
    else:
        mean_rs = mean_rl = mean_re = float("nan")
    return SweepPoint(
        sweep_value, cfg.trials, cfg.seed, wrong, len(decided),
        edr, ci_lo, ci_hi, mean_rs, mean_rl, mean_re,
    )


def _validate_for_kind(cfg: ExperimentConfig, kind: str) -> None:
    """Checks that only apply to one campaign kind (detector vs design use)."""
    n_eff = cfg.n_effective
    if kind == "edr":
        det = cfg.detector
        pair = det in ("llr_k1", "gllr_k2", "power_k2")
        if pair and cfg.lambda_c != GENIE:
            raise ConfigError("pair-test detectors need the genie prescreen")
        if det == "llr_k1" and not (
            cfg.attack_kind == "psa" and cfg.attack_k == 1 and cfg.attack_condition == "miss"
        ):
            raise ConfigError("llr_k1 measures the one-pilot-miss state: psa, k=1, miss")
        if det in ("gllr_k2", "power_k2") and not (
            cfg.attack_kind == "psa" and cfg.attack_k == 2 and cfg.attack_condition == "hit"
        ):
            raise ConfigError(f"{det} measures the two-pilot-hit state: psa, k=2, hit")
        if det == "distance_psa":
            if cfg.attack_kind != "psa":
                raise ConfigError("distance_psa needs a spoofing attack")
            floor = cfg.attack_k + 1 if cfg.attack_condition == "miss" else cfg.attack_k
            if floor < 3:
                raise ConfigError("ring identification needs at least 3 survivors")
        if det == "distance_pja":
            if cfg.attack_kind != "pja":
                raise ConfigError("distance_pja needs a jamming attack")
            if n_eff < 3:
                raise ConfigError("jamming identification needs N >= 3")
        if det == "unknown_k" and cfg.attack_kind == "pja":
            raise ConfigError("unknown_k resolves spoofing states, not jamming")
        return
    if cfg.design == "zf" and cfg.attack_kind != "pja":
        raise ConfigError("zero-forcing is the jamming countermeasure; use attack_kind=pja")
    if cfg.attack_kind == "pja":
        if cfg.design in ("optimal", "lowcomplexity"):
            raise ConfigError(
                "jamming yields a direction-only Eve estimate; use design zf, mf,"
                " or mf_conventional"
            )
        if cfg.design != "mf_conventional" and n_eff < 3:
            raise ConfigError("the jamming pipeline needs N >= 3 observations")


def _run(cfg: ExperimentConfig, kind: str) -> Summary:
    validate_config(cfg)
    # Kind-specific checks run per sweep point: a sweep may rewrite the very
    # field (say attack_k) that the base config would fail on.
    points = []
    all_records: list = []
    for sweep_index, (sweep_value, point_cfg) in enumerate(_sweep_items(cfg)):
        _validate_for_kind(point_cfg, kind)
        records = _map_trials(point_cfg, kind, sweep_index, sweep_value)
        points.append(_aggregate(point_cfg, sweep_value, records, kind))
        if cfg.keep_records:
            all_records.extend(records)
    points.sort(key=lambda p: p.sweep_value)
    return Summary(kind, cfg.sweep_var, points, all_records if cfg.keep_records else None)


def run_edr_trials(cfg: ExperimentConfig) -> Summary:
    """Monte Carlo error-decision rate of the configured detector."""
    return _run(cfg, "edr")


def run_secrecy_trials(cfg: ExperimentConfig) -> Summary:
    """Full detect-estimate-beamform pipeline, scoring downlink rates."""
    return _run(cfg, "secrecy")


def _fmt(x: float) -> str:
    return "%.12g" % x


def emit_results(summary: Summary, path: str, fmt: str = "csv") -> None:
    """Write the per-sweep-point summary as CSV ('-' for stdout)."""
    if fmt != "csv":
        raise ConfigError(f"unsupported output format {fmt!r}")
    lines = [CSV_HEADER]
    for p in sorted(summary.points, key=lambda q: q.sweep_value):
        lines.append(
            ",".join(
                [
                    _fmt(p.sweep_value),
                    _fmt(p.edr),
                    _fmt(p.ci_lo),
                    _fmt(p.ci_hi),
                    _fmt(p.mean_rs),
                    _fmt(p.mean_rl),
                    _fmt(p.mean_re),
                    str(p.trials),
                    str(p.seed),
                ]
            )
        )
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def emit_trials(summary: Summary, path: str) -> None:
    """Per-trial dump; requires the campaign to have kept its records."""
    if summary.records is None:
        raise ConfigError("per-trial dump needs keep_records=True in the config")
    lines = [TRIALS_HEADER]
    for r in summary.records:
        correct = "" if r.correct is None else str(int(r.correct))
        lines.append(
            ",".join(
                [
                    str(r.trial),
                    _fmt(r.sweep_value),
                    correct,
                    r.state,
                    _fmt(r.rs),
                    _fmt(r.rl),
                    _fmt(r.re),
                ]
            )
        )
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
