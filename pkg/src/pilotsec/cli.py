"""Command-line front end: experiment campaigns and numeric utilities.

Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures (diverged series, impossible thresholds, singular kernels).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .detection import pja_threshold, psa_threshold
from .errors import ConfigError, PilotsecError
from .harness import (
    ExperimentConfig,
    emit_results,
    emit_trials,
    run_edr_trials,
    run_secrecy_trials,
)
from .quadform import quadform_tail

# Config-file layout: section -> {file key -> ExperimentConfig field}.
_SECTIONS = {
    "run": {
        "m": "m",
        "tau": "tau",
        "n": "n",
        "trials": "trials",
        "seed": "seed",
        "workers": "workers",
        "eta": "eta",
        "keep_records": "keep_records",
    },
    "powers": {
        "p_l_dbm": "p_l_dbm",
        "p_e_dbm": "p_e_dbm",
        "p_b_dbm": "p_b_dbm",
        "sigma_t2": "sigma_t2",
        "sigma_l2": "sigma_l2",
        "sigma_e2": "sigma_e2",
    },
    "attack": {
        "kind": "attack_kind",
        "k": "attack_k",
        "condition": "attack_condition",
        "fixed_beta2": "fixed_beta2",
    },
    "channel": {"pas_lu": "pas_lu", "pas_eve": "pas_eve"},
    "detect": {"detector": "detector", "lambda_c": "lambda_c"},
    "beamform": {"design": "design", "clamp_rates": "clamp_rates"},
    "sweep": {"variable": "sweep_var", "grid": "sweep_grid"},
}

_INT_CONFIG = {"m", "tau", "n", "trials", "seed", "workers", "attack_k"}


def _coerce(field: str, value):
    if field in ("pas_lu", "pas_eve"):
        try:
            return tuple((float(c), float(s)) for c, s in value)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{field} must be a list of [center_deg, spread_deg] pairs") from exc
    if field == "sweep_grid":
        if not isinstance(value, (list, tuple)):
            raise ConfigError("sweep grid must be a list")
        return tuple(float(v) for v in value)
    if field == "lambda_c":
        return value if isinstance(value, str) else float(value)
    if field in _INT_CONFIG:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ConfigError(f"{field} must be an integer")
        return value
    return value


def load_config(path: str) -> ExperimentConfig:
    """Parse a TOML experiment description; unknown sections or keys fail."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    kwargs = {}
    for section, table in data.items():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(table, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in table.items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            field = _SECTIONS[section][key]
            kwargs[field] = _coerce(field, value)
    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _add_campaign_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="TOML experiment description")
    sub.add_argument("--trials", type=int, help="override trial count")
    sub.add_argument("--seed", type=int, help="override base seed")
    sub.add_argument("--workers", type=int, help="override worker count")
    sub.add_argument("--sweep", help="override sweep variable")
    sub.add_argument("--grid", help="override sweep grid, comma-separated values")
    sub.add_argument("--out", default="-", help="summary CSV path ('-' = stdout)")
    sub.add_argument("--dump-trials", help="also write one CSV row per trial here")


def _campaign_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {}
    for name in ("trials", "seed", "workers"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.sweep is not None:
        overrides["sweep_var"] = args.sweep
    if args.grid is not None:
        try:
            overrides["sweep_grid"] = tuple(float(v) for v in args.grid.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad grid {args.grid!r}") from exc
    if args.dump_trials:
        overrides["keep_records"] = True
    return replace(cfg, **overrides) if overrides else cfg


def _cmd_campaign(args: argparse.Namespace, runner) -> int:
    cfg = _campaign_config(args)
    summary = runner(cfg)
    emit_results(summary, args.out)
    if args.dump_trials:
        emit_trials(summary, args.dump_trials)
    return 0


def _cmd_quadform(args: argparse.Namespace) -> int:
    try:
        eigs = [float(v) for v in args.eigenvalues.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad eigenvalue list {args.eigenvalues!r}") from exc
    omega = np.diag(eigs).astype(complex)
    p = quadform_tail(omega, args.t, tol=args.tol)
    print("%.12g" % p)
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    if args.sigma_z2 <= 0:
        raise ConfigError("sigma-z2 must be positive")
    if args.m < 1:
        raise ConfigError("m must be >= 1")
    fn = psa_threshold if args.attack == "psa" else pja_threshold
    spec = fn(args.m, args.sigma_z2, args.eta)
    print("%.12g" % spec.eps)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilotsec",
        description="Randomized pilot training against spoofing and jamming:"
        " Monte Carlo campaigns and analytic utilities.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_edr = sub.add_parser("edr", help="error-decision-rate campaign")
    _add_campaign_args(p_edr)

    p_sec = sub.add_parser("secrecy", help="detect-estimate-beamform campaign")
    _add_campaign_args(p_sec)

    p_qf = sub.add_parser("quadform", help="tail probability of a Hermitian quadratic form")
    p_qf.add_argument("--eigenvalues", required=True, help="comma-separated spectrum")
    p_qf.add_argument("--t", type=float, default=0.0, help="threshold (default 0)")
    p_qf.add_argument("--tol", type=float, default=1e-10, help="series truncation tolerance")

    p_th = sub.add_parser("threshold", help="distance threshold for a false-alarm target")
    p_th.add_argument("--attack", choices=("psa", "pja"), required=True)
    p_th.add_argument("--m", type=int, required=True, help="antenna count")
    p_th.add_argument("--sigma-z2", type=float, required=True, dest="sigma_z2")
    p_th.add_argument("--eta", type=float, required=True, help="false-alarm target")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "edr":
            return _cmd_campaign(args, run_edr_trials)
        if args.command == "secrecy":
            return _cmd_campaign(args, run_secrecy_trials)
        if args.command == "quadform":
            return _cmd_quadform(args)
        return _cmd_threshold(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (PilotsecError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
