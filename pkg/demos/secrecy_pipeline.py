"""
The full pipeline: detect, estimate, beamform, score
====================================================

One frame end to end first, narrated; then a small campaign comparing the
secure designs against matched filtering and against a conventional
receiver that never randomizes its training.
"""

import numpy as np
from dataclasses import replace

from pilotsec.attacks import AttackConfig, psa_attack
from pilotsec.beamforming import DownlinkParams, link_rates, sb_optimal, secrecy_rate
from pilotsec.detection import psa_threshold, resolve_unknown_k
from pilotsec.estimation import mmse_he_psa_single, mmse_hl_psa
from pilotsec.harness import ExperimentConfig, run_secrecy_trials
from pilotsec.numerics import sample_cn
from pilotsec.training import (
    TrainingParams,
    dbm_to_watt,
    generate_pilots,
    matched_filter,
    prescreen,
    synthesize_uplink,
)

rng = np.random.default_rng(5)
m, tau = 16, 5
params = TrainingParams(tau, dbm_to_watt(15.0), dbm_to_watt(20.0), 1e-3)
pilots = generate_pilots(tau, tau)
r = np.eye(m, dtype=complex)
h_l, h_e = sample_cn(r, rng), sample_cn(r, rng)
lu = 3

print("single frame, spoofer hits the user's pilot (K = 1)")
real = psa_attack(pilots, AttackConfig(kind="psa", k=1, pilots=(lu,)), rng, lu_index=lu)
obs = matched_filter(synthesize_uplink(pilots, lu, h_l, h_e, real.a, params, rng), pilots, params)
obs.lu_index, obs.attack_kind, obs.eve_pilots, obs.hit = lu, "psa", real.eve_pilots, real.hit

survivors = prescreen(obs, "genie")
thr = psa_threshold(m, params.sigma_z2, 1e-3)
outcome = resolve_unknown_k(obs, survivors, r, r, params, thr)
print(f"  survivors {survivors} -> claimed pilot {outcome.lu_index}, "
      f"state {outcome.inferred_state.value}, K = {outcome.inferred_k}")

est_l = mmse_hl_psa(obs.y[outcome.lu_index], True, 1, r, r, params)
est_e = mmse_he_psa_single(obs.y[outcome.lu_index], r, r, params)
dl = DownlinkParams(dbm_to_watt(20.0), 1e-3, 1e-3)
v = sb_optimal(est_l, est_e, dl)
rl, re = link_rates(v, h_l, h_e, dl)
print(f"  secure beam: user rate {rl:.2f} nats, eavesdropper {re:.2f}, "
      f"secrecy {secrecy_rate(v, h_l, h_e, dl):.2f}")

print("\ncampaign: mean secrecy rate vs downlink power, 1000 trials per point")
base = ExperimentConfig(
    m=m, tau=tau, n=tau, trials=1000, seed=42, p_l_dbm=15.0, p_e_dbm=20.0,
    attack_kind="psa", attack_k=1, attack_condition="random",
    detector="unknown_k", design="optimal",
    sweep_var="p_b_dbm", sweep_grid=(10.0, 15.0, 20.0),
)
rows = {
    "optimal": run_secrecy_trials(base).points,
    "lowcomplexity": run_secrecy_trials(replace(base, design="lowcomplexity")).points,
    "mf": run_secrecy_trials(replace(base, design="mf")).points,
    "conventional": run_secrecy_trials(replace(base, n=1, design="mf_conventional")).points,
}
header = "  p_B dBm " + "".join(f"{name:>15}" for name in rows)
print(header)
for i, p_b in enumerate((10.0, 15.0, 20.0)):
    cells = "".join(f"{pts[i].mean_rs:15.3f}" for pts in rows.values())
    print(f"  {p_b:7.1f} {cells}")

print("\nrandomized training with a secure design keeps a positive margin;")
print("the conventional receiver trains where the spoofer always aims.")
