"""
What spoofing and jamming do to the matched-filter rows
=======================================================

The user trains on one random pilot out of N. A spoofer picks K pilots and
sends their phase-rotated sum; a jammer sends wideband noise that smears
into every row. The matched filter turns the received frame into one row
per pilot, and the attack's footprint is visible in the row energies.
"""

import numpy as np

from pilotsec.attacks import AttackConfig, no_attack, pja_attack, psa_attack
from pilotsec.numerics import sample_cn
from pilotsec.training import TrainingParams, generate_pilots, matched_filter, synthesize_uplink

rng = np.random.default_rng(7)
m, tau = 8, 8
pilots = generate_pilots(tau, tau)
params = TrainingParams(tau, p_l=0.0316, p_e=0.1, sigma_t2=1e-3)
r = np.eye(m, dtype=complex)
h_l, h_e = sample_cn(r, rng), sample_cn(r, rng)
lu = 2

print(f"user trains pilot {lu}; row energies after matched filtering")

print("\nno attack: only the user's row rises above the noise floor")
obs = matched_filter(synthesize_uplink(pilots, lu, h_l, h_e, no_attack(tau).a, params, rng), pilots, params)
print("  " + " ".join(f"{e:6.2f}" for e in np.sum(np.abs(obs.y) ** 2, axis=1)))

print("\nspoofing, K=3 miss: three extra rows carry the spoofed channel")
cfg = AttackConfig(kind="psa", k=3, pilots=(4, 5, 6))
real = psa_attack(pilots, cfg, rng, lu_index=lu)
obs = matched_filter(synthesize_uplink(pilots, lu, h_l, h_e, real.a, params, rng), pilots, params)
print("  " + " ".join(f"{e:6.2f}" for e in np.sum(np.abs(obs.y) ** 2, axis=1)))
print(f"  spoofed pilots {real.eve_pilots}, hit={real.hit}")
mu = real.jam_coefficients(pilots)
print("  per-pilot coupling |mu|: " + " ".join(f"{abs(c):5.3f}" for c in mu)
      + f"  (1/sqrt(K) = {1/np.sqrt(3):.3f} on the chosen set)")

print("\nspoofing, K=1 hit on the user's own pilot: the rows merge")
cfg = AttackConfig(kind="psa", k=1, pilots=(lu,))
real = psa_attack(pilots, cfg, rng, lu_index=lu)
obs = matched_filter(synthesize_uplink(pilots, lu, h_l, h_e, real.a, params, rng), pilots, params)
print("  " + " ".join(f"{e:6.2f}" for e in np.sum(np.abs(obs.y) ** 2, axis=1)))

print("\njamming: random coupling into every row, none of them clean")
real = pja_attack(tau, rng)
obs = matched_filter(synthesize_uplink(pilots, lu, h_l, h_e, real.a, params, rng), pilots, params)
print("  " + " ".join(f"{e:6.2f}" for e in np.sum(np.abs(obs.y) ** 2, axis=1)))
mu = real.jam_coefficients(pilots)
print("  coupling magnitudes: " + " ".join(f"{abs(c):5.3f}" for c in mu))
