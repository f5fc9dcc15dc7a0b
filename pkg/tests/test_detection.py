"""Tests for pair tests, distance rules, thresholds, and the unknown-K resolver."""

import numpy as np
import pytest

from pilotsec.analysis import edr12_analytic, pf_pja_bound, pf_psa_bound
from pilotsec.attacks import AttackConfig, pja_attack, psa_attack
from pilotsec.channel import covariance_from_pas, pas_from_degrees
from pilotsec.detection import (
    FLAG_EMPTY_SET,
    FLAG_FALLBACK,
    AttackState,
    Hypothesis,
    ThresholdSpec,
    detect_spoof_presence,
    gllr_k2,
    identify_lu_pja,
    identify_lu_psa,
    llr_k1,
    min_phase_distance,
    min_scale_distance,
    pja_threshold,
    power_test,
    psa_threshold,
    resolve_unknown_k,
)
from pilotsec.errors import DimensionError, TooFewObservationsError
from pilotsec.numerics import complex_normal, sample_cn
from pilotsec.training import (
    ObservationSet,
    TrainingParams,
    cov_eve_obs,
    cov_lu_obs,
    dbm_to_watt,
    generate_pilots,
    matched_filter,
    prescreen,
    synthesize_uplink,
)


def identity_params(tau=5, p_l=1.0, p_e=1.0, sigma_t2=1e-3):
    return TrainingParams(tau, p_l, p_e, sigma_t2)


def make_obs(rows, **truth):
    return ObservationSet(y=np.asarray(rows, dtype=complex), **truth)


class TestLlrK1:
    def test_identity_covariance_reduces_to_power_ordering(self):
        # with white covariances the statistic is proportional to
        # ||y1||^2 - ||y2||^2, with the sign set by whether the spoofed
        # observation is louder or quieter than the legitimate one
        m = 3
        eye = np.eye(m, dtype=complex)
        quiet = np.array([0.5, 0.0, 0.0], dtype=complex)
        loud = np.array([2.0, 0.0, 0.0], dtype=complex)
        weak = identity_params(p_e=0.25)  # beta^2 < 1
        assert llr_k1(loud, quiet, eye, eye, weak) is Hypothesis.H0
        assert llr_k1(quiet, loud, eye, eye, weak) is Hypothesis.H1
        strong = identity_params(p_e=4.0)  # beta^2 > 1: spoofed row is louder
        assert llr_k1(loud, quiet, eye, eye, strong) is Hypothesis.H1
        assert llr_k1(quiet, loud, eye, eye, strong) is Hypothesis.H0

    def test_tie_resolves_to_h0(self):
        m = 2
        eye = np.eye(m, dtype=complex)
        z = np.zeros(m, dtype=complex)
        assert llr_k1(z, z, eye, eye, identity_params(p_e=0.5)) is Hypothesis.H0

    def test_antisymmetric_under_swap(self):
        rng = np.random.default_rng(401)
        m = 4
        r_l = covariance_from_pas(pas_from_degrees([(-20.0, 30.0)]), m).r
        r_e = covariance_from_pas(pas_from_degrees([(30.0, 30.0)]), m).r
        params = identity_params(p_e=0.5)
        for _ in range(50):
            y1 = complex_normal((m,), rng)
            y2 = complex_normal((m,), rng)
            d12 = llr_k1(y1, y2, r_l, r_e, params)
            d21 = llr_k1(y2, y1, r_l, r_e, params)
            assert d12 is not d21

    def test_error_rate_matches_analytic(self):
        # Monte Carlo error probability of the pair test against the
        # gamma-series value, truth fixed to H0
        rng = np.random.default_rng(402)
        m = 2
        r_l = np.eye(m, dtype=complex)
        r_e = np.eye(m, dtype=complex)
        params = identity_params(p_e=0.4)
        report = edr12_analytic(r_l, r_e, params)
        n = 20000
        y1 = sample_cn(cov_lu_obs(r_l, params), rng, size=n)
        y2 = sample_cn(cov_eve_obs(r_e, params, 1), rng, size=n)
        errors = sum(
            llr_k1(y1[i], y2[i], r_l, r_e, params) is Hypothesis.H1
            for i in range(n)
        )
        rate = errors / n
        se = np.sqrt(report.value * (1 - report.value) / n)
        assert abs(rate - report.value) <= 4 * se


class TestPowerTest:
    def test_louder_first_observation_wins(self):
        y1 = np.array([2.0, 0.0], dtype=complex)
        y2 = np.array([1.0, 0.0], dtype=complex)
        assert power_test(y1, y2) is Hypothesis.H0
        assert power_test(y2, y1) is Hypothesis.H1

    def test_tie_resolves_to_h0(self):
        y = np.array([1.0, 1.0], dtype=complex)
        assert power_test(y, y) is Hypothesis.H0


class TestGllrK2:
    def test_agrees_with_power_test_at_white_covariances(self):
        # with proportional covariance blocks the phase-maximized statistic
        # collapses to the power ordering; the two rules must coincide
        rng = np.random.default_rng(403)
        m = 3
        eye = np.eye(m, dtype=complex)
        params = identity_params(p_e=2.0)
        for _ in range(200):
            y1 = complex_normal((m,), rng) * rng.uniform(0.2, 2.0)
            y2 = complex_normal((m,), rng) * rng.uniform(0.2, 2.0)
            assert gllr_k2(y1, y2, eye, eye, params) is power_test(y1, y2)

    def test_antisymmetric_under_swap(self):
        rng = np.random.default_rng(404)
        m = 4
        r_l = covariance_from_pas(pas_from_degrees([(-20.0, 30.0)]), m).r
        r_e = covariance_from_pas(pas_from_degrees([(30.0, 30.0)]), m).r
        params = identity_params(p_e=2.0)
        for _ in range(50):
            y1 = complex_normal((m,), rng)
            y2 = complex_normal((m,), rng)
            assert gllr_k2(y1, y2, r_l, r_e, params) is not gllr_k2(
                y2, y1, r_l, r_e, params)

    def test_invariant_to_per_row_phases(self):
        rng = np.random.default_rng(405)
        m = 4
        r_l = covariance_from_pas(pas_from_degrees([(-20.0, 30.0)]), m).r
        r_e = covariance_from_pas(pas_from_degrees([(30.0, 30.0)]), m).r
        params = identity_params(p_e=2.0)
        for _ in range(20):
            y1 = complex_normal((m,), rng)
            y2 = complex_normal((m,), rng)
            base = gllr_k2(y1, y2, r_l, r_e, params)
            rot = gllr_k2(y1 * np.exp(1j * 0.7), y2 * np.exp(-1j * 1.9),
                          r_l, r_e, params)
            assert base is rot


class TestDistances:
    def test_min_phase_distance_closed_form(self):
        rng = np.random.default_rng(406)
        u = complex_normal((5,), rng)
        v = complex_normal((5,), rng)
        expected = (np.linalg.norm(u) ** 2 + np.linalg.norm(v) ** 2
                    - 2 * abs(np.vdot(u, v)))
        assert np.isclose(min_phase_distance(u, v), expected, atol=1e-12)
        # and it really is the minimum of ||u - e^{j phi} v||^2 over phi
        phis = np.linspace(0, 2 * np.pi, 4096, endpoint=False)
        grid = np.min([np.linalg.norm(u - np.exp(1j * p) * v) ** 2 for p in phis])
        assert grid >= expected - 1e-12
        assert np.isclose(grid, expected, atol=1e-4)

    def test_min_phase_distance_zero_on_phase_copies(self):
        rng = np.random.default_rng(407)
        u = complex_normal((4,), rng)
        assert min_phase_distance(u, np.exp(1j * 1.1) * u) < 1e-12
        assert min_phase_distance(u, u) < 1e-14

    def test_min_phase_distance_symmetric_nonnegative(self):
        rng = np.random.default_rng(408)
        u = complex_normal((4,), rng)
        v = complex_normal((4,), rng)
        assert np.isclose(min_phase_distance(u, v), min_phase_distance(v, u))
        assert min_phase_distance(u, v) >= 0.0

    def test_min_scale_distance_is_projection_residual(self):
        rng = np.random.default_rng(409)
        u = complex_normal((5,), rng)
        v = complex_normal((5,), rng)
        # least-squares over a complex scale on v
        alpha = np.vdot(v, u) / np.vdot(v, v)
        expected = np.linalg.norm(u - alpha * v) ** 2
        assert np.isclose(min_scale_distance(u, v), expected, atol=1e-10)

    def test_min_scale_distance_zero_on_scaled_copies(self):
        rng = np.random.default_rng(410)
        u = complex_normal((4,), rng)
        assert min_scale_distance(u, (0.3 - 2.0j) * u) < 1e-12

    def test_min_scale_distance_zero_reference(self):
        u = np.array([1.0, 2.0], dtype=complex)
        assert np.isclose(min_scale_distance(u, np.zeros(2, dtype=complex)), 5.0)

    def test_min_scale_distance_orthogonal(self):
        u = np.array([2.0, 0.0], dtype=complex)
        v = np.array([0.0, 1.0], dtype=complex)
        assert np.isclose(min_scale_distance(u, v), 4.0)


class TestThresholds:
    def test_psa_single_antenna_closed_form(self):
        # M = 1: the pair distance under a common spoof is exponential with
        # mean 2 sigma_z^2, so eps = -2 sigma_z^2 ln(eta)
        sigma_z2 = 0.05
        params_m = 1
        eta = 1e-3
        spec = psa_threshold(params_m, sigma_z2, eta)
        assert np.isclose(spec.eps, -2 * sigma_z2 * np.log(eta), rtol=1e-10)
        assert spec.eta == eta

    def test_psa_threshold_inverts_false_alarm_bound(self):
        for m, eta in ((4, 1e-2), (16, 1e-3), (32, 1e-4)):
            spec = psa_threshold(m, 2e-4, eta)
            assert np.isclose(pf_psa_bound(spec.eps, m, 2e-4), eta, rtol=1e-9)

    def test_pja_threshold_inverts_false_alarm_bound(self):
        for m, eta in ((1, 0.025), (8, 1e-3), (16, 0.025)):
            spec = pja_threshold(m, 3e-4, eta)
            assert np.isclose(pf_pja_bound(spec.eps, m, 3e-4), eta, rtol=1e-8)

    def test_pja_single_antenna_closed_form(self):
        # M = 1 bound: (sigma^2/eps)(1 - e^{-eps/sigma^2}) = eta
        sigma_z2 = 2e-4
        spec = pja_threshold(1, sigma_z2, 0.025)
        lhs = (sigma_z2 / spec.eps) * (1 - np.exp(-spec.eps / sigma_z2))
        assert np.isclose(lhs, 0.025, rtol=1e-8)

    def test_pja_large_threshold_regime(self):
        # when eps >> sigma^2 every gamma term saturates and the bound is
        # sigma^2 M / eps, so eps = sigma^2 M / eta
        sigma_z2 = 1e-4
        spec = pja_threshold(8, sigma_z2, 1e-4)
        assert np.isclose(spec.eps, sigma_z2 * 8 / 1e-4, rtol=1e-9)

    def test_threshold_decreases_with_looser_target(self):
        tight = psa_threshold(16, 1e-4, 1e-4)
        loose = psa_threshold(16, 1e-4, 1e-2)
        assert loose.eps < tight.eps

    def test_threshold_spec_validation(self):
        with pytest.raises(DimensionError):
            ThresholdSpec(eta=0.0, eps=1.0)
        with pytest.raises(DimensionError):
            ThresholdSpec(eta=1.0, eps=1.0)
        with pytest.raises(DimensionError):
            ThresholdSpec(eta=0.5, eps=0.0)


class TestIdentifyLuPsa:
    @staticmethod
    def ring_rows(lu_position, q=4):
        # legitimate row orthogonal to the common spoofed vector; spoofed
        # rows are phase copies of each other
        rows = []
        for i in range(q):
            if i == lu_position:
                rows.append([2.0, 0.0, 0.0, 0.0])
            else:
                phase = np.exp(1j * (0.5 + 0.9 * i))
                rows.append([0.0, 1.5 * phase, 0.0, 0.0])
        return np.asarray(rows, dtype=complex)

    def test_isolates_lu_at_every_position(self):
        for pos in range(4):
            obs = make_obs(self.ring_rows(pos))
            out = identify_lu_psa(obs, range(4), eps=1.0)
            assert out.lu_index == pos
            assert not out.fallback_used

    def test_survivor_indices_map_back_to_original_numbering(self):
        y = np.zeros((6, 4), dtype=complex)
        y[1] = [0.0, 1.5 * np.exp(0.3j), 0.0, 0.0]
        y[2] = [2.0, 0.0, 0.0, 0.0]
        y[4] = [0.0, 1.5 * np.exp(1.4j), 0.0, 0.0]
        out = identify_lu_psa(make_obs(y), (4, 1, 2), eps=1.0)
        assert out.lu_index == 2

    def test_all_phase_copies_falls_back(self):
        base = np.array([1.0, 1.0j, 0.0], dtype=complex)
        rows = [base * np.exp(1j * k) for k in range(4)]
        out = identify_lu_psa(make_obs(rows), range(4), eps=0.5)
        assert out.fallback_used
        assert out.lu_index in range(4)

    def test_too_few_observations(self):
        obs = make_obs(np.ones((2, 3)))
        with pytest.raises(TooFewObservationsError):
            identify_lu_psa(obs, (0, 1), eps=1.0)

    def test_synthesized_spoof_identification_accuracy(self):
        rng = np.random.default_rng(411)
        tau = m = 8
        params = TrainingParams(tau, dbm_to_watt(15.0), dbm_to_watt(25.0), 1e-3)
        pilots = generate_pilots(tau, tau)
        spec = psa_threshold(m, params.sigma_z2, 1e-3)
        correct = 0
        for _ in range(200):
            h_l = complex_normal((m,), rng)
            h_e = complex_normal((m,), rng)
            lu = int(rng.integers(tau))
            cfg = AttackConfig(kind="psa", k=2)
            attack = psa_attack(pilots, cfg, rng, lu_index=lu)
            if attack.hit:
                continue
            y_u = synthesize_uplink(pilots, lu, h_l, h_e, attack.a, params, rng)
            obs = matched_filter(y_u, pilots, params)
            obs.lu_index = lu
            obs.attack_kind = "psa"
            obs.eve_pilots = attack.eve_pilots
            survivors = prescreen(obs, "genie")
            out = identify_lu_psa(obs, survivors, spec.eps)
            correct += out.lu_index == lu
        assert correct >= 0.9 * 200 * (1 - 2 / 8)  # hits skipped (~2/8 of trials)


class TestIdentifyLuPja:
    def test_deterministic_isolation(self):
        g = np.array([1.0, 1.0j, 0.0], dtype=complex)
        rows = [0.7j * g, [0.0, 0.0, 2.0], -1.3 * g, (0.2 + 0.4j) * g]
        out = identify_lu_pja(make_obs(rows), eps=1.0)
        assert out.lu_index == 1
        assert out.inferred_state is AttackState.PJA
        assert not out.fallback_used

    def test_collinear_rows_fall_back(self):
        g = np.array([1.0, -1.0j], dtype=complex)
        rows = [g, 2.0 * g, -0.5j * g]
        out = identify_lu_pja(make_obs(rows), eps=1e-6)
        assert out.fallback_used

    def test_too_few_observations(self):
        with pytest.raises(TooFewObservationsError):
            identify_lu_pja(make_obs(np.ones((2, 3))), eps=1.0)

    def test_synthesized_jamming_identification_accuracy(self):
        rng = np.random.default_rng(412)
        tau = 5
        m = 16
        params = TrainingParams(tau, dbm_to_watt(15.0), dbm_to_watt(35.0), 1e-3)
        pilots = generate_pilots(tau, tau)
        spec = pja_threshold(m, params.sigma_z2, 0.025)
        correct = 0
        for _ in range(200):
            h_l = complex_normal((m,), rng)
            h_e = complex_normal((m,), rng)
            lu = int(rng.integers(tau))
            attack = pja_attack(tau, rng)
            y_u = synthesize_uplink(pilots, lu, h_l, h_e, attack.a, params, rng)
            obs = matched_filter(y_u, pilots, params)
            out = identify_lu_pja(obs, spec.eps)
            correct += out.lu_index == lu
        assert correct >= 185


class TestDetectSpoofPresence:
    def test_zero_spoof_power_ties_to_no_attack(self):
        # p_E = 0 makes the two densities identical, and ties go to clean
        m = 4
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 0.0, 1e-3)
        y = np.array([3.0, 1.0, 0.0, 2.0j], dtype=complex)
        assert detect_spoof_presence(y, eye, eye, params) is AttackState.NO_ATTACK

    def test_zero_observation_prefers_clean(self):
        m = 3
        eye = np.eye(m, dtype=complex)
        params = identity_params(p_e=4.0)
        y = np.zeros(m, dtype=complex)
        assert detect_spoof_presence(y, eye, eye, params) is AttackState.NO_ATTACK

    def test_statistical_separation(self):
        rng = np.random.default_rng(413)
        m = 8
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, dbm_to_watt(15.0), dbm_to_watt(25.0), 1e-3)
        beta = np.sqrt(params.beta2_psa(1))
        sz = np.sqrt(params.sigma_z2)
        hit_calls = clean_calls = 0
        n = 300
        for _ in range(n):
            h_l = complex_normal((m,), rng)
            h_e = complex_normal((m,), rng)
            z = sz * complex_normal((m,), rng)
            y_hit = h_l + beta * np.exp(1j * rng.uniform(0, 2 * np.pi)) * h_e + z
            y_clean = h_l + z
            hit_calls += detect_spoof_presence(y_hit, eye, eye, params) is AttackState.PSA_HIT
            clean_calls += detect_spoof_presence(y_clean, eye, eye, params) is AttackState.NO_ATTACK
        assert hit_calls >= 0.9 * n
        assert clean_calls >= 0.9 * n


class TestResolveUnknownK:
    @staticmethod
    def spec():
        return ThresholdSpec(eta=0.5, eps=1.0)

    def test_empty_survivor_set(self):
        obs = make_obs(np.ones((3, 2)))
        out = resolve_unknown_k(obs, (), np.eye(2, dtype=complex),
                                np.eye(2, dtype=complex),
                                identity_params(), self.spec())
        assert out.lu_index is None
        assert out.inferred_state is None
        assert FLAG_EMPTY_SET in out.flags

    def test_single_survivor_clean_versus_hit(self):
        # beta^2 = 10 at near-zero noise: the density comparison reduces to
        # ||y||^2 against M ln(11) (1 + 1/10); norm 1 stays clean, norm 16 flips
        m = 4
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 10.0, 1e-9)
        y = np.zeros((3, m), dtype=complex)
        y[1, 0] = 1.0
        out = resolve_unknown_k(make_obs(y), (1,), eye, eye, params, self.spec())
        assert out.inferred_state is AttackState.NO_ATTACK
        assert out.inferred_k == 0
        assert out.lu_index == 1
        y[1, 0] = 4.0
        out = resolve_unknown_k(make_obs(y), (1,), eye, eye, params, self.spec())
        assert out.inferred_state is AttackState.PSA_HIT
        assert out.inferred_k == 1

    def test_two_survivors_statistical_miss(self):
        # truth: one clean row, one weak Eve-only row. The pilot pick is
        # near-perfect; the state call leaks toward the hit explanation a
        # bounded fraction of the time because its phase is maximized out
        rng = np.random.default_rng(414)
        m = 8
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 0.1, 1e-3)
        sz = np.sqrt(params.sigma_z2)
        beta = np.sqrt(params.beta2_psa(1))
        lu_good = miss_calls = 0
        n = 300
        for _ in range(n):
            y = np.zeros((4, m), dtype=complex)
            y[1] = complex_normal((m,), rng) + sz * complex_normal((m,), rng)
            y[3] = (beta * np.exp(1j * rng.uniform(0, 2 * np.pi))
                    * complex_normal((m,), rng) + sz * complex_normal((m,), rng))
            out = resolve_unknown_k(make_obs(y), (1, 3), eye, eye, params,
                                    self.spec())
            lu_good += out.lu_index == 1
            miss_calls += (out.inferred_state is AttackState.PSA_MISS
                           and out.inferred_k == 1)
        assert lu_good >= 0.95 * n
        assert miss_calls >= 0.6 * n

    def test_two_survivors_statistical_hit(self):
        # truth: a two-pilot hit. The state call is essentially always
        # right; the pilot pick errs at the pair-test error rate, which at
        # beta^2 = 4 stays well under 20%
        rng = np.random.default_rng(415)
        m = 8
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 8.0, 1e-3)
        sz = np.sqrt(params.sigma_z2)
        beta = np.sqrt(params.beta2_psa(2))
        state_good = lu_good = 0
        n = 300
        for _ in range(n):
            h_l = complex_normal((m,), rng)
            h_e = complex_normal((m,), rng)
            w1, w2 = rng.uniform(0, 2 * np.pi, size=2)
            y = np.zeros((4, m), dtype=complex)
            y[0] = (h_l + beta * np.exp(1j * w1) * h_e
                    + sz * complex_normal((m,), rng))
            y[2] = (beta * np.exp(1j * w2) * h_e
                    + sz * complex_normal((m,), rng))
            out = resolve_unknown_k(make_obs(y), (0, 2), eye, eye, params,
                                    self.spec())
            state_good += (out.inferred_state is AttackState.PSA_HIT
                           and out.inferred_k == 2)
            lu_good += out.lu_index == 0
        assert state_good >= 0.95 * n
        assert lu_good >= 0.8 * n

    def test_ring_then_miss_branch(self):
        # five survivors, legitimate row quiet: the ring isolates it and the
        # presence test keeps the clean explanation, so K = Q - 1
        m = 4
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 0.5, 1e-9)  # beta^2(5) = 0.1
        rows = [[1.0, 0.0, 0.0, 0.0]]
        for i in range(4):
            rows.append([0.0, 2.0 * np.exp(1j * (0.4 + 0.8 * i)), 0.0, 0.0])
        out = resolve_unknown_k(make_obs(rows), range(5), eye, eye, params,
                                self.spec())
        assert out.lu_index == 0
        assert out.inferred_state is AttackState.PSA_MISS
        assert out.inferred_k == 4

    def test_ring_then_hit_branch(self):
        # same geometry with a loud legitimate row: the presence test flips
        # to the hit explanation and K = Q
        m = 4
        eye = np.eye(m, dtype=complex)
        params = TrainingParams(5, 1.0, 0.5, 1e-9)
        rows = [[4.0, 0.0, 0.0, 0.0]]
        for i in range(4):
            rows.append([0.0, 2.0 * np.exp(1j * (0.4 + 0.8 * i)), 0.0, 0.0])
        out = resolve_unknown_k(make_obs(rows), range(5), eye, eye, params,
                                self.spec())
        assert out.lu_index == 0
        assert out.inferred_state is AttackState.PSA_HIT
        assert out.inferred_k == 5
