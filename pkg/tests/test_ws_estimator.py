import math

import numpy as np
import pytest

from qfuncest.function_model import (GridFunction, SmoothnessClass, mspe, sample_gaussian_process,
                                     sample_target)
from qfuncest.probe_sim import ProbeBudget
from qfuncest.ws_estimator import (WavefunctionState, default_cutoff, grid_overlap, output_state,
                                   overlap, project_low_wavenumber, readout_phase, simulate_tomography,
                                   triangle_slack, ws_estimate, ws_kitaev_plan)

CAP = np.pi / 3


def in_class(seed, q=1.0, M=2 * np.pi, G=1025, cap=None):
    return sample_target(SmoothnessClass(q, M), G, cap, seed=seed)


# states

def test_flat_phase_state():
    s = output_state(GridFunction(np.zeros(65)), 1)
    expected = np.zeros(s.k.size)
    expected[s.k_max] = 1 / math.sqrt(2)
    assert np.allclose(s.amp_vacuum, expected, atol=1e-15)
    assert np.allclose(s.amp_excited, expected, atol=1e-15)


@pytest.mark.parametrize("n_p", [1, 3])
def test_output_state_norm(n_p):
    f = in_class(0)
    assert output_state(f, n_p).norm_sq() == pytest.approx(1.0, abs=1e-12)
    g = in_class(0, G=1024)
    assert output_state(g, n_p, K_max=511).norm_sq() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        output_state(g, n_p, K_max=512)


def test_state_overlap_matches_grid_overlap():
    for s in range(5):
        a, b = in_class(s), in_class(100 + s)
        for n_p in (1, 2, 5):
            via_states = abs(overlap(output_state(a, n_p), output_state(b, n_p)))
            assert via_states == pytest.approx(grid_overlap(a, b, n_p), abs=1e-12)


def test_state_shape_validation():
    with pytest.raises(ValueError):
        WavefunctionState(np.zeros(4), np.zeros(4))
    with pytest.raises(ValueError):
        WavefunctionState(np.zeros(3), np.zeros(5))


# postselection

def test_projection_of_flat_phase_is_lossless():
    s = output_state(GridFunction(np.zeros(129)), 1)
    for K in (0, 3, 64):
        post, d = project_low_wavenumber(s, K)
        assert d == 0.0
        assert abs(overlap(s, post)) == pytest.approx(1.0, abs=1e-15)


def test_projection_monotone_in_cutoff():
    s = output_state(in_class(3), 2)
    d = [project_low_wavenumber(s, K)[1] for K in range(0, 200, 7)]
    assert all(b <= a + 1e-15 for a, b in zip(d, d[1:]))


def test_projection_rejects_orthogonal_state():
    vac = np.zeros(21, dtype=complex)
    exc = np.zeros(21, dtype=complex)
    exc[-1] = 1.0
    with pytest.raises(ValueError):
        project_low_wavenumber(WavefunctionState(vac, exc), 3)
    with pytest.raises(ValueError):
        project_low_wavenumber(WavefunctionState(vac, exc), 11)


@pytest.mark.parametrize("q", [0.5, 1.0])
def test_postselection_error_rate(q):
    # spectra with E|phi_k|^2 ~ k^-(2q+1) sit at the edge of the order-q class
    Ks = np.array([4, 8, 16, 32, 64, 128])
    d = np.zeros(Ks.size)
    for s in range(20):
        f = sample_gaussian_process(2 * q + 1, 0.1, 4097, seed=s, k_max=1024)
        st = output_state(f, 1)
        d += [project_low_wavenumber(st, int(K))[1] for K in Ks]
    slope = np.polyfit(np.log(Ks), np.log(d), 1)[0]
    assert slope == pytest.approx(-2 * q, abs=0.3)


# tomography

def test_tomography_preconditions_and_determinism():
    post, _ = project_low_wavenumber(output_state(in_class(1, cap=CAP), 1), 8)
    with pytest.raises(ValueError):
        simulate_tomography(post, 8, 8 * 17 - 1, seed=0)
    a = simulate_tomography(post, 8, 5000, seed=4)
    b = simulate_tomography(post, 8, 5000, seed=4)
    assert np.array_equal(a.amp_excited, b.amp_excited)
    assert a.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_tomography_converges_with_copies():
    post, _ = project_low_wavenumber(output_state(in_class(2, cap=CAP), 1), 6)
    infid = [np.mean([1 - abs(overlap(post, simulate_tomography(post, 6, n, seed=s))) ** 2 for s in range(20)])
             for n in (10 ** 3, 10 ** 5, 10 ** 7)]
    assert infid[0] > infid[1] > infid[2]
    assert infid[2] < 1e-5


def test_tomography_infidelity_is_linear_in_cutoff_over_copies():
    f = in_class(5, cap=CAP, G=1025)
    st = output_state(f, 1)
    n_c = 40_000
    C = []
    for K in (4, 8, 16, 32, 64):
        post, _ = project_low_wavenumber(st, K)
        infid = np.mean([1 - abs(overlap(post, simulate_tomography(post, K, n_c, seed=[K, s]))) ** 2
                         for s in range(40)])
        C.append(infid * n_c / K)
    assert max(C) / min(C) < 2.0


def test_readout_recovers_phase_of_exact_state():
    f = in_class(6, cap=CAP)
    th = readout_phase(output_state(f, 1), f.grid_size)
    assert mspe(GridFunction(th), f) < 1e-20


def test_readout_fills_small_amplitude_points():
    G = 64
    psi = np.ones(G, dtype=complex) * np.exp(1j * 0.5)
    psi[10] = 1e-6
    c = np.fft.fft(psi) / G
    k = np.arange(-31, 32)
    st = WavefunctionState(np.where(k == 0, 1.0, 0.0), c[k % G])
    th = readout_phase(st, G)
    assert th[10] == pytest.approx(0.5)


# chain inequalities

def test_state_triangle_inequality():
    rng = np.random.default_rng(0)
    worst = np.inf
    for _ in range(1000):
        d = int(rng.integers(2, 12))
        v = rng.normal(size=(3, d)) + 1j * rng.normal(size=(3, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        worst = min(worst, triangle_slack(*v))
    assert worst >= -1e-10


def test_lipschitz_inheritance():
    # |e^{ia} - e^{ib}| <= |a - b|, so psi = e^{i phi}/sqrt(2) keeps the class with budget M^2/2
    G = 1024
    for s in range(100):
        q = [0.5, 0.75, 1.0][s % 3]
        cls = SmoothnessClass(q, 2 * np.pi)
        f = sample_target(cls, G, seed=s)
        psi = np.exp(1j * f.values) / math.sqrt(2)
        h = 1.0 / G
        worst = max(np.mean(np.abs(np.roll(psi, -a) - psi) ** 2) / (a * h) ** (2 * q)
                    for a in range(1, int(cls.a * G) + 1))
        assert worst <= cls.M ** 2 / 2


def test_trial_chain_holds_in_sql():
    cls = SmoothnessClass(1.0, 2 * np.pi)
    for s in range(20):
        f = in_class(s, G=1024, cap=CAP)
        rec = ws_estimate(f, ProbeBudget(2 ** 14, n_c=2 ** 14, accounting="WS"), cls, seed=s)
        assert rec.info["chain_slack"] >= -1e-10
        assert rec.mspe <= rec.info["middle_term"] + 1e-12
        assert rec.mspe <= rec.err_a_sq + rec.err_b_sq + 1e-10


def test_first_inequality_on_average_in_heisenberg():
    cls = SmoothnessClass(1.0, 2 * np.pi)
    eff, mid = [], []
    for s in range(10):
        f = in_class(s, G=1024)
        rec = ws_estimate(f, ProbeBudget(2 ** 17, n_c=2 ** 17, accounting="WS"), cls, seed=s,
                          regime="Heisenberg")
        assert rec.info["n_p"] > 1
        assert rec.particles_used <= 2 ** 17
        assert rec.info["chain_slack"] >= -1e-10
        eff.append(rec.info["effective_mspe"])
        mid.append(rec.info["middle_term"])
    assert np.mean(eff) <= np.mean(mid)


# estimator

def test_zero_target_only_sees_tomography_noise():
    cls = SmoothnessClass(1.0, 2 * np.pi)
    zero = GridFunction(np.zeros(1024))
    means = []
    for n_c in (2 ** 12, 2 ** 16):
        recs = [ws_estimate(zero, ProbeBudget(n_c, n_c=n_c, accounting="WS"), cls, seed=s, K=8)
                for s in range(20)]
        for rec in recs:
            assert rec.err_a_sq == 0.0
            assert rec.mspe <= rec.err_b_sq + 1e-12
            assert rec.particles_used == n_c
        means.append(np.mean([r.mspe for r in recs]))
    # sixteen times the copies: error down by about sixteen
    assert 8 < means[0] / means[1] < 32


def test_refuses_smooth_classes():
    with pytest.raises(ValueError, match="q <= 1"):
        ws_estimate(GridFunction(np.zeros(64)), ProbeBudget(1024, n_c=1024, accounting="WS"),
                    SmoothnessClass(2.0, 1.0))


def test_ws_estimate_deterministic():
    cls = SmoothnessClass(1.0, 2 * np.pi)
    f = in_class(9, G=1024, cap=CAP)
    b = ProbeBudget(5000, n_c=5000, accounting="WS")
    assert ws_estimate(f, b, cls, seed=3).row() == ws_estimate(f, b, cls, seed=3).row()


def test_default_cutoff_and_plan():
    cls = SmoothnessClass(1.0, 1.0)
    assert default_cutoff(cls, 1000) == 10
    assert default_cutoff(cls, 64) == 1
    plan = ws_kitaev_plan(2 ** 20, SmoothnessClass(1.0, 2 * np.pi))
    assert plan.particles <= 2 ** 20
    assert plan.n_copy >= 16 * (2 * plan.K + 1)
    assert ws_kitaev_plan(100, SmoothnessClass(1.0, 2 * np.pi)) is None


def test_tiny_budget_is_flagged_not_raised():
    cls = SmoothnessClass(1.0, 2 * np.pi)
    rec = ws_estimate(in_class(0, G=256, cap=CAP), ProbeBudget(20, n_c=20, accounting="WS"), cls, seed=0)
    assert "precondition" in rec.flags
