import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import ks_2samp

from qfuncest.function_model import TWO_PI, periodic_modulus
from qfuncest.probe_sim import (KitaevConstants, PhaseEstimate, ProbeBudget, _quadrature_readout,
                                circular_median, kitaev_multiscale_estimate, kitaev_particle_count,
                                kitaev_plan, level_repeats, min_copies, noon_estimate,
                                quadrature_phase, ramsey_sql_estimate, unwrap_cascade)
from qfuncest.seeding import substream


def circ_mse(est, truth):
    return float(np.mean(periodic_modulus(np.asarray(est) - truth) ** 2))


# budgets and estimates

def test_probe_budget_accounting():
    b = ProbeBudget(103, 10, 10)
    assert b.site_budgets().sum() == 103
    assert set(b.site_budgets()) == {10, 11}
    with pytest.raises(ValueError):
        ProbeBudget(100, 10, 9)
    with pytest.raises(ValueError):
        ProbeBudget(100, n_p=11, n_c=10, accounting="WS")
    with pytest.raises(ValueError):
        ProbeBudget(0)
    with pytest.raises(ValueError):
        ProbeBudget(10, accounting="XX", n2=10)


def test_phase_estimate_range():
    with pytest.raises(ValueError):
        PhaseEstimate(TWO_PI, TWO_PI, 1)


# ramsey

def test_ramsey_requires_two_particles():
    with pytest.raises(ValueError):
        ramsey_sql_estimate(0.0, 1)


def test_exact_quadratures_give_the_phase():
    assert quadrature_phase(math.cos(np.pi / 4), math.sin(np.pi / 4)) == pytest.approx(np.pi / 4)


def test_ramsey_variance_matches_propagation_oracle():
    # error ~ -sin(r) dc + cos(r) ds with Var dc = sin^2 r / (n/2), Var ds = cos^2 r / (n/2);
    # averaging over the uniform frame angle r gives 2 (3/8 + 3/8) / n = 1.5 / n
    n2 = 1000
    est = [ramsey_sql_estimate(0.0, n2, seed=s).value for s in range(10_000)]
    scaled = circ_mse(est, 0.0) * n2
    assert scaled == pytest.approx(1.5, rel=0.08)


def test_ramsey_equivariance():
    c = 1.234
    a = np.array([ramsey_sql_estimate(0.3, 64, seed=s).value for s in range(1000)])
    b = np.array([ramsey_sql_estimate(0.3 + c, 64, seed=s).value for s in range(1000)])
    err_a = np.array([(x - 0.3 + np.pi) % TWO_PI - np.pi for x in a])
    err_b = np.array([(x - 0.3 - c + np.pi) % TWO_PI - np.pi for x in b])
    assert ks_2samp(err_a, err_b).pvalue > 0.01


def test_ramsey_mse_slope():
    ns = 2 ** np.arange(4, 15)
    mse = []
    for n in ns:
        rng = np.random.default_rng(int(n))
        est = _quadrature_readout(0.7, int(n), rng, size=(2000,))
        mse.append(circ_mse(est, 0.7))
    slope = np.polyfit(np.log(ns), np.log(mse), 1)[0]
    assert slope == pytest.approx(-1.0, abs=0.1)


# noon

def test_noon_reduces_to_ramsey_bit_identically():
    for s in range(50):
        a = ramsey_sql_estimate(1.1, 40, seed=s)
        b = noon_estimate(1.1, 1, 40, seed=s)
        assert a.value == b.value
        assert a.modulo == b.modulo


def test_noon_modulo_and_particles():
    e = noon_estimate(2.0, 5, 10, seed=1)
    assert e.modulo == pytest.approx(TWO_PI / 5)
    assert 0 <= e.value < e.modulo
    assert e.particles_used == 50
    with pytest.raises(ValueError):
        noon_estimate(0.0, 2, 1)


@pytest.mark.parametrize("n_p", [1, 4, 16])
def test_noon_variance_scales_as_inverse_np_squared(n_p):
    n_c = 200
    est = [noon_estimate(0.0, n_p, n_c, seed=s).value for s in range(3000)]
    err = periodic_modulus(np.array(est) * n_p) / n_p  # distance in phi units, within the modulo cell
    assert np.mean(err ** 2) * n_p ** 2 * n_c == pytest.approx(1.5, rel=0.12)


# circular median and cascade

def test_circular_median_basic():
    assert circular_median(np.array([0.1, 0.2, 6.2])) == pytest.approx(0.1)
    x = np.array([[0.0, 1.0], [0.1, 1.1], [3.0, 1.2]])
    assert np.allclose(circular_median(x, axis=0), [0.1, 1.1])


@settings(max_examples=50, deadline=None)
@given(st.floats(0, TWO_PI, exclude_max=True), st.integers(0, 8))
def test_unwrap_cascade_exact_levels(phi, n0):
    phases = [np.array([np.mod((1 << n) * phi, TWO_PI)]) for n in range(n0 + 1)]
    est, depth = unwrap_cascade(phases)
    assert depth[0] == n0
    assert periodic_modulus(est[0] - phi) < 1e-9


def test_kitaev_constants_schedule():
    c = KitaevConstants()
    assert min_copies(c, 1.0) == 16
    assert [level_repeats(c, n, 3) for n in range(4)] == [12, 9, 6, 3]
    # exact accounting: sum over levels of 2^n N_copy N_repeat
    assert kitaev_particle_count(3, c) == 16 * (12 + 2 * 9 + 4 * 6 + 8 * 3)


def test_kitaev_result_particle_count_is_exact():
    for n0 in range(5):
        r = kitaev_multiscale_estimate(0.4, n0, seed=n0)
        assert r.particles_used == kitaev_particle_count(n0, KitaevConstants())


def test_kitaev_plan_within_budget_bound():
    c = KitaevConstants()
    for N in [200, 1000, 4096, 10 ** 5, 10 ** 6]:
        n0, n_copy = kitaev_plan(N, c)
        used = kitaev_particle_count(n0, c, n_copy=n_copy)
        assert used <= 2 * c.c4 * c.c5 * c.c6 * N
        assert used <= c.c4 * N
        assert kitaev_particle_count(n0 + 1, c) > c.c4 * N
    assert kitaev_plan(47, c) is None
    assert kitaev_plan(48, c) == (0, 16)


def test_kitaev_level_zero_is_median_of_repeats():
    c = KitaevConstants()
    for s in range(20):
        r = kitaev_multiscale_estimate(2.5, 0, c, seed=s)
        rng = substream(s, 0)
        reads = _quadrature_readout(2.5, min_copies(c, 1.0), rng, size=(level_repeats(c, 0, 0),))
        assert r.estimate == pytest.approx(float(circular_median(reads)), abs=1e-15)
        assert r.depth == 0 and not r.degraded


@pytest.mark.parametrize("n0", [1, 2, 3, 4])
def test_kitaev_failure_probability(n0):
    trials = 3000
    tol = TWO_PI * 2.0 ** -n0 * (2 / 3)
    fails = sum(periodic_modulus(kitaev_multiscale_estimate(0.0, n0, seed=s).estimate) > tol
                for s in range(trials))
    bound = 2.0 ** (-3 * n0)
    # one-sided binomial allowance of 3 standard deviations above the bound
    assert fails / trials <= bound + 3 * math.sqrt(bound * (1 - bound) / trials)


def test_kitaev_heisenberg_slope_at_fixed_budget():
    c = KitaevConstants()
    Ps = 2 ** np.arange(11, 18)
    rng = np.random.default_rng(5)
    mse = []
    for P in Ps:
        n0, n_copy = kitaev_plan(int(P), c)
        used = kitaev_particle_count(n0, c, n_copy=n_copy)
        phis = rng.uniform(0, TWO_PI, 300)
        err = [periodic_modulus(kitaev_multiscale_estimate(p, n0, c, seed=[int(P), t], n_copy=n_copy).estimate - p)
               for t, p in enumerate(phis)]
        assert used <= P
        mse.append(np.mean(np.square(err)))
    slope = np.polyfit(np.log(Ps), np.log(mse), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.2)


def test_kitaev_rejects_bad_inputs():
    with pytest.raises(ValueError):
        kitaev_multiscale_estimate(0.0, -1)
    with pytest.raises(ValueError):
        kitaev_multiscale_estimate(0.0, 1, n_copy=1)
