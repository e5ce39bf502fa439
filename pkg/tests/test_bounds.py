import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qfuncest import bounds
from qfuncest.bounds import (BoundReport, PhaseVector, bound_report, c1_floor, c2_floor, heisenberg_floor,
                             heisenberg_lower, max_entanglement, qfi_matrix, qfi_matrix_fd,
                             reduced_sql, resource_optima, rho_radius, sql_floor, sql_lower, uub, wbb)
from qfuncest.function_model import SmoothnessClass, fourier_constraint, fourier_transform, GridFunction

qs = st.sampled_from([0.5, 1.0, 1.5, 2.0])
Ms = st.floats(0.1, 20.0)
Ns = st.integers(1, 10 ** 8)


# Fisher information

def test_qfi_at_origin():
    J = qfi_matrix(PhaseVector(np.zeros(6)), 64)
    assert np.allclose(np.diag(J), 2.0, atol=1e-8)
    assert np.allclose(J - np.diag(np.diag(J)), 0.0, atol=1e-8)


def test_qfi_symmetric_psd_and_bounded():
    rng = np.random.default_rng(0)
    for _ in range(30):
        K = int(rng.integers(1, 9))
        rho = rho_radius(1.0, 2 * np.pi, K)
        u = PhaseVector(rng.normal(size=K) * rho / math.sqrt(K) * 0.5, rho)
        J = qfi_matrix(u, 8 * K + 8)
        assert np.allclose(J, J.T, atol=1e-12)
        assert np.min(np.linalg.eigvalsh(J)) >= -1e-10
        assert np.max(np.diag(J)) <= 8
        assert np.max(np.abs(J - qfi_matrix_fd(u, 8 * K + 8))) < 1e-5


def test_qfi_grid_precondition():
    with pytest.raises(ValueError):
        qfi_matrix(PhaseVector(np.zeros(4)), 31)


def test_in_class_radius_matches_fourier_condition():
    # phi_u has |phi_k|^2 = u_k^2 / 2, so sum k^2q |phi_k|^2 <= K^2q |u|^2 / 2 <= M^2 / (2 c0^2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        q = float(rng.choice([0.5, 1.0]))
        K = int(rng.integers(1, 20))
        M = float(rng.uniform(0.5, 5))
        rho = rho_radius(q, M, K)
        v = rng.normal(size=K)
        u = PhaseVector(0.999 * rho * v / np.linalg.norm(v), rho)
        assert u.in_class()
        f = GridFunction(u.function(256))
        assert fourier_constraint(fourier_transform(f, 100), SmoothnessClass(q, M))[1]


# closed-form bounds

def test_uub_examples():
    assert uub(8, 1) == 1.0
    assert uub(2, 100) == pytest.approx(0.05, abs=1e-15)
    with pytest.raises(ValueError):
        uub(0, 1)


@pytest.mark.parametrize("K", [1, 4, 16])
def test_trace_form_dominates_uub(K):
    J = qfi_matrix(PhaseVector(np.zeros(K)), 8 * K)
    trace_form = K * np.trace(J) ** -0.5
    assert trace_form == pytest.approx(math.sqrt(K / 2), rel=1e-10)
    assert trace_form >= uub(K, 1)


def test_wbb_examples():
    assert wbb(1.0, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert wbb(0.05, 0.1) == pytest.approx(1 / 30, abs=1e-15)
    assert wbb(0.3, 1e300) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        wbb(0.0, 1.0)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(1.01, 2.0))
def test_wbb_monotone_and_below_both(a, b, f):
    w = wbb(a, b)
    assert w < min(a, b)
    assert wbb(a * f, b) > w
    assert wbb(a, b * f) > w


def test_sql_exponent_ratio():
    for M in (1.0, 2 * np.pi):
        for N in (10, 1000, 10 ** 6):
            assert sql_floor(1.0, M, N) / sql_floor(1.0, M, 8 * N) == pytest.approx(2.0, rel=1e-12)


def test_closed_form_exponents_across_decades():
    for q in (0.5, 1.0, 2.0):
        for lo in (1e3, 1e5):
            s = math.log(sql_floor(q, 3.0, lo) / sql_floor(q, 3.0, 10 * lo)) / math.log(10)
            h = math.log(heisenberg_floor(q, 3.0, lo) / heisenberg_floor(q, 3.0, 10 * lo)) / math.log(10)
            assert s == pytest.approx(q / (2 * q + 1), abs=1e-12)
            assert h == pytest.approx(q / (q + 1), abs=1e-12)


def test_large_q_approaches_parameter_sql():
    e = [math.log(sql_floor(q, 1.0, 1e4) / sql_floor(q, 1.0, 1e5)) / math.log(10) for q in (10.0, 100.0)]
    assert abs(e[1] - 0.5) < abs(e[0] - 0.5) < 0.03


@settings(max_examples=100, deadline=None)
@given(qs, Ms, Ns)
def test_scan_dominates_closed_form(q, M, N):
    best, K = sql_lower(q, M, N)
    assert best >= sql_floor(q, M, N)
    assert K >= 1
    # the scan returns a value actually attained at K
    assert best == pytest.approx(wbb(uub(K, N), rho_radius(q, M, K)), rel=1e-12)


def test_constants():
    c0 = 2 * np.pi
    assert c1_floor(1.0) == pytest.approx(1 / 18 * (1 / c0) ** (2 / 3), rel=1e-12)
    assert c2_floor(1.0) == pytest.approx((c1_floor(1.0) / np.pi) ** 1.5, rel=1e-12)


def test_heisenberg_exponent_ratio():
    for N in (100, 10 ** 4, 10 ** 6):
        b1, _ = heisenberg_lower(1.0, 2 * np.pi, N)
        b2, _ = heisenberg_lower(1.0, 2 * np.pi, 4 * N)
        assert b1 / b2 == pytest.approx(2.0, rel=1e-12)


@given(qs, Ms, st.floats(1.0, 1e8))
def test_reduced_sql_with_one_particle_is_sql(q, M, N):
    assert reduced_sql(q, M, N, 1) == pytest.approx(sql_floor(q, M, N), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(qs, Ms, Ns)
def test_heisenberg_floor_below_sql_floor(q, M, N):
    hl, n_p = heisenberg_lower(q, M, N)
    assert n_p >= 1
    assert hl <= sql_floor(q, M, N) * (1 + 1e-12)


def test_heisenberg_falls_back_without_useful_entanglement():
    assert max_entanglement(1.0, 1e6, 1) < 1
    assert heisenberg_lower(1.0, 1e6, 1) == (sql_floor(1.0, 1e6, 1), 1)


# resource split

def test_resource_examples():
    assert tuple(resource_optima(1.0, 1.0, 1000, "SQL")) == (10, 100, 1)
    assert tuple(resource_optima(1.0, 1.0, 1, "SQL")) == (1, 1, 1)
    assert tuple(resource_optima(1.0, 1.0, 1, "Heisenberg")) == (1, 1, 1)
    n1, n2, n_p = resource_optima(1.0, 2 * np.pi, 10 ** 5, "Heisenberg")
    assert n_p == math.floor(max_entanglement(1.0, 2 * np.pi, 10 ** 5))
    assert (n1, n2) == (10 ** 5 // n_p, n_p)
    assert resource_optima(1.0, 2 * np.pi, 2 ** 20, "Heisenberg", np_prefactor=12.0).n_p == \
        round(12 * (2 ** 20 / (2 * np.pi)) ** 0.5)
    with pytest.raises(ValueError):
        resource_optima(1.0, 1.0, 10, "other")


# report

def test_report_round_trip_and_invariants():
    r = bound_report(1.0, 2 * np.pi, 2 ** 16)
    assert BoundReport.from_json(r.to_json()) == r
    assert set(json.loads(r.to_json())) >= {"delta_uub", "delta_wbb", "sql_lower", "hl_lower",
                                             "optimal_K", "max_np", "c0", "c1_floor", "c2_floor"}
    assert r.delta_wbb < min(r.delta_uub, r.rho)
    assert r.delta_wbb == pytest.approx(r.sql_lower)
    assert r.hl_lower <= r.sql_floor
    assert r.floor("SQL") == r.sql_floor
    assert r.floor("Heisenberg") == r.hl_lower
    assert r.c0 == pytest.approx(bounds.c0_constant(SmoothnessClass(1.0, 1.0)))
