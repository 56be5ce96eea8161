"""Riccati reduction: coefficient folding, both routes, reconstruction."""

import math

import numpy as np
import pytest

from oscillab.errors import SystemDefinitionError
from oscillab.integrate import integrate_ode
from oscillab.reduction import (compute_abc, compute_abc_via_tilde,
                                dual_route_report, escape_classify,
                                nu_expressions, reconstruct_phi,
                                riccati_rhs, tilde_system)
from oscillab.system import LinearSystem

SQRT2 = math.sqrt(2.0)
CANONICAL = LinearSystem.from_strings([["0", "1", "1"],
                                       ["-1", "0", "0"],
                                       ["-1", "0", "0"]])
# constant matrix with a deliberate route discrepancy (a_32 != a_12)
CONSTANT = LinearSystem.from_strings([["1", "1", "2"],
                                      ["0", "1", "0"],
                                      ["3", "4", "5"]])


def test_needs_three_dimensions():
    two = LinearSystem.from_strings([["0", "1"], ["-1", "0"]])
    with pytest.raises(SystemDefinitionError):
        compute_abc(two)
    with pytest.raises(SystemDefinitionError):
        tilde_system(two)


# the sign-mixed constant system folds to (A, B3, C) = (0, 0, 2) exactly
def test_canonical_abc_exact():
    for coeffs in (compute_abc(CANONICAL), compute_abc_via_tilde(CANONICAL)):
        for t in (0.0, 1.7, 42.0):
            assert coeffs.A(t) == 0.0
            assert coeffs.B[3](t) == 0.0
            assert coeffs.C(t) == 2.0
    assert compute_abc(CANONICAL).route == "display"
    assert compute_abc_via_tilde(CANONICAL).route == "tilde-identity"


def test_canonical_nu_vanishes():
    nus = nu_expressions(CANONICAL)
    assert set(nus) == {3}
    assert nus[3](13.0) == 0.0


def test_canonical_tilde_is_identity_transform():
    # nu_k == 0 leaves every entry untouched
    til = tilde_system(CANONICAL)
    for t in (0.0, 2.5):
        np.testing.assert_array_equal(til.matrix(t), CANONICAL.matrix(t))


# hand-folded values for the constant matrix
def test_constant_matrix_hand_values():
    coeffs = compute_abc(CONSTANT)
    # A = a11 - a22 - (a13*a32)/a12 = 1 - 1 - 8 = -8
    assert coeffs.A(0.0) == -8.0
    # C = -a21 - (a13*a31)/a12 = 0 - 6 = -6
    assert coeffs.C(0.0) == -6.0
    # B3 = a22*mu3 - a23 - mu3' - [mu3(a33 - a32) + a13(1 - mu3)]
    #    = 2 - 0 - 0 - [2*1 + 2*(-1)] = 2
    assert coeffs.B[3](0.0) == 2.0

    ident = compute_abc_via_tilde(CONSTANT)
    assert ident.A(0.0) == -8.0
    assert ident.C(0.0) == -6.0
    # identity route differs by nu3 * sum_j mu_j (a_j2 - a12) = -1*2*3 = -6
    assert ident.B[3](0.0) == 8.0
    assert coeffs.B[3](0.0) - ident.B[3](0.0) == -6.0


def test_constant_matrix_tilde_entries():
    til = tilde_system(CONSTANT)
    m = til.matrix(0.0)
    # nu3 = 1 - a13/a12 = -1
    # row 1 becomes (a11, a12, a12); t21 = 0 - (-1)*3 = 3;
    # t22 = 1 - (-1)*4 = 5; t23 = 0 + 1*(-1) + 0 - (-1)(5 + 4*(-1)) = 0;
    # t33 = a33 + a32*nu3 = 5 - 4 = 1
    np.testing.assert_allclose(m, [[1, 1, 1], [3, 5, 0], [3, 4, 1]])


def test_dual_route_diagnostic():
    rep = dual_route_report(CANONICAL, (0.0, 10.0))
    assert rep["fired"] is False
    rep = dual_route_report(CONSTANT, (0.0, 10.0))
    assert rep["fired"] is True
    assert rep["max_relative_difference"]["B3"] > 0.5
    assert "note" in rep


def test_routes_agree_when_second_columns_match():
    # a_j2 == a12 for j >= 3 kills the discrepancy term even with
    # time-varying ratios (exercises the symbolic mu_k' path)
    sys_ = LinearSystem.from_strings(
        [["0.3", "2 + sin(t)", "1 + 0.5*cos(t)"],
         ["1", "-0.2", "0.4"],
         ["0.7", "2 + sin(t)", "-0.1"]])
    rep = dual_route_report(sys_, (0.0, 10.0), tol=1e-8)
    assert rep["fired"] is False, rep


# -- Riccati right-hand side --------------------------------------------

def test_riccati_rhs_matches_hand_formula():
    rhs = riccati_rhs(CONSTANT)
    assert rhs.dim == 2

    def hand(t, y):
        m = CONSTANT.matrix(t)
        return m[1:, 0] + m[1:, 1:] @ y - y * (m[0, 0] + m[0, 1:] @ y)

    rng = np.random.default_rng(3)
    for _ in range(20):
        t = float(rng.uniform(0, 5))
        y = rng.normal(size=2)
        np.testing.assert_allclose(rhs(t, y), hand(t, y), atol=1e-15)


def test_riccati_escape_unit_time():
    # only a12 = 1: y1' = -y1^2, y(0) = -1 escapes at t* = 1
    sys_ = LinearSystem.from_strings([["0", "1", "0"],
                                      ["0", "0", "0"],
                                      ["0", "0", "0"]])
    traj = integrate_ode(riccati_rhs(sys_), (0.0, 2.0), [-1.0, 0.0])
    assert traj.escape is not None
    assert traj.escape.t_star == pytest.approx(1.0, abs=1e-6)
    rep = escape_classify(traj, sys_, requested_end=2.0)
    assert rep.outcome == "Escaped"
    assert rep.t_star == pytest.approx(1.0, abs=1e-6)
    # F = log(1 - t) -> -inf
    assert rep.f_trend["decreasing_tail"]
    assert rep.f_trend["unbounded_below_evidence"]


def test_canonical_escape_matches_first_zero():
    # escape of the reduced system == first zero of phi1 = cos(sqrt2 t)
    traj = integrate_ode(riccati_rhs(CANONICAL), (0.0, 3.0), [0.0, 0.0])
    want = math.pi / (2 * SQRT2)
    assert traj.escape is not None
    assert traj.escape.t_star == pytest.approx(want, abs=1e-6)
    rep = escape_classify(traj, CANONICAL, requested_end=3.0)
    assert rep.outcome == "Escaped"
    assert rep.f_trend["unbounded_below_evidence"]


def test_no_escape_reports_global():
    diag = LinearSystem.from_strings([["-1", "0", "0"],
                                      ["0", "-1", "0"],
                                      ["0", "0", "-1"]])
    traj = integrate_ode(riccati_rhs(diag), (0.0, 10.0), [0.5, 0.5])
    rep = escape_classify(traj, diag, requested_end=10.0)
    assert rep.outcome == "Global"
    assert rep.t_star is None


# -- reconstruction ------------------------------------------------------

def test_reconstruct_canonical_before_first_zero():
    # direct integration oracle; window ends before phi1's zero
    ric = integrate_ode(riccati_rhs(CANONICAL), (0.0, 1.0), [0.0, 0.0],
                        rtol=1e-11, atol=1e-13)
    rec = reconstruct_phi(CANONICAL, ric, 1.0)
    direct = integrate_ode(CANONICAL.rhs, (0.0, 1.0), [1.0, 0.0, 0.0],
                           rtol=1e-11, atol=1e-13)
    ts = np.linspace(0.0, 1.0, 101)
    a, b = rec(ts), direct(ts)
    mask = np.abs(b[:, 0]) >= 1e-3
    rel = np.abs(a[mask] - b[mask]) / np.maximum(np.abs(b[mask]), 1e-3)
    assert np.max(rel) <= 1e-6


def test_reconstruct_diagonal_decay():
    diag = LinearSystem.from_strings([["-1", "0", "0"],
                                      ["0", "-1", "0"],
                                      ["0", "0", "-1"]])
    ric = integrate_ode(riccati_rhs(diag), (0.0, 10.0), [1.0, 1.0],
                        rtol=1e-11, atol=1e-13)
    rec = reconstruct_phi(diag, ric, 1.0)
    ts = np.linspace(0.0, 10.0, 101)
    want = np.exp(-ts)
    got = rec(ts)
    for k in range(3):
        assert np.max(np.abs(got[:, k] - want) / want) <= 1e-8


def test_reconstruct_rejects_zero_init():
    ric = integrate_ode(riccati_rhs(CANONICAL), (0.0, 0.5), [0.0, 0.0])
    with pytest.raises(ValueError):
        reconstruct_phi(CANONICAL, ric, 0.0)


def test_all_zero_matrix_is_trivial():
    zero = LinearSystem.from_strings([["0"] * 3] * 3)
    for coeffs in (compute_abc(zero), compute_abc_via_tilde(zero)):
        assert coeffs.A(1.0) == 0.0
        assert coeffs.B[3](1.0) == 0.0
        assert coeffs.C(1.0) == 0.0
