"""Two-dimensional checks: interval/horizon oscillation, barriers, comparison."""

import math

import numpy as np
import pytest

from oscillab.errors import SystemDefinitionError
from oscillab.integrate import integrate_ode
from oscillab.riccati2d import (RiccatiTriple, System2D, comparison_probe,
                                horizon_oscillation_check,
                                interval_oscillation_check, riccati_of,
                                zeta_subsolution)
from oscillab.system import LinearSystem
from oscillab.verdicts import EVIDENCE_CAVEAT

ROTATION = [["0", "1"], ["-1", "0"]]


def rotation():
    return System2D.from_strings(ROTATION)


def test_construction_and_trace_gap():
    s = System2D.from_strings([["t", "1"], ["0", "1"]])
    assert s.trace_gap()(3.0) == pytest.approx(2.0)   # t - 1 at t = 3
    assert rotation().trace_gap()(7.7) == 0.0
    same = System2D.from_strings([["sin(t)", "1"], ["2", "sin(t)"]])
    for t in (0.0, 1.0, 2.5):
        assert same.trace_gap()(t) == 0.0


def test_from_linear_system_requires_n2():
    with pytest.raises(SystemDefinitionError):
        System2D.from_linear_system(
            LinearSystem.from_strings([["0", "1", "0"],
                                       ["0", "0", "1"],
                                       ["0", "0", "0"]]))


def test_riccati_of_signs():
    # y = phi2/phi1 satisfies y' + p12 y^2 + (p11 - p22) y - p21 = 0
    s = System2D.from_strings([["2", "3"], ["5", "7"]])
    tri = riccati_of(s)
    assert tri.f(0.0) == 3.0
    assert tri.g(0.0) == -5.0
    assert tri.h(0.0) == -5.0


def test_interval_check_rotation_boundary_holds():
    v = interval_oscillation_check(rotation(), (0.0, math.pi))
    assert v.kind == "thm23" and v.status == "Holds"
    assert v.witnesses["threshold_comparison"]["integral"] == pytest.approx(
        math.pi, abs=1e-9)


def test_interval_check_rotation_short_fails():
    v = interval_oscillation_check(rotation(), (0.0, 3.0))
    assert v.status == "Fails"
    assert v.witnesses["threshold_comparison"]["integral"] == pytest.approx(
        3.0, abs=1e-9)


def test_interval_check_flips_at_pi():
    assert interval_oscillation_check(
        rotation(), (0.0, math.pi - 0.01)).status == "Fails"
    assert interval_oscillation_check(
        rotation(), (0.0, math.pi + 0.01)).status == "Holds"


def test_interval_check_sign_violation():
    s = System2D.from_strings([["0", "-1"], ["1", "0"]])
    v = interval_oscillation_check(s, (0.0, 10.0))
    assert v.status == "Fails"
    w = v.witnesses["sign_violation"]
    assert w["entry"] == "p12" and w["value"] < 0


def test_interval_check_bad_interval():
    with pytest.raises(ValueError):
        interval_oscillation_check(rotation(), (1.0, 1.0))


def test_rotation_zero_in_every_window_of_length_pi_plus():
    # phi1 = r cos(t + delta) has a zero in any window longer than pi
    rng = np.random.default_rng(7)
    s = rotation()
    for _ in range(3):
        init = rng.normal(size=2)
        init /= np.linalg.norm(init)
        traj = integrate_ode(s.rhs, (0.0, 20.0), init)
        zs = traj.zeros(0)
        windows = np.concatenate(([0.0], zs, [20.0]))
        assert np.max(np.diff(windows)) <= math.pi + 0.01


def test_horizon_check_rotation_holds_with_evidence_caveat():
    v = horizon_oscillation_check(rotation(), (10.0, 100.0, 1000.0, 10000.0))
    assert v.kind == "thm22" and v.status == "Holds"
    assert EVIDENCE_CAVEAT in v.caveats
    up = v.witnesses["growth_weight"]
    assert up["verdict"] == "GrowingBeyondThreshold"
    # both weights integrate the constant 1, so values track the horizons
    np.testing.assert_allclose(up["values"], up["horizons"], rtol=1e-9)
    down = v.witnesses["decay_weight"]
    np.testing.assert_allclose(down["values"], down["horizons"], rtol=1e-9)


def test_horizon_check_bounded_weight_fails():
    # integral of e^{-t} tops out at 1, far below the threshold
    s = System2D.from_strings([["0", "exp(-t)"], ["-1", "0"]])
    v = horizon_oscillation_check(s, (5.0, 10.0, 20.0, 40.0))
    assert v.status == "Fails"
    assert v.witnesses["growth_weight"]["verdict"] == "Bounded"
    assert any("bounded" in c for c in v.caveats)


def test_horizon_check_sign_violation():
    s = System2D.from_strings([["0", "-1"], ["1", "0"]])
    v = horizon_oscillation_check(s, (5.0, 10.0, 20.0, 40.0))
    assert v.status == "Fails"
    assert v.witnesses["sign_violation"]["entry"] == "p12"


def test_horizon_check_ladder_validation():
    with pytest.raises(ValueError):
        horizon_oscillation_check(rotation(), (5.0, 10.0, 20.0))
    with pytest.raises(ValueError):
        horizon_oscillation_check(rotation(), (5.0, 10.0, 10.0, 20.0))


def test_zeta_linear_growth():
    # zeta' = 1 from 0
    tri = RiccatiTriple.from_strings("1", "0", "-1")
    z = zeta_subsolution(tri, 0.0, (0.0, 5.0))
    for t in (0.0, 1.0, 2.5, 5.0):
        assert float(z(t)[0]) == pytest.approx(t, abs=1e-10)


def test_zeta_exponential_decay():
    # zeta' = -zeta from 1
    tri = RiccatiTriple.from_strings("1", "1", "0")
    z = zeta_subsolution(tri, 1.0, (0.0, 4.0))
    for t in (0.0, 0.5, 1.0, 3.0):
        assert float(z(t)[0]) == pytest.approx(math.exp(-t), rel=1e-9)


def test_zeta_matches_ode_integration():
    tri = RiccatiTriple.from_strings("0.5", "t", "1")
    z = zeta_subsolution(tri, 0.0, (0.0, 3.0))

    def rhs(t, y):
        return np.array([-(t * y[0] + 1.0)])

    traj = integrate_ode(rhs, (0.0, 3.0), np.array([0.0]),
                         rtol=1e-11, atol=1e-13)
    for t in np.linspace(0.0, 3.0, 31):
        assert float(z(t)[0]) == pytest.approx(float(traj(t)[0]), abs=1e-8)


def test_zeta_residual_pointwise():
    # zeta' + g zeta + h = 0 checked by central differences on dense output
    tri = RiccatiTriple.from_strings("t^2", "sin(t)", "cos(2*t)")
    z = zeta_subsolution(tri, 0.7, (0.0, 3.0))
    eps = 1e-5
    for t in np.linspace(0.1, 2.9, 25):
        dz = (float(z(t + eps)[0]) - float(z(t - eps)[0])) / (2 * eps)
        resid = dz + math.sin(t) * float(z(t)[0]) + math.cos(2 * t)
        assert abs(resid) <= 1e-6


def test_zeta_rejects_negative_f():
    tri = RiccatiTriple.from_strings("-1", "0", "-1")
    with pytest.raises(ValueError):
        zeta_subsolution(tri, 0.0, (0.0, 1.0))
    z = zeta_subsolution(tri, 0.0, (0.0, 1.0), require_nonnegative_f=False)
    assert float(z(1.0)[0]) == pytest.approx(1.0, abs=1e-10)


def test_comparison_identity_holds():
    tri = RiccatiTriple.from_strings("1", "0", "0")
    v = comparison_probe(tri, tri, 0.0, 0.0, (0.0, 5.0))
    assert v.kind == "thm21" and v.status == "Holds"
    assert v.witnesses["hypothesis"]["verified"] is True
    assert v.witnesses["conclusion"]["holds"] is True
    assert v.witnesses["hypothesis"]["cumulative_end"] == pytest.approx(
        0.0, abs=1e-12)


def test_comparison_hypothesis_violation_reported():
    # y2 = 0, integrand reduces to h1 - h2 = -1 < 0; y1' = 1 - y1^2
    # from 0 is tanh(t), global, so only the hypothesis fails.
    minorant = RiccatiTriple.from_strings("1", "0", "-1")
    majorant = RiccatiTriple.from_strings("1", "0", "0")
    v = comparison_probe(minorant, majorant, 0.0, 0.0, (0.0, 3.0))
    assert v.status == "Inconclusive"
    assert v.witnesses["hypothesis"]["verified"] is False
    assert v.witnesses["hypothesis"]["cumulative_min"] < 0
    assert v.witnesses["conclusion"]["holds"] is True
    assert any("conclusion holds, hypothesis not verified" in c
               for c in v.caveats)


def test_comparison_equilibrium_conclusion():
    # gamma0 = 1 sits on the equilibrium of y' = 1 - y^2
    minorant = RiccatiTriple.from_strings("1", "0", "-1")
    majorant = RiccatiTriple.from_strings("1", "0", "0")
    v = comparison_probe(minorant, majorant, 0.0, 1.0, (0.0, 3.0))
    assert v.status == "Inconclusive"
    assert v.witnesses["conclusion"]["holds"] is True
    assert v.witnesses["conclusion"]["escape_t"] is None


def test_comparison_contradiction_pathway():
    # hypothesis holds (h1 - h2 = +1) yet y1' = -(1 + y1^2) escapes at
    # pi/2 like -tan(t); the probe must flag the contradiction.
    minorant = RiccatiTriple.from_strings("1", "0", "1")
    majorant = RiccatiTriple.from_strings("1", "0", "0")
    v = comparison_probe(minorant, majorant, 0.0, 0.0, (0.0, 3.0))
    assert v.status == "Fails"
    assert v.witnesses["hypothesis"]["verified"] is True
    assert v.witnesses["conclusion"]["holds"] is False
    assert v.witnesses["conclusion"]["escape_t"] == pytest.approx(
        math.pi / 2, abs=1e-4)
    assert any("contradicts the comparison principle" in c for c in v.caveats)


def test_comparison_window_shrinks_on_majorant_escape():
    # majorant y2' = -(1 + y2^2) escapes at pi/2 < 3
    minorant = RiccatiTriple.from_strings("1", "0", "-1")
    majorant = RiccatiTriple.from_strings("1", "0", "1")
    v = comparison_probe(minorant, majorant, 0.0, 1.0, (0.0, 3.0))
    assert any("window shrunk" in c for c in v.caveats)
    assert v.witnesses["conclusion"]["survived_to"] == pytest.approx(
        math.pi / 2, abs=1e-3)


def test_comparison_preconditions():
    tri = RiccatiTriple.from_strings("1", "0", "0")
    with pytest.raises(ValueError):
        comparison_probe(tri, tri, 1.0, 0.0, (0.0, 2.0))   # gamma0 < y2_init
    neg = RiccatiTriple.from_strings("-1", "0", "0")
    with pytest.raises(ValueError):
        comparison_probe(neg, tri, 0.0, 0.0, (0.0, 2.0))   # minorant f < 0


def test_comparison_reports_baseline_interpretation():
    tri = RiccatiTriple.from_strings("1", "0", "0")
    v = comparison_probe(tri, tri, 0.0, 0.0, (0.0, 1.0))
    assert "baseline_interpretation" in v.parameters
    assert "majorant" in v.parameters["baseline_interpretation"]
