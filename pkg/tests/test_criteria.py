"""Criteria checks and the empirical classifier."""

import math

import numpy as np
import pytest

from oscillab.criteria import (empirical_classify, oscillation_check,
                               positivity_stability_check,
                               suboscillation_check)
from oscillab.system import LinearSystem

CANONICAL = [["0", "1", "1"], ["-1", "0", "0"], ["-1", "0", "0"]]


def canonical():
    return LinearSystem.from_strings(CANONICAL)


def diag(value: str, n: int = 3):
    rows = [[value if i == j else "0" for j in range(n)] for i in range(n)]
    return LinearSystem.from_strings(rows)


# --- oscillation_check -----------------------------------------------------

def test_oscillation_canonical_holds():
    v = oscillation_check(canonical())
    assert v.kind == "thm31-2" and v.status == "Holds"
    zero = v.witnesses["identically_zero_B"]
    assert zero["sup_by_component"]["B3"]["display"] <= zero["tolerance"]
    assert zero["sup_by_component"]["B3"]["identity"] <= zero["tolerance"]
    # A = 0, a12 = 1, C = 2: the weights integrate to T and 2T
    up = v.witnesses["divergence"]["growth_weight"]
    np.testing.assert_allclose(up["values"], up["horizons"], rtol=1e-8)
    down = v.witnesses["divergence"]["decay_weight"]
    np.testing.assert_allclose(down["values"],
                               [2 * h for h in down["horizons"]], rtol=1e-8)


def test_oscillation_canonical_holds_on_doubled_ladder():
    v = oscillation_check(canonical(), ladder=(50.0, 100.0, 200.0, 400.0))
    assert v.status == "Holds"


def test_oscillation_nonzero_b_fails():
    sys_ = LinearSystem.from_strings([["0", "1", "1"],
                                      ["-1", "0", "1"],
                                      ["-1", "0", "0"]])
    v = oscillation_check(sys_)
    assert v.status == "Fails"
    worst = v.witnesses["nonzero_B"]["worst_point"]
    assert worst["k"] == 3
    assert worst["display"] == pytest.approx(-1.0)
    assert worst["identity"] == pytest.approx(-1.0)


def test_oscillation_bounded_weight_fails():
    # a12 = 0: B folds to zero but the growth weight integrates to 0
    v = oscillation_check(diag("-1"))
    assert v.status == "Fails"
    assert v.witnesses["divergence"]["growth_weight"]["verdict"] == "Bounded"
    assert any("bounded" in c for c in v.caveats)


def test_oscillation_negative_a12_fails():
    sys_ = LinearSystem.from_strings([["0", "-1", "1"],
                                      ["1", "0", "0"],
                                      ["-1", "0", "0"]])
    v = oscillation_check(sys_)
    assert v.status == "Fails"
    assert v.witnesses["sign_violation"]["entry"] == "a[1][2]"


# --- suboscillation_check --------------------------------------------------

def test_suboscillation_canonical_holds():
    v = suboscillation_check(canonical())
    assert v.kind == "thm31-1" and v.status == "Holds"
    found = v.witnesses["witness_intervals"]
    # 3 ladder starts x 2 sign patterns over B3
    assert len(found) == 6
    assert {tuple(w["sigma"]) for w in found} == {(0,), (1,)}
    assert {w["T"] for w in found} == {0.0, 25.0, 50.0}
    for w in found:
        # integrand is min(1, 2) = 1, so pi is reached at length pi
        length = w["interval"][1] - w["interval"][0]
        assert abs(length - math.pi) <= 0.1
        assert w["integral"] >= math.pi - 1e-6


def test_suboscillation_pattern_exhaustive_n4():
    sys_ = LinearSystem.from_strings([["0", "1", "1", "1"],
                                      ["-1", "0", "0", "0"],
                                      ["-1", "0", "0", "0"],
                                      ["-1", "0", "0", "0"]])
    v = suboscillation_check(sys_, t_ladder=(0.0,), t_hi=20.0)
    assert v.status == "Holds"
    sigmas = {tuple(w["sigma"]) for w in v.witnesses["witness_intervals"]}
    assert sigmas == {(0, 0), (0, 1), (1, 0), (1, 1)}


def test_suboscillation_negative_c_fails():
    # C = -a21 - a13 a31 / a12 = -0.5 - 0.5 = -1: threshold unreachable
    sys_ = LinearSystem.from_strings([["0", "1", "1"],
                                      ["0.5", "0", "0"],
                                      ["0.5", "0", "0"]])
    v = suboscillation_check(sys_)
    assert v.status == "Fails"
    missing = v.witnesses["unwitnessed_patterns"]
    assert missing and all(m["reason"] == "threshold unreached"
                           for m in missing)


def test_suboscillation_negative_a12_is_verdict_not_exception():
    sys_ = LinearSystem.from_strings([["0", "-1", "1"],
                                      ["1", "0", "0"],
                                      ["-1", "0", "0"]])
    v = suboscillation_check(sys_)
    assert v.status == "Fails"
    assert v.witnesses["sign_violation"]["entry"] == "a[1][2]"


def test_suboscillation_ladder_validation():
    with pytest.raises(ValueError):
        suboscillation_check(canonical(), t_ladder=(0.0, 50.0), t_hi=40.0)


# --- positivity_stability_check --------------------------------------------

def test_positivity_decaying_diagonal_holds_sharp():
    v = positivity_stability_check(diag("-1"))
    assert v.kind == "thm32" and v.status == "Holds"
    assert v.witnesses["nonoscillatory_evidence"] is True
    assert v.witnesses["stability"]["flags"] == []
    # solutions sit on the bound phi_k(t0) e^{-t} to integration accuracy
    assert abs(v.witnesses["bound_checks"][0]["worst_slack"]) <= 1e-9


def test_positivity_growing_diagonal_flags_instability():
    v = positivity_stability_check(diag("0.1"))
    assert v.status == "Holds"
    flags = v.witnesses["stability"]["flags"]
    assert "NotLyapunovStable" in flags
    assert "NotAsymptoticallyStable" in flags
    growth = v.witnesses["stability"]["diagonal_growth"]["a11"]
    np.testing.assert_allclose(growth["values"],
                               [0.1 * h for h in growth["horizons"]],
                               rtol=1e-8)


def test_positivity_negative_offdiagonal_fails():
    v = positivity_stability_check(canonical())
    assert v.status == "Fails"
    w = v.witnesses["sign_violation"]
    assert w["entry"] == "a[2][1]" and w["value"] == pytest.approx(-1.0)


def test_positivity_requires_positive_inits():
    with pytest.raises(ValueError):
        positivity_stability_check(diag("-1"), inits=[[1.0, 0.0, 1.0]])
    with pytest.raises(ValueError):
        positivity_stability_check(diag("-1"), inits=[[1.0, 1.0]])


def test_positivity_coupled_bound_has_slack():
    sys_ = LinearSystem.from_strings([["-1", "0.5", "0.5"],
                                      ["0.5", "-1", "0.5"],
                                      ["0.5", "0.5", "-1"]])
    v = positivity_stability_check(sys_)
    assert v.status == "Holds"
    # coupling feeds each component, so it sits strictly above the bound
    assert v.witnesses["bound_checks"][0]["worst_slack"] >= -1e-9


# --- zero-B family ----------------------------------------------------------

def _zero_b_system(rng, n):
    """Rows below the first share their off-first column value, the first
    row is constant off-diagonal, and a11 balances the column sums; both
    B routes then vanish identically and A = 0."""
    p = rng.uniform(0.5, 2.0)
    c = rng.uniform(-1.5, -0.4, size=n - 1)
    d = rng.uniform(-1.0, 1.0, size=n - 1)
    rows = [[repr(float(np.sum(d)))] + [repr(float(p))] * (n - 1)]
    for j in range(n - 1):
        rows.append([repr(float(c[j]))] + [repr(float(d[j]))] * (n - 1))
    return LinearSystem.from_strings(rows)


@pytest.mark.parametrize("seed", range(5))
def test_zero_b_family_oscillates(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 5))
    sys_ = _zero_b_system(rng, n)
    v = oscillation_check(sys_)
    assert v.status == "Holds"
    # zeros of phi1 keep arriving: count on [0,100] ~ twice that on [0,50]
    from oscillab.integrate import integrate_ode
    init = np.ones(n)
    traj = integrate_ode(sys_.rhs, (0.0, 100.0), init)
    zs = traj.zeros(0)
    n50 = int(np.sum(zs <= 50.0))
    n100 = len(zs)
    assert n50 >= 3
    assert 1.6 <= n100 / n50 <= 2.4


# --- empirical_classify -----------------------------------------------------

def test_classify_canonical_oscillatory():
    rep = empirical_classify(canonical(), horizon=60.0)
    assert rep.label == "OscillatoryEvidence"
    assert rep.bundle_size == 8 and rep.seed == 0
    assert all(r["oscillation_visible"] for r in rep.solutions)
    assert all(r["zero_counts"]["phi1"] >= 5 for r in rep.solutions)


def test_classify_block_suboscillatory():
    # phi1/phi3 rotate, phi2 decays; e2 gives phi1 identically zero
    sys_ = LinearSystem.from_strings([["0", "0", "1"],
                                      ["0", "-1", "0"],
                                      ["-1", "0", "0"]])
    rep = empirical_classify(sys_, horizon=60.0)
    assert rep.label == "SuboscillatoryEvidence"
    assert all(r["suboscillation_visible"] for r in rep.solutions)
    assert not all(r["oscillation_visible"] for r in rep.solutions)


def test_classify_decaying_diagonal_nonoscillatory():
    rep = empirical_classify(diag("-1"))
    assert rep.label == "NonoscillatoryEvidence"
    assert rep.phi1_nonvanishing_indicator is True
    assert any(r["nonvanishing_all"] for r in rep.solutions)
    # decay below the noise floor is reported, not misread as zeros
    assert any("noise floor" in c for c in rep.caveats)


def test_classify_identically_zero_component_counts_for_suboscillation():
    inits = [np.eye(3)[i] for i in range(3)]
    inits.append(np.array([0.0, 1.0, -1.0]))   # phi1 stays exactly 0
    rng = np.random.default_rng(3)
    while len(inits) < 8:
        inits.append(rng.normal(size=3))
    rep = empirical_classify(canonical(), inits=inits, horizon=60.0)
    assert rep.label == "SuboscillatoryEvidence"
    special = rep.solutions[3]
    assert special["identically_zero"] == ["phi1"]
    assert special["zero_counts"]["phi1"] == 0
    assert special["suboscillation_visible"] is True
    assert special["oscillation_visible"] is False


def test_classify_bundle_validation():
    with pytest.raises(ValueError):
        empirical_classify(canonical(), inits=[np.ones(3)] * 4)
    flat = [np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])] * 4
    with pytest.raises(ValueError):
        empirical_classify(canonical(), inits=flat)


def test_remark_consistency_nonoscillation_excludes_the_others():
    # whenever the positivity check holds, classification must not see
    # oscillation or suboscillation in the same system
    corpus = [
        diag("-1"),
        diag("0.1"),
        LinearSystem.from_strings([["-1", "0.5", "0.5"],
                                   ["0.5", "-1", "0.5"],
                                   ["0.5", "0.5", "-1"]]),
        canonical(),
    ]
    for sys_ in corpus:
        v = positivity_stability_check(sys_)
        rep = empirical_classify(sys_, horizon=60.0)
        if v.status == "Holds":
            assert rep.label not in ("OscillatoryEvidence",
                                     "SuboscillatoryEvidence")
