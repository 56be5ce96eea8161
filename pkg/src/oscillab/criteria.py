"""Decision procedures for oscillation, suboscillation and nonoscillation.

Each check returns a three-valued Verdict with witnesses and caveats.
Universal quantifiers over unbounded time are approximated by
configurable ladders of horizons or start points; every such
approximation is recorded as a caveat, and Holds verdicts for those
checks are evidence, never proof.

* ``suboscillation_check`` — sign-pattern search: for each pattern over
  the B_k and each start point T, hunt for an interval where the
  pattern holds and the min-weighted integral of (a_12, C) reaches pi.
* ``oscillation_check`` — B_k identically zero (verified through both
  computation routes) plus divergence of both weighted integrals.
* ``positivity_stability_check`` — nonnegative off-diagonals force the
  componentwise lower bound phi_k >= phi_k(t0) exp(integral a_kk);
  the diagonal integrals also drive the Lyapunov / asymptotic-stability
  necessary conditions, reported as flags.
* ``empirical_classify`` — integrate a bundle of initial conditions and
  label the observed behavior per the zero-counting definitions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .integrate import (CumulativeIntegral, cumulative_quad,
                        divergence_probe, integrate_ode, quad)
from .reduction import (compute_abc, compute_abc_via_tilde,
                        dual_route_report, _require_reducible)
from .system import LinearSystem, validate_ratios
from .verdicts import EVIDENCE_CAVEAT, FAILS, HOLDS, INCONCLUSIVE, Verdict

__all__ = ["suboscillation_check", "oscillation_check",
           "positivity_stability_check", "ClassificationReport",
           "empirical_classify", "GROWING"]

GROWING = "GrowingBeyondThreshold"

_LADDER_CAVEAT = ("universal quantifier over start points checked only on "
                  "a finite ladder")


def _sign_floor_violation(fn, ts, floor_rel: float = 1e-12):
    """First grid point where fn drops below the roundoff floor, or None."""
    vals = np.array([fn(float(t)) for t in ts])
    scale = max(1.0, float(np.max(np.abs(vals))))
    i = int(np.argmin(vals))
    if vals[i] < -floor_rel * scale:
        return float(ts[i]), float(vals[i])
    return None


def _eval_grid(fn, ts):
    """Evaluate fn over ts, NaN where a DomainError fires; (values, bad)."""
    out = np.empty(len(ts))
    bad = 0
    for i, t in enumerate(ts):
        try:
            out[i] = fn(float(t))
        except DomainError:
            out[i] = math.nan
            bad += 1
    return out, bad


def _true_runs(mask: np.ndarray, start: int):
    """Maximal runs of True in mask[start:], as (i1, i2) inclusive pairs."""
    runs = []
    i = start
    m = len(mask)
    while i < m:
        if mask[i]:
            j = i
            while j + 1 < m and mask[j + 1]:
                j += 1
            if j > i:
                runs.append((i, j))
            i = j + 1
        else:
            i += 1
    return runs


def suboscillation_check(sys: LinearSystem, *,
                         t_ladder: Optional[Sequence[float]] = None,
                         t_hi: Optional[float] = None,
                         grid_step: float = 0.05,
                         quad_tol: float = 1e-9,
                         sign_tol: float = 1e-12,
                         ratio_guard: bool = True) -> Verdict:
    """Sign-pattern suboscillation search (kind "thm31-1").

    For every start point T in the ladder and every sign pattern over
    the B_k, searches [T, t_hi] for a subinterval on which each
    B_k * (-1)^sigma_k >= 0 and the running integral of
    min(a_12 e^{-I}, C e^{I}) reaches pi, where I integrates A from the
    interval's left end.  Holds when every (T, pattern) is witnessed;
    Fails when the largest T leaves some pattern unwitnessed.
    """
    _require_reducible(sys)
    n, t0 = sys.n, sys.t0
    if t_ladder is None:
        t_ladder = (t0, t0 + 25.0, t0 + 50.0)
    t_ladder = sorted(float(x) for x in t_ladder)
    if t_hi is None:
        t_hi = t0 + 100.0
    t_hi = float(t_hi)
    if t_ladder[-1] >= t_hi:
        raise ValueError("t_hi must exceed every ladder start point")
    params = {"t_ladder": list(t_ladder), "t_hi": t_hi,
              "grid_step": grid_step, "quad_tol": quad_tol,
              "sign_tol": sign_tol}
    caveats = [_LADDER_CAVEAT, EVIDENCE_CAVEAT]

    npts = int(round((t_hi - t0) / grid_step)) + 1
    ts = np.linspace(t0, t_hi, npts)

    viol = _sign_floor_violation(sys.entry(0, 1), ts)
    if viol is not None:
        return Verdict(kind="thm31-1", status=FAILS,
                       witnesses={"sign_violation": {
                           "entry": "a[1][2]", "t": viol[0],
                           "value": viol[1]}},
                       caveats=caveats + ["precondition a[1][2] >= 0 "
                                          "violated; search not performed"],
                       parameters=params)

    if ratio_guard:
        ratio_rep = validate_ratios(sys, window=(t0, t_hi), grid_points=500)
        if not ratio_rep.well_defined:
            caveats.append("ratio validation reported Suspect: " +
                           "; ".join(ratio_rep.suspect_reasons[:2]))

    coeffs = compute_abc(sys)
    b_cols = coeffs.b_columns()
    b_vals = {}
    skipped = 0
    for k in b_cols:
        b_vals[k], bad = _eval_grid(coeffs.B[k], ts)
        skipped += bad
    if skipped:
        caveats.append(f"{skipped} grid evaluations of B_k hit domain "
                       "errors and were treated as sign-incompatible")

    route_diag = dual_route_report(sys, (t0, t_hi), points=200)
    if route_diag["fired"]:
        caveats.append("B_k computation routes disagree "
                       f"(max relative difference "
                       f"{max(route_diag['max_relative_difference'].values()):.3g}); "
                       "sign scan uses the display route — " +
                       route_diag["note"])

    a12 = sys.entry(0, 1)
    gap = CumulativeIntegral(coeffs.A, t0, t_hi)
    u_grid, _ = _eval_grid(lambda t: a12(t) * math.exp(-gap(t)), ts)
    v_grid, _ = _eval_grid(lambda t: coeffs.C(t) * math.exp(gap(t)), ts)

    def integrand_for(i1: int):
        p = math.exp(gap(float(ts[i1])))

        def integrand(t: float) -> float:
            return min(a12(t) * math.exp(-gap(t)) * p,
                       coeffs.C(t) * math.exp(gap(t)) / p)
        return integrand

    threshold = math.pi - quad_tol
    candidate_cache = {}

    def assess(i1: int, i2: int) -> dict:
        """Best cumulative integral over [ts[i1], ts[i2]]; cached."""
        key = (i1, i2)
        if key in candidate_cache:
            return candidate_cache[key]
        p = math.exp(gap(float(ts[i1])))
        w = np.minimum(u_grid[i1:i2 + 1] * p, v_grid[i1:i2 + 1] / p)
        with np.errstate(invalid="ignore"):
            cum = np.concatenate(
                ([0.0], np.cumsum(0.5 * (w[1:] + w[:-1])
                                  * np.diff(ts[i1:i2 + 1]))))
        est_max = float(np.nanmax(cum)) if not np.all(np.isnan(cum)) \
            else math.inf
        if math.isfinite(est_max) and est_max < math.pi - 0.5:
            # clearly short of the threshold; trapezoid estimate suffices
            result = {"reached": False, "best": est_max,
                      "t_best": float(ts[i1 + int(np.nanargmax(cum))]),
                      "estimate": True}
        else:
            integrand = integrand_for(i1)
            acc, best, t_best = 0.0, 0.0, float(ts[i1])
            reached_at = None
            for i in range(i1, i2):
                v, _err = quad(integrand, float(ts[i]), float(ts[i + 1]),
                               tol=quad_tol)
                acc += v
                if acc > best:
                    best, t_best = acc, float(ts[i + 1])
                if acc >= threshold:
                    reached_at = float(ts[i + 1])
                    break
            result = {"reached": reached_at is not None, "best": best,
                      "t_best": reached_at if reached_at is not None
                      else t_best,
                      "estimate": False}
        candidate_cache[key] = result
        return result

    scale_b = {k: max(1.0, float(np.nanmax(np.abs(b_vals[k]))))
               if not np.all(np.isnan(b_vals[k])) else 1.0
               for k in b_cols}
    masks_pos = {k: b_vals[k] >= -sign_tol * scale_b[k] for k in b_cols}
    masks_neg = {k: b_vals[k] <= sign_tol * scale_b[k] for k in b_cols}

    patterns = []
    for bits in range(2 ** (n - 2)):
        patterns.append(tuple((bits >> i) & 1 for i in range(n - 2)))

    found = []
    missing = []
    for T in t_ladder:
        start = int(np.searchsorted(ts, T - 1e-12))
        for sigma in patterns:
            combined = np.ones(len(ts), dtype=bool)
            for pos, k in enumerate(b_cols):
                combined &= masks_neg[k] if sigma[pos] else masks_pos[k]
            runs = _true_runs(combined, start)
            witness = None
            best_record = None
            for (i1, i2) in runs:
                res = assess(i1, i2)
                if res["reached"]:
                    witness = {"T": T, "sigma": list(sigma),
                               "interval": [float(ts[i1]), res["t_best"]],
                               "integral": res["best"]}
                    break
                if best_record is None or res["best"] > best_record["best"]:
                    best_record = {"interval": [float(ts[i1]), float(ts[i2])],
                                   **res}
            if witness is not None:
                found.append(witness)
            else:
                missing.append({
                    "T": T, "sigma": list(sigma),
                    "reason": ("no sign-compatible interval" if not runs
                               else "threshold unreached"),
                    "best": best_record,
                })

    witnesses_found = {"witness_intervals": found}
    if not missing:
        return Verdict(kind="thm31-1", status=HOLDS,
                       witnesses=witnesses_found, caveats=caveats,
                       parameters=params)
    t_max = t_ladder[-1]
    missing_at_largest = [m for m in missing if m["T"] == t_max]
    if missing_at_largest:
        return Verdict(kind="thm31-1", status=FAILS,
                       witnesses={"unwitnessed_patterns": missing_at_largest,
                                  **witnesses_found},
                       caveats=caveats + [
                           "some sign pattern admits no witness interval "
                           "for the largest start point probed"],
                       parameters=params)
    return Verdict(kind="thm31-1", status=INCONCLUSIVE,
                   witnesses={"unwitnessed_patterns": missing,
                              **witnesses_found},
                   caveats=caveats + [
                       "witnesses exist for the largest start point but "
                       "not for every smaller one; evidence is mixed"],
                   parameters=params)


def oscillation_check(sys: LinearSystem, *,
                      window_len: float = 100.0,
                      grid_points: int = 2001,
                      sup_tol: float = 1e-10,
                      ladder: Sequence[float] = (25.0, 50.0, 100.0, 200.0),
                      threshold: float = 50.0,
                      probe_tol: float = 1e-9) -> Verdict:
    """B_k identically zero + double divergence (kind "thm31-2").

    The identically-zero condition is tested as a sup over a dense grid
    through both computation routes; the divergence conditions on
    a_12 e^{-I} and C e^{I} run as ladder probes.  Holds requires both.
    """
    _require_reducible(sys)
    t0 = sys.t0
    ladder_abs = sorted(t0 + float(x) for x in ladder)
    hi = max(t0 + window_len, ladder_abs[-1])
    params = {"window_len": window_len, "grid_points": grid_points,
              "sup_tol": sup_tol, "ladder": [float(x) for x in ladder],
              "threshold": threshold}
    caveats = [EVIDENCE_CAVEAT]

    ts = np.linspace(t0, t0 + window_len, grid_points)
    viol = _sign_floor_violation(sys.entry(0, 1),
                                 np.linspace(t0, hi, grid_points))
    if viol is not None:
        return Verdict(kind="thm31-2", status=FAILS,
                       witnesses={"sign_violation": {
                           "entry": "a[1][2]", "t": viol[0],
                           "value": viol[1]}},
                       caveats=caveats + ["precondition a[1][2] >= 0 "
                                          "violated"],
                       parameters=params)

    sample_ts = ts[:: max(1, len(ts) // 200)]
    entry_scale = max(1.0, float(np.max(np.abs(sys.sample(sample_ts)))))
    tol_abs = sup_tol * entry_scale

    display = compute_abc(sys)
    identity = compute_abc_via_tilde(sys)
    sups = {}
    arg_worst = {"k": None, "t": None, "display": 0.0, "identity": 0.0}
    worst_val = -1.0
    skipped = 0
    for k in display.b_columns():
        d_vals, bad1 = _eval_grid(display.B[k], ts)
        i_vals, bad2 = _eval_grid(identity.B[k], ts)
        skipped += bad1 + bad2
        sup_d = float(np.nanmax(np.abs(d_vals))) \
            if not np.all(np.isnan(d_vals)) else math.inf
        sup_i = float(np.nanmax(np.abs(i_vals))) \
            if not np.all(np.isnan(i_vals)) else math.inf
        sups[f"B{k}"] = {"display": sup_d, "identity": sup_i}
        if math.isfinite(sup_d) and sup_d > worst_val:
            worst_val = sup_d
            idx = int(np.nanargmax(np.abs(d_vals)))
            arg_worst = {"k": k, "t": float(ts[idx]),
                         "display": float(d_vals[idx]),
                         "identity": float(i_vals[idx])}
    if skipped:
        caveats.append(f"{skipped} grid evaluations of B_k hit domain "
                       "errors and were excluded from the sup")

    display_zero = all(v["display"] <= tol_abs for v in sups.values())
    identity_zero = all(v["identity"] <= tol_abs for v in sups.values())
    zero_witness = {"sup_by_component": sups, "tolerance": tol_abs,
                    "grid": [t0, t0 + window_len, grid_points]}

    if not display_zero and not identity_zero:
        return Verdict(kind="thm31-2", status=FAILS,
                       witnesses={"nonzero_B": {**zero_witness,
                                                "worst_point": arg_worst}},
                       caveats=caveats,
                       parameters=params)
    if display_zero != identity_zero:
        diag = dual_route_report(sys, (t0, t0 + window_len), points=200)
        return Verdict(kind="thm31-2", status=INCONCLUSIVE,
                       witnesses={"route_disagreement": {
                           **zero_witness, "diagnostic": diag}},
                       caveats=caveats + [
                           "the two B_k computation routes disagree on the "
                           "identically-zero condition; " + diag["note"]],
                       parameters=params)

    a12 = sys.entry(0, 1)
    gap = CumulativeIntegral(display.A, t0, ladder_abs[-1])
    up = divergence_probe(lambda t: a12(t) * math.exp(-gap(t)),
                          t0, ladder_abs, threshold=threshold, tol=probe_tol)
    down = divergence_probe(lambda t: display.C(t) * math.exp(gap(t)),
                            t0, ladder_abs, threshold=threshold,
                            tol=probe_tol)
    witnesses = {"identically_zero_B": zero_witness,
                 "divergence": {"growth_weight": up.as_dict(),
                                "decay_weight": down.as_dict()}}
    if up.verdict == GROWING and down.verdict == GROWING:
        return Verdict(kind="thm31-2", status=HOLDS, witnesses=witnesses,
                       caveats=caveats, parameters=params)
    if up.verdict == "Bounded" or down.verdict == "Bounded":
        return Verdict(kind="thm31-2", status=FAILS, witnesses=witnesses,
                       caveats=caveats + ["at least one weighted integral "
                                          "looks bounded along the ladder"],
                       parameters=params)
    return Verdict(kind="thm31-2", status=INCONCLUSIVE, witnesses=witnesses,
                   caveats=caveats + ["ladder evidence mixed; extend the "
                                      "ladder or raise the threshold"],
                   parameters=params)


def positivity_stability_check(sys: LinearSystem,
                               inits: Optional[Sequence] = None, *,
                               window_len: float = 10.0,
                               grid_points: int = 501,
                               stability_ladder: Sequence[float] =
                               (100.0, 200.0, 400.0, 800.0),
                               threshold: float = 50.0,
                               slack_tol: float = 1e-9,
                               rtol: float = 1e-9,
                               atol: float = 1e-12) -> Verdict:
    """Nonnegative off-diagonals: growth bound + stability flags
    (kind "thm32").

    With a_jk >= 0 for j != k, each positive-initial solution obeys
    phi_k(t) >= phi_k(t0) exp(integral of a_kk) — nonoscillation
    evidence.  The diagonal integrals also feed two necessary
    conditions: bounded sup for Lyapunov stability and divergence to
    -infinity for asymptotic stability; violations are reported as
    NotLyapunovStable / NotAsymptoticallyStable flags.
    """
    n, t0 = sys.n, sys.t0
    if inits is None:
        inits = [np.ones(n)]
    inits = [np.asarray(v, dtype=float) for v in inits]
    for v in inits:
        if v.shape != (n,):
            raise ValueError(f"init must have {n} components")
        if np.any(v <= 0.0):
            raise ValueError("bound check requires positive initial "
                             "components")
    params = {"window_len": window_len, "grid_points": grid_points,
              "stability_ladder": [float(x) for x in stability_ladder],
              "threshold": threshold, "slack_tol": slack_tol,
              "n_inits": len(inits)}
    caveats = ["bound verified pointwise on a finite window grid"]

    ts = np.linspace(t0, t0 + window_len, grid_points)
    worst = {"value": math.inf, "entry": None, "t": None}
    for j in range(n):
        for k in range(n):
            if j == k:
                continue
            vals, _ = _eval_grid(sys.entry(j, k), ts)
            i = int(np.nanargmin(vals))
            if vals[i] < worst["value"]:
                worst = {"value": float(vals[i]),
                         "entry": f"a[{j + 1}][{k + 1}]",
                         "t": float(ts[i])}
    off_scale = max(1.0, abs(worst["value"]))
    if worst["value"] < -1e-12 * off_scale:
        return Verdict(kind="thm32", status=FAILS,
                       witnesses={"sign_violation": worst},
                       caveats=caveats + ["off-diagonal nonnegativity "
                                          "hypothesis violated"],
                       parameters=params)

    diag_cum = [cumulative_quad(sys.entry(k, k), ts) for k in range(n)]

    bound_records = []
    bound_violation = None
    for v in inits:
        traj = integrate_ode(sys.rhs, (t0, t0 + window_len), v,
                             rtol=rtol, atol=atol)
        if traj.escape is not None:
            return Verdict(
                kind="thm32", status=INCONCLUSIVE,
                witnesses={"integration_escape": {
                    "init": [float(x) for x in v],
                    "t_star": float(traj.escape.t_star)}},
                caveats=caveats + ["trajectory blew up numerically before "
                                   "the window end; bound not assessable"],
                parameters=params)
        phis = traj(ts)
        rec = {"init": [float(x) for x in v], "worst_slack": math.inf,
               "component": None, "t": None}
        for k in range(n):
            bound = v[k] * np.exp(diag_cum[k])
            slack = phis[:, k] - bound
            rel = slack / np.maximum(1.0, np.abs(bound))
            i = int(np.argmin(rel))
            if rel[i] < rec["worst_slack"]:
                rec.update(worst_slack=float(rel[i]), component=k + 1,
                           t=float(ts[i]))
        bound_records.append(rec)
        if rec["worst_slack"] < -slack_tol and bound_violation is None:
            bound_violation = rec
    if bound_violation is not None:
        return Verdict(kind="thm32", status=FAILS,
                       witnesses={"bound_violation": bound_violation,
                                  "bound_checks": bound_records},
                       caveats=caveats,
                       parameters=params)

    ladder_abs = sorted(t0 + float(x) for x in stability_ladder)
    flags = []
    lyap = {}
    asym = {}
    for k in range(n):
        fn = sys.entry(k, k)
        grow = divergence_probe(fn, t0, ladder_abs, threshold=threshold)
        decay = divergence_probe(lambda t, fn=fn: -fn(t), t0, ladder_abs,
                                 threshold=threshold)
        lyap[f"a{k + 1}{k + 1}"] = grow.as_dict()
        asym[f"a{k + 1}{k + 1}"] = decay.as_dict()
        if grow.verdict == GROWING and "NotLyapunovStable" not in flags:
            flags.append("NotLyapunovStable")
        if decay.verdict != GROWING and "NotAsymptoticallyStable" not in flags:
            flags.append("NotAsymptoticallyStable")

    witnesses = {
        "hypothesis": {"min_offdiagonal": worst["value"],
                       "entry": worst["entry"], "t": worst["t"]},
        "bound_checks": bound_records,
        "nonoscillatory_evidence": True,
        "stability": {"flags": flags,
                      "diagonal_growth": lyap,
                      "diagonal_decay": asym},
    }
    return Verdict(kind="thm32", status=HOLDS, witnesses=witnesses,
                   caveats=caveats + [EVIDENCE_CAVEAT +
                                      " (stability flags are ladder "
                                      "evidence)"],
                   parameters=params)


# ---------------------------------------------------------------------------
# empirical classification
# ---------------------------------------------------------------------------

@dataclass
class ClassificationReport:
    """Observed oscillation behavior of a bundle of solutions.

    label is OscillatoryEvidence | SuboscillatoryEvidence |
    NonoscillatoryEvidence | Mixed.  phi1_nonvanishing_indicator is the
    weaker nonvanishing reading through the first component only; the
    label itself uses the all-components reading.  theorem_verdicts is
    filled by report assembly, not by empirical_classify.
    """

    label: str
    solutions: list
    horizon: float
    min_zeros: int
    bundle_size: int
    seed: Optional[int]
    phi1_nonvanishing_indicator: bool
    caveats: list = field(default_factory=list)
    theorem_verdicts: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "solutions": self.solutions,
            "horizon": self.horizon,
            "min_zeros": self.min_zeros,
            "bundle_size": self.bundle_size,
            "seed": self.seed,
            "phi1_nonvanishing_indicator": self.phi1_nonvanishing_indicator,
            "caveats": list(self.caveats),
            "theorem_verdicts": dict(self.theorem_verdicts),
        }


def _default_bundle(n: int, size: int, seed: int):
    vecs = [np.eye(n)[i] for i in range(n)]
    rng = np.random.default_rng(seed)
    while len(vecs) < size:
        v = rng.normal(size=n)
        norm = float(np.linalg.norm(v))
        if norm > 1e-6:
            vecs.append(v / norm)
    return vecs


def _significant_zeros(traj, component: int, noise_abs: float) -> np.ndarray:
    """Zeros whose neighboring arches rise above the noise floor.

    Once a solution decays to the integrator's absolute-error scale the
    dense output wobbles around zero; those sign changes are artifacts.
    A zero is kept when the component, sampled at the midpoints of both
    neighboring arches, reaches max(1e-6 * current state norm,
    noise_abs) — a genuine crossing leaves significant magnitude on
    both sides, while the boundary where a decaying component enters
    the noise band has it on one side only.
    """
    zs = traj.zeros(component)
    if len(zs) == 0:
        return zs
    bounds = np.concatenate(([traj.t0], zs, [traj.t_end]))
    mids = 0.5 * (bounds[1:] + bounds[:-1])
    states = traj(mids)
    amps = np.abs(states[:, component])
    floors = np.maximum(1e-6 * np.max(np.abs(states), axis=1), noise_abs)
    sig = amps >= floors
    return np.array([z for i, z in enumerate(zs) if sig[i] and sig[i + 1]])


def empirical_classify(sys: LinearSystem,
                       inits: Optional[Sequence] = None, *,
                       horizon: float = 100.0,
                       min_zeros: int = 5,
                       seed: int = 0,
                       bundle_size: int = 8,
                       rtol: float = 1e-9,
                       atol: float = 1e-12) -> ClassificationReport:
    """Label the system's observed behavior from a bundle of solutions.

    A component counts as visibly oscillating when it shows at least
    min_zeros significant sign changes with the last one inside the
    final 10% of the horizon.  An identically-zero component counts as
    having zeros for the suboscillation reading (degenerately, every
    point is a zero) but never as visible oscillation of the first
    component.  Nonvanishing is judged relative to the current state
    norm (|phi_k(t)| >= 1e-6 * max_j |phi_j(t)|) and only on the window
    where the state norm still exceeds the integrator noise floor; a
    decaying solution that keeps its component ratios is nonvanishing
    evidence even though its absolute size underflows the tolerance.
    """
    n, t0 = sys.n, sys.t0
    if inits is None:
        inits = _default_bundle(n, max(bundle_size, 8), seed)
        seed_used: Optional[int] = seed
    else:
        inits = [np.asarray(v, dtype=float) for v in inits]
        if len(inits) < 8:
            raise ValueError("init bundle must contain at least 8 vectors")
        if np.linalg.matrix_rank(np.stack(inits)) < n:
            raise ValueError("init bundle must span the state space")
        seed_used = None
    caveats = [EVIDENCE_CAVEAT]

    late_mark = t0 + 0.9 * horizon
    sub_components = [0] + list(range(2, n))

    records = []
    osc_all = True
    subosc_all = True
    nonosc_some = False
    phi1_indicator = False
    unresolved_tails = 0
    for v in inits:
        traj = integrate_ode(sys.rhs, (t0, t0 + horizon), v,
                             rtol=rtol, atol=atol)
        scan = np.linspace(t0, traj.t_end, 400)
        phis = traj(scan)
        norms = np.max(np.abs(phis), axis=1)
        scale = max(float(np.max(norms)), 1e-300)
        noise_abs = 1e4 * atol * max(1.0, float(norms[0]))
        ident_zero = [bool(np.max(np.abs(phis[:, k])) <= 1e-9 * scale)
                      for k in range(n)]
        escaped = traj.escape is not None
        if escaped:
            caveats.append(f"solution from {list(map(float, v))} blew up "
                           f"numerically at t = {traj.escape.t_star:.6g}")

        # window on which the state is still numerically resolved
        res_idx = np.nonzero(norms >= noise_abs)[0]
        t_res = float(scan[res_idx[-1]]) if len(res_idx) else t0
        if not escaped and t_res < traj.t_end - 1e-6 * max(1.0, horizon):
            unresolved_tails += 1

        sig = {k: _significant_zeros(traj, k, noise_abs) for k in range(n)}
        counts = [len(sig[k]) for k in range(n)]
        lasts = [(float(sig[k][-1]) if counts[k] else None)
                 for k in range(n)]

        res_half_lo = t0 + 0.5 * (t_res - t0)
        half_mask = (scan >= res_half_lo) & (scan <= t_res + 1e-12)
        if np.any(half_mask):
            rel = (np.abs(phis[half_mask])
                   / np.maximum(norms[half_mask], 1e-300)[:, None])
            rel_min = [float(np.min(rel[:, k])) for k in range(n)]
        else:
            rel_min = [0.0] * n

        def visible(k: int) -> bool:
            return (not ident_zero[k] and counts[k] >= min_zeros
                    and lasts[k] is not None and lasts[k] >= late_mark)

        q_osc = visible(0)
        q_sub = any(ident_zero[k] or visible(k) for k in sub_components)
        window_ok = (not escaped and np.any(half_mask)
                     and (t_res - t0) >= 0.1 * horizon)
        no_late_zero = all(lasts[k] is None or lasts[k] < res_half_lo
                           for k in range(n))
        q_non = (window_ok and no_late_zero
                 and all(m >= 1e-6 for m in rel_min))
        q_phi1 = (window_ok
                  and (lasts[0] is None or lasts[0] < res_half_lo)
                  and rel_min[0] >= 1e-6)

        records.append({
            "init": [float(x) for x in v],
            "zero_counts": {f"phi{k + 1}": counts[k] for k in range(n)},
            "last_zero": {f"phi{k + 1}": lasts[k] for k in range(n)},
            "identically_zero": [f"phi{k + 1}" for k in range(n)
                                 if ident_zero[k]],
            "final_half_relative_min": {f"phi{k + 1}": rel_min[k]
                                        for k in range(n)},
            "resolved_to": t_res,
            "escaped": escaped,
            "oscillation_visible": q_osc,
            "suboscillation_visible": q_sub,
            "nonvanishing_all": q_non,
        })
        osc_all &= q_osc
        subosc_all &= q_sub
        nonosc_some |= q_non
        phi1_indicator |= q_phi1
    if unresolved_tails:
        caveats.append(f"{unresolved_tails} solutions decayed below the "
                       "integrator noise floor before the horizon; "
                       "nonvanishing was assessed on the resolved window")

    if osc_all:
        label = "OscillatoryEvidence"
    elif subosc_all:
        label = "SuboscillatoryEvidence"
    elif nonosc_some:
        label = "NonoscillatoryEvidence"
    else:
        label = "Mixed"
    return ClassificationReport(label=label, solutions=records,
                                horizon=horizon, min_zeros=min_zeros,
                                bundle_size=len(inits), seed=seed_used,
                                phi1_nonvanishing_indicator=phi1_indicator,
                                caveats=caveats)
