"""Two-dimensional systems and the scalar Riccati equation.

For phi' = P(t) phi with P 2x2, the substitution y = phi_2/phi_1 gives
the scalar Riccati equation y' + f y^2 + g y + h = 0 with f = p12,
g = p11 - p22 and h = -p21.  Zeros of phi_1 correspond to finite-time
escapes of y, which turns oscillation questions into integral
conditions on the coefficients:

* ``interval_oscillation_check`` — a first zero is forced inside [a, b]
  once the integral of min(p12 e^{-I}, -p21 e^{I}) reaches pi, where
  I(t) integrates p11 - p22 from a;
* ``horizon_oscillation_check`` — divergence of both weighted integrals
  forces zeros on every ray, probed over a finite ladder of horizons;
* ``zeta_subsolution`` — the linear comparison solution zeta' + g zeta
  + h = 0, usable as a lower barrier when f >= 0;
* ``comparison_probe`` — a two-equation comparison: if the weighted
  cumulative difference of the Riccati triples stays nonnegative and
  the minorant solution lives to the end of the window, the majorant
  cannot escape earlier.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .errors import SystemDefinitionError
from .integrate import (CumulativeIntegral, Trajectory, _HermiteDense,
                        cumulative_quad, divergence_probe, integrate_ode, quad)
from .system import LinearSystem
from .verdicts import EVIDENCE_CAVEAT, FAILS, HOLDS, INCONCLUSIVE, Verdict

__all__ = ["System2D", "RiccatiTriple", "riccati_of",
           "interval_oscillation_check", "horizon_oscillation_check",
           "zeta_subsolution", "comparison_probe"]


@dataclass(frozen=True)
class System2D:
    """phi' = [[p11, p12], [p21, p22]] phi."""

    p11: ex.Expr
    p12: ex.Expr
    p21: ex.Expr
    p22: ex.Expr
    t0: float = 0.0

    @classmethod
    def from_linear_system(cls, sys: LinearSystem) -> "System2D":
        if sys.n != 2:
            raise SystemDefinitionError(
                f"System2D requires n=2, got n={sys.n}")
        return cls(p11=sys.entry(0, 0), p12=sys.entry(0, 1),
                   p21=sys.entry(1, 0), p22=sys.entry(1, 1), t0=sys.t0)

    @classmethod
    def from_strings(cls, rows: Sequence[Sequence[str]],
                     t0: float = 0.0) -> "System2D":
        return cls.from_linear_system(LinearSystem.from_strings(rows, t0))

    def trace_gap(self) -> ex.Expr:
        """p11 - p22, the exponent driving the integral weights."""
        return self.p11 - self.p22

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return np.array([self.p11(t) * y[0] + self.p12(t) * y[1],
                         self.p21(t) * y[0] + self.p22(t) * y[1]])


@dataclass(frozen=True)
class RiccatiTriple:
    """Coefficients of y' + f y^2 + g y + h = 0."""

    f: ex.Expr
    g: ex.Expr
    h: ex.Expr

    @classmethod
    def from_strings(cls, f: str, g: str, h: str) -> "RiccatiTriple":
        return cls(f=ex.parse(f), g=ex.parse(g), h=ex.parse(h))

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        v = y[0]
        return np.array([-(self.f(t) * v * v + self.g(t) * v + self.h(t))])


def riccati_of(sys2d: System2D) -> RiccatiTriple:
    return RiccatiTriple(f=sys2d.p12, g=sys2d.trace_gap(),
                         h=ex.Num(0.0) - sys2d.p21)


def _grid_min(f, a: float, b: float, points: int):
    """(min value, argmin) of f over a uniform grid."""
    ts = np.linspace(a, b, points)
    best_v, best_t = math.inf, a
    for t in ts:
        v = f(float(t))
        if v < best_v:
            best_v, best_t = v, float(t)
    return best_v, best_t


def interval_oscillation_check(sys2d: System2D, interval,
                               *, quad_tol: float = 1e-9,
                               grid_points: int = 1000) -> Verdict:
    """Forced zero of phi_1 inside [a, b].

    Holds when p12 >= 0 on the interval and the integral of
    min(p12 e^{-I}, -p21 e^{I}) over [a, b] reaches pi (within quad_tol,
    boundary counts as reached).
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError(f"interval must satisfy a < b, got [{a}, {b}]")
    params = {"interval": [a, b], "quad_tol": quad_tol,
              "grid_points": grid_points}

    sign_floor = -1e-12
    min_p12, t_bad = _grid_min(sys2d.p12, a, b, grid_points)
    scale = max(1.0, abs(min_p12))
    if min_p12 < sign_floor * scale:
        return Verdict(kind="thm23", status=FAILS,
                       witnesses={"sign_violation": {
                           "entry": "p12", "t": t_bad, "value": min_p12}},
                       caveats=["sign condition p12 >= 0 violated on the "
                                "interval; the threshold condition was not "
                                "evaluated"],
                       parameters=params)

    gap_integral = CumulativeIntegral(sys2d.trace_gap(), a, b)

    def integrand(t: float) -> float:
        e = gap_integral(t)
        return min(sys2d.p12(t) * math.exp(-e), -sys2d.p21(t) * math.exp(e))

    value, err = quad(integrand, a, b, tol=quad_tol)
    witness = {"integral": value, "error_estimate": err,
               "threshold": math.pi, "interval": [a, b]}
    # reaching the threshold exactly counts as reaching it
    if value >= math.pi - quad_tol:
        return Verdict(kind="thm23", status=HOLDS,
                       witnesses={"threshold_comparison": witness},
                       caveats=[], parameters=params)
    if value + err >= math.pi - quad_tol:
        return Verdict(kind="thm23", status=INCONCLUSIVE,
                       witnesses={"threshold_comparison": witness},
                       caveats=["integral is within its own error estimate "
                                "of the pi threshold; tighten quad_tol"],
                       parameters=params)
    return Verdict(kind="thm23", status=FAILS,
                   witnesses={"threshold_comparison": witness},
                   caveats=["threshold not reached on this interval; a "
                            "larger interval may still reach it"],
                   parameters=params)


def horizon_oscillation_check(sys2d: System2D,
                              ladder: Sequence[float],
                              *, threshold: float = 50.0,
                              grid_points: int = 1000,
                              probe_tol: float = 1e-9) -> Verdict:
    """Zeros of phi_1 beyond every time: divergence of both weights.

    Probes the running integrals of p12 e^{-I} and -p21 e^{I} along a
    ladder of horizons; both must look divergent.
    """
    ladder = [float(x) for x in ladder]
    if len(ladder) < 4 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be at least 4 strictly increasing "
                         "horizons")
    t0 = sys2d.t0
    t_max = ladder[-1]
    params = {"ladder": ladder, "threshold": threshold,
              "grid_points": grid_points}

    sign_floor = -1e-12
    min_p12, t_bad = _grid_min(sys2d.p12, t0, t_max, grid_points)
    scale = max(1.0, abs(min_p12))
    if min_p12 < sign_floor * scale:
        return Verdict(kind="thm22", status=FAILS,
                       witnesses={"sign_violation": {
                           "entry": "p12", "t": t_bad, "value": min_p12}},
                       caveats=["sign condition p12 >= 0 violated on the "
                                "probed range"],
                       parameters=params)

    gap_integral = CumulativeIntegral(sys2d.trace_gap(), t0, t_max)
    up = divergence_probe(
        lambda t: sys2d.p12(t) * math.exp(-gap_integral(t)),
        t0, ladder, threshold=threshold, tol=probe_tol)
    down = divergence_probe(
        lambda t: -sys2d.p21(t) * math.exp(gap_integral(t)),
        t0, ladder, threshold=threshold, tol=probe_tol)
    witnesses = {"growth_weight": up.as_dict(), "decay_weight": down.as_dict()}

    if up.verdict == "GrowingBeyondThreshold" and down.verdict == "GrowingBeyondThreshold":
        return Verdict(kind="thm22", status=HOLDS, witnesses=witnesses,
                       caveats=[EVIDENCE_CAVEAT], parameters=params)
    if up.verdict == "Bounded" or down.verdict == "Bounded":
        return Verdict(kind="thm22", status=FAILS, witnesses=witnesses,
                       caveats=[EVIDENCE_CAVEAT,
                                "at least one weighted integral looks "
                                "bounded along the ladder"],
                       parameters=params)
    return Verdict(kind="thm22", status=INCONCLUSIVE, witnesses=witnesses,
                   caveats=[EVIDENCE_CAVEAT,
                            "ladder evidence mixed; extend the ladder or "
                            "raise the threshold"],
                   parameters=params)


def zeta_subsolution(triple: RiccatiTriple, zeta0: float, window,
                     *, grid_points: int = 400,
                     require_nonnegative_f: bool = True) -> Trajectory:
    """Solution of zeta' + g zeta + h = 0 as a 1-component Trajectory.

    With f >= 0 this is a lower barrier for the Riccati solution from
    the same initial value.  Built by the integrating factor, so it is
    immune to the quadratic blow-up of the full equation.
    """
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise ValueError(f"window must satisfy a < b, got [{a}, {b}]")
    if require_nonnegative_f:
        fmin, t_bad = _grid_min(triple.f, a, b, grid_points)
        if fmin < -1e-12 * max(1.0, abs(fmin)):
            raise ValueError(
                f"f must be nonnegative for the barrier property; "
                f"f({t_bad}) = {fmin}")

    g_integral = CumulativeIntegral(triple.g, a, b)
    ts = np.linspace(a, b, grid_points)
    weighted_h = cumulative_quad(
        lambda t: math.exp(g_integral(t)) * triple.h(t), ts)
    zetas = np.empty((grid_points, 1))
    dzetas = np.empty((grid_points, 1))
    for i, t in enumerate(ts):
        z = math.exp(-g_integral(float(t))) * (zeta0 - weighted_h[i])
        zetas[i, 0] = z
        dzetas[i, 0] = -(triple.g(float(t)) * z + triple.h(float(t)))
    return Trajectory(ts=ts, ys=zetas, dense=_HermiteDense(ts, zetas, dzetas),
                      escape=None)


def comparison_probe(minorant: RiccatiTriple, majorant: RiccatiTriple,
                     y2_init: float, gamma0: float, window,
                     *, grid_points: int = 400, hyp_tol: float = 1e-9,
                     rtol: float = 1e-9, atol: float = 1e-12) -> Verdict:
    """Escape-comparison between two scalar Riccati equations.

    minorant carries (f1, g1, h1), majorant (f2, g2, h2); the majorant
    solution y2 starts at y2_init and the minorant solution y1 at
    gamma0 >= y2_init.  Verified hypothesis = the weighted cumulative
    integral of (f1-f2) y2^2 + (g1-g2) y2 + (h1-h2) stays nonnegative,
    with weight exp of the running integral of f2 (eta1+eta2) + g2,
    where eta1, eta2 are linear comparison solutions started at
    2*y2(t0).  Conclusion = y1 survives to the end of the window.
    """
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise ValueError(f"window must satisfy a < b, got [{a}, {b}]")
    if gamma0 < y2_init:
        raise ValueError(
            f"gamma0 must be >= y2_init, got {gamma0} < {y2_init}")
    fmin, t_bad = _grid_min(minorant.f, a, b, grid_points)
    if fmin < -1e-12 * max(1.0, abs(fmin)):
        raise ValueError(
            f"minorant f must be nonnegative on the window; "
            f"f({t_bad}) = {fmin}")
    params = {"window": [a, b], "y2_init": y2_init, "gamma0": gamma0,
              "grid_points": grid_points, "hyp_tol": hyp_tol,
              "baseline_interpretation":
                  "unsubscripted f, g, h taken as the majorant coefficients "
                  "f2, g2, h2"}
    caveats = []

    y2_traj = integrate_ode(majorant.rhs, (a, b), np.array([y2_init]),
                            rtol=rtol, atol=atol)
    b_eff = y2_traj.t_end
    if y2_traj.escape is not None:
        b_eff = y2_traj.t_end
        caveats.append(
            f"majorant solution escaped at t = {y2_traj.escape.t_star:.6g}; "
            f"window shrunk to [{a:.6g}, {b_eff:.6g}]")
    if not b_eff > a:
        return Verdict(kind="thm21", status=INCONCLUSIVE, witnesses={},
                       caveats=caveats + ["majorant escaped immediately; "
                                          "nothing to compare"],
                       parameters=params)

    f2min, _ = _grid_min(majorant.f, a, b_eff, grid_points)
    if f2min < -1e-12 * max(1.0, abs(f2min)):
        caveats.append("majorant f is negative somewhere on the window, so "
                       "the linear comparison solutions are not certified "
                       "upper barriers; weight is heuristic there")

    eta_init = 2.0 * y2_init
    eta1 = zeta_subsolution(
        RiccatiTriple(f=minorant.f, g=minorant.g, h=minorant.h),
        eta_init, (a, b_eff), grid_points=grid_points,
        require_nonnegative_f=False)
    eta2 = zeta_subsolution(
        RiccatiTriple(f=majorant.f, g=majorant.g, h=majorant.h),
        eta_init, (a, b_eff), grid_points=grid_points,
        require_nonnegative_f=False)

    def weight_rate(t: float) -> float:
        return majorant.f(t) * (float(eta1(t)[0]) + float(eta2(t)[0])) \
            + majorant.g(t)

    k_integral = CumulativeIntegral(weight_rate, a, b_eff)

    def hyp_integrand(t: float) -> float:
        v = float(y2_traj(t)[0])
        d = ((minorant.f(t) - majorant.f(t)) * v * v
             + (minorant.g(t) - majorant.g(t)) * v
             + (minorant.h(t) - majorant.h(t)))
        return math.exp(k_integral(t)) * d

    ts = np.linspace(a, b_eff, grid_points)
    hyp_cum = cumulative_quad(hyp_integrand, ts)
    hyp_min = float(np.min(hyp_cum))
    hyp_scale = max(1.0, float(np.max(np.abs(hyp_cum))))
    hypothesis_verified = hyp_min >= -hyp_tol * hyp_scale
    hyp_witness = {"cumulative_min": hyp_min,
                   "argmin_t": float(ts[int(np.argmin(hyp_cum))]),
                   "cumulative_end": float(hyp_cum[-1]),
                   "verified": hypothesis_verified}

    y1_traj = integrate_ode(minorant.rhs, (a, b_eff), np.array([gamma0]),
                            rtol=rtol, atol=atol)
    conclusion_holds = y1_traj.escape is None
    concl_witness = {
        "survived_to": y1_traj.t_end,
        "escape_t": (None if y1_traj.escape is None
                     else float(y1_traj.escape.t_star)),
        "holds": conclusion_holds,
    }
    witnesses = {"hypothesis": hyp_witness, "conclusion": concl_witness}

    if hypothesis_verified and conclusion_holds:
        return Verdict(kind="thm21", status=HOLDS, witnesses=witnesses,
                       caveats=caveats, parameters=params)
    if hypothesis_verified and not conclusion_holds:
        return Verdict(kind="thm21", status=FAILS, witnesses=witnesses,
                       caveats=caveats + [
                           "hypothesis verified but the minorant solution "
                           "escaped first — this contradicts the comparison "
                           "principle; suspect numerical trouble or a "
                           "mis-specified pair"],
                       parameters=params)
    extra = ("conclusion holds, hypothesis not verified"
             if conclusion_holds else
             "neither hypothesis nor conclusion verified")
    return Verdict(kind="thm21", status=INCONCLUSIVE, witnesses=witnesses,
                   caveats=caveats + [extra], parameters=params)
