"""Reduction of an n-dimensional linear system to Riccati form.

Two layers live here:

* the quadratic Riccati system obtained from the substitution
  y_k = phi_{k+1} / phi_1, valid between zeros of phi_1, together with
  the reconstruction formulas mapping a Riccati trajectory back to the
  linear system, and the escape classifier (finite-time blow-up of y
  corresponds to the next zero of phi_1);

* the scalar reduction quantities A, B_k, C and the tilde-transformed
  coefficient matrix behind the sign-condition criteria.  A, B_k, C are
  computed by two independent routes — the direct display form and the
  identity route through the tilde coefficients.  The routes agree
  analytically for A and C; for B_k they differ by
  nu_k * sum_j (a_1j/a_12)(a_j2 - a_12), which vanishes when a_1k = a_12
  but not in general.  ``dual_route_report`` surfaces the disagreement
  as a diagnostic instead of hiding it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .errors import DomainError, SystemDefinitionError
from .integrate import Trajectory, _HermiteDense, quad
from .system import LinearSystem, ratio_expressions

__all__ = [
    "nu_expressions", "tilde_system", "ReducedCoefficients", "SplitExpr",
    "compute_abc", "compute_abc_via_tilde", "dual_route_report",
    "RiccatiSystem", "riccati_rhs", "reconstruct_phi",
    "EscapeReport", "escape_classify",
]


def _require_reducible(sys: LinearSystem):
    if sys.n < 3:
        raise SystemDefinitionError(
            f"reduction requires n >= 3, got n={sys.n}")


def nu_expressions(sys: LinearSystem) -> dict:
    """nu_k = 1 - a_1k/a_12 for k = 3..n (1-based keys)."""
    _require_reducible(sys)
    return {k: ex.Num(1.0) - mu for k, mu in ratio_expressions(sys).items()}


def tilde_system(sys: LinearSystem) -> LinearSystem:
    """Coefficient matrix of the transformed system.

    The transformed state is (phi_1, phi2_tilde, phi_3, ..., phi_n) with
    phi2_tilde = phi_2 - sum_k nu_k phi_k.  Row 1 carries a_12 in every
    column past the first; rows 3..n keep their first two entries.
    """
    _require_reducible(sys)
    n = sys.n
    a = sys.entry
    mu = ratio_expressions(sys)
    nu = {k: ex.Num(1.0) - mu[k] for k in mu}
    mu_prime = {k: ex.differentiate(mu[k]) for k in mu}

    row0 = [a(0, 0), a(0, 1)] + [a(0, 1)] * (n - 2)

    t21 = a(1, 0) - _ksum(nu[j] * a(j - 1, 0) for j in range(3, n + 1))
    t22 = a(1, 1) - _ksum(nu[j] * a(j - 1, 1) for j in range(3, n + 1))
    row1 = [t21, t22]
    for k in range(3, n + 1):
        core = (a(1, k - 1) + a(1, 1) * nu[k]
                - _ksum(nu[j] * (a(j - 1, k - 1) + a(j - 1, 1) * nu[k])
                        for j in range(3, n + 1)))
        row1.append(core + mu_prime[k])

    rows = [tuple(row0), tuple(row1)]
    for j in range(3, n + 1):
        row = [a(j - 1, 0), a(j - 1, 1)]
        for k in range(3, n + 1):
            row.append(a(j - 1, k - 1) + a(j - 1, 1) * nu[k])
        rows.append(tuple(row))
    return LinearSystem(n=n, t0=sys.t0, entries=tuple(rows), labels=None)


def _ksum(terms) -> ex.Expr:
    total: ex.Expr = ex.Num(0.0)
    for term in terms:
        total = total + term
    return total


@dataclass
class SplitExpr:
    """core(t) + deriv_sign * (d/dt ratio)(t) with a finite-difference
    fallback when the symbolic ratio derivative hits a removable
    singularity (e.g. an isolated zero of the denominator)."""

    core: ex.Expr
    ratio: ex.Expr
    ratio_deriv: ex.Expr
    deriv_sign: float
    fd_step: float = 1e-5

    def __call__(self, t: float) -> float:
        c = self.core(t)
        try:
            d = self.ratio_deriv(t)
        except DomainError:
            d = ex.central_difference(self.ratio, t, self.fd_step)
            if not math.isfinite(d):
                raise DomainError("overflow", t,
                                  detail="ratio derivative fallback") from None
        return c + self.deriv_sign * d

    def full_expr(self) -> ex.Expr:
        if self.deriv_sign >= 0:
            return self.core + self.ratio_deriv
        return self.core - self.ratio_deriv

    def __str__(self) -> str:
        return ex.to_string(self.full_expr())


@dataclass
class ReducedCoefficients:
    """The scalar quantities A, B_3..B_n, C for one computation route."""

    A: ex.Expr
    B: dict  # k (1-based, 3..n) -> SplitExpr
    C: ex.Expr
    route: str

    def b_columns(self) -> list:
        return sorted(self.B)


def compute_abc(sys: LinearSystem) -> ReducedCoefficients:
    """A, B_k, C in their direct display form."""
    _require_reducible(sys)
    n = sys.n
    a = sys.entry
    mu = ratio_expressions(sys)
    mu_prime = {k: ex.differentiate(mu[k]) for k in mu}

    A = (a(0, 0) - a(1, 1)
         - _ksum((a(0, j - 1) * a(j - 1, 1)) / a(0, 1)
                 for j in range(3, n + 1)))
    C = (-a(1, 0)
         - _ksum((a(0, j - 1) * a(j - 1, 0)) / a(0, 1)
                 for j in range(3, n + 1)))
    B = {}
    for k in range(3, n + 1):
        core = (a(1, 1) * mu[k] - a(1, k - 1)
                - _ksum(mu[j] * (a(j - 1, k - 1) - a(j - 1, 1))
                        + a(0, j - 1) * (ex.Num(1.0) - mu[k])
                        for j in range(3, n + 1)))
        B[k] = SplitExpr(core=core, ratio=mu[k], ratio_deriv=mu_prime[k],
                         deriv_sign=-1.0)
    return ReducedCoefficients(A=A, B=B, C=C, route="display")


def compute_abc_via_tilde(sys: LinearSystem) -> ReducedCoefficients:
    """A, B_k, C recovered from the tilde coefficients (identity route)."""
    _require_reducible(sys)
    n = sys.n
    a = sys.entry
    mu = ratio_expressions(sys)
    nu = {k: ex.Num(1.0) - mu[k] for k in mu}
    mu_prime = {k: ex.differentiate(mu[k]) for k in mu}

    t22 = a(1, 1) - _ksum(nu[j] * a(j - 1, 1) for j in range(3, n + 1))
    t21 = a(1, 0) - _ksum(nu[j] * a(j - 1, 0) for j in range(3, n + 1))
    A = a(0, 0) - t22 - _ksum(a(j - 1, 1) for j in range(3, n + 1))
    C = ex.Num(0.0) - t21 - _ksum(a(j - 1, 0) for j in range(3, n + 1))

    def t2k_core(k):
        return (a(1, k - 1) + a(1, 1) * nu[k]
                - _ksum(nu[j] * (a(j - 1, k - 1) + a(j - 1, 1) * nu[k])
                        for j in range(3, n + 1)))

    def tjk(j, k):
        return a(j - 1, k - 1) + a(j - 1, 1) * nu[k]

    B = {}
    for k in range(3, n + 1):
        # B_k = -t2k - sum_{j>=3, j!=k} tjk + (a11 - tkk) - A;
        # the mu_k' inside t2k enters with overall sign -1
        core = ex.Num(0.0) - t2k_core(k)
        for j in range(3, n + 1):
            if j != k:
                core = core - tjk(j, k)
        core = core + (a(0, 0) - tjk(k, k)) - A
        B[k] = SplitExpr(core=core, ratio=mu[k], ratio_deriv=mu_prime[k],
                         deriv_sign=-1.0)
    return ReducedCoefficients(A=A, B=B, C=C, route="tilde-identity")


_DUAL_ROUTE_NOTE = (
    "the display form of B_k and the tilde-identity route disagree beyond "
    "tolerance; they differ analytically by nu_k * sum_j (a_1j/a_12) * "
    "(a_j2 - a_12), so the display form is typo-suspect — downstream sign "
    "conditions use the display route but this diagnostic must be reported"
)


def dual_route_report(sys: LinearSystem, window=None, *, points: int = 200,
                      tol: float = 1e-9) -> dict:
    """Compare both A/B_k/C routes on a grid; diagnostic dict.

    fired=True means some component disagrees beyond tol relative to
    max(1, component scale).  Grid points where either route raises
    DomainError are skipped and counted.
    """
    if window is None:
        window = (sys.t0, sys.t0 + 10.0)
    ts = np.linspace(float(window[0]), float(window[1]), points)
    r1 = compute_abc(sys)
    r2 = compute_abc_via_tilde(sys)

    comps = {"A": (r1.A, r2.A), "C": (r1.C, r2.C)}
    for k in r1.b_columns():
        comps[f"B{k}"] = (r1.B[k], r2.B[k])

    max_rel = {}
    skipped = 0
    for name, (f1, f2) in comps.items():
        worst = 0.0
        scale = 1.0
        for t in ts:
            try:
                v1 = f1(float(t))
                v2 = f2(float(t))
            except DomainError:
                skipped += 1
                continue
            scale = max(scale, abs(v1), abs(v2))
            worst = max(worst, abs(v1 - v2))
        max_rel[name] = worst / scale
    fired = any(v > tol for v in max_rel.values())
    return {
        "fired": fired,
        "max_relative_difference": max_rel,
        "tolerance": tol,
        "skipped_points": skipped,
        "window": [float(window[0]), float(window[1])],
        "note": _DUAL_ROUTE_NOTE if fired else "routes agree within tolerance",
    }


# ---------------------------------------------------------------------------
# Riccati system and reconstruction
# ---------------------------------------------------------------------------

class RiccatiSystem:
    """RHS of the (n-1)-dimensional quadratic Riccati system.

    y_k' = a_{k+1,1} + sum_j a_{k+1,j+1} y_j
           - y_k (a_11 + sum_j a_{1,j+1} y_j),   k = 1..n-1.

    Valid while phi_1 of the source solution stays nonzero; finite-time
    escape of y marks the next zero of phi_1.
    """

    def __init__(self, sys: LinearSystem):
        _require_reducible(sys)
        self.source = sys
        self.dim = sys.n - 1

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        m = self.source.matrix(t)
        return m[1:, 0] + m[1:, 1:] @ y - y * (m[0, 0] + m[0, 1:] @ y)


def riccati_rhs(sys: LinearSystem) -> RiccatiSystem:
    return RiccatiSystem(sys)


def _refined_grid(ts: np.ndarray, max_dt: float) -> np.ndarray:
    """ts with every gap subdivided so no panel exceeds max_dt."""
    pts = [float(ts[0])]
    for i in range(len(ts) - 1):
        a, b = float(ts[i]), float(ts[i + 1])
        k = max(1, int(math.ceil((b - a) / max_dt)))
        for j in range(1, k + 1):
            pts.append(a + (b - a) * j / k)
    return np.array(pts)


def reconstruct_phi(sys: LinearSystem, ric_traj: Trajectory,
                    phi1_init: float, *, max_dt: float = 0.02) -> Trajectory:
    """Rebuild the linear-system solution from a Riccati trajectory.

    phi_1(t) = phi1_init * exp( integral of a_11 + sum_j a_{1,j+1} y_j ),
    phi_{k+1} = y_k phi_1.  phi1_init must be nonzero.  The output grid is
    the Riccati grid subdivided to panels of at most max_dt, so the dense
    interpolant stays accurate even when the Riccati solver took long
    steps over a quiet stretch.
    """
    _require_reducible(sys)
    if phi1_init == 0.0:
        raise ValueError("phi1_init must be nonzero")
    row0 = ex.compile_tuple(sys.entries[0])

    def growth(t: float) -> float:
        r = np.array(ex.guarded_call(row0, t))
        y = ric_traj(t)
        return float(r[0] + r[1:] @ y)

    ts = _refined_grid(ric_traj.ts, max_dt)
    g_cum = np.empty(len(ts))
    g_cum[0] = 0.0
    acc = 0.0
    for i in range(len(ts) - 1):
        v, _ = quad(growth, float(ts[i]), float(ts[i + 1]), tol=1e-12)
        acc += v
        g_cum[i + 1] = acc

    phi1 = phi1_init * np.exp(g_cum)
    ys_fine = ric_traj(ts)
    phis = np.empty((len(ts), sys.n))
    phis[:, 0] = phi1
    phis[:, 1:] = ys_fine * phi1[:, None]
    dphis = np.array([sys.matrix(float(t)) @ phis[i]
                      for i, t in enumerate(ts)])
    return Trajectory(ts=ts, ys=phis,
                      dense=_HermiteDense(ts, phis, dphis),
                      escape=None)


# ---------------------------------------------------------------------------
# escape classification
# ---------------------------------------------------------------------------

@dataclass
class EscapeReport:
    """Maximal-interval evidence for a Riccati trajectory.

    outcome is 'Escaped', 'Global' or 'Undetermined'.  f_trend reports
    the running integral F of sum_j a_{1,j+1} y_j near the end of the
    trajectory: at a genuine escape F must decrease without lower bound
    (otherwise the interval was not maximal).
    """

    outcome: str
    t_star: Optional[float]
    f_trend: dict = field(default_factory=dict)
    details: str = ""

    def as_dict(self) -> dict:
        return {"outcome": self.outcome, "t_star": self.t_star,
                "f_trend": dict(self.f_trend), "details": self.details}


def escape_classify(ric_traj: Trajectory, sys: LinearSystem,
                    requested_end: Optional[float] = None) -> EscapeReport:
    """Classify a Riccati trajectory as Escaped / Global / Undetermined."""
    _require_reducible(sys)
    row0 = ex.compile_tuple(sys.entries[0])

    def coupling(t: float) -> float:
        r = np.array(ex.guarded_call(row0, t))
        y = ric_traj(t)
        return float(r[1:] @ y)

    ts = ric_traj.ts
    F = np.empty(len(ts))
    F[0] = 0.0
    acc = 0.0
    for i in range(len(ts) - 1):
        v, _ = quad(coupling, float(ts[i]), float(ts[i + 1]), tol=1e-10)
        acc += v
        F[i + 1] = acc

    t_lo, t_hi = float(ts[0]), float(ts[-1])
    early_cut = t_lo + 0.9 * (t_hi - t_lo)
    early = F[ts <= early_cut]
    f_end = float(F[-1])
    f_min_early = float(np.min(early)) if len(early) else f_end
    tail = F[-min(5, len(F)):]
    decreasing_tail = bool(np.all(np.diff(tail) < 0)) if len(tail) > 1 else False
    unbounded = decreasing_tail and (f_end <= f_min_early - 3.0)
    trend = {
        "f_end": f_end,
        "f_min_early": f_min_early,
        "decreasing_tail": decreasing_tail,
        "unbounded_below_evidence": unbounded,
    }

    if ric_traj.escape is not None:
        detail = ("running integral F decreasing without lower bound near "
                  "t_star" if unbounded else
                  "escape flagged but F-trend did not corroborate; inspect")
        return EscapeReport(outcome="Escaped",
                            t_star=float(ric_traj.escape.t_star),
                            f_trend=trend, details=detail)
    if requested_end is None or t_hi >= requested_end - 1e-9 * max(1.0, abs(requested_end)):
        return EscapeReport(outcome="Global", t_star=None, f_trend=trend,
                            details="trajectory reached the requested horizon")
    return EscapeReport(outcome="Undetermined", t_star=None, f_trend=trend,
                        details="trajectory ended early without a clean escape")
