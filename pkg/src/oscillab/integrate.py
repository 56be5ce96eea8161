"""Numerical engines: adaptive ODE integration and adaptive quadrature.

The ODE side is an embedded Runge-Kutta 5(4) pair with a quartic dense
interpolant.  Zero crossings of requested components are located by sign
change on the dense output and refined by bisection; tangential touches
(no sign change) are excluded.  Finite-time blow-up ("escape") is
reported only when the value threshold and step-size collapse occur
together, which separates genuine escape from plain stiffness.

The quadrature side is adaptive Gauss-Kronrod 7/15 with worst-interval
subdivision, plus a cumulative (running-integral) mode and a divergence
ladder probe used by the infinite-horizon criteria.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, IntegrationError, QuadratureError

__all__ = [
    "Trajectory", "Escape", "integrate_ode",
    "quad", "cumulative_quad", "CumulativeIntegral",
    "divergence_probe", "DivergenceLadder",
    "DEFAULT_REL_TOL", "DEFAULT_ABS_TOL",
]

DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-12

# ---------------------------------------------------------------------------
# Runge-Kutta 5(4) tableau (Dormand-Prince) with dense-output coefficients
# ---------------------------------------------------------------------------

_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
# fifth-order minus fourth-order weights: local error estimator
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])
# quartic interpolant coefficients
_P = np.array([
    [1, -8048581381 / 2820520608, 8663915743 / 2820520608,
     -12715105075 / 11282082432],
    [0, 0, 0, 0],
    [0, 131558114200 / 32700410799, -68118460800 / 10900136933,
     87487479700 / 32700410799],
    [0, -1754552775 / 470086768, 14199869525 / 1410260304,
     -10690763975 / 1880347072],
    [0, 127303824393 / 49829197408, -318862633887 / 49829197408,
     701980252875 / 199316789632],
    [0, -282668133 / 205662961, 2019193451 / 616988883,
     -1453857185 / 822651844],
    [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
_ZERO_SEPARATION = 1e-8


@dataclass(frozen=True)
class Escape:
    """Finite-time blow-up marker: value threshold + step collapse."""
    t_star: float
    reason: str
    y_norm: float


class _RKDense:
    """Per-step quartic interpolants from the stored stage values."""

    def __init__(self, ts, ys, hs, ks):
        self.ts = ts          # (N+1,)
        self.ys = ys          # (N+1, m)
        self.hs = hs          # (N,)
        self.ks = ks          # (N, 7, m)

    def step_index(self, t: float) -> int:
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        return min(max(i, 0), len(self.hs) - 1)

    def eval(self, t: float) -> np.ndarray:
        i = self.step_index(t)
        # snap to stored samples so sample times reproduce exactly
        if t == self.ts[i]:
            return self.ys[i].copy()
        if t == self.ts[i + 1]:
            return self.ys[i + 1].copy()
        x = (t - self.ts[i]) / self.hs[i]
        p = np.array([x, x * x, x ** 3, x ** 4])
        return self.ys[i] + self.hs[i] * (self.ks[i].T @ (_P @ p))

    def eval_on_step(self, i: int, thetas: np.ndarray) -> np.ndarray:
        """Values on step i at relative positions thetas, shape (len, m)."""
        pm = np.vstack([thetas, thetas ** 2, thetas ** 3, thetas ** 4])
        return self.ys[i] + self.hs[i] * ((_P @ pm).T @ self.ks[i])


class _HermiteDense:
    """Piecewise cubic Hermite interpolants from samples and derivatives."""

    def __init__(self, ts, ys, dys):
        self.ts = ts
        self.ys = ys
        self.dys = dys
        self.hs = np.diff(ts)

    def step_index(self, t: float) -> int:
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        return min(max(i, 0), len(self.hs) - 1)

    def eval(self, t: float) -> np.ndarray:
        i = self.step_index(t)
        if t == self.ts[i]:
            return self.ys[i].copy()
        if t == self.ts[i + 1]:
            return self.ys[i + 1].copy()
        h = self.hs[i]
        s = (t - self.ts[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (h00 * self.ys[i] + h * h10 * self.dys[i]
                + h01 * self.ys[i + 1] + h * h11 * self.dys[i + 1])

    def eval_on_step(self, i: int, thetas: np.ndarray) -> np.ndarray:
        h = self.hs[i]
        s = thetas
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (np.outer(h00, self.ys[i]) + h * np.outer(h10, self.dys[i])
                + np.outer(h01, self.ys[i + 1]) + h * np.outer(h11, self.dys[i + 1]))


@dataclass
class Trajectory:
    """Dense solution of an ODE initial-value problem.

    Attributes
    ----------
    ts : ndarray, shape (N+1,)
        Accepted sample times, strictly increasing.
    ys : ndarray, shape (N+1, m)
        Solution samples.
    escape : Escape or None
        Set when integration ended in finite-time blow-up.
    step_errors : ndarray, shape (N,)
        Scaled local error-norm estimate of each accepted step.
    """

    ts: np.ndarray
    ys: np.ndarray
    dense: object
    escape: Optional[Escape] = None
    step_errors: Optional[np.ndarray] = None
    _zero_cache: dict = field(default_factory=dict, repr=False)

    # -- basic accessors -------------------------------------------------
    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def dim(self) -> int:
        return self.ys.shape[1]

    @property
    def n_steps(self) -> int:
        return len(self.ts) - 1

    @property
    def status(self) -> str:
        return "escaped" if self.escape is not None else "completed"

    def __call__(self, t):
        """Dense-output evaluation; scalar t -> (m,), array t -> (len, m)."""
        if np.ndim(t) == 0:
            return self._eval_scalar(float(t))
        return np.array([self._eval_scalar(float(x)) for x in np.asarray(t)])

    def _eval_scalar(self, t: float) -> np.ndarray:
        lo, hi = self.ts[0], self.ts[-1]
        pad = 1e-12 * max(1.0, abs(lo), abs(hi))
        if t < lo - pad or t > hi + pad:
            raise ValueError(f"t={t} outside trajectory range [{lo}, {hi}]")
        return self.dense.eval(min(max(t, lo), hi))

    def component(self, index: int) -> Callable[[float], float]:
        return lambda t: float(self._eval_scalar(t)[index])

    # -- zero crossings ---------------------------------------------------
    def zeros(self, component: int, refine_tol: float = 1e-12) -> np.ndarray:
        """Refined times of sign changes of one component (cached)."""
        if component not in self._zero_cache:
            self._zero_cache[component] = self._scan_zeros(component, refine_tol)
        return self._zero_cache[component]

    def count_zeros(self, component: int) -> int:
        return len(self.zeros(component))

    def first_zero(self, component: int) -> Optional[float]:
        z = self.zeros(component)
        return float(z[0]) if len(z) else None

    def _scan_zeros(self, component: int, refine_tol: float) -> np.ndarray:
        # stream of subsamples; only completed sign changes count, so
        # tangential touches and identically-zero components yield nothing
        thetas = np.linspace(0.0, 1.0, 9)
        found = []
        last_t = None
        last_v = 0.0
        zero_seen = None  # first exactly-zero sample since the last nonzero one
        for i in range(self.n_steps):
            block = self.dense.eval_on_step(i, thetas)[:, component]
            tl = self.ts[i]
            h = self.ts[i + 1] - self.ts[i]
            for j in range(0 if i == 0 else 1, len(thetas)):
                t = tl + thetas[j] * h
                v = float(block[j])
                if v == 0.0:
                    if zero_seen is None:
                        zero_seen = t
                    continue
                if last_t is not None and (last_v < 0.0) != (v < 0.0):
                    if zero_seen is not None:
                        found.append(zero_seen)
                    else:
                        found.append(self._bisect(component, last_t, t,
                                                  last_v, refine_tol))
                last_t, last_v = t, v
                zero_seen = None
        if not found:
            return np.empty(0)
        found = np.sort(np.array(found))
        # merge refinements closer than the separation floor
        merged = [found[0]]
        for t in found[1:]:
            if t - merged[-1] > _ZERO_SEPARATION * max(1.0, abs(t)):
                merged.append(t)
        return np.array(merged)

    def _bisect(self, component, a, b, fa, tol) -> float:
        for _ in range(200):
            if b - a <= tol * max(1.0, abs(b)):
                break
            m = 0.5 * (a + b)
            fm = float(self.dense.eval(m)[component])
            if fm == 0.0:
                return m
            if (fa < 0) == (fm < 0):
                a, fa = m, fm
            else:
                b = m
        return 0.5 * (a + b)


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x)))


def _initial_step(rhs, t0, y0, f0, scale, span):
    d0 = _rms(y0 / scale)
    d1 = _rms(f0 / scale)
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span)
    try:
        f1 = rhs(t0 + h0, y0 + h0 * f0)
        d2 = _rms((f1 - f0) / scale) / h0
    except (DomainError, FloatingPointError):
        return max(1e-6, 1e-4 * span)
    dmax = max(d1, d2)
    h1 = (0.01 / dmax) ** 0.2 if dmax > 1e-15 else max(1e-6, h0 * 1e3)
    return min(100 * h0, h1, span)


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t_span,
    y0,
    *,
    rtol: float = DEFAULT_REL_TOL,
    atol: float = DEFAULT_ABS_TOL,
    max_step: float = math.inf,
    fixed_step: Optional[float] = None,
    events: Sequence[int] = (),
    blow_up_threshold: float = 1e8,
    step_collapse: float = 1e-12,
    max_steps: int = 1_000_000,
) -> Trajectory:
    """Integrate y' = rhs(t, y) over t_span = (t0, t_end), t_end > t0.

    Returns a :class:`Trajectory`.  Blow-up sets ``escape`` and ends the
    trajectory early; it never raises.  Stiffness without blow-up (step
    collapse while the solution is moderate) raises IntegrationError.
    ``events`` lists component indices whose zero crossings are located
    eagerly.  ``fixed_step`` disables adaptivity (used for order tests).
    """
    t0, t_end = float(t_span[0]), float(t_span[1])
    if not t_end > t0:
        raise ValueError("t_span must satisfy t_end > t0")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1:
        raise ValueError("y0 must be one-dimensional")
    m = len(y)

    ts = [t0]
    ys = [y.copy()]
    hs: list = []
    ks: list = []
    errs: list = []
    escape = None

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        f0 = rhs(t0, y)
        f0 = np.asarray(f0, dtype=float)
        if f0.shape != y.shape:
            raise ValueError("rhs shape mismatch")
        scale0 = atol + rtol * np.abs(y)
        if fixed_step is not None:
            h = float(fixed_step)
        else:
            h = _initial_step(rhs, t0, y, f0, scale0, t_end - t0)
            h = min(h, max_step)

        t = t0
        k = np.empty((7, m))
        k[0] = f0
        n_accepted = 0
        n_attempts = 0

        while t < t_end:
            n_attempts += 1
            if n_attempts > max_steps:
                raise IntegrationError(
                    f"exceeded {max_steps} step attempts at t={t}")

            collapse_scale = step_collapse * max(1.0, abs(t))
            if fixed_step is None and h < collapse_scale:
                ynorm = float(np.max(np.abs(y)))
                if ynorm > blow_up_threshold:
                    escape = Escape(t_star=t, reason="blow_up", y_norm=ynorm)
                    break
                raise IntegrationError(
                    f"step size collapsed at t={t} without blow-up "
                    f"(|y|={ynorm:.3e}); problem too stiff at this tolerance")

            h_here = min(h, t_end - t)
            step_failed = False
            try:
                for i in range(1, 7):
                    yi = y + h_here * (k[:i].T @ _A[i, :i])
                    k[i] = rhs(t + _C[i] * h_here, yi)
            except DomainError:
                step_failed = True

            if not step_failed:
                y_new = y + h_here * (_B @ k)
                err_vec = h_here * (_E @ k)
                if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_vec))):
                    step_failed = True

            if step_failed:
                if fixed_step is not None:
                    raise IntegrationError(
                        f"rhs not evaluable/finite at fixed step near t={t}")
                h = h_here * 0.3
                continue

            if fixed_step is not None:
                err_norm = 0.0
                accept = True
            else:
                sc = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
                err_norm = _rms(err_vec / sc)
                accept = err_norm <= 1.0

            if accept:
                k_stored = k.copy()
                t_new = t + h_here
                ts.append(t_new)
                ys.append(y_new.copy())
                hs.append(h_here)
                ks.append(k_stored)
                errs.append(err_norm)
                n_accepted += 1
                # FSAL: last stage is the derivative at the new point
                k[0] = k_stored[6]
                y = y_new
                t = t_new
                if fixed_step is None:
                    factor = _SAFETY * err_norm ** -0.2 if err_norm > 0 else _MAX_FACTOR
                    h = h_here * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
                    h = min(h, max_step)
                    ynorm = float(np.max(np.abs(y)))
                    if (ynorm > blow_up_threshold
                            and h < step_collapse * max(1.0, abs(t))):
                        escape = Escape(t_star=t, reason="blow_up", y_norm=ynorm)
                        break
            else:
                factor = _SAFETY * err_norm ** -0.2
                h = h_here * max(_MIN_FACTOR, min(1.0, factor))

    traj = Trajectory(
        ts=np.array(ts),
        ys=np.array(ys),
        dense=_RKDense(np.array(ts), np.array(ys), np.array(hs), np.array(ks)),
        escape=escape,
        step_errors=np.array(errs),
    )
    for comp in events:
        traj.zeros(comp)
    return traj


# ---------------------------------------------------------------------------
# Gauss-Kronrod 7/15 adaptive quadrature
# ---------------------------------------------------------------------------

# Kronrod-15 nodes on [-1, 1] (symmetric; odd indices are the Gauss-7 nodes)
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _eval_nudged(f, x: float, width: float) -> float:
    """Evaluate f(x); nudge off isolated singular points."""
    try:
        return f(x)
    except DomainError:
        pass
    for eps in (1e-13, 1e-10):
        delta = eps * max(width, abs(x), 1.0)
        for xx in (x + delta, x - delta):
            try:
                return f(xx)
            except DomainError:
                continue
    raise QuadratureError(f"integrand not evaluable near x={x}")


def _gk15(f, a: float, b: float):
    """One Gauss-Kronrod 7/15 panel: (kronrod_value, |K15-G7|)."""
    xm = 0.5 * (a + b)
    xr = 0.5 * (b - a)
    fv = np.array([_eval_nudged(f, xm + xr * x, b - a) for x in _XGK])
    if not np.all(np.isfinite(fv)):
        raise QuadratureError(f"integrand not finite inside [{a}, {b}]")
    k = xr * float(_WGK @ fv)
    g = xr * float(_WG @ fv[1::2])
    return k, abs(k - g)


def _max_subdivisions(override: Optional[int]) -> int:
    if override is not None:
        return override
    env = os.environ.get("OSCILLAB_MAX_SUBDIV")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 4000


def quad(f, a: float, b: float, *, tol: float = 1e-10,
         max_subdiv: Optional[int] = None):
    """Adaptive integral of f over [a, b].

    Returns (value, error_estimate) with error_estimate <= tol*max(1,|value|)
    on success; raises QuadratureError after the subdivision cap
    (default 4000, overridable by the OSCILLAB_MAX_SUBDIV environment
    variable or the max_subdiv argument).
    """
    a, b = float(a), float(b)
    if a == b:
        return 0.0, 0.0
    if b < a:
        v, e = quad(f, b, a, tol=tol, max_subdiv=max_subdiv)
        return -v, e
    cap = _max_subdivisions(max_subdiv)
    v, e = _gk15(f, a, b)
    panels = [(-e, a, b, v, e)]
    total_v, total_e = v, e
    import heapq
    heapq.heapify(panels)
    while total_e > tol * max(1.0, abs(total_v)) and len(panels) < cap:
        _, pa, pb, pv, pe = heapq.heappop(panels)
        pm = 0.5 * (pa + pb)
        v1, e1 = _gk15(f, pa, pm)
        v2, e2 = _gk15(f, pm, pb)
        total_v += v1 + v2 - pv
        total_e += e1 + e2 - pe
        heapq.heappush(panels, (-e1, pa, pm, v1, e1))
        heapq.heappush(panels, (-e2, pm, pb, v2, e2))
    if total_e > tol * max(1.0, abs(total_v)):
        raise QuadratureError(
            f"no convergence after {cap} subdivisions on [{a}, {b}]: "
            f"value={total_v!r} error={total_e!r}")
    return total_v, total_e


def cumulative_quad(f, grid, *, tol: float = 1e-12,
                    max_subdiv: Optional[int] = None) -> np.ndarray:
    """Running integral of f from grid[0], evaluated at every grid point.

    Single pass: consecutive panels are integrated once and prefix-summed,
    so values[i+1] - values[i] is exactly the panel integral.
    """
    grid = np.asarray(grid, dtype=float)
    if len(grid) < 1:
        raise ValueError("empty grid")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    out = np.empty(len(grid))
    out[0] = 0.0
    acc = 0.0
    for i in range(len(grid) - 1):
        v, _ = quad(f, grid[i], grid[i + 1], tol=tol, max_subdiv=max_subdiv)
        acc += v
        out[i + 1] = acc
    return out


class CumulativeIntegral:
    """F(t) = integral of f from t0 to t, evaluable at arbitrary t.

    Precomputes panel prefix sums on [t0, t_max]; each call finishes with
    a single in-panel Gauss-Kronrod evaluation.
    """

    def __init__(self, f, t0: float, t_max: float, *,
                 panel_width: float = 0.25, tol: float = 1e-12):
        if not t_max > t0:
            raise ValueError("t_max must exceed t0")
        self.f = f
        self.t0 = float(t0)
        self.t_max = float(t_max)
        n = max(8, int(math.ceil((t_max - t0) / panel_width)))
        self.breaks = np.linspace(t0, t_max, n + 1)
        self.prefix = cumulative_quad(f, self.breaks, tol=tol)

    def __call__(self, t: float) -> float:
        t = float(t)
        pad = 1e-9 * max(1.0, abs(self.t_max))
        if t < self.t0 - pad or t > self.t_max + pad:
            raise ValueError(f"t={t} outside [{self.t0}, {self.t_max}]")
        t = min(max(t, self.t0), self.t_max)
        i = int(np.searchsorted(self.breaks, t, side="right")) - 1
        i = min(max(i, 0), len(self.breaks) - 2)
        if t == self.breaks[i]:
            return float(self.prefix[i])
        v, _ = _gk15(self.f, float(self.breaks[i]), t)
        return float(self.prefix[i] + v)


# ---------------------------------------------------------------------------
# divergence ladder
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceLadder:
    """Cumulative integrals at increasing horizons with a growth verdict.

    verdict is 'GrowingBeyondThreshold' | 'Bounded' | 'Mixed'.
    """

    horizons: tuple
    values: tuple
    verdict: str
    threshold: float

    def as_dict(self) -> dict:
        return {
            "horizons": list(self.horizons),
            "values": list(self.values),
            "verdict": self.verdict,
            "threshold": self.threshold,
        }


def divergence_probe(f, t0: float, horizons: Sequence[float], *,
                     threshold: float = 50.0, tol: float = 1e-9,
                     max_subdiv: Optional[int] = None) -> DivergenceLadder:
    """Evidence ladder for divergence of the integral of f from t0.

    One cumulative quadrature pass over sorted horizons.  Growing
    (evidence of divergence) means the last three values are strictly
    increasing with the final value above the threshold; Bounded means
    the values stay at or below the threshold and are either nonincreasing
    throughout or have plateaued; anything else is Mixed.  Evidence, not
    proof: the report always concerns the finite horizons probed.
    """
    hz = sorted(float(h) for h in horizons)
    if len(hz) < 3:
        raise ValueError("need at least 3 horizons")
    if hz[0] <= t0:
        raise ValueError("horizons must exceed t0")
    grid = np.array([t0] + hz)
    vals = cumulative_quad(f, grid, tol=min(tol, 1e-9), max_subdiv=max_subdiv)[1:]

    growing = vals[-3] < vals[-2] < vals[-1] and vals[-1] > threshold
    nonincreasing = bool(np.all(np.diff(vals) <= 0))
    plateaued = abs(vals[-1] - vals[-2]) <= max(1e-9, 1e-6 * max(1.0, abs(vals[-1])))
    below = bool(np.all(vals <= threshold))
    if growing:
        verdict = "GrowingBeyondThreshold"
    elif below and (nonincreasing or plateaued):
        verdict = "Bounded"
    else:
        verdict = "Mixed"
    return DivergenceLadder(horizons=tuple(hz), values=tuple(float(v) for v in vals),
                            verdict=verdict, threshold=threshold)
