"""Linear ODE systems phi' = A(t) phi with expression-valued coefficients.

A system definition is a JSON or TOML document:

    {"n": 3, "t0": 0.0,
     "a": [["0", "1", "1"], ["-1", "0", "0"], ["-1", "0", "0"]],
     "labels": ["phi1", "phi2", "phi3"]}        # labels optional

``n`` >= 2; two-dimensional systems are accepted but only the 2-D checks
apply to them.  Coefficients are strings in the expression grammar of
:mod:`oscillab.expr`; indices in error messages are 1-based to match the
usual a_jk notation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import expr as ex
from .errors import DomainError, ParseError, SystemDefinitionError

__all__ = [
    "LinearSystem", "load_system", "RatioReport", "validate_ratios",
    "ABSOLUTE_CONTINUITY_CAVEAT",
]

#: Standing caveat attached to every ratio report and ratio-based verdict:
#: local integrability and absolute continuity of the coefficient ratios
#: are hypotheses a finite grid cannot verify.
ABSOLUTE_CONTINUITY_CAVEAT = (
    "absolute continuity of the ratio functions a_1k/a_12 is assumed, "
    "not verified (grid evidence only)"
)


@dataclass(frozen=True)
class LinearSystem:
    """n-dimensional first-order linear system phi' = A(t) phi."""

    n: int
    t0: float
    entries: tuple  # n x n tuple of tuples of Expr
    labels: Optional[tuple] = None

    def entry(self, row: int, col: int) -> ex.Expr:
        """Coefficient expression, 0-based indices."""
        return self.entries[row][col]

    @cached_property
    def _flat_fn(self):
        flat = [e for row in self.entries for e in row]
        return ex.compile_tuple(flat)

    def matrix(self, t: float) -> np.ndarray:
        """Evaluate A(t); raises DomainError naming the singular entry."""
        try:
            flat = ex.guarded_call(self._flat_fn, t)
        except DomainError:
            self._locate_failure(t)
            raise  # pragma: no cover - _locate_failure always raises
        arr = np.array(flat, dtype=float).reshape(self.n, self.n)
        if not np.all(np.isfinite(arr)):
            self._locate_failure(t)
        return arr

    def _locate_failure(self, t: float):
        for j, row in enumerate(self.entries):
            for k, e in enumerate(row):
                try:
                    v = e(t)
                except DomainError as err:
                    raise DomainError(err.kind, t,
                                      detail=f"entry a[{j + 1}][{k + 1}]") from None
                if not math.isfinite(v):
                    raise DomainError("overflow", t,
                                      detail=f"entry a[{j + 1}][{k + 1}]")
        raise DomainError("overflow", t, detail="matrix evaluation")

    def sample(self, ts: Sequence[float]) -> np.ndarray:
        """Coefficient tensor with shape (len(ts), n, n)."""
        return np.array([self.matrix(float(t)) for t in ts])

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.matrix(t) @ y

    def label(self, index: int) -> str:
        if self.labels is not None:
            return self.labels[index]
        return f"phi{index + 1}"

    def as_dict(self) -> dict:
        doc = {
            "n": self.n,
            "t0": self.t0,
            "a": [[ex.to_string(e) for e in row] for row in self.entries],
        }
        if self.labels is not None:
            doc["labels"] = list(self.labels)
        return doc

    @classmethod
    def from_strings(cls, a: Sequence[Sequence[str]], t0: float = 0.0,
                     labels: Optional[Sequence[str]] = None) -> "LinearSystem":
        return _build(len(a), float(t0), a, labels)


def _build(n, t0, a, labels) -> LinearSystem:
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise SystemDefinitionError(f"n must be an integer >= 2, got {n!r}")
    if len(a) != n:
        raise SystemDefinitionError(
            f"a must have {n} rows for n={n}, got {len(a)}")
    rows = []
    for j, row in enumerate(a):
        if len(row) != n:
            raise SystemDefinitionError(
                f"row {j + 1} of a must have {n} entries, got {len(row)}")
        parsed = []
        for k, s in enumerate(row):
            if not isinstance(s, str):
                raise SystemDefinitionError(
                    f"entry a[{j + 1}][{k + 1}] must be a string, got {type(s).__name__}")
            try:
                parsed.append(ex.parse(s))
            except ParseError as err:
                raise SystemDefinitionError(
                    f"entry a[{j + 1}][{k + 1}]: {err}") from None
        rows.append(tuple(parsed))
    if labels is not None:
        labels = tuple(str(x) for x in labels)
        if len(labels) != n:
            raise SystemDefinitionError(
                f"labels must have {n} entries, got {len(labels)}")
    return LinearSystem(n=n, t0=t0, entries=tuple(rows), labels=labels)


def load_system(source) -> LinearSystem:
    """Load a system definition from a path (JSON/TOML) or a dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise SystemDefinitionError(f"no such file: {path}")
        text = path.read_text()
        if path.suffix.lower() == ".toml":
            doc = _parse_toml(text, path)
        else:
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as err:
                if path.suffix.lower() == ".json":
                    raise SystemDefinitionError(f"{path}: invalid JSON: {err}") from None
                doc = _parse_toml(text, path)
    elif isinstance(source, dict):
        doc = source
    else:
        raise SystemDefinitionError(
            f"cannot load a system from {type(source).__name__}")

    if not isinstance(doc, dict):
        raise SystemDefinitionError("system definition must be an object/table")
    unknown = set(doc) - {"n", "t0", "a", "labels"}
    if unknown:
        raise SystemDefinitionError(f"unknown keys: {sorted(unknown)}")
    for key in ("n", "t0", "a"):
        if key not in doc:
            raise SystemDefinitionError(f"missing required key {key!r}")
    t0 = doc["t0"]
    if isinstance(t0, bool) or not isinstance(t0, (int, float)):
        raise SystemDefinitionError(f"t0 must be a number, got {t0!r}")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int):
        raise SystemDefinitionError(f"n must be an integer, got {n!r}")
    a = doc["a"]
    if not isinstance(a, list):
        raise SystemDefinitionError("a must be an array of arrays of strings")
    return _build(n, float(t0), a, doc.get("labels"))


def _parse_toml(text: str, path) -> dict:
    try:
        import tomllib  # Python 3.11+
    except ImportError:
        import tomli as tomllib
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        raise SystemDefinitionError(f"{path}: invalid TOML: {err}") from None


# ---------------------------------------------------------------------------
# ratio validation
# ---------------------------------------------------------------------------

@dataclass
class RatioReport:
    """Numerical well-definedness evidence for the ratios a_1k/a_12.

    status is 'WellDefined' or 'Suspect'.  Flagged grid points carry a
    reason; 'Suspect' names the first disqualifying observation.
    """

    status: str
    ratios: dict            # column index k (1-based) -> Expr for a_1k/a_12
    flagged: list           # (t, reason) pairs
    suspect_reasons: list = field(default_factory=list)
    window: tuple = (0.0, 0.0)
    grid_points: int = 0
    eps_den: float = 1e-12
    caveats: list = field(default_factory=lambda: [ABSOLUTE_CONTINUITY_CAVEAT])

    @property
    def well_defined(self) -> bool:
        return self.status == "WellDefined"

    def as_dict(self) -> dict:
        return {
            "status": self.status,
            "ratios": {str(k): ex.to_string(r) for k, r in self.ratios.items()},
            "flagged": [[t, r] for t, r in self.flagged],
            "suspect_reasons": list(self.suspect_reasons),
            "window": list(self.window),
            "grid_points": self.grid_points,
            "eps_den": self.eps_den,
            "caveats": list(self.caveats),
        }


def ratio_expressions(sys: LinearSystem) -> dict:
    """The ratio expressions a_1k/a_12 for k = 3..n (1-based keys)."""
    if sys.n < 3:
        raise SystemDefinitionError("ratios need n >= 3")
    den = sys.entry(0, 1)
    return {k: sys.entry(0, k - 1) / den for k in range(3, sys.n + 1)}


def validate_ratios(sys: LinearSystem, window=None, *, grid_points: int = 1000,
                    eps_den: float = 1e-12) -> RatioReport:
    """Grid evidence that the ratios a_1k/a_12 are usable on the window.

    Flags grid points where |a_12| < eps_den or where a ratio fails to
    evaluate finitely.  WellDefined requires flags to be isolated (no two
    adjacent grid points) and the ratio values near each flag to look
    integrable: values sampled at dyadic distances from the flag must not
    grow like distance^(-p) with p >= 0.9 nor exceed an absolute guard.
    The growth test only ever demotes WellDefined to Suspect.
    """
    if window is None:
        window = (sys.t0, sys.t0 + 100.0)
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ValueError("window must satisfy hi > lo")
    ratios = ratio_expressions(sys)
    ts = np.linspace(lo, hi, grid_points)

    den = sys.entry(0, 1)
    flagged_idx: dict[int, str] = {}
    for i, t in enumerate(ts):
        try:
            dv = den(float(t))
        except DomainError as err:
            flagged_idx[i] = f"denominator {err.kind}"
            continue
        if abs(dv) < eps_den:
            flagged_idx[i] = "denominator below eps_den"

    # ratio values at non-flagged points (per ratio column)
    mu_vals = {k: np.full(grid_points, np.nan) for k in ratios}
    for k, mu in ratios.items():
        for i, t in enumerate(ts):
            if i in flagged_idx:
                continue
            try:
                v = mu(float(t))
            except DomainError as err:
                flagged_idx[i] = f"ratio a_1{k}/a_12 {err.kind}"
                continue
            mu_vals[k][i] = v

    suspect: list[str] = []
    idx_sorted = sorted(flagged_idx)
    for a, b in zip(idx_sorted, idx_sorted[1:]):
        if b == a + 1:
            suspect.append(
                f"adjacent flagged grid points at t={float(ts[a])!r} and t={float(ts[b])!r}")
            break

    # integrability heuristic near each flag
    if not suspect:
        for k in ratios:
            vals = mu_vals[k]
            finite = vals[np.isfinite(vals)]
            robust = float(np.median(np.abs(finite))) if len(finite) else 0.0
            guard = 1e6 * (1.0 + robust)
            for i in idx_sorted:
                for direction in (+1, -1):
                    ds, ms = [], []
                    for step in (1, 2, 4, 8):
                        j = i + direction * step
                        if j < 0 or j >= grid_points or j in flagged_idx:
                            continue
                        v = vals[j]
                        if not np.isfinite(v) or v == 0.0:
                            continue
                        ds.append(step)
                        ms.append(abs(v))
                    if ms and max(ms) > guard:
                        suspect.append(
                            f"ratio a_1{k}/a_12 exceeds blow-up guard near t={float(ts[i])!r}")
                        break
                    if len(ds) >= 3:
                        slope = np.polyfit(np.log(ds), np.log(ms), 1)[0]
                        if slope <= -0.9:
                            suspect.append(
                                f"ratio a_1{k}/a_12 grows like distance^({slope:.2f}) "
                                f"near flagged t={float(ts[i])!r} (non-integrable signature)")
                            break
                if suspect:
                    break
            if suspect:
                break

    status = "Suspect" if suspect else "WellDefined"
    return RatioReport(
        status=status,
        ratios=ratios,
        flagged=[(float(ts[i]), flagged_idx[i]) for i in idx_sorted],
        suspect_reasons=suspect,
        window=(lo, hi),
        grid_points=grid_points,
        eps_den=eps_den,
    )
