"""Command-line surface: load a system, run checks, emit JSON/CSV.

Subcommands: reduce, simulate, check, classify, report.  Exit codes
reflect tool success, not mathematical outcome: 0 means a verdict or
output was computed (even Fails), 1 is a usage error, 2 a numerical
failure.  JSON output is deterministic (sorted keys, no timestamps) so
the same seed and input reproduce byte-identical documents.
"""

from __future__ import annotations

import argparse
import json
import math
import sys as _sys
from pathlib import Path

import numpy as np

from .criteria import (empirical_classify, oscillation_check,
                       positivity_stability_check, suboscillation_check)
from .errors import (DomainError, IntegrationError, ParseError,
                     QuadratureError, SystemDefinitionError)
from .integrate import integrate_ode
from .reduction import compute_abc, compute_abc_via_tilde, nu_expressions
from .riccati2d import (System2D, horizon_oscillation_check,
                        interval_oscillation_check)
from .system import load_system, validate_ratios

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(_sys.stderr)
        _sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _emit_json(doc: dict, output) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        Path(output).write_text(text)
    else:
        _sys.stdout.write(text)


def _write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(cells) for cells in rows]
    text = "\n".join(lines) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        _sys.stdout.write(text)


def _floats(s: str, what: str):
    try:
        vals = [float(tok) for tok in s.split(",") if tok.strip()]
    except ValueError:
        raise ValueError(f"{what}: expected comma-separated numbers, "
                         f"got {s!r}") from None
    if not vals:
        raise ValueError(f"{what}: empty list")
    return vals


def _init_vectors(s: str, n: int):
    """Parse '1,0,0;0,1,0' into vectors of length n."""
    vecs = []
    for part in s.split(";"):
        if not part.strip():
            continue
        v = _floats(part, "--inits")
        if len(v) != n:
            raise ValueError(f"init {part!r} has {len(v)} components, "
                             f"system needs {n}")
        vecs.append(v)
    if not vecs:
        raise ValueError("--inits: empty list")
    return vecs


def _components(s: str, n: int):
    """Parse '1,3' or 'comp1,comp3' into 0-based component indices."""
    out = []
    for tok in s.split(","):
        tok = tok.strip().lower()
        for prefix in ("comp", "phi"):
            if tok.startswith(prefix):
                tok = tok[len(prefix):]
        try:
            idx = int(tok)
        except ValueError:
            raise ValueError(f"--events: bad component {tok!r}") from None
        if not 1 <= idx <= n:
            raise ValueError(f"--events: component {idx} outside 1..{n}")
        out.append(idx - 1)
    if not out:
        raise ValueError("--events: empty list")
    return out


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_reduce(args) -> int:
    sys_ = load_system(args.input)
    lo = sys_.t0 if args.window is None else args.window[0]
    hi = sys_.t0 + 10.0 if args.window is None else args.window[1]
    if not hi > lo:
        raise ValueError("--window: need hi > lo")
    coeffs = (compute_abc(sys_) if args.route == "display"
              else compute_abc_via_tilde(sys_))
    nus = nu_expressions(sys_)
    cols = ([("A", coeffs.A)]
            + [(f"B{k}", coeffs.B[k]) for k in coeffs.b_columns()]
            + [("C", coeffs.C)]
            + [(f"nu{k}", nus[k]) for k in sorted(nus)])
    header = ["t"] + [name for name, _ in cols]
    rows = []
    for t in np.linspace(lo, hi, args.points):
        cells = [_fmt(t)]
        for _name, fn in cols:
            try:
                cells.append(_fmt(fn(float(t))))
            except DomainError:
                cells.append("nan")
        rows.append(cells)
    _write_csv(args.output, header, rows)
    return 0


def _cmd_simulate(args) -> int:
    sys_ = load_system(args.input)
    n, t0 = sys_.n, sys_.t0
    if args.init is None:
        init = [1.0] + [0.0] * (n - 1)
    else:
        init = _floats(args.init, "--init")
        if len(init) != n:
            raise ValueError(f"--init has {len(init)} components, "
                             f"system needs {n}")
    t_end = t0 + 100.0 if args.t_end is None else args.t_end
    if not t_end > t0:
        raise ValueError("--t-end must exceed the system's t0")
    events = [0] if args.events is None else _components(args.events, n)

    traj = integrate_ode(sys_.rhs, (t0, t_end), np.asarray(init),
                         rtol=args.rtol, atol=args.atol)
    _write_csv(args.output, ["t"] + [sys_.label(k) for k in range(n)],
               [[_fmt(t)] + [_fmt(y) for y in row]
                for t, row in zip(traj.ts, traj.ys)])
    zero_rows = []
    counts = {}
    for k in events:
        zs = traj.zeros(k)
        counts[sys_.label(k)] = len(zs)
        zero_rows += [[str(k + 1), _fmt(z)] for z in zs]
    _write_csv(args.zeros_output, ["component", "t"], zero_rows)

    summary = {
        "status": traj.status,
        "t_end": traj.t_end,
        "escape": (None if traj.escape is None else {
            "t_star": traj.escape.t_star,
            "reason": traj.escape.reason,
            "y_norm": traj.escape.y_norm}),
        "zero_counts": counts,
        "trajectory_file": str(args.output),
        "zeros_file": str(args.zeros_output),
        "samples": len(traj.ts),
    }
    _emit_json(summary, None)
    return 0


def _only_set(**kwargs) -> dict:
    return {k: v for k, v in kwargs.items() if v is not None}


def _cmd_check(args) -> int:
    sys_ = load_system(args.input)
    token = args.token
    if token in ("thm22", "thm23"):
        sys2 = System2D.from_linear_system(sys_)
        if token == "thm22":
            offsets = (_floats(args.ladder, "--ladder") if args.ladder
                       else [25.0, 50.0, 100.0, 200.0])
            v = horizon_oscillation_check(
                sys2, [sys_.t0 + x for x in offsets],
                **_only_set(threshold=args.threshold))
        else:
            interval = (tuple(args.interval) if args.interval
                        else (sys_.t0, sys_.t0 + 10.0))
            v = interval_oscillation_check(
                sys2, interval, **_only_set(quad_tol=args.quad_tol))
    elif token == "thm31-1":
        kw = _only_set(t_hi=args.t_hi, grid_step=args.grid_step,
                       quad_tol=args.quad_tol)
        if args.t_ladder:
            kw["t_ladder"] = [sys_.t0 + x
                              for x in _floats(args.t_ladder, "--t-ladder")]
        v = suboscillation_check(sys_, **kw)
    elif token == "thm31-2":
        kw = _only_set(window_len=args.window_len, sup_tol=args.sup_tol,
                       threshold=args.threshold)
        if args.ladder:
            kw["ladder"] = _floats(args.ladder, "--ladder")
        v = oscillation_check(sys_, **kw)
    else:  # thm32
        inits = (_init_vectors(args.inits, sys_.n) if args.inits else None)
        kw = _only_set(window_len=args.window_len, threshold=args.threshold)
        if args.ladder:
            kw["stability_ladder"] = _floats(args.ladder, "--ladder")
        v = positivity_stability_check(sys_, inits, **kw)
    _emit_json(v.as_dict(), args.output)
    return 0


def _cmd_classify(args) -> int:
    sys_ = load_system(args.input)
    inits = _init_vectors(args.inits, sys_.n) if args.inits else None
    rep = empirical_classify(
        sys_, inits, **_only_set(horizon=args.horizon,
                                 min_zeros=args.min_zeros,
                                 seed=args.seed,
                                 bundle_size=args.bundle_size))
    _emit_json(rep.as_dict(), args.output)
    return 0


def _remark_consistency(checks: dict, classification: dict) -> dict:
    """Cross-check: nonoscillatory evidence excludes the other two."""
    osc, sub, non = [], [], []
    for name, target in (("thm22", osc), ("thm23", osc),
                         ("thm31-2", osc), ("thm31-1", sub)):
        if isinstance(checks.get(name), dict) \
                and checks[name].get("status") == "Holds":
            target.append(name)
    if isinstance(checks.get("thm32"), dict) \
            and checks["thm32"].get("status") == "Holds":
        non.append("thm32")
    label = classification.get("label") if isinstance(classification, dict) \
        else None
    if label == "OscillatoryEvidence":
        osc.append("classification")
    elif label == "SuboscillatoryEvidence":
        sub.append("classification")
    elif label == "NonoscillatoryEvidence":
        non.append("classification")
    return {
        "consistent": not (non and (osc or sub)),
        "oscillatory_evidence": osc,
        "suboscillatory_evidence": sub,
        "nonoscillatory_evidence": non,
        "rule": "a nonoscillatory system is neither oscillatory nor "
                "suboscillatory, so evidence for both sides at once "
                "signals a numerical or hypothesis problem",
    }


def _cmd_report(args) -> int:
    sys_ = load_system(args.input)
    doc = {"system": sys_.as_dict(), "sections": {},
           "parameters": _only_set(horizon=args.horizon, seed=args.seed,
                                   min_zeros=args.min_zeros)}
    sections = doc["sections"]

    def section(name, fn):
        try:
            sections[name] = fn()
        except Exception as err:  # record, never abort the report
            sections[name] = {"error": {"type": type(err).__name__,
                                        "message": str(err)}}

    ratios_ok = True
    ratio_reason = ""
    if sys_.n >= 3:
        def ratio_section():
            rep = validate_ratios(sys_)
            return rep.as_dict()
        section("ratio_validation", ratio_section)
        rv = sections["ratio_validation"]
        ratios_ok = rv.get("status") == "WellDefined"
        if not ratios_ok:
            reasons = rv.get("suspect_reasons") or [rv.get("error", {})
                                                    .get("message", "")]
            ratio_reason = "; ".join(str(r) for r in reasons[:2])
    else:
        sections["ratio_validation"] = {"skipped": "requires n >= 3"}

    checks = {}
    sections["checks"] = checks

    def check_section(name, fn):
        try:
            checks[name] = fn().as_dict()
        except Exception as err:
            checks[name] = {"error": {"type": type(err).__name__,
                                      "message": str(err)}}

    kw = _only_set(horizon=args.horizon, min_zeros=args.min_zeros,
                   seed=args.seed)
    if sys_.n == 2:
        sys2 = System2D.from_linear_system(sys_)
        check_section("thm22", lambda: horizon_oscillation_check(
            sys2, [sys_.t0 + x for x in (25.0, 50.0, 100.0, 200.0)]))
        check_section("thm23", lambda: interval_oscillation_check(
            sys2, (sys_.t0, sys_.t0 + 10.0)))
    else:
        if ratios_ok:
            check_section("thm31-1", lambda: suboscillation_check(sys_))
            check_section("thm31-2", lambda: oscillation_check(sys_))
        else:
            skip = {"skipped": "ratio validation reported Suspect: "
                               + ratio_reason}
            checks["thm31-1"] = dict(skip)
            checks["thm31-2"] = dict(skip)
    check_section("thm32", lambda: positivity_stability_check(sys_))

    section("classification", lambda: empirical_classify(sys_, **kw)
            .as_dict())
    sections["remark_1_1_consistency"] = _remark_consistency(
        checks, sections.get("classification", {}))
    _emit_json(doc, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> _Parser:
    p = _Parser(prog="oscillab",
                description="Oscillation analysis of linear ODE systems "
                            "phi' = A(t) phi.")
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=_Parser, metavar="SUBCOMMAND")

    def common(sp):
        sp.add_argument("--input", required=True,
                        help="system definition (JSON or TOML)")
        sp.add_argument("--output",
                        help="write the result here instead of stdout")

    sp = sub.add_parser("reduce",
                        help="sample the reduced coefficients A, B_k, C "
                             "and the ratios nu_k to CSV")
    common(sp)
    sp.add_argument("--window", nargs=2, type=float, metavar=("LO", "HI"))
    sp.add_argument("--points", type=int, default=201)
    sp.add_argument("--route", choices=("display", "tilde"),
                    default="display")
    sp.set_defaults(func=_cmd_reduce)

    sp = sub.add_parser("simulate",
                        help="integrate the system; trajectory and zero "
                             "crossings to CSV, summary JSON to stdout")
    sp.add_argument("--input", required=True)
    sp.add_argument("--init", help="comma-separated initial components")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--events",
                    help="components whose zeros to record, e.g. '1,3'")
    sp.add_argument("--output", default="traj.csv")
    sp.add_argument("--zeros-output", default="zeros.csv",
                    dest="zeros_output")
    sp.add_argument("--rtol", type=float, default=1e-9)
    sp.add_argument("--atol", type=float, default=1e-12)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("check", help="run one decision procedure")
    sp.add_argument("token", choices=("thm22", "thm23", "thm31-1",
                                      "thm31-2", "thm32"))
    common(sp)
    sp.add_argument("--interval", nargs=2, type=float, metavar=("A", "B"),
                    help="thm23: integration interval")
    sp.add_argument("--ladder",
                    help="comma-separated horizon offsets from t0")
    sp.add_argument("--t-ladder", dest="t_ladder",
                    help="thm31-1: start-point offsets from t0")
    sp.add_argument("--t-hi", type=float, dest="t_hi")
    sp.add_argument("--grid-step", type=float, dest="grid_step")
    sp.add_argument("--quad-tol", type=float, dest="quad_tol")
    sp.add_argument("--window-len", type=float, dest="window_len")
    sp.add_argument("--sup-tol", type=float, dest="sup_tol")
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--inits",
                    help="thm32: semicolon-separated init vectors")
    sp.set_defaults(func=_cmd_check)

    sp = sub.add_parser("classify",
                        help="empirical oscillation label from a bundle "
                             "of trajectories")
    common(sp)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--min-zeros", type=int, dest="min_zeros")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bundle-size", type=int, dest="bundle_size")
    sp.add_argument("--inits",
                    help="semicolon-separated init vectors (>= 8)")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("report",
                        help="aggregate document: ratio validation, all "
                             "applicable checks, classification, "
                             "consistency")
    common(sp)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--min-zeros", type=int, dest="min_zeros")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_report)
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 1
    try:
        return args.func(args)
    except (SystemDefinitionError, ParseError) as err:
        _sys.stderr.write(f"oscillab: {err}\n")
        return 1
    except (DomainError, IntegrationError, QuadratureError) as err:
        _sys.stderr.write(f"oscillab: numerical failure: {err}\n")
        return 2
    except (ValueError, OSError) as err:
        _sys.stderr.write(f"oscillab: {err}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
