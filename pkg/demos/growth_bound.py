"""
A lower bound that rules out oscillation
========================================

When every off-diagonal entry is nonnegative, a solution that starts
positive stays above a bound built from the diagonal alone:

    phi_k(t) >= phi_k(t0) * exp(integral of a_kk from t0 to t)

An exponential is never zero, so none of the components can vanish -
the opposite of oscillation.  The same diagonal integrals double as
quick stability probes.
"""

import numpy as np

from oscillab import (LinearSystem, empirical_classify,
                      positivity_stability_check)


def diag(value):
    rows = [[value if j == k else "0" for k in range(3)] for j in range(3)]
    return LinearSystem.from_strings(rows)


# ---------------------------------------------------------------------------
# Decaying diagonal: the bound holds and both stability probes pass.
decay = diag("-1")
verdict = positivity_stability_check(decay)
rec = verdict.witnesses["bound_checks"][0]
print(f"diag(-1): {verdict.status}")
print(f"  worst bound slack: {rec['worst_slack']:+.2e}  "
      f"(negative would mean a violation)")
print(f"  stability flags:   {verdict.witnesses['stability']['flags']}")

# ---------------------------------------------------------------------------
# Growing diagonal: solutions still obey the bound (so still no
# oscillation), but the probes flag the instability.
grow = diag("0.1")
verdict = positivity_stability_check(grow)
print(f"\ndiag(0.1): {verdict.status}")
print(f"  stability flags:   {verdict.witnesses['stability']['flags']}")
probe = verdict.witnesses["stability"]["diagonal_growth"]["a11"]
print(f"  integral of a11 over the ladder: "
      f"{[round(v, 1) for v in probe['values']]}")

# ---------------------------------------------------------------------------
# Coupling only helps: positive off-diagonals push every component
# further above its diagonal-only bound.
coupled = LinearSystem.from_strings([["-1", "0.5", "0.5"],
                                     ["0.5", "-1", "0.5"],
                                     ["0.5", "0.5", "-1"]])
verdict = positivity_stability_check(coupled)
rec = verdict.witnesses["bound_checks"][0]
print(f"\ncoupled decaying system: {verdict.status}")
print(f"  worst slack {rec['worst_slack']:+.2e} at t={rec['t']:.2f} "
      f"(component {rec['component']})")

# ---------------------------------------------------------------------------
# A negative off-diagonal entry breaks the hypothesis, and the check
# says so rather than reporting a bound it cannot justify.
mixed = LinearSystem.from_strings([["0", "1", "1"],
                                   ["-1", "0", "0"],
                                   ["-1", "0", "0"]])
verdict = positivity_stability_check(mixed)
bad = verdict.witnesses["sign_violation"]
print(f"\nsign-mixed system: {verdict.status}  "
      f"({bad['entry']} = {bad['value']:+.1f})")

# ---------------------------------------------------------------------------
# The empirical classifier agrees with the bound: a solution bundle for
# diag(-1) never crosses zero.
report = empirical_classify(decay, horizon=40.0)
print(f"\nempirical label for diag(-1): {report.label}")
print(f"  phi1 eventually nonvanishing in the bundle: "
      f"{report.phi1_nonvanishing_indicator}")
