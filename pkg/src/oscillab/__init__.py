"""Oscillation analysis of linear ODE systems phi' = A(t) phi.

The package reduces an n-dimensional linear system to an
(n-1)-dimensional Riccati system through the substitution
y_k = phi_{k+1} / phi_1, reconstructs solutions through the
exponential connection formula, and decides oscillation,
suboscillation and nonoscillation questions through three-valued
checks with explicit witnesses and caveats.
"""

from .errors import (DomainError, IntegrationError, OscillabError,
                     ParseError, QuadratureError, SystemDefinitionError)
from .expr import differentiate, parse, to_string
from .integrate import (CumulativeIntegral, DivergenceLadder, Escape,
                        Trajectory, cumulative_quad, divergence_probe,
                        integrate_ode, quad)
from .system import (LinearSystem, RatioReport, load_system,
                     ratio_expressions, validate_ratios)
from .reduction import (ReducedCoefficients, RiccatiSystem, compute_abc,
                        compute_abc_via_tilde, dual_route_report,
                        escape_classify, nu_expressions, reconstruct_phi,
                        riccati_rhs, tilde_system, EscapeReport)
from .riccati2d import (RiccatiTriple, System2D, comparison_probe,
                        horizon_oscillation_check,
                        interval_oscillation_check, riccati_of,
                        zeta_subsolution)
from .criteria import (ClassificationReport, empirical_classify,
                       oscillation_check, positivity_stability_check,
                       suboscillation_check)
from .verdicts import Verdict

__version__ = "0.1.0"

__all__ = [
    "OscillabError", "ParseError", "DomainError", "SystemDefinitionError",
    "IntegrationError", "QuadratureError",
    "parse", "differentiate", "to_string",
    "integrate_ode", "Trajectory", "Escape", "quad", "cumulative_quad",
    "CumulativeIntegral", "divergence_probe", "DivergenceLadder",
    "LinearSystem", "load_system", "ratio_expressions", "validate_ratios",
    "RatioReport",
    "compute_abc", "compute_abc_via_tilde", "dual_route_report",
    "nu_expressions", "tilde_system", "riccati_rhs", "RiccatiSystem",
    "reconstruct_phi", "escape_classify", "EscapeReport",
    "ReducedCoefficients",
    "System2D", "RiccatiTriple", "riccati_of", "zeta_subsolution",
    "interval_oscillation_check", "horizon_oscillation_check",
    "comparison_probe",
    "suboscillation_check", "oscillation_check",
    "positivity_stability_check", "empirical_classify",
    "ClassificationReport", "Verdict",
    "__version__",
]
