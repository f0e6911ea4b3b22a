"""Numerical toolkit for the Lampariello family of Emden-Fowler equations.

y'' = x^(-q) y^(1+q) with q = p/(p+1); p = 1 is the Thomas-Fermi equation.
"""

__version__ = "0.1.0"

from .abel import check_integrability, family_invariant
from .bvp import solve_bvp
from .family import family_params, oscillator_coefficients, particular_solution, perturbation_expansion
from .integrate import IVProblem, integrate_ivp
from .phase import AutonomousSystem, analyze, portrait

__all__ = [
    "__version__",
    "AutonomousSystem",
    "IVProblem",
    "analyze",
    "check_integrability",
    "family_invariant",
    "family_params",
    "integrate_ivp",
    "oscillator_coefficients",
    "particular_solution",
    "perturbation_expansion",
    "portrait",
    "solve_bvp",
]
