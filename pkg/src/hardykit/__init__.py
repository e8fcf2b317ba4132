"""Weighted bilinear and iterated Hardy inequalities: condition constants,
discretization tools and brute-force lower bounds."""
from .core import INF, DomainError, Exponents, Scenario, classify_case, classify_iterated, derive_exponents
from .weights import piecewise, power, tabulated
from .stieltjes import BorelMeasure, atom, with_density
from .conditions import ConditionReport, evaluate_scenario
from .oracle import Budget, best_lower

__all__ = [
    "INF", "DomainError", "Exponents", "Scenario", "classify_case", "classify_iterated",
    "derive_exponents", "piecewise", "power", "tabulated", "BorelMeasure", "atom",
    "with_density", "ConditionReport", "evaluate_scenario", "Budget", "best_lower",
]
__version__ = "0.1.0"
