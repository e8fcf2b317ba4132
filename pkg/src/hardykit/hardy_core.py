"""Norm formulas for the linear dual Hardy operator f -> int_{|x|>t} f.

For f in L^p(v) on R^n and the outer space L^q(u) on (0, inf) the operator
norm is equivalent to

    p <= q < inf      sup_t U(t)^(1/q) V_p(t)
    q < p < inf       (int U^(r/p) u V_p^r)^(1/r),   1/r = 1/q - 1/p
    p = inf, q < inf  (int u V_inf^q)^(1/q)          (exact)
    q = inf           sup_t u(t) V_p(t)              (exact)

``shell_ratio`` evaluates the honest operator ratio on the test functions
f = v^(1-p') chi_{a <= |x| < b}, which brackets the formulas numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import INF, DomainError, conjugate, ext_mul, ext_pow, recip
from ._numerics import GridFn, LogGrid, Tail
from .weights import (
    RadialWeight,
    U_envelope,
    V_envelope,
    quad_integral,
    sphere_area,
    _v_integrand,
    _weight_breaks,
)


@dataclass
class LinearHardyProblem:
    """Outer weight u on (0, inf), inner radial weight v, exponents (p, q).

    ``interval=(a, b)`` restricts u to [a, b) and v to the shell a <= |x| < b.
    """

    u: object
    v: object
    p: float
    q: float
    interval: tuple | None = None

    def __post_init__(self):
        if not self.p >= 1:
            raise DomainError("inner exponent p must lie in [1, inf]")
        if not self.q > 0:
            raise DomainError("outer exponent q must be positive")
        if self.interval is not None:
            a, b = self.interval
            if not 0 <= a < b:
                raise DomainError("restriction interval must satisfy 0 <= a < b")

    def effective(self):
        """(u, v) with the restriction applied: u = 0 and v = inf off the interval."""
        if self.interval is None:
            return self.u, self.v
        a, b = self.interval
        if not (isinstance(self.u, RadialWeight) and isinstance(self.v, RadialWeight)):
            raise DomainError("restricted problems need piecewise power weights")
        return self.u.restricted(a, b, 0.0), self.v.restricted(a, b, INF)


def sampled(grid: LogGrid, w) -> GridFn:
    """A weight sampled on the grid with its tail classes."""
    return GridFn(grid, w(grid.t), w.tail("0"), w.tail("inf"))


def dual_hardy_norm(prob: LinearHardyProblem, grid: LogGrid | None = None, method: str = "closed") -> float:
    """Case-dispatched norm value; +inf when divergent."""
    grid = grid or LogGrid()
    u, v = prob.effective()
    p, q = float(prob.p), float(prob.q)
    ug = sampled(grid, u)
    Venv = V_envelope(v, p, method, grid)
    V = GridFn.of(grid, Venv)
    if math.isinf(q):
        return (ug * V).sup()
    if math.isinf(p):
        val = _integral(ug * V ** q, lambda t: ext_mul(u(t), ext_pow(Venv(t), q)), u, v)
        return val ** (1.0 / q)
    Uenv = U_envelope(u, method, grid)
    Ug = GridFn.of(grid, Uenv)
    if p <= q:
        return (Ug ** (1.0 / q) * V).sup()
    r = 1.0 / (recip(q) - recip(p))
    val = _integral((Ug ** (r / p)) * ug * V ** r,
                    lambda t: ext_mul(ext_mul(ext_pow(Uenv(t), r / p), u(t)), ext_pow(Venv(t), r)), u, v)
    return val ** (1.0 / r)


def _integral(G: GridFn, fn, u, v) -> float:
    """int_0^inf of the integrand: tail classes decide divergence, adaptive
    quadrature split at the weight breakpoints gives the value."""
    val = G.integral()
    if not math.isfinite(val) or val == 0.0:
        return val
    return quad_integral(fn, 0.0, INF, tuple(sorted(set(_weight_breaks(u) + _weight_breaks(v)))))


def shell_ratio(prob: LinearHardyProblem, a: float, b: float) -> float:
    """||int_{|x|>t} f||_{q,u} / ||f||_{p,v} for f = v^(1-p') on a <= |x| < b.

    With P(t) = sigma int_t^inf s^(n-1) v^(1-p'), the image is
    F(t) = P(max(t, a)) - P(b) on t < b, and ||f||_p^p = P(a) - P(b).
    For p = inf the test function is v^-1 on the shell and has norm 1.
    """
    u, v = prob.effective()
    p, q = float(prob.p), float(prob.q)
    if p <= 1 or math.isinf(q):
        raise DomainError("shell certification needs 1 < p and q < inf")
    w = _v_integrand(v, p)
    sig = sphere_area(v.dim)
    br = _weight_breaks(w)

    def mass(lo, hi):
        if isinstance(w, RadialWeight):
            return sig * float(w.integral(lo, hi))
        return sig * quad_integral(w, lo, hi, br)

    total = mass(a, b)
    if total == 0.0 or not math.isfinite(total):
        return 0.0
    Ua = float(u.integral(0.0, a)) if isinstance(u, RadialWeight) else quad_integral(u, 0.0, a, _weight_breaks(u))
    inner = quad_integral(lambda t: float(u(t)) * mass(t, b) ** q, a, b,
                          tuple(x for x in _weight_breaks(u) + br if a < x < b))
    lhs = (Ua * total ** q + inner) ** (1.0 / q)
    norm = 1.0 if math.isinf(p) else total ** (1.0 / p)
    return lhs / norm


def certify(prob: LinearHardyProblem, points, grid: LogGrid | None = None) -> dict:
    """Shell ratios over all pairs a < b of ``points`` against the formula.

    Returns the formula value, the best and worst-case shell ratios, and the
    two factors formula/best and best/formula.
    """
    norm = dual_hardy_norm(prob, grid)
    pts = sorted(float(x) for x in points)
    best = 0.0
    for i, a in enumerate(pts):
        for b in pts[i + 1:]:
            best = max(best, shell_ratio(prob, a, b))
    return {
        "norm": norm,
        "best_shell": best,
        "under": norm / best if best > 0 else INF,
        "over": best / norm if norm > 0 else (0.0 if best == 0 else INF),
    }
