"""Characterizing constants for the bilinear and iterated inequalities.

Bilinear scenarios are dispatched on (p1, p2, q):

    T52*  p1 <= q < inf          B1, B2, B3
    T53*  q < p1 < inf           A1 .. A4 (reduced to the iterated constants)
    T54*  p1 = inf, q < inf      D1, D2, D3
    T55*  q = inf                E1, E2, E3

Iterated scenarios use I1 .. I5 on (p, q, theta).  Every value is an
extended real; divergence is decided from tail classes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import INF, DomainError, Scenario, derive_exponents, ext_mul, ext_pow, recip
from ._numerics import GridFn, LogGrid, Tail
from .stieltjes import (
    BorelMeasure,
    check_nondegenerate,
    fundamental_profile,
    integrate_against,
    kernel_stieltjes_root,
    kernel_sup,
    stieltjes_measure,
)
from .weights import Profile, U_envelope, V_envelope, dual_transform

HOLDS, FAILS, VIOLATED = "holds", "fails", "preconditions-violated"

# iterated case that each T53 sub-case reduces to
T53_TO_ITERATED = {"T53i": "I1", "T53ii": "I3", "T53iii": "I4", "T53iv": "I5"}


@dataclass
class ConditionReport:
    case: str
    constant: float
    factors: dict = field(default_factory=dict)
    preconditions: dict = field(default_factory=dict)
    verdict: str = HOLDS
    name: str = ""
    oracle_lb: float | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict != VIOLATED

    def line(self) -> str:
        return f"case={self.case} constant={fmt(self.constant)} verdict={self.verdict}"


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    if math.isinf(x):
        return "inf"
    mant, e = f"{x:.3e}".split("e")
    return f"{mant}e{int(e)}"


# ---------------------------------------------------------------------------
class _Ctx:
    """Envelopes and their grid samples for one scenario."""

    def __init__(self, sc: Scenario, grid: LogGrid, method: str):
        self.sc, self.grid, self.method = sc, grid, method
        self.ex = sc.exponents
        self.U = U_envelope(sc.u, method, grid)
        self.Ug = GridFn.of(grid, self.U)
        self.ug = GridFn(grid, sc.u(grid.t), sc.u.tail("0"), sc.u.tail("inf"))
        self._V = {}

    def V(self, which: int, theta: float):
        key = (which, float(theta))
        if key not in self._V:
            v = self.sc.v1 if which == 1 else self.sc.v2
            env = V_envelope(v, theta, self.method, self.grid)
            self._V[key] = (env, _in_range(GridFn.of(self.grid, env), f"V_{theta:g}"))
        return self._V[key]


def _in_range(g: GridFn, label: str) -> GridFn:
    """Reject samples that overflowed or underflowed although both tails are powers."""
    if g.tail0.kind == "pow" and g.tailinf.kind == "pow" and np.any((g.v == 0) | np.isinf(g.v)):
        raise DomainError(f"{label} leaves double range on this grid (exponent too close to 1)")
    return g


def _refined_sup(fn, g: GridFn) -> tuple[float, float]:
    """sup of g with a bounded 1-D refinement of the grid argmax using ``fn``.

    Returns (value, argmax t).  Used for pointwise products of envelopes.
    """
    s = g.sup()
    if not math.isfinite(s) or s == 0.0:
        i = int(np.argmax(g.v)) if g.v.size else 0
        return s, float(g.grid.t[i])
    i = int(np.argmax(g.v))
    x = g.grid.x
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, x.size - 1)]
    best, arg = s, float(g.grid.t[i])
    if hi > lo:
        res = minimize_scalar(lambda y: -float(fn(math.exp(y))), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        val = -float(res.fun)
        if math.isfinite(val) and val > best:
            best, arg = val, math.exp(res.x)
    return best, arg


def _at_argmax(parts: dict, g: GridFn) -> dict:
    """Each named factor evaluated at the grid argmax of the product g."""
    if not g.v.size or not np.any(np.isfinite(g.v)):
        return {"argmax_t": float("nan")}
    i = int(np.nanargmax(np.where(np.isfinite(g.v), g.v, -1.0)))
    out = {"argmax_t": float(g.grid.t[i])}
    out.update({k: float(p.v[i]) for k, p in parts.items()})
    return out


# ---------------------------------------------------------------------------
# bilinear, p1 <= q < inf
def _B(ctx: _Ctx, case: str) -> tuple[float, dict]:
    ex = ctx.ex
    q, p2 = ex.q, ex.p2
    V1e, V1 = ctx.V(1, ex.p1)
    if case == "T52a":
        V2e, V2 = ctx.V(2, p2)
        prod = ctx.Ug ** (1.0 / q) * V1 * V2
        val, arg = _refined_sup(
            lambda t: ext_mul(ext_mul(ext_pow(ctx.U(t), 1.0 / q), V1e(t)), V2e(t)), prod)
        return val, {"B1": val, "argmax_t": arg,
                     **_at_argmax({"U^(1/q)": ctx.Ug ** (1.0 / q), "V_p1": V1, "V_p2": V2}, prod)}
    if case == "T52b":
        r2 = ex.r2
        _, V2 = ctx.V(2, p2)
        inner = (ctx.Ug ** (r2 / p2) * ctx.ug * V2 ** r2).cum_left() ** (1.0 / r2)
        prod = V1 * inner
        val = prod.sup()
        return val, {"B2": val, **_at_argmax({"V_p1": V1, "inner": inner}, prod)}
    _, W2 = ctx.V(2, INF)
    inner = (ctx.ug * W2 ** q).cum_left() ** (1.0 / q)
    prod = V1 * inner
    val = prod.sup()
    return val, {"B3": val, **_at_argmax({"V_p1": V1, "inner": inner}, prod)}


# p1 = inf, q < inf
def _D(ctx: _Ctx, case: str) -> tuple[float, dict]:
    ex = ctx.ex
    q = ex.q
    _, W1 = ctx.V(1, INF)
    base = ctx.ug * W1 ** q
    if case == "T54i":
        _, V2 = ctx.V(2, ex.p2)
        inner = base.cum_left() ** (1.0 / q)
        prod = inner * V2
        val = prod.sup()
        return val, {"D1": val, **_at_argmax({"inner": inner, "V_p2": V2}, prod)}
    if case == "T54ii":
        r2 = ex.r2
        _, V2 = ctx.V(2, ex.p2)
        val = (base.cum_left() ** (r2 / q) * base * V2 ** r2).integral() ** (1.0 / r2)
        return val, {"D2": val}
    _, W2 = ctx.V(2, INF)
    val = (base * W2 ** q).integral() ** (1.0 / q)
    return val, {"D3": val}


# q = inf: every branch is sup_t u(t) V_p1(t) V_p2(t), the p = inf branch of V being ||1/v||_1
def _E(ctx: _Ctx, case: str) -> tuple[float, dict]:
    ex = ctx.ex
    V1e, V1 = ctx.V(1, ex.p1)
    V2e, V2 = ctx.V(2, ex.p2)
    prod = ctx.ug * V1 * V2
    u = ctx.sc.u
    val, arg = _refined_sup(lambda t: ext_mul(ext_mul(u(t), V1e(t)), V2e(t)), prod)
    label = {"T55a": "E1", "T55b": "E2", "T55c": "E3"}[case]
    return val, {label: val, "argmax_t": arg}


# ---------------------------------------------------------------------------
# iterated core
def _is_admissible_env(G, Gg: GridFn) -> bool:
    if not np.all(np.isfinite(Gg.v)) or np.any(np.diff(Gg.v) <= 0):
        return False
    return G.tail0.vanishes("0") and G.tailinf.grows("inf")


def iterated_constant(case: str, U, Ug: GridFn, mu: BorelMeasure, p: float, q: float, theta: float,
                      V_theta, grid: LogGrid) -> tuple[float, dict]:
    """I1 .. I5 from the pieces; V_theta is the envelope for the given theta
    (for I5 it must be V_inf)."""
    Vg = GridFn.of(grid, V_theta)
    if case == "I5":
        Jr = kernel_stieltjes_root(U, Ug.v, V_theta, p, 1.0, grid)
        val = ext_pow(integrate_against(Jr ** q, mu), 1.0 / q)
        return float(val), {"I5": float(val), "J_sup": ext_pow(Jr.sup(), p)}
    phi = fundamental_profile(mu, U, q / p, grid, Ug.v)
    irho = max(recip(q) - recip(theta), 0.0)
    rho = INF if irho == 0 else 1.0 / irho
    if case in ("I1", "I2"):
        S = kernel_sup(U, Ug.v, Vg, 1.0 / p)
        if case == "I1":
            prod = phi ** (1.0 / q) * S
            val = prod.sup()
            return val, {"I1": val, **_at_argmax({"phi^(1/q)": phi ** (1.0 / q), "sup_layer": S}, prod)}
        val = ext_pow(integrate_against(phi ** (rho / theta) * S ** rho, mu), 1.0 / rho)
        return float(val), {"I2": float(val), "phi_sup": phi.sup(), "sup_layer_sup": S.sup()}
    r = 1.0 / (recip(p) - recip(theta))
    J = kernel_stieltjes_root(U, Ug.v, V_theta, r, r / p, grid)
    if case == "I3":
        prod = phi ** (1.0 / q) * J
        val = prod.sup()
        return val, {"I3": val, **_at_argmax({"phi^(1/q)": phi ** (1.0 / q), "stieltjes_layer": J}, prod)}
    val = ext_pow(integrate_against(phi ** (rho / theta) * J ** rho, mu), 1.0 / rho)
    return float(val), {"I4": float(val), "phi_sup": phi.sup(), "stieltjes_layer_sup": J.sup()}


def _iterated_pre(U, Ug, V_theta, mu, s) -> dict:
    return {
        "U_admissible": _is_admissible_env(U, Ug),
        "V_finite": V_theta.tailinf.kind != "inf" and V_theta.tail0.kind != "inf",
        "V_limit_zero": V_theta.tailinf.vanishes("inf"),
        "nondegenerate": check_nondegenerate(mu, U, s),
    }


def _pre_ok(pre: dict) -> bool:
    return all(v is True or v == "ok" for v in pre.values())


def condition_I(sc: Scenario, grid: LogGrid | None = None, method: str = "closed") -> ConditionReport:
    """Iterated scenario: u, v (= v1), mu and exponents (p, q, theta)."""
    grid = grid or LogGrid()
    ex = sc.exponents
    case = sc.case
    p, q, th = ex.p, ex.q, ex.theta
    U = U_envelope(sc.u, method, grid)
    Ug = GridFn.of(grid, U)
    Vt = V_envelope(sc.v1, th, method, grid)
    _in_range(GridFn.of(grid, Vt), f"V_{th:g}")
    pre = _iterated_pre(U, Ug, Vt, sc.mu, q / p)
    if not _pre_ok(pre):
        return ConditionReport(case, float("nan"), {}, pre, VIOLATED, sc.name)
    val, factors = iterated_constant(case, U, Ug, sc.mu, p, q, th, Vt, grid)
    return ConditionReport(case, val, factors, pre, HOLDS if math.isfinite(val) else FAILS, sc.name)


def nu_measure(ctx: _Ctx) -> BorelMeasure:
    """dnu = U^(r1/q) d(-V_p1^r1)."""
    ex = ctx.ex
    s = ex.r1 / ex.q
    U = ctx.U
    factor = Profile(lambda t: ext_pow(U(t), s), U.tail0 ** s, U.tailinf ** s)
    V1e, _ = ctx.V(1, ex.p1)
    return stieltjes_measure(V1e, ex.r1, factor)


def _A(ctx: _Ctx, case: str) -> tuple[float, dict, dict]:
    ex = ctx.ex
    s = ex.r1 / ex.q
    V1e, _ = ctx.V(1, ex.p1)
    nu = nu_measure(ctx)
    Us = Profile(lambda t: ext_pow(ctx.U(t), s), ctx.U.tail0 ** s, ctx.U.tailinf ** s)
    Usg = GridFn.of(ctx.grid, Us)
    pre = {
        "V_p1_limit_zero": V1e.tailinf.vanishes("inf"),
        "U^(r1/q)_admissible": _is_admissible_env(Us, Usg),
        "nondegenerate": check_nondegenerate(nu, ctx.U, s),
    }
    if not _pre_ok(pre):
        return float("nan"), {}, pre
    icase = T53_TO_ITERATED[case]
    theta = ex.p2
    V2e, _ = ctx.V(2, INF if icase == "I5" else theta)
    val, f = iterated_constant(icase, ctx.U, ctx.Ug, nu, ex.q, ex.r1, theta, V2e, ctx.grid)
    label = {"I1": "A1", "I3": "A2", "I4": "A3", "I5": "A4"}[icase]
    f = {(label if k == icase else k): v for k, v in f.items()}
    return val, f, pre


# ---------------------------------------------------------------------------
def _swap_if_needed(sc: Scenario) -> Scenario:
    # q = inf with p1 = inf, p2 < inf: the E2 constant with the two weights exchanged
    ex = sc.exponents
    if math.isinf(ex.q) and math.isinf(ex.p1) and not math.isinf(ex.p2):
        ex2 = derive_exponents(ex.n, ex.p2, ex.p1, ex.q)
        return Scenario(ex2, sc.u, sc.v2, sc.v1, sc.mu, sc.form, sc.mode, sc.name)
    return sc


def condition_T52(sc: Scenario, grid=None, method="closed") -> float:
    return _bilinear(sc, grid, method).constant


def condition_T53(sc: Scenario, grid=None, method="closed") -> float:
    return _bilinear(sc, grid, method).constant


def condition_T54(sc: Scenario, grid=None, method="closed") -> float:
    return _bilinear(sc, grid, method).constant


def condition_T55(sc: Scenario, grid=None, method="closed") -> float:
    return _bilinear(sc, grid, method).constant


def _bilinear(sc: Scenario, grid: LogGrid | None, method: str) -> ConditionReport:
    grid = grid or LogGrid()
    sc = _swap_if_needed(sc)
    case = sc.case
    ctx = _Ctx(sc, grid, method)
    pre = {}
    if case.startswith("T52"):
        val, f = _B(ctx, case)
    elif case.startswith("T53"):
        val, f, pre = _A(ctx, case)
        if not _pre_ok(pre):
            return ConditionReport(case, float("nan"), {}, pre, VIOLATED, sc.name)
    elif case.startswith("T54"):
        val, f = _D(ctx, case)
    else:
        val, f = _E(ctx, case)
    val = float(val)
    return ConditionReport(case, val, f, pre, HOLDS if math.isfinite(val) else FAILS, sc.name)


def evaluate_scenario(sc: Scenario, grid: LogGrid | None = None, method: str = "closed") -> ConditionReport:
    """Classify, check preconditions and evaluate.  Errors end up in the report."""
    try:
        if sc.form == "ball":
            sc = dual_transform(sc, method="closed" if method == "closed" else "pointwise")
        if sc.mode == "iterated":
            return condition_I(sc, grid, method)
        return _bilinear(sc, grid, method)
    except DomainError as exc:
        case = ""
        try:
            case = sc.case
        except DomainError:
            pass
        return ConditionReport(case, float("nan"), {}, {"domain": False}, VIOLATED, sc.name, message=str(exc))
