"""Borel measures on [0, inf) and Lebesgue-Stieltjes integration.

A measure is a sum of point masses, an absolutely continuous part with a
weight density, and a part d(-G^r) generated by a nonincreasing envelope G.
The whole measure may be multiplied by a non-negative profile (this is how
U^s d(-V^r) is built).  Intervals are half-open: [a, b) keeps an atom at a
and drops one at b, which is the left-limit rule
d(-G^r)([a, b)) = G(a-)^r - G(b-)^r.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import INF, DomainError, ext_div, ext_mul, ext_pow
from ._numerics import (
    GridFn,
    LogGrid,
    Tail,
    integrable,
    running_sup,
    running_sup_far,
    tail_integral_far,
    tail_integral_near,
    tail_sum,
)
from .weights import quad_integral, _weight_breaks

VERDICTS = ("ok", "fails_finiteness", "fails_zero_tail", "fails_infinity_tail")


@dataclass
class BorelMeasure:
    """atoms: (location, mass) pairs; density: a weight on (0, inf);
    stieltjes: (G, r) for d(-G^r); factor: profile multiplying everything."""

    atoms: tuple = ()
    density: object = None
    stieltjes: tuple | None = None
    factor: object = None
    label: str = ""
    _atoms: list = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.atoms = tuple((float(x), float(m)) for x, m in self.atoms)
        for x, m in self.atoms:
            if x < 0 or m < 0 or math.isnan(m):
                raise DomainError("atoms need location >= 0 and mass >= 0")
        if self.stieltjes is not None:
            G, r = self.stieltjes
            if r <= 0:
                raise DomainError("Stieltjes exponent r must be positive")
            if getattr(G, "direction", -1) != -1:
                raise DomainError("d(-G^r) needs a nonincreasing G")

    # pieces -------------------------------------------------------------------
    def _factor(self, t):
        return 1.0 if self.factor is None else self.factor(t)

    def density_at(self, t):
        """Density of the continuous part with respect to dt."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        if self.density is not None:
            out = out + np.asarray(self.density(t), dtype=float)
        if self.stieltjes is not None:
            G, r = self.stieltjes
            out = out + np.asarray(G.stieltjes_density(r)(t), dtype=float)
        if self.factor is not None:
            out = ext_mul(out, self.factor(t))
        return out

    def tails(self) -> tuple[Tail, Tail]:
        """Tail classes of the continuous density at 0 and at inf."""
        t0, t1 = Tail.zero(), Tail.zero()
        if self.density is not None:
            t0 = tail_sum(t0, self.density.tail("0"), "0")
            t1 = tail_sum(t1, self.density.tail("inf"), "inf")
        if self.stieltjes is not None:
            G, r = self.stieltjes
            s0, s1 = G.stieltjes_tails(r)
            t0, t1 = tail_sum(t0, s0, "0"), tail_sum(t1, s1, "inf")
        if self.factor is not None:
            t0, t1 = t0 * self.factor.tail0, t1 * self.factor.tailinf
        return t0, t1

    def point_masses(self) -> list:
        """All atoms, including jumps of the Stieltjes generator, sorted."""
        if self._atoms is None:
            pts = list(self.atoms)
            if self.stieltjes is not None:
                G, r = self.stieltjes
                pts += G.stieltjes_atoms(r)
            if self.factor is not None:
                pts = [(x, float(ext_mul(m, self.factor(x)))) for x, m in pts]
            self._atoms = sorted((x, m) for x, m in pts if m > 0)
        return self._atoms

    def breaks(self) -> tuple:
        br = set(_weight_breaks(self.density)) if self.density is not None else set()
        br.update(x for x, _ in self.point_masses() if x > 0)
        if self.stieltjes is not None:
            G, _ = self.stieltjes
            br.update(getattr(G, "breaks", ()))
        return tuple(sorted(br))

    @property
    def is_zero(self) -> bool:
        t0, t1 = self.tails()
        return not self.point_masses() and t0.kind == "zero" and t1.kind == "zero" and \
            self.density is None and self.stieltjes is None

    def on_grid(self, grid: LogGrid) -> GridFn:
        t0, t1 = self.tails()
        return GridFn(grid, self.density_at(grid.t), t0, t1)


def atom(location: float, mass: float) -> BorelMeasure:
    return BorelMeasure(atoms=((location, mass),), label=f"atom({location:g},{mass:g})")


def with_density(w, atoms=()) -> BorelMeasure:
    """dmu = w(t) dt, optionally plus atoms."""
    return BorelMeasure(atoms=atoms, density=w, label="density")


def stieltjes_measure(G, r: float, factor=None) -> BorelMeasure:
    """d(-G^r), optionally multiplied by a profile."""
    return BorelMeasure(stieltjes=(G, float(r)), factor=factor, label="stieltjes")


# ---------------------------------------------------------------------------
def _tail_of(F, end: str) -> Tail:
    if np.isscalar(F):
        return Tail.const() if F != 0 else Tail.zero()
    tl = getattr(F, "tail0" if end == "0" else "tailinf", None)
    return tl if isinstance(tl, Tail) else Tail.const()


def _call(F, t):
    if np.isscalar(F):
        return np.full(np.shape(t), float(F))
    return np.asarray(F(t), dtype=float)


def stieltjes_integral(F, m: BorelMeasure, a: float = 0.0, b: float = INF, detail: bool = False):
    """int_[a, b) F dm.

    F is a callable (optionally with tail0/tailinf classes) or a constant.
    Divergence at an improper endpoint is decided from tail classes; with
    ``detail=True`` the return value is (value, end) where end names the
    divergent endpoint ('0', 'inf') or is None.
    """
    if not b > a:
        return (0.0, None) if detail else 0.0
    d0, d1 = m.tails()
    bad = None
    if a == 0.0 and not integrable(_tail_of(F, "0") * d0, "0"):
        bad = "0"
    elif math.isinf(b) and not integrable(_tail_of(F, "inf") * d1, "inf"):
        bad = "inf"
    if bad is not None:
        return (INF, bad) if detail else INF
    total = 0.0
    has_cont = m.density is not None or m.stieltjes is not None
    if has_cont:
        total = quad_integral(lambda s: ext_mul(_call(F, s), m.density_at(s)), a, b, m.breaks())
    for x, mass in m.point_masses():
        if a <= x < b:
            total += float(ext_mul(_call(F, np.array(x)), mass))
    return (total, None) if detail else total


# ---------------------------------------------------------------------------
# fundamental function
def _Uval(U, x):
    x = np.asarray(x, dtype=float)
    return np.where(x == 0.0, 0.0, U(np.where(x == 0.0, 1.0, x)))


def fundamental_function(m: BorelMeasure, U, s: float, x, method: str = "quad"):
    """phi(x) = int_[0, inf) (U(x) / (U(y) + U(x)))^s dmu(y).

    method='quad' integrates each x adaptively; method='grid' returns the
    grid evaluation of ``fundamental_profile`` interpolated at x.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    if method == "grid":
        prof = fundamental_profile(m, U, s, LogGrid())
        out = prof.at(xs)
        return out[0] if np.ndim(x) == 0 else out
    d0, d1 = m.tails()
    finite = integrable(d0, "0") and integrable((U.tailinf ** (-s)) * d1, "inf")
    has_cont = m.density is not None or m.stieltjes is not None
    out = np.empty(xs.shape)
    atoms = m.point_masses()
    for i, xv in enumerate(xs):
        if not finite and has_cont:
            out[i] = INF
            continue
        ux = float(U(xv))

        def kern(y, ux=ux):
            uy = _Uval(U, y)
            return ext_pow(ext_div(ux, uy + ux), s)

        val = 0.0
        if has_cont:
            br = tuple(sorted(set(m.breaks()) | {float(xv)}))
            val = quad_integral(lambda y: ext_mul(kern(y), m.density_at(y)), 0.0, INF, br)
        for loc, mass in atoms:
            val += float(ext_mul(kern(np.array(loc)), mass))
        out[i] = val
    return out[0] if np.ndim(x) == 0 else out


def phi_tails(m: BorelMeasure, U, s: float) -> tuple[Tail, Tail]:
    """Tail classes of the fundamental function.

    phi(x) is comparable to mu([0, x)) + U(x)^s int_x^inf U^-s dmu, which
    fixes both ends from the density and U classes.
    """
    d0, d1 = m.tails()
    u0, u1 = U.tail0, U.tailinf
    at0 = tail_sum(tail_integral_near(d0, "0"), (u0 ** s) * tail_integral_far(d0 * u0 ** (-s), "0"), "0")
    at1 = tail_sum(tail_integral_far(d1, "inf"), (u1 ** s) * tail_integral_near(d1 * u1 ** (-s), "inf"), "inf")
    for loc, _ in m.point_masses():
        at0 = tail_sum(at0, Tail.const() if loc == 0 else u0 ** s, "0")
        at1 = tail_sum(at1, Tail.const(), "inf")
    return at0, at1


def kernel_matrix(Ux, Uy, s: float, mirror: bool = False) -> np.ndarray:
    """Matrix of calU(x_i, y_j)^s, or calU(y_j, x_i)^s when ``mirror``."""
    Ux = np.asarray(Ux, dtype=float)[:, None]
    Uy = np.asarray(Uy, dtype=float)[None, :]
    num = Uy if mirror else Ux
    return ext_pow(ext_div(np.broadcast_to(num, (Ux.shape[0], Uy.shape[1])), Ux + Uy), s)


def integrate_kernel(K: np.ndarray, m: BorelMeasure, grid: LogGrid, ktail0: Tail, ktailinf: Tail,
                     atom_cols=None) -> np.ndarray:
    """Row-wise int K(x_i, y) dmu(y) from grid columns plus tails and atoms.

    ``ktail0``/``ktailinf`` are the classes of K(x, .) in y at each end
    (shared by all rows); ``atom_cols`` holds K(x_i, loc) per atom.
    """
    dens = m.density_at(grid.t)
    d0, d1 = m.tails()
    w = grid.weights
    with np.errstate(invalid="ignore"):
        body = ext_mul(K, (dens * w)[None, :]).sum(axis=1)
    out = np.asarray(body, dtype=float)
    if np.any(np.isinf(dens)):
        out = np.where(np.any(ext_mul(K, np.isinf(dens)[None, :].astype(float)) > 0, axis=1), INF, out)
    e0 = ktail0 * d0
    e1 = ktailinf * d1
    for end, edge_col, cls in (("0", 0, e0), ("inf", -1, e1)):
        edge = ext_mul(K[:, edge_col], dens[edge_col])
        if cls.kind == "zero":
            continue
        if not integrable(cls, end):
            out = np.where(edge > 0, INF, out)
            continue
        out = out + np.array([grid.tail_mass(float(ev), cls, end) for ev in edge])
    if atom_cols is not None:
        for col, (_, mass) in zip(atom_cols, m.point_masses()):
            out = out + ext_mul(col, mass)
    return out


PAD_DECADES = 6.0


def padded(grid: LogGrid, decades: float = PAD_DECADES) -> LogGrid:
    """Same spacing as ``grid``, extended by ``decades`` at both ends.

    Kernel integrals sum over the padded grid so that the asymptotic tail
    classes are only used far from every row point.
    """
    k = int(round(decades * math.log(10.0) / grid.h))
    lo, hi = grid.x[0] - k * grid.h, grid.x[-1] + k * grid.h
    return LogGrid(math.exp(lo), math.exp(hi), grid.points + 2 * k)


def fundamental_profile(m: BorelMeasure, U, s: float, grid: LogGrid, Ug=None) -> GridFn:
    """phi on a LogGrid (O(N^2) kernel sum) with symbolic tail classes."""
    Ug = U(grid.t) if Ug is None else Ug
    t0, t1 = phi_tails(m, U, s)
    yg = padded(grid)
    K = kernel_matrix(Ug, U(yg.t), s)
    cols = [ext_pow(ext_div(Ug, Ug + _Uval(U, loc)), s) for loc, _ in m.point_masses()]
    vals = integrate_kernel(K, m, yg, Tail.const(), U.tailinf ** (-s), cols)
    return GridFn(grid, vals, t0, t1)


# ---------------------------------------------------------------------------
def check_nondegenerate(m: BorelMeasure, U, s: float) -> str:
    """Verdict on the three non-degeneracy clauses, decided by tail classes.

    Clauses in order: int dmu / (U^s + U(x)^s) < inf; int_[0,1] dmu / U^s = inf;
    int_[1, inf) dmu = inf.
    """
    d0, d1 = m.tails()
    u0, u1 = U.tail0, U.tailinf
    if d0.kind == "inf" or d1.kind == "inf":
        return "fails_finiteness"
    if not (integrable(d0, "0") and integrable(d1 * u1 ** (-s), "inf")):
        return "fails_finiteness"
    zero_atom = any(loc == 0.0 for loc, _ in m.point_masses())
    if not zero_atom and integrable(d0 * u0 ** (-s), "0"):
        return "fails_zero_tail"
    if integrable(d1, "inf"):
        return "fails_infinity_tail"
    return "ok"


def quasiconcavity_defect(phi: GridFn, b: GridFn) -> float:
    """Largest relative violation of phi nondecreasing and phi/b nonincreasing."""
    v = phi.v
    r = ext_div(v, b.v)
    fin = np.isfinite(v) & np.isfinite(r)
    v, r = v[fin], r[fin]
    if v.size < 2:
        return 0.0
    up = np.maximum.accumulate(v)
    dn = np.minimum.accumulate(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = np.nanmax(np.where(v > 0, up / v - 1.0, 0.0))
        d2 = np.nanmax(np.where(dn > 0, r / dn - 1.0, 0.0))
    return float(max(d1, d2, 0.0))


# ---------------------------------------------------------------------------
# the two kernel operations behind every sup-type and integral-type layer
def kernel_sup(U, Ug, F: GridFn, a: float) -> GridFn:
    """S(x) = sup_t calU(t, x)^a F(t) on the grid of F.

    Tail classes use S(x) ~ sup_{t>x} F + U(x)^-a sup_{t<x} U^a F.
    """
    grid = F.grid
    u0, u1 = U.tail0, U.tailinf
    if ((u0 ** a) * F.tail0).grows("0") or F.tailinf.grows("inf"):
        return GridFn(grid, INF, Tail.inf(), Tail.inf())
    K = kernel_matrix(Ug, Ug, a, mirror=True)
    vals = np.max(ext_mul(K, F.v[None, :]), axis=1)
    t0 = tail_sum(running_sup_far(F.tail0, "0"), (u0 ** -a) * running_sup(u0 ** a * F.tail0, "0"), "0")
    t1 = tail_sum(running_sup(F.tailinf, "inf"), (u1 ** -a) * running_sup_far(u1 ** a * F.tailinf, "inf"), "inf")
    return GridFn(grid, vals, t0, t1)


def kernel_stieltjes(U, Ug, m: BorelMeasure, a: float, grid: LogGrid) -> GridFn:
    """J(x) = int calU(t, x)^a dm(t) on the grid.

    Tail classes use J(x) ~ m([x, inf)) + U(x)^-a int_0^x U^a dm.
    """
    yg = padded(grid)
    K = kernel_matrix(Ug, U(yg.t), a, mirror=True)
    atoms = m.point_masses()
    cols = [ext_pow(ext_div(np.full(Ug.shape, float(_Uval(U, loc))), Ug + _Uval(U, loc)), a)
            for loc, _ in atoms]
    vals = integrate_kernel(K, m, yg, U.tail0 ** a, Tail.const(), cols)
    t0, t1 = kernel_stieltjes_tails(U, m, a)
    return GridFn(grid, vals, t0, t1)


def kernel_stieltjes_tails(U, m: BorelMeasure, a: float) -> tuple[Tail, Tail]:
    u0, u1 = U.tail0, U.tailinf
    d0, d1 = m.tails()
    atoms = m.point_masses()
    t0 = tail_sum(tail_integral_far(d0, "0"), (u0 ** -a) * tail_integral_near(u0 ** a * d0, "0"), "0")
    t1 = tail_sum(tail_integral_near(d1, "inf"), (u1 ** -a) * tail_integral_far(u1 ** a * d1, "inf"), "inf")
    if atoms:
        t0 = tail_sum(t0, Tail.const(), "0")
        t1 = tail_sum(t1, u1 ** -a, "inf")
    if d0.kind == "zero" and d1.kind == "zero" and not atoms:
        t0 = t1 = Tail.zero()
    return t0, t1


def kernel_stieltjes_root(U, Ug, G, r: float, a: float, grid: LogGrid) -> GridFn:
    """(int calU(t, x)^a d(-G(t-)^r))^(1/r), summed in the log domain.

    G^r alone leaves double range once r is large (r = 1/(1/p - 1/theta)
    blows up as theta approaches p), while the r-th root of the integral is
    moderate.  Each row is a log-sum-exp over grid columns, atoms and tails.
    """
    m = stieltjes_measure(G, r)
    t0, t1 = kernel_stieltjes_tails(U, m, a)
    yg = padded(grid)
    Ux = np.asarray(Ug, dtype=float)
    Uy = np.asarray(U(yg.t), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        gy = np.asarray(G(yg.t), dtype=float)
        dy = np.maximum(-np.asarray(G.deriv(yg.t), dtype=float), 0.0)
        if np.any(np.isinf(gy) & (dy > 0)):
            return GridFn(grid, INF, Tail.inf(), Tail.inf())
        col = math.log(r) + (r - 1.0) * np.log(gy) + np.log(dy) + np.log(yg.weights)
        col = np.where(dy > 0, col, -INF)
        logK = a * (np.log(Uy)[None, :] - np.log(Ux[:, None] + Uy[None, :]))
        terms = [logK + col[None, :]]
        for loc, lo, hi in G.jumps:
            if lo > hi:
                lm = r * math.log(lo) + math.log1p(-(hi / lo) ** r) if hi > 0 else r * math.log(lo)
                ul = float(_Uval(U, loc))
                terms.append((a * (math.log(ul) - np.log(Ux + ul)) + lm)[:, None])
        d0, d1 = m.tails()
        for end, j, cls in (("0", 0, (U.tail0 ** a) * d0), ("inf", -1, Tail.const() * d1)):
            if cls.kind == "zero" or not dy[j] > 0:
                continue
            fac = yg.tail_mass(1.0, cls, end)
            edge = logK[:, j] + col[j] - math.log(yg.weights[j])
            terms.append((edge + math.log(fac))[:, None])
        L = np.concatenate(terms, axis=1)
        top = np.max(L, axis=1)
        safe = np.where(np.isfinite(top), top, 0.0)
        tot = safe + np.log(np.sum(np.exp(L - safe[:, None]), axis=1))
        vals = np.where(np.isfinite(top), np.exp(tot / r), np.where(top > 0, INF, 0.0))
    return GridFn(grid, vals, t0 ** (1.0 / r), t1 ** (1.0 / r))


def integrate_against(F: GridFn, m: BorelMeasure) -> float:
    """int F dm for a sampled F: grid body, tails, and atoms at F's values."""
    d = m.on_grid(F.grid)
    val = (F * d).integral()
    for loc, mass in m.point_masses():
        if loc == 0.0:
            fv = F.v[0] if F.tail0.bounded("0") and not F.tail0.grows("0") else INF
            if F.tail0.vanishes("0"):
                fv = 0.0
        else:
            fv = float(F.at(loc))
        val += float(ext_mul(fv, mass))
    return val
