"""Brute-force lower bounds on best constants.

Test functions live in a cone of radial step-like functions: on a log grid
of cells [e_j, e_{j+1}) with e_j = 10^((j - N/2)/8), a function is
sum_j c_j psi_j with c_j >= 0, where psi_j = v^(1-p') on the shell
e_j <= |x| < e_{j+1} (the extremal shape for the L^p(v) norm).  For p = 1
the cells carry plain indicators, and for p = inf the shape is 1/v.

Every number returned is the ratio of an explicit pair (f, g) or an
explicit h, so it is a lower bound for the best constant up to the outer
quadrature, which uses a midpoint rule in log t with ``sub`` nodes per cell.
The parts of (0, inf) below and above the window are closed off exactly:
below the first cell the primitives are constant, above the last they vanish.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import INF, DomainError, Scenario, conjugate, ext_mul, ext_pow
from .stieltjes import BorelMeasure, stieltjes_integral
from .weights import (
    FunctionWeight,
    Profile,
    RadialWeight,
    U_envelope,
    quad_integral,
    sphere_area,
    _weight_breaks,
)

CELLS_PER_DECADE = 8
DEFAULT_CELLS = 64
DEFAULT_SUB = 8
LATTICE = 2.0 ** ((np.arange(17) - 8) / 2.0)


@dataclass(frozen=True)
class Budget:
    starts: int = 16
    sweeps: int = 50


@dataclass
class StepFunctionCone:
    """Cell edges plus non-negative coefficients for the shaped basis."""

    edges: np.ndarray
    coefs: np.ndarray
    p: float

    def cell_of(self, t):
        return np.searchsorted(self.edges, t, side="right") - 1


@dataclass
class OracleResult:
    value: float
    first: StepFunctionCone | None = None
    second: StepFunctionCone | None = None
    probes: int = 0
    trace: list = field(default_factory=list)


def cell_edges(cells: int) -> np.ndarray:
    j = np.arange(cells + 1) - cells / 2.0
    return 10.0 ** (j / CELLS_PER_DECADE)


def default_cells() -> int:
    import os

    raw = os.environ.get("HARDYKIT_GRID_DEFAULT")
    return int(raw) if raw else DEFAULT_CELLS


# ---------------------------------------------------------------------------
class _Nodes:
    """Sub-intervals of the window, split at extra breakpoints, with midpoints."""

    def __init__(self, cells: int, sub: int, breaks=()):
        self.cells = cells
        self.edges = cell_edges(cells)
        a0, bN = self.edges[0], self.edges[-1]
        xs = np.linspace(np.log(a0), np.log(bN), cells * sub + 1)
        pts = np.exp(xs)
        pts[0], pts[-1] = a0, bN
        pts[::sub] = self.edges  # cell edges exactly
        extra = [b for b in breaks if a0 < b < bN]
        self.sub_edges = np.union1d(pts, extra)
        lo, hi = self.sub_edges[:-1], self.sub_edges[1:]
        self.mid = np.sqrt(lo * hi)
        self.dx = np.log(hi) - np.log(lo)
        self.w = self.mid * self.dx  # midpoint rule for dt
        self.cell = np.clip(np.searchsorted(self.edges, self.mid, side="right") - 1, 0, cells - 1)

    @property
    def a0(self) -> float:
        return float(self.edges[0])

    @property
    def bN(self) -> float:
        return float(self.edges[-1])


def _piece_integrator(w):
    if isinstance(w, RadialWeight):
        return lambda a, b: np.asarray(w.integral(a, b), dtype=float)
    br = _weight_breaks(w)
    return lambda a, b: np.array([quad_integral(w, float(x), float(y), br) for x, y in zip(a, b)])


def _radial(v, expo: float, n: int):
    """s^(n-1) v(s)^expo as a weight (expo = 0 gives s^(n-1))."""
    if isinstance(v, RadialWeight):
        base = v.pow(expo) if expo != 0 else RadialWeight([], [1.0], [0.0], v.dim)
        return base.times_power(n - 1)
    return FunctionWeight(lambda s: ext_mul(ext_pow(v(s), expo), s ** (n - 1)),
                          0.0, 0.0, n, _weight_breaks(v))


class _Side:
    """Basis data for one test function: Psi matrix, totals and norm masses."""

    def __init__(self, v, p: float, n: int, nodes: _Nodes):
        self.p = float(p)
        sig = sphere_area(n)
        if self.p == 1.0:
            psi_w, norm_w = _radial(v, 0.0, n), _radial(v, 1.0, n)
        elif math.isinf(self.p):
            psi_w, norm_w = _radial(v, -1.0, n), None
        else:
            psi_w = _radial(v, 1.0 - conjugate(self.p), n)
            norm_w = psi_w
        lo, hi, mid = nodes.sub_edges[:-1], nodes.sub_edges[1:], nodes.mid
        integ = _piece_integrator(psi_w)
        right = sig * integ(mid, hi)
        left = sig * integ(lo, mid)
        sub_tot = left + right
        N = nodes.cells
        self.mass = np.bincount(nodes.cell, weights=sub_tot, minlength=N)
        after = np.zeros_like(sub_tot)  # mass of later sub-intervals in the same cell
        for c in range(N):
            idx = np.nonzero(nodes.cell == c)[0]
            if idx.size:
                tot = np.cumsum(sub_tot[idx][::-1])[::-1]
                after[idx] = np.concatenate((tot[1:], [0.0]))
        partial = right + after
        M = mid.size
        K = np.zeros((M, N))
        K[:] = self.mass[None, :]
        cols = np.arange(N)[None, :]
        K[cols < nodes.cell[:, None]] = 0.0
        K[np.arange(M), nodes.cell] = partial
        self.K = K
        self.ktot = self.mass.copy()
        if norm_w is psi_w:
            self.m = self.mass.copy()
        elif norm_w is not None:
            nint = _piece_integrator(norm_w)
            self.m = sig * np.array([float(nint(np.array([a]), np.array([b]))[0])
                                     for a, b in zip(nodes.edges[:-1], nodes.edges[1:])])
        else:
            self.m = None
        self.K_ext = np.vstack((K, self.ktot[None, :]))

    def norm(self, c) -> float:
        c = np.asarray(c, dtype=float)
        if math.isinf(self.p):
            return float(np.max(c, axis=0))
        return float(np.sum(self.m * c ** self.p) ** (1.0 / self.p))

    def norms(self, C) -> np.ndarray:
        """Norms of the columns of C."""
        if math.isinf(self.p):
            return np.max(C, axis=0)
        return np.sum(self.m[:, None] * C ** self.p, axis=0) ** (1.0 / self.p)

    def normalize(self, c):
        nm = self.norm(c)
        return c / nm if nm > 0 and math.isfinite(nm) else c

    def live(self) -> np.ndarray:
        """Cells where the basis function is non-trivial with finite norm."""
        ok = self.mass > 0
        if self.m is not None:
            ok &= (self.m > 0) & np.isfinite(self.m)
        return ok & np.isfinite(self.mass)

    def boyd(self, grad):
        """Coefficients maximizing <grad, c> over the unit ball of the norm."""
        grad = np.where(self.live(), np.maximum(grad, 0.0), 0.0)
        if not np.any(grad > 0):
            return None
        if math.isinf(self.p):
            return np.where(self.live(), 1.0, 0.0)
        if self.p == 1.0:
            j = int(np.argmax(np.where(self.live(), grad / np.where(self.m > 0, self.m, 1.0), -1.0)))
            c = np.zeros_like(grad)
            c[j] = 1.0 / self.m[j]
            return c
        # log domain: tiny cell masses far out would overflow (grad/m)^(1/(p-1))
        ok = (grad > 0) & self.live()
        lc = np.full(grad.shape, -np.inf)
        lc[ok] = (np.log(grad[ok]) - np.log(self.m[ok])) / (self.p - 1.0)
        lm = np.log(np.where(ok, self.m, 1.0))
        # unit norm: c_j = exp(lc_j - s) with s = log(sum m_j exp(p lc_j)) / p
        s = np.logaddexp.reduce(np.where(ok, lm + self.p * lc, -np.inf)) / self.p
        return np.where(ok, np.exp(lc - s), 0.0)

    def row_best(self, K_rows) -> np.ndarray:
        """For each row k, the max over unit-norm c of (K c)_k."""
        live = self.live()
        Kr = np.where(live[None, :], K_rows, 0.0)
        if math.isinf(self.p):
            return Kr.sum(axis=1)
        if self.p == 1.0:
            m = np.where(live, self.m, 1.0)
            return np.max(Kr / m[None, :], axis=1)
        pc = conjugate(self.p)
        m = np.where(live, self.m, 1.0)
        return np.sum(Kr ** pc * m[None, :] ** (1.0 - pc), axis=1) ** (1.0 / pc)

    def row_maximizer(self, krow) -> np.ndarray:
        live = self.live()
        krow = np.where(live, krow, 0.0)
        if math.isinf(self.p):
            return live.astype(float)
        c = np.zeros_like(krow)
        if self.p == 1.0:
            j = int(np.argmax(np.where(live, krow / np.where(self.m > 0, self.m, 1.0), -1.0)))
            c[j] = 1.0 / self.m[j]
            return c
        with np.errstate(divide="ignore", invalid="ignore"):
            c = np.where(live, (krow / np.where(self.m > 0, self.m, 1.0)) ** (1.0 / (self.p - 1.0)), 0.0)
        return self.normalize(np.nan_to_num(c))

    def random_start(self, rng) -> np.ndarray:
        c = rng.exponential(size=self.mass.size) * self.live()
        if not np.any(c > 0):
            c = self.live().astype(float)
        return self.normalize(c)


def _ess_sup_below(u, a: float) -> float:
    if isinstance(u, RadialWeight):
        return float(u.ess_sup(0.0, a))
    if u.tail("0").grows("0"):
        return INF
    t = np.geomspace(a * 1e-12, a, 2001)[:-1]
    return float(np.max(u(t)))


def _U_at(u, t: float) -> float:
    return float(U_envelope(u)(np.array(t)))


# ---------------------------------------------------------------------------
# bilinear
class BilinearProblem:
    """(int (F G)^q u)^(1/q) / (||f||_(p1,v1) ||g||_(p2,v2)) on a cell grid."""

    def __init__(self, sc: Scenario, cells: int | None = None, sub: int = DEFAULT_SUB):
        if sc.form != "dual" or sc.mode != "bilinear":
            raise DomainError("bilinear oracle needs a dual-form bilinear scenario")
        ex = sc.exponents
        cells = cells or default_cells()
        br = set(_weight_breaks(sc.u)) | set(_weight_breaks(sc.v1)) | set(_weight_breaks(sc.v2))
        self.nodes = nd = _Nodes(cells, sub, sorted(br))
        self.q = ex.q
        self.f = _Side(sc.v1, ex.p1, ex.n, nd)
        self.g = _Side(sc.v2, ex.p2, ex.n, nd)
        u_mid = np.asarray(sc.u(nd.mid), dtype=float)
        if math.isinf(self.q):
            self.omega = np.concatenate((u_mid, [_ess_sup_below(sc.u, nd.a0)]))
        else:
            self.omega = np.concatenate((u_mid * nd.w, [_U_at(sc.u, nd.a0)]))

    # evaluation ---------------------------------------------------------------
    def lhs_cols(self, Fe, Ge) -> np.ndarray:
        """LHS for columns of Fe against columns of Ge (pairwise matrix)."""
        if math.isinf(self.q):
            out = np.empty((Fe.shape[1], Ge.shape[1]))
            for a in range(Fe.shape[1]):
                out[a] = np.max(ext_mul(ext_mul(self.omega, Fe[:, a])[:, None], Ge), axis=0)
            return out
        q = self.q
        with np.errstate(invalid="ignore", over="ignore"):
            A = ext_mul(self.omega[:, None], Fe ** q)
            fin = np.isfinite(A)
            val = np.where(fin, A, 0.0).T @ (Ge ** q)
            inf_hit = (~fin).astype(float).T @ (Ge > 0).astype(float) > 0
        val = np.where(inf_hit, INF, val)
        return val ** (1.0 / q)

    def ratio(self, cf, cg) -> float:
        nf, ng = self.f.norm(cf), self.g.norm(cg)
        if nf == 0 or ng == 0:
            return 0.0
        Fe = self.f.K_ext @ cf
        Ge = self.g.K_ext @ cg
        return float(self.lhs_cols(Fe[:, None], Ge[:, None])[0, 0]) / (nf * ng)

    def _grad(self, me: _Side, cme, Oe) -> np.ndarray:
        q = self.q
        Me = me.K_ext @ cme
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            coef = ext_mul(ext_mul(self.omega, Oe ** q), np.where(Me > 0, Me ** (q - 1.0), 0.0))
        coef = np.nan_to_num(coef, nan=0.0, posinf=np.finfo(float).max / 1e6)
        return me.K_ext.T @ coef

    def step(self, side: str, cme, other):
        me, them = (self.f, self.g) if side == "f" else (self.g, self.f)
        Oe = them.K_ext @ other
        if math.isinf(self.q):
            vals = me.row_best(me.K_ext)
            score = ext_mul(ext_mul(self.omega, Oe), vals)
            score = np.nan_to_num(score, posinf=np.finfo(float).max)
            k = int(np.argmax(score))
            return me.row_maximizer(me.K_ext[k])
        if me.p == 1.0 or math.isinf(me.p):
            # exact best response: a vertex for p = 1, the constant for p = inf
            return self._vertex_step(me, Oe)
        grad = self._grad(me, cme, Oe)
        new = me.boyd(grad)
        return cme if new is None else new

    def _vertex_step(self, me: _Side, Oe):
        live = me.live()
        if math.isinf(me.p):
            return live.astype(float)
        q = self.q
        with np.errstate(invalid="ignore", over="ignore"):
            cols = ext_mul((ext_mul(self.omega, Oe ** q))[:, None], me.K_ext ** q).sum(axis=0) ** (1.0 / q)
        score = np.where(live, cols / np.where(me.m > 0, me.m, 1.0), -1.0)
        j = int(np.argmax(np.nan_to_num(score, posinf=np.finfo(float).max)))
        c = np.zeros(me.mass.size)
        c[j] = 1.0 / me.m[j]
        return c

    # structured family ----------------------------------------------------------
    def blocks(self, side: _Side, max_len: int):
        N = side.mass.size
        specs, cols = [], []
        for i in range(N):
            top = N if max_len >= N else min(N, i + max_len)
            for j in range(i + 1, top + 1):
                specs.append((i, j))
        specs = list(dict.fromkeys(specs + [(i, N) for i in range(N)]))
        C = np.zeros((N, len(specs)))
        for k, (i, j) in enumerate(specs):
            C[i:j, k] = side.live()[i:j]
        keep = C.sum(axis=0) > 0
        return [s for s, kk in zip(specs, keep) if kk], C[:, keep]

    def structured(self, top: int) -> tuple[float, list]:
        """Best pairs of shell functions; returns (best ratio, top pairs as coefficient tuples)."""
        N = self.f.mass.size
        max_len = N if N <= 64 else 16
        if math.isinf(self.q):
            max_len = min(max_len, 4 if N > 64 else 8)
        sf, Cf = self.blocks(self.f, max_len)
        sg, Cg = self.blocks(self.g, max_len)
        tails_f = [k for k, (i, j) in enumerate(sf) if j == N]
        tails_g = [k for k, (i, j) in enumerate(sg) if j == N]
        Fe, Ge = self.f.K_ext @ Cf, self.g.K_ext @ Cg
        nf, ng = self.f.norms(Cf), self.g.norms(Cg)
        cands = []
        for rows, colset in ((tails_f, range(Cg.shape[1])), (range(Cf.shape[1]), tails_g)):
            rows, colset = list(rows), list(colset)
            for start in range(0, len(rows), 256):
                rr = rows[start:start + 256]
                L = self.lhs_cols(Fe[:, rr], Ge[:, colset])
                with np.errstate(invalid="ignore", divide="ignore"):
                    R = L / (nf[rr][:, None] * ng[colset][None, :])
                R = np.nan_to_num(R, nan=0.0)
                flat = np.argsort(-R, axis=None, kind="stable")[: top * 4]
                for fl in flat:
                    a, b = np.unravel_index(fl, R.shape)
                    cands.append((float(R[a, b]), rr[a], colset[b]))
        cands.sort(key=lambda z: (-z[0], z[1], z[2]))
        seen, pairs = set(), []
        for val, a, b in cands:
            if (a, b) in seen:
                continue
            seen.add((a, b))
            pairs.append((val, Cf[:, a].copy(), Cg[:, b].copy()))
            if len(pairs) >= top:
                break
        best = pairs[0][0] if pairs else 0.0
        return best, pairs


def _ascend(problem, cf, cg, sweeps: int):
    best = problem.ratio(cf, cg)
    arg = (cf, cg)
    trace = [best]
    if not math.isfinite(best):
        return best, arg, trace
    prev = best
    for _ in range(sweeps):
        cf = problem.step("f", cf, cg)
        r = problem.ratio(cf, cg)
        if r > best:
            best, arg = r, (cf, cg)
        cg = problem.step("g", cg, cf)
        r = problem.ratio(cf, cg)
        if r > best:
            best, arg = r, (cf, cg)
        trace.append(r)
        if not math.isfinite(best) or abs(r - prev) <= 1e-13 * max(abs(r), 1e-300):
            break
        prev = r
    return best, arg, trace


def _run_starts(fn, n: int, jobs: int):
    if jobs <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, range(n)))


def bilinear_best_lower(sc: Scenario, cells: int | None = None, budget: Budget = Budget(), seed: int = 0,
                        jobs: int = 1, sub: int = DEFAULT_SUB, verbose: bool = False) -> OracleResult:
    """Largest ratio found by shell-pair search plus multistart alternating ascent.

    Start i is the (i//2)-th best structured pair for even i and a random
    pair drawn from rng([seed, i]) for odd i, so a larger budget only adds
    probes.  Each ascent keeps the best iterate it has seen.
    """
    prob = BilinearProblem(sc, cells, sub)
    best, pairs = prob.structured(max(1, (budget.starts + 1) // 2))
    arg = (pairs[0][1], pairs[0][2]) if pairs else (None, None)

    def one(i):
        if i % 2 == 0 and i // 2 < len(pairs):
            _, cf, cg = pairs[i // 2]
        else:
            rng = np.random.default_rng([seed, i])
            cf, cg = prob.f.random_start(rng), prob.g.random_start(rng)
        return _ascend(prob, cf, cg, budget.sweeps)

    results = _run_starts(one, budget.starts, jobs)
    trace = []
    for val, a, tr in results:
        trace.append(tr)
        if val > best:
            best, arg = val, a
    edges = prob.nodes.edges
    first = StepFunctionCone(edges, arg[0], prob.f.p) if arg[0] is not None else None
    second = StepFunctionCone(edges, arg[1], prob.g.p) if arg[1] is not None else None
    return OracleResult(float(best), first, second, sum(len(t) for t in trace), trace if verbose else [])


def reevaluate(sc: Scenario, res: OracleResult, sub: int) -> float:
    """Ratio of the stored argmax pair on a finer quadrature (same cells)."""
    cells = res.first.coefs.size
    if sc.mode == "iterated":
        prob = IteratedProblem(sc, cells, sub)
        return prob.ratio(res.first.coefs)
    prob = BilinearProblem(sc, cells, sub)
    return prob.ratio(res.first.coefs, res.second.coefs)


# ---------------------------------------------------------------------------
# lattice mode (tiny grids): coefficients restricted to LATTICE values
def _lattice_points(cells: int) -> np.ndarray:
    grids = np.meshgrid(*([LATTICE] * cells), indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=0)  # cells x 17^cells


def _lattice_batch(prob: BilinearProblem, Cf: np.ndarray, cg: np.ndarray) -> np.ndarray:
    """Ratios of every column of Cf against a single g."""
    Fe = prob.f.K_ext @ Cf
    Ge = (prob.g.K_ext @ cg)[:, None]
    L = prob.lhs_cols(Fe, Ge)[:, 0]
    return L / (prob.f.norms(Cf) * prob.g.norm(cg))


def lattice_ascent(sc: Scenario, cells: int = 2, sweeps: int = 50) -> float:
    """Alternating ascent where each block update is exhaustive over the lattice.

    Starts run over every lattice point for g, in lattice order.  The g step
    only selects; values are always read from the f-batch evaluation, so a
    pair scores the same bits here as in ``lattice_exhaustive``.
    """
    prob = BilinearProblem(sc, cells)
    P = _lattice_points(cells)
    best = -INF
    for s in range(P.shape[1]):
        jg = s
        prev = None
        for _ in range(sweeps):
            r = _lattice_batch(prob, P, P[:, jg])
            jf = int(np.argmax(r))
            best = max(best, float(r[jf]))
            jg_new = int(np.argmax(_lattice_batch_g(prob, P[:, jf], P)))
            if prev == (jf, jg_new):
                break
            prev, jg = (jf, jg_new), jg_new
    return best


def _lattice_batch_g(prob: BilinearProblem, cf, Cg) -> np.ndarray:
    Fe = (prob.f.K_ext @ cf)[:, None]
    Ge = prob.g.K_ext @ Cg
    L = prob.lhs_cols(Fe, Ge)[0]
    return L / (prob.f.norm(cf) * prob.g.norms(Cg))


def lattice_exhaustive(sc: Scenario, cells: int = 2) -> float:
    """Maximum over all lattice pairs, evaluated g by g with the same batch routine."""
    prob = BilinearProblem(sc, cells)
    P = _lattice_points(cells)
    return max(float(np.max(_lattice_batch(prob, P, P[:, j]))) for j in range(P.shape[1]))


# ---------------------------------------------------------------------------
# iterated
class IteratedProblem:
    """(int ((1/U(t)) int_0^t H^p u)^(q/p) dmu(t))^(1/q) / ||h||_(theta,v)."""

    def __init__(self, sc: Scenario, cells: int | None = None, sub: int = DEFAULT_SUB):
        if sc.mode != "iterated":
            raise DomainError("iterated oracle needs an iterated scenario")
        ex = sc.exponents
        self.p, self.q, self.theta = float(ex.p), float(ex.q), float(ex.theta)
        self.s = self.q / self.p
        cells = cells or default_cells()
        mu: BorelMeasure = sc.mu
        br = set(_weight_breaks(sc.u)) | set(_weight_breaks(sc.v1)) | set(mu.breaks())
        self.nodes = nd = _Nodes(cells, sub, sorted(br))
        self.h = _Side(sc.v1, self.theta, ex.n, nd)
        U = U_envelope(sc.u)
        self.U0 = float(U(np.array(nd.a0)))
        self.U_mid = np.asarray(U(nd.mid), dtype=float)
        self.U_edge = np.asarray(U(nd.sub_edges), dtype=float)
        self.term_w = np.asarray(sc.u(nd.mid), dtype=float) * nd.w
        self.mu_mid = np.asarray(mu.density_at(nd.mid), dtype=float) * nd.w
        self.atoms = [(int(np.searchsorted(nd.sub_edges, x)), m) for x, m in mu.point_masses()
                      if nd.a0 <= x < nd.bN]
        below = stieltjes_integral(1.0, mu, 0.0, nd.a0)
        below -= sum(m for x, m in mu.point_masses() if x == 0.0)
        self.below = below
        s = self.s
        Uinv = Profile(lambda t: ext_pow(U(t), -s), U.tail0 ** -s, U.tailinf ** -s)
        self.above = stieltjes_integral(Uinv, mu, nd.bN, INF)

    def _parts(self, c):
        H = self.h.K @ c
        Htot = float(self.h.ktot @ c)
        T0 = ext_mul(self.U0, Htot ** self.p)
        terms = ext_mul(self.term_w, H ** self.p)
        T_edge = T0 + np.concatenate(([0.0], np.cumsum(terms)))
        T_mid = T_edge[:-1] + 0.5 * terms
        return H, Htot, T0, terms, T_edge, T_mid

    def objective(self, c) -> float:
        """LHS^q."""
        s = self.s
        H, Htot, T0, terms, T_edge, T_mid = self._parts(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = float(np.sum(ext_mul(self.mu_mid, ext_pow(T_mid / self.U_mid, s))))
        for idx, m in self.atoms:
            val += float(ext_mul(m, ext_pow(T_edge[idx] / self.U_edge[idx], s)))
        val += float(ext_mul(self.below, Htot ** self.q))
        val += float(ext_mul(self.above, ext_pow(T_edge[-1], s)))
        return val

    def ratio(self, c) -> float:
        nm = self.h.norm(c)
        if nm == 0:
            return 0.0
        return float(ext_pow(self.objective(c), 1.0 / self.q)) / nm

    def grad(self, c) -> np.ndarray:
        s, p = self.s, self.p
        H, Htot, T0, terms, T_edge, T_mid = self._parts(c)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            a_mid = self.mu_mid * s * ext_pow(T_mid / self.U_mid, s - 1.0) / self.U_mid
            a_edge = np.zeros(T_edge.size)
            for idx, m in self.atoms:
                a_edge[idx] += m * s * ext_pow(T_edge[idx] / self.U_edge[idx], s - 1.0) / self.U_edge[idx]
            a_edge[-1] += self.above * s * ext_pow(T_edge[-1], s - 1.0)
        a_mid = np.nan_to_num(a_mid, nan=0.0, posinf=1e300)
        a_edge = np.nan_to_num(a_edge, nan=0.0, posinf=1e300)
        # term i feeds T_mid[i] with weight 1/2, T_mid[j > i] and T_edge[j > i] fully
        later_mid = np.concatenate((np.cumsum(a_mid[::-1])[::-1][1:], [0.0]))
        later_edge = np.cumsum(a_edge[::-1])[::-1][1:]
        d_term = 0.5 * a_mid + later_mid + later_edge
        dT0 = a_mid.sum() + a_edge.sum()
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            dH = d_term * self.term_w * p * np.where(H > 0, H ** (p - 1.0), 0.0)
            dHtot = dT0 * self.U0 * p * (Htot ** (p - 1.0) if Htot > 0 else 0.0)
            dHtot += self.below * self.q * (Htot ** (self.q - 1.0) if Htot > 0 else 0.0)
        dH = np.nan_to_num(dH, nan=0.0, posinf=1e300)
        return self.h.K.T @ dH + self.h.ktot * float(np.nan_to_num(dHtot, posinf=1e300))

    def step(self, c):
        side = self.h
        if math.isinf(side.p):
            return side.live().astype(float)
        if side.p == 1.0:
            return self.best_vertex()
        new = side.boyd(self.grad(c))
        return c if new is None else new

    def best_vertex(self):
        side = self.h
        best, arg = -1.0, None
        for j in np.nonzero(side.live())[0]:
            c = np.zeros(side.mass.size)
            c[j] = 1.0 / side.m[j]
            r = self.ratio(c)
            if r > best:
                best, arg = r, c
        return arg

    def structured(self, top: int):
        N = self.h.mass.size
        max_len = N if N <= 64 else 16
        specs = []
        for i in range(N):
            hi = N if max_len >= N else min(N, i + max_len)
            specs += [(i, j) for j in range(i + 1, hi + 1)]
        specs = list(dict.fromkeys(specs + [(i, N) for i in range(N)]))
        live = self.h.live()
        scored = []
        for i, j in specs:
            c = np.zeros(N)
            c[i:j] = live[i:j]
            if not c.any():
                continue
            scored.append((self.ratio(c), i, j, c))
        scored.sort(key=lambda z: (-z[0], z[1], z[2]))
        return scored[:top]


def iterated_best_lower(sc: Scenario, cells: int | None = None, budget: Budget = Budget(), seed: int = 0,
                        jobs: int = 1, sub: int = DEFAULT_SUB, verbose: bool = False) -> OracleResult:
    """Shell family plus multistart ascent on h for the iterated inequality."""
    prob = IteratedProblem(sc, cells, sub)
    seeds = prob.structured(max(1, (budget.starts + 1) // 2))
    best = seeds[0][0] if seeds else 0.0
    arg = seeds[0][3] if seeds else None

    def one(i):
        if i % 2 == 0 and i // 2 < len(seeds):
            c = seeds[i // 2][3]
        else:
            c = prob.h.random_start(np.random.default_rng([seed, i]))
        b, a = prob.ratio(c), c
        tr = [b]
        prev = b
        for _ in range(budget.sweeps):
            if not math.isfinite(b):
                break
            c = prob.step(c)
            r = prob.ratio(c)
            tr.append(r)
            if r > b:
                b, a = r, c
            if abs(r - prev) <= 1e-13 * max(abs(r), 1e-300):
                break
            prev = r
        return b, a, tr

    results = _run_starts(one, budget.starts, jobs)
    traces = []
    for val, a, tr in results:
        traces.append(tr)
        if val > best:
            best, arg = val, a
    first = StepFunctionCone(prob.nodes.edges, arg, prob.h.p) if arg is not None else None
    return OracleResult(float(best), first, None, sum(len(t) for t in traces), traces if verbose else [])


def best_lower(sc: Scenario, cells: int | None = None, budget: Budget = Budget(), seed: int = 0,
               jobs: int = 1, sub: int = DEFAULT_SUB) -> OracleResult:
    if sc.mode == "iterated":
        return iterated_best_lower(sc, cells, budget, seed, jobs, sub)
    if sc.form == "ball":
        from .weights import dual_transform

        sc = dual_transform(sc)
    return bilinear_best_lower(sc, cells, budget, seed, jobs, sub)
