"""Discretizing sequences of quasiconcave functions and the discrete constants.

Functions are handled as GridFn samples on a LogGrid that contains t = 1.
A discretizing sequence is built greedily from x_0 = 1: each step moves to
the first grid point where g has grown by lambda AND g/b has dropped by
lambda, so both (g(x_k)) and (b(x_k)/g(x_k)) are geometric.  Each step is then
put in Z1 when g stays within D of g(x_k) on the step, in Z2 when g/b does
(ties go to Z1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import INF, DomainError, conjugate, ext_div, ext_mul, ext_pow, recip
from ._numerics import GridFn, LogGrid, Tail
from .hardy_core import LinearHardyProblem, dual_hardy_norm
from .stieltjes import fundamental_profile, kernel_stieltjes_root, kernel_sup
from .weights import U_envelope, V_envelope, shell_norm

DEFAULT_LAMBDA = 2.0
REL_TOL = 1e-9


def is_admissible(b: GridFn) -> bool:
    """Strictly increasing samples, b(0+) = 0 and b(inf) = inf by tail classes."""
    v = b.v
    if not np.all(np.isfinite(v)) or np.any(np.diff(v) <= 0):
        return False
    return b.tail0.vanishes("0") and b.tailinf.grows("inf")


def check_quasiconcave(g: GridFn, b: GridFn, D: float = 1.0) -> bool:
    """g equivalent to nondecreasing and g/b to nonincreasing, within factor D."""
    v = g.v
    r = ext_div(v, b.v)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(r))):
        return False
    slack = D * (1.0 + REL_TOL)
    up = np.maximum.accumulate(v)
    dn = np.minimum.accumulate(r)
    return bool(np.all(up <= slack * v) and np.all(r <= slack * dn))


def check_nondegenerate_qc(g: GridFn, b: GridFn) -> bool:
    """The four limits g(0+), 1/g(inf), (g/b)(inf), (b/g)(0+) all vanish."""
    ratio0 = g.tail0 * b.tail0 ** -1.0
    ratio1 = g.tailinf * b.tailinf ** -1.0
    return (g.tail0.vanishes("0") and g.tailinf.grows("inf")
            and ratio1.vanishes("inf") and ratio0.grows("0"))


@dataclass
class DiscretizingSequence:
    """Grid indices idx[k] of the points x_k, k = kmin .. kmax, with x_0 = 1."""

    grid: LogGrid
    idx: np.ndarray
    kmin: int
    lam: float
    D: float
    z1: set = field(default_factory=set)
    z2: set = field(default_factory=set)
    boundary: tuple = ()

    @property
    def points(self) -> np.ndarray:
        return self.grid.t[self.idx]

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.kmin, self.kmin + len(self.idx))

    def cls(self, k: int) -> str:
        return "Z1" if k in self.z1 else ("Z2" if k in self.z2 else "-")


def _centre(grid: LogGrid) -> int:
    i = int(np.argmin(np.abs(grid.x)))
    if abs(grid.t[i] - 1.0) > 1e-12:
        raise DomainError("discretization grid must contain t = 1")
    return i


def discretizing_sequence(g: GridFn, b: GridFn, lam: float = DEFAULT_LAMBDA) -> DiscretizingSequence:
    """Greedy construction in both directions from x_0 = 1.

    Right: x_{k+1} is the first grid point with g >= lam g(x_k) and
    g/b <= (g/b)(x_k)/lam.  Left is symmetric.  The window stops at the grid
    edge; the two extreme indices are reported in ``boundary``.
    """
    if not lam > 1:
        raise DomainError("ratio lambda must exceed 1")
    if not check_nondegenerate_qc(g, b):
        raise DomainError("g is degenerate; no discretizing sequence exists")
    grid = g.grid
    gv, rv = g.v, ext_div(g.v, b.v)
    i0 = _centre(grid)
    if not (0 < gv[i0] < INF):
        raise DomainError("g(1) must be positive and finite")
    lo = lam / (1.0 + REL_TOL)  # exact ties count as reaching the ratio
    right = [i0]
    while True:
        i = right[-1]
        ok = np.nonzero((gv[i + 1:] >= lo * gv[i]) & (rv[i + 1:] <= rv[i] / lo))[0]
        if ok.size == 0:
            break
        right.append(i + 1 + int(ok[0]))
    left = []
    i = i0
    while True:
        ok = np.nonzero((gv[:i] <= gv[i] / lo) & (rv[:i] >= lo * rv[i]))[0]
        if ok.size == 0:
            break
        i = int(ok[-1])
        left.append(i)
    idx = np.array(left[::-1] + right, dtype=int)
    if idx.size < 2:
        raise DomainError("no progress: g is degenerate on this grid")
    seq = DiscretizingSequence(grid, idx, -len(left), lam, lam * lam,
                               boundary=(-len(left), len(right) - 1))
    _assign_classes(seq, gv, rv)
    return seq


def _assign_classes(seq: DiscretizingSequence, gv, rv) -> None:
    D = seq.D * (1 + REL_TOL)
    for k, (i, j) in zip(seq.ks, zip(seq.idx[:-1], seq.idx[1:])):
        seg_g, seg_r = gv[i:j + 1], rv[i:j + 1]
        if np.all(seg_g <= D * gv[i]) and np.all(seg_g >= gv[i] / D):
            seq.z1.add(int(k))
        elif np.all(seg_r <= D * rv[i]) and np.all(seg_r >= rv[i] / D):
            seq.z2.add(int(k))


def check_clauses(seq: DiscretizingSequence, g: GridFn, b: GridFn, D: float | None = None) -> dict:
    """Verify the three defining clauses on the window, with constant D."""
    D = (seq.D if D is None else D) * (1 + REL_TOL)
    gv, bv = g.v[seq.idx], b.v[seq.idx]
    rv = gv / bv
    res = {
        "x0": abs(seq.grid.t[seq.idx[-seq.kmin]] - 1.0) < 1e-12,
        "b_geometric": bool(np.all(bv[1:] >= seq.lam * bv[:-1] / (1 + REL_TOL))),
        "g_geometric": bool(np.all(gv[1:] >= seq.lam * gv[:-1] / (1 + REL_TOL))),
        "ratio_geometric": bool(np.all(rv[1:] <= rv[:-1] / seq.lam * (1 + REL_TOL))),
    }
    cover = True
    full_r = ext_div(g.v, b.v)
    for k, (i, j) in zip(seq.ks, zip(seq.idx[:-1], seq.idx[1:])):
        in1, in2 = int(k) in seq.z1, int(k) in seq.z2
        if in1 == in2:
            cover = False
            continue
        seg = g.v[i:j + 1] / g.v[i] if in1 else full_r[i:j + 1] / full_r[i]
        if np.any(seg > D) or np.any(seg < 1.0 / D):
            cover = False
    res["decomposition"] = cover
    res["all"] = all(res.values())
    return res


def discrete_norm(a, w, q: float) -> float:
    """(sum |a_k w_k|^q)^(1/q), the sup for q = inf."""
    prod = np.abs(ext_mul(np.asarray(a, dtype=float), np.asarray(w, dtype=float)))
    if prod.size == 0:
        return 0.0
    if math.isinf(q):
        return float(np.max(prod))
    if np.any(np.isinf(prod)):
        return INF
    top = float(np.max(prod))
    if top == 0.0:
        return 0.0
    return top * float(np.sum((prod / top) ** q) ** (1.0 / q))  # scaled so large q cannot overflow


def geometric_constant(ratio: float, q: float) -> float:
    """K with ||tau_k sum_{m<=k} a_m||_q <= K ||tau_k a_k||_q whenever tau_{k+1} <= ratio tau_k.

    Young's inequality gives 1/(1 - ratio) for q >= 1 (and for the sup);
    the q-triangle inequality gives (1 - ratio^q)^(-1/q) for q < 1.
    """
    if not 0.0 <= ratio < 1.0:
        raise DomainError("geometric ratio must lie in [0, 1)")
    e = 1.0 if math.isinf(q) else min(float(q), 1.0)
    return (1.0 - ratio ** e) ** (-1.0 / e)


def resonance_constant(w, v, q: float, theta: float) -> float:
    """Best C in ||a w||_q <= C ||a v||_theta over all sequences: ||w/v||_rho."""
    irho = max(recip(q) - recip(theta), 0.0)
    rho = INF if irho == 0 else 1.0 / irho
    return discrete_norm(ext_div(np.asarray(w, dtype=float), np.asarray(v, dtype=float)), 1.0, rho)


# ---------------------------------------------------------------------------
# iterated-inequality pieces
@dataclass
class IteratedData:
    """Everything the iterated conditions need, sampled on one grid."""

    grid: LogGrid
    p: float
    q: float
    theta: float
    U: object
    Ug: GridFn
    V: object
    Vg: GridFn
    mu: object
    phi: GridFn

    @property
    def s(self) -> float:
        return self.q / self.p

    @property
    def rho(self) -> float:
        irho = max(recip(self.q) - recip(self.theta), 0.0)
        return INF if irho == 0 else 1.0 / irho

    @property
    def r(self):
        if self.p < self.theta:
            return 1.0 / (recip(self.p) - recip(self.theta))
        return None


def iterated_data(u, v, mu, p, q, theta, grid: LogGrid | None = None, method: str = "closed") -> IteratedData:
    grid = grid or LogGrid()
    U = U_envelope(u, method, grid)
    V = V_envelope(v, theta, method, grid)
    Ug = GridFn.of(grid, U)
    phi = fundamental_profile(mu, U, q / p, grid, Ug.v)
    return IteratedData(grid, float(p), float(q), float(theta), U, Ug, V, GridFn.of(grid, V), mu, phi)


def sup_layer(d: IteratedData) -> GridFn:
    """S(x) = sup_t calU(t, x)^(1/p) V_theta(t)."""
    return kernel_sup(d.U, d.Ug.v, d.Vg, 1.0 / d.p)


def stieltjes_layer(d: IteratedData, r: float, a: float) -> GridFn:
    """J(x)^(1/r) with J(x) = int calU(t, x)^a d(-V_theta(t-)^r)."""
    return kernel_stieltjes_root(d.U, d.Ug.v, d.V, r, a, d.grid)


def local_C(v, theta: float, x_lo: float, x_hi: float) -> float:
    """||v^(-1/theta)||_(theta', S[x_lo, x_hi)); the theta = inf branch ||1/v||_1."""
    return float(shell_norm(v, theta, x_lo, x_hi))


def local_B(u, v, p: float, theta: float, x_lo: float, x_hi: float, grid: LogGrid | None = None) -> float:
    """Restricted dual Hardy norm: u on [x_lo, x_hi), v on the shell, L^theta -> L^p."""
    prob = LinearHardyProblem(u, v, theta, p, interval=(x_lo, x_hi))
    return float(dual_hardy_norm(prob, grid or _local_grid(x_lo, x_hi)))


def _local_grid(a: float, b: float) -> LogGrid:
    # the restricted problem lives on [a, b); pad a little so edges are sampled
    return LogGrid(a / 4.0, b * 4.0, 513)


@dataclass
class DiscreteConstant:
    value: float
    first: float
    second: float
    B: np.ndarray
    C: np.ndarray
    ks: np.ndarray


def discrete_A(u, v, d: IteratedData, seq: DiscretizingSequence) -> DiscreteConstant:
    """A = ||phi(x_k)^(1/q) U(x_k)^(-1/p) B(x_{k-1}, x_k)||_rho + ||phi(x_k)^(1/q) C(x_k, x_{k+1})||_rho.

    Terms are formed for the interior indices of the finite window.
    """
    pts = seq.points
    phik = d.phi.v[seq.idx]
    Uk = d.Ug.v[seq.idx]
    n = len(pts)
    B = np.zeros(n)
    C = np.zeros(n)
    for i in range(n):
        if i >= 1:
            B[i] = local_B(u, v, d.p, d.theta, pts[i - 1], pts[i])
        if i + 1 < n:
            C[i] = local_C(v, d.theta, pts[i], pts[i + 1])
    a1 = ext_mul(ext_mul(ext_pow(phik, 1.0 / d.q), ext_pow(Uk, -1.0 / d.p)), B)
    a2 = ext_mul(ext_pow(phik, 1.0 / d.q), C)
    first = discrete_norm(a1[1:], np.ones(n - 1), d.rho)
    second = discrete_norm(a2[:-1], np.ones(n - 1), d.rho)
    return DiscreteConstant(first + second, first, second, B, C, seq.ks)


def anti_discretized(d: IteratedData, seq: DiscretizingSequence) -> tuple[float, float]:
    """(A*, B*): A* for theta <= p, B* for p < theta; the other entry is nan.

    A* = ||phi(x_k)^(1/q) sup_t calU(t, x_k)^(1/p) V_theta(t)||_rho and
    B* = ||phi(x_k)^(1/q) (int calU(t, x_k)^(r/p) d(-V_theta(t-)^r))^(1/r)||_rho.
    """
    phik = ext_pow(d.phi.v[seq.idx], 1.0 / d.q)
    ones = np.ones(len(seq.idx))
    if d.theta <= d.p:
        S = sup_layer(d)
        return discrete_norm(ext_mul(phik, S.v[seq.idx]), ones, d.rho), float("nan")
    if not np.all(np.isfinite(d.Vg.v)):
        return float("nan"), INF  # d(-V^r) is undefined once V_theta = inf
    r = d.r
    J = stieltjes_layer(d, r, r / d.p)
    return float("nan"), discrete_norm(ext_mul(phik, J.v[seq.idx]), ones, d.rho)


def sup_kernel_value(F, U, x: float, a: float, ts) -> float:
    """sup over ts of calU(t, x)^a F(t), a dense direct evaluation."""
    ts = np.asarray(ts, dtype=float)
    Ut, Ux = U(ts), float(U(x))
    return float(np.max(ext_mul(ext_pow(ext_div(Ut, Ut + Ux), a), F(ts))))
