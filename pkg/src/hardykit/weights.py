"""Radial weights and the primitives built from them.

Weights are piecewise powers c * t**alpha between breakpoints.  A tabulated
weight is stored as the piecewise power that interpolates its samples
log-linearly, with declared exponents beyond the first and last sample, so
every integral of a weight has a closed form.  ``FunctionWeight`` wraps an
arbitrary callable and is only reachable through quadrature.

U(t) = int_0^t u and V_theta(t) = ||v^(-1/theta)||_(theta', |x| > t), with the
theta = inf branch ||v^-1||_1.  Radial integrals over R^n carry the surface
factor sigma_(n-1) = 2 pi^(n/2) / Gamma(n/2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from .core import INF, DomainError, conjugate, ext_mul, ext_pow
from ._numerics import (
    LogGrid,
    Tail,
    loglog_interp,
    running_sup,
    running_sup_far,
    tail_integral_far,
    tail_integral_near,
    tail_sum,
)

# Lanczos coefficients for g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def lanczos_gamma(x: float) -> float:
    """Gamma function by the Lanczos approximation (reflection for x < 1/2)."""
    x = float(x)
    if x < 0.5:
        if x == math.floor(x):
            return INF
        return math.pi / (math.sin(math.pi * x) * lanczos_gamma(1.0 - x))
    x -= 1.0
    a = _LANCZOS_C[0]
    t = x + _LANCZOS_G + 0.5
    for i in range(1, len(_LANCZOS_C)):
        a += _LANCZOS_C[i] / (x + i)
    return math.sqrt(2.0 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def sphere_area(n: int) -> float:
    """Surface measure sigma_(n-1) of the unit sphere in R^n (2 for n = 1)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / lanczos_gamma(n / 2.0)


def _seg_integral(c: float, alpha: float, a, b):
    """int_a^b c s**alpha ds for arrays a <= b inside one segment."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast(a, b).shape)
    live = b > a
    if c == 0.0 or not np.any(live):
        return out
    if math.isinf(c):
        out[live] = INF
        return out
    a, b = np.broadcast_to(a, out.shape)[live], np.broadcast_to(b, out.shape)[live]
    e = alpha + 1.0
    res = np.empty(a.shape)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if abs(e) < 1e-13:
            res = c * (np.log(b) - np.log(a))
            res[(a == 0) | np.isinf(b)] = INF
        else:
            zero = a == 0
            top = np.isinf(b)
            mid = ~zero & ~top
            res[mid] = c * a[mid] ** e * np.expm1(e * np.log(b[mid] / a[mid])) / e
            res[zero & ~top] = (c * b[zero & ~top] ** e / e) if e > 0 else INF
            res[top & ~zero] = (-c * a[top & ~zero] ** e / e) if e < 0 else INF
            res[top & zero] = INF
    out[live] = res
    return out


def _seg_sup(c: float, alpha: float, lo, hi):
    """sup of c s**alpha over (lo, hi), arrays with lo < hi."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if c == 0.0:
        return np.zeros(np.broadcast(lo, hi).shape)
    if math.isinf(c):
        return np.full(np.broadcast(lo, hi).shape, INF)
    with np.errstate(divide="ignore", over="ignore"):
        if alpha > 0:
            return np.where(np.isinf(hi), INF, c * hi ** alpha)
        if alpha < 0:
            return np.where(lo == 0, INF, c * lo ** alpha)
    return np.full(np.broadcast(lo, hi).shape, c)


class RadialWeight:
    """Piecewise power weight on (0, inf), or radial weight on R^dim.

    Segment j covers (breaks[j-1], breaks[j]) with value coefs[j] * t**alphas[j];
    coefficients may be 0 or inf.  Values at breakpoints are right limits.
    """

    def __init__(self, breaks, coefs, alphas, dim: int = 1, label: str = ""):
        self.breaks = np.asarray(breaks, dtype=float).reshape(-1)
        self.coefs = np.asarray(coefs, dtype=float).reshape(-1)
        self.alphas = np.asarray(alphas, dtype=float).reshape(-1)
        self.dim = int(dim)
        self.label = label
        m = self.breaks.size
        if self.coefs.size != m + 1 or self.alphas.size != m + 1:
            raise DomainError("piecewise weight needs len(coefs) == len(alphas) == len(breaks) + 1")
        if m and (np.any(self.breaks <= 0) or np.any(np.diff(self.breaks) <= 0)):
            raise DomainError("breakpoints must be positive and increasing")
        if np.any(self.coefs < 0) or np.any(np.isnan(self.coefs)):
            raise DomainError("weight coefficients must be non-negative")
        if self.dim < 1:
            raise DomainError("weight dimension must be >= 1")

    # construction helpers -------------------------------------------------
    @property
    def is_power(self) -> bool:
        return self.breaks.size == 0

    @property
    def lo(self) -> np.ndarray:
        return np.concatenate(([0.0], self.breaks))

    @property
    def hi(self) -> np.ndarray:
        return np.concatenate((self.breaks, [INF]))

    def with_dim(self, dim: int) -> "RadialWeight":
        return RadialWeight(self.breaks, self.coefs, self.alphas, dim, self.label)

    def pow(self, e: float) -> "RadialWeight":
        """Pointwise power w**e with 0**(-e) = inf."""
        return RadialWeight(self.breaks, ext_pow(self.coefs, e), self.alphas * e, self.dim)

    def scaled(self, c: float) -> "RadialWeight":
        return RadialWeight(self.breaks, ext_mul(self.coefs, c), self.alphas, self.dim)

    def times_power(self, k: float) -> "RadialWeight":
        """Pointwise product w(t) * t**k."""
        return RadialWeight(self.breaks, self.coefs, self.alphas + k, self.dim)

    def multiply(self, other: "RadialWeight") -> "RadialWeight":
        """Pointwise product of two piecewise powers."""
        br = np.union1d(self.breaks, other.breaks)
        mids = _segment_probes(br)
        i = np.searchsorted(self.breaks, mids, side="right")
        j = np.searchsorted(other.breaks, mids, side="right")
        return RadialWeight(br, ext_mul(self.coefs[i], other.coefs[j]), self.alphas[i] + other.alphas[j], self.dim)

    def restricted(self, a: float, b: float, outside: float = 0.0) -> "RadialWeight":
        """Copy equal to w on [a, b) and to the constant ``outside`` elsewhere."""
        pts = [x for x in (a, b) if 0 < x < INF]
        br = np.union1d(self.breaks, pts)
        mids = _segment_probes(br)
        i = np.searchsorted(self.breaks, mids, side="right")
        coefs = self.coefs[i].copy()
        alphas = self.alphas[i].copy()
        out = (mids < a) | (mids >= b)
        coefs[out] = outside
        alphas[out] = 0.0
        return RadialWeight(br, coefs, alphas, self.dim)

    def inverted(self, k: float) -> "RadialWeight":
        """The weight t -> w(1/t) * t**k."""
        br = np.sort(1.0 / self.breaks)
        return RadialWeight(br, self.coefs[::-1].copy(), (-self.alphas + k)[::-1].copy(), self.dim)

    # evaluation -----------------------------------------------------------
    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="right")
        return ext_mul(self.coefs[idx], ext_pow(t, self.alphas[idx]))

    def left(self, t):
        """Left limit w(t-)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="left")
        return ext_mul(self.coefs[idx], ext_pow(t, self.alphas[idx]))

    def integral(self, a, b):
        """int_a^b w(s) ds, closed form; 0 <= a <= b <= inf."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        total = np.zeros(np.broadcast(a, b).shape)
        for c, al, lo, hi in zip(self.coefs, self.alphas, self.lo, self.hi):
            aa = np.clip(a, lo, hi)
            bb = np.clip(b, lo, hi)
            total = total + _seg_integral(float(c), float(al), aa, bb)
        return total[()] if total.ndim == 0 else total

    def log_upper(self, t) -> np.ndarray:
        """log int_t^inf w(s) ds for t > 0, summed in the log domain.

        Used where the integral itself leaves double range while a power of
        it (such as V_theta = (...)^(1/theta')) does not.
        """
        t = np.atleast_1d(np.asarray(t, dtype=float))
        lt = np.log(t)
        parts = []
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            for c, al, lo, hi in zip(self.coefs, self.alphas, self.lo, self.hi):
                live = hi > t
                if c == 0.0 or not np.any(live):
                    continue
                if math.isinf(c):
                    parts.append(np.where(live, INF, -INF))
                    continue
                la = np.log(np.maximum(t, lo))
                e = al + 1.0
                if math.isinf(hi):
                    if e >= 0:
                        parts.append(np.where(live, INF, -INF))
                        continue
                    seg = math.log(c) + e * la - math.log(-e)
                else:
                    lb = math.log(hi)
                    if abs(e) < 1e-13:
                        seg = math.log(c) + np.log(lb - la)
                    elif e > 0:
                        seg = math.log(c) + e * lb + np.log(-np.expm1(-e * (lb - la))) - math.log(e)
                    else:
                        seg = math.log(c) + e * la + np.log(-np.expm1(e * (lb - la))) - math.log(-e)
                parts.append(np.where(live, seg, -INF))
            if not parts:
                return np.full(lt.shape, -INF)
            return np.logaddexp.reduce(np.vstack(parts), axis=0)

    def log_at(self, t) -> np.ndarray:
        """log w(t) without forming w(t)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breaks, t, side="right")
        with np.errstate(divide="ignore"):
            return np.log(self.coefs[idx]) + self.alphas[idx] * np.log(t)

    def ess_sup(self, a, b=INF):
        """Essential sup of w over (a, b)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        best = np.zeros(np.broadcast(a, b).shape)
        for c, al, lo, hi in zip(self.coefs, self.alphas, self.lo, self.hi):
            aa = np.maximum(a, lo)
            bb = np.minimum(b, hi)
            live = bb > aa
            if not np.any(live):
                continue
            val = np.where(live, _seg_sup(float(c), float(al), np.where(live, aa, 1.0), np.where(live, bb, 2.0)), 0.0)
            best = np.maximum(best, val)
        return best[()] if best.ndim == 0 else best

    def tail(self, end: str) -> Tail:
        j = 0 if end == "0" else -1
        c = self.coefs[j]
        if c == 0:
            return Tail.zero()
        if math.isinf(c):
            return Tail.inf()
        return Tail(float(self.alphas[j]))

    def __repr__(self) -> str:
        if self.is_power:
            return f"Power(c={self.coefs[0]:g}, alpha={self.alphas[0]:g}, dim={self.dim})"
        return f"PiecewisePower(breaks={self.breaks.tolist()}, dim={self.dim})"


def _segment_probes(br: np.ndarray) -> np.ndarray:
    """One interior point per segment of the partition by ``br``."""
    if br.size == 0:
        return np.array([1.0])
    inner = np.sqrt(br[:-1] * br[1:]) if br.size > 1 else np.array([])
    return np.concatenate(([br[0] / 2.0], inner, [br[-1] * 2.0]))


def power(c: float, alpha: float, dim: int = 1) -> RadialWeight:
    """Power weight c * |x|**alpha."""
    return RadialWeight([], [c], [alpha], dim, label=f"power {c:g} {alpha:g}")


def piecewise(breaks, coefs, alphas, dim: int = 1) -> RadialWeight:
    return RadialWeight(breaks, coefs, alphas, dim, label="piecewise")


def tabulated(radii, values, tail0: float, tailinf: float, dim: int = 1) -> RadialWeight:
    """Log-linear interpolation of positive samples with power tails."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 2 or r.size != v.size:
        raise DomainError("tabulated weight needs at least two (radius, value) pairs")
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise DomainError("tabulated radii must be positive and increasing")
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise DomainError("tabulated values must be positive and finite")
    slopes = np.diff(np.log(v)) / np.diff(np.log(r))
    alphas = np.concatenate(([tail0], slopes, [tailinf]))
    anchors_r = np.concatenate(([r[0]], r[:-1], [r[-1]]))
    anchors_v = np.concatenate(([v[0]], v[:-1], [v[-1]]))
    coefs = anchors_v / anchors_r ** alphas
    return RadialWeight(r, coefs, alphas, dim, label="table")


@dataclass
class FunctionWeight:
    """Arbitrary non-negative weight given pointwise, integrated by quadrature."""

    fn: object
    tail0: float
    tailinf: float
    dim: int = 1
    breaks: tuple = ()

    def __call__(self, t):
        return np.asarray(self.fn(np.asarray(t, dtype=float)), dtype=float)

    def left(self, t):
        return self(t)

    def tail(self, end: str) -> Tail:
        return Tail(self.tail0 if end == "0" else self.tailinf)

    def with_dim(self, dim: int) -> "FunctionWeight":
        return replace(self, dim=dim)


# ---------------------------------------------------------------------------
# quadrature path
def quad_integral(fn, a: float, b: float, breaks=()) -> float:
    """int_a^b fn by adaptive quadrature in log t, split at breakpoints."""
    if not b > a:
        return 0.0
    cuts = [a] + [x for x in sorted(breaks) if a < x < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        xlo = -INF if lo == 0 else math.log(lo)
        xhi = INF if math.isinf(hi) else math.log(hi)

        def g(x):
            if abs(x) > 700.0:
                return 0.0  # beyond double range; tails were classified already
            s = math.exp(x)
            return float(ext_mul(fn(s), s))

        with warnings.catch_warnings():
            # roundoff notices on tiny pieces; the estimate is still at machine level
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(g, xlo, xhi, epsabs=0.0, epsrel=1e-12, limit=400)
        if not math.isfinite(val):
            return INF
        total += val
    return total


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def cell_integrals(fn, edges, breaks=()) -> np.ndarray:
    """int over each [edges[i], edges[i+1]] of fn, Gauss-Legendre in log t.

    One vectorized evaluation for all cells; cells are split at breakpoints
    so every piece sees a smooth integrand.
    """
    edges = np.asarray(edges, dtype=float)
    cuts = np.union1d(edges, [b for b in breaks if edges[0] < b < edges[-1]])
    owner = np.searchsorted(edges, cuts[:-1], side="right") - 1
    lo, hi = np.log(cuts[:-1]), np.log(cuts[1:])
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    s = np.exp(x)
    vals = ext_mul(np.asarray(fn(s.ravel()), dtype=float).reshape(s.shape), s)
    piece = ext_mul(vals, _GL_W[None, :]).sum(axis=1) * half
    out = np.zeros(edges.size - 1)
    np.add.at(out, owner, piece)
    return out


def _weight_breaks(w) -> tuple:
    return tuple(np.asarray(getattr(w, "breaks", ()), dtype=float).tolist())


# ---------------------------------------------------------------------------
# U and V_theta
def primitive_U(u, t, method: str = "closed"):
    """U(t) = int_0^t u.  +inf when u is not integrable at 0."""
    if method == "closed" and isinstance(u, RadialWeight):
        return u.integral(0.0, t)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if not _integrable_at_zero(u):
        out = np.full(t_arr.shape, INF)
    else:
        out = np.array([quad_integral(u, 0.0, float(x), _weight_breaks(u)) for x in t_arr])
    return out[0] if np.ndim(t) == 0 else out


def _integrable_at_zero(w) -> bool:
    tl = w.tail("0")
    return tl.kind == "zero" or (tl.kind == "pow" and tl.e > -1.0)


def _integrable_at_inf(w) -> bool:
    tl = w.tail("inf")
    return tl.kind == "zero" or (tl.kind == "pow" and tl.e < -1.0)


def _v_integrand(v, theta: float):
    """Radial integrand s**(n-1) * v**(1 - theta') (theta < inf) or s**(n-1)/v."""
    n = v.dim
    expo = -1.0 if math.isinf(theta) else 1.0 - conjugate(theta)
    if isinstance(v, RadialWeight):
        return v.pow(expo).times_power(n - 1)
    return FunctionWeight(
        lambda s: ext_mul(ext_pow(v(s), expo), s ** (n - 1)),
        tail0=expo * v.tail0 + n - 1,
        tailinf=expo * v.tailinf + n - 1,
        dim=n,
        breaks=_weight_breaks(v),
    )


def tail_norm_V(v, theta: float, t, method: str = "closed"):
    """V_theta(t) over the dual ball {|x| > t}.

    theta = 1 gives the essential sup of 1/v there; theta = inf gives
    the L^1 norm of 1/v.
    """
    theta = float(theta)
    if theta < 1:
        raise DomainError("theta must lie in [1, inf]")
    n = v.dim
    sig = sphere_area(n)
    if theta == 1.0:
        inv = v.pow(-1.0) if isinstance(v, RadialWeight) else None
        if inv is not None:
            return inv.ess_sup(t, INF)
        grid = np.geomspace(max(np.min(t), 1e-12), 1e12, 4096)
        vals = 1.0 / v(grid)
        run = np.maximum.accumulate(vals[::-1])[::-1]
        return np.interp(np.log(t), np.log(grid), run)
    w = _v_integrand(v, theta)
    if method == "closed" and isinstance(w, RadialWeight):
        mass = sig * w.integral(t, INF)
    else:
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if not _integrable_at_inf(w):
            mass = np.full(t_arr.shape, INF)
        else:
            mass = np.array([sig * quad_integral(w, float(x), INF, _weight_breaks(w)) for x in t_arr])
        if np.ndim(t) == 0:
            mass = mass[0]
    if math.isinf(theta):
        return mass
    return ext_pow(mass, 1.0 / conjugate(theta))


def shell_norm(v, theta: float, a, b, method: str = "closed"):
    """||v^(-1/theta)||_(theta', a <= |x| < b), the theta = inf branch ||1/v||_1."""
    n = v.dim
    sig = sphere_area(n)
    if theta == 1.0:
        if isinstance(v, RadialWeight):
            return v.pow(-1.0).ess_sup(a, b)
        grid = np.geomspace(a, b, 2049)
        return float(np.max(1.0 / v(grid)))
    w = _v_integrand(v, theta)
    if method == "closed" and isinstance(w, RadialWeight):
        mass = sig * w.integral(a, b)
    else:
        mass = sig * quad_integral(w, float(a), float(b), _weight_breaks(w))
    if math.isinf(theta):
        return mass
    return ext_pow(mass, 1.0 / conjugate(theta))


# ---------------------------------------------------------------------------
# envelopes
class Profile:
    """Non-negative function on (0, inf) with tail classes at both ends."""

    def __init__(self, fn, tail0: Tail, tailinf: Tail, left=None):
        self.fn = fn
        self.tail0 = tail0
        self.tailinf = tailinf
        self._left = left

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def left(self, t):
        """Left limit f(t-); equals f(t) for continuous profiles."""
        return self(t) if self._left is None else self._left(np.asarray(t, dtype=float))


class MonotoneEnvelope(Profile):
    """Monotone profile with derivative and jump data for Stieltjes measures.

    direction is +1 (nondecreasing) or -1 (nonincreasing).  ``deriv`` gives
    G'(t) on the continuous part and ``dtail0``/``dtailinf`` the tail classes
    of |G'|.  ``jumps`` lists (location, G(loc-), G(loc)).
    """

    def __init__(self, fn, tail0, tailinf, direction: int, deriv=None, jumps=(), left=None,
                 dtail0=None, dtailinf=None, breaks=()):
        super().__init__(fn, tail0, tailinf, left)
        self.breaks = tuple(sorted(set(float(b) for b in breaks) | {float(j[0]) for j in jumps}))
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        self.direction = direction
        self._deriv = deriv
        self.jumps = tuple(jumps)
        self.dtail0 = dtail0 if dtail0 is not None else _deriv_tail(tail0)
        self.dtailinf = dtailinf if dtailinf is not None else _deriv_tail(tailinf)

    @classmethod
    def from_samples(cls, grid_t, values, direction, tail0: Tail, tailinf: Tail, **kw):
        """Envelope interpolating samples piecewise-power-wise, power tails outside."""
        grid_t = np.asarray(grid_t, dtype=float)
        values = np.asarray(values, dtype=float)
        e0 = tail0.e if tail0.kind == "pow" else 0.0
        e1 = tailinf.e if tailinf.kind == "pow" else 0.0

        def fn(t):
            t = np.asarray(t, dtype=float)
            out = loglog_interp(np.clip(t, grid_t[0], grid_t[-1]), grid_t, values)
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                out = np.where(t < grid_t[0], values[0] * (t / grid_t[0]) ** e0, out)
                out = np.where(t > grid_t[-1], values[-1] * (t / grid_t[-1]) ** e1, out)
            return out

        return cls(fn, tail0, tailinf, direction, **kw)

    def deriv(self, t):
        t = np.asarray(t, dtype=float)
        if self._deriv is not None:
            return self._deriv(t)
        eps = 1e-6
        with np.errstate(invalid="ignore"):
            return (self(t * (1 + eps)) - self(t * (1 - eps))) / (2 * eps * t)

    def stieltjes_density(self, r: float):
        """Density of d(-G^r) on the continuous part (G nonincreasing)."""

        def dens(t):
            g = self(t)
            d = np.maximum(-np.asarray(self.deriv(t), dtype=float), 0.0)
            return ext_mul(r * ext_pow(g, r - 1.0), d)

        return dens

    def stieltjes_tails(self, r: float) -> tuple[Tail, Tail]:
        """Tail classes of the density of d(-G^r)."""
        return (self.tail0 ** (r - 1.0)) * self.dtail0, (self.tailinf ** (r - 1.0)) * self.dtailinf

    def stieltjes_atoms(self, r: float) -> list:
        """Point masses G(b-)^r - G(b)^r of d(-G^r)."""
        return [(b, float(ext_pow(lo, r) - ext_pow(hi, r))) for b, lo, hi in self.jumps]


def _deriv_tail(t: Tail) -> Tail:
    # class of |G'| from the class of G; constants have no usable derivative class
    if t.kind != "pow" or (abs(t.e) < 1e-12 and abs(t.k) < 1e-12):
        return Tail.zero()
    if abs(t.e) < 1e-12:
        return Tail(-1.0, t.k - 1.0)
    return Tail(t.e - 1.0, t.k)


def U_envelope(u, method: str = "closed", grid: LogGrid | None = None) -> MonotoneEnvelope:
    """U(t) = int_0^t u as a nondecreasing envelope."""
    t0, tinf = u.tail("0"), u.tail("inf")
    tail0 = tail_integral_near(t0, "0")
    tailinf = Tail.inf() if tail0.kind == "inf" else tail_integral_far(tinf, "inf")
    kw = dict(deriv=u, dtail0=t0, dtailinf=tinf, breaks=_weight_breaks(u))
    if tail0.kind == "inf":
        return MonotoneEnvelope(lambda t: np.full(np.shape(t), INF), tail0, tailinf, 1, **kw)
    if method == "closed" and isinstance(u, RadialWeight):
        return MonotoneEnvelope(lambda t: u.integral(0.0, t), tail0, tailinf, 1, **kw)
    grid = grid or LogGrid()
    br = _weight_breaks(u)
    steps = np.concatenate(([quad_integral(u, 0.0, float(grid.t[0]), br)], cell_integrals(u, grid.t, br)))
    return MonotoneEnvelope.from_samples(grid.t, np.cumsum(steps), 1, tail0, tailinf, **kw)


def V_tails(v, theta: float) -> tuple[Tail, Tail]:
    """Tail classes of V_theta at 0 and at inf."""
    if theta == 1.0:
        inv0, inv1 = v.tail("0") ** -1.0, v.tail("inf") ** -1.0
        at_inf = running_sup(inv1, "inf")
        if at_inf.kind == "inf":
            return Tail.inf(), Tail.inf()
        return running_sup_far(inv0, "0"), at_inf
    expo = -1.0 if math.isinf(theta) else 1.0 - conjugate(theta)
    w0 = (v.tail("0") ** expo) * Tail(v.dim - 1.0)
    w1 = (v.tail("inf") ** expo) * Tail(v.dim - 1.0)
    i1 = tail_integral_near(w1, "inf")
    if i1.kind == "inf":
        return Tail.inf(), Tail.inf()
    pw = 1.0 if math.isinf(theta) else 1.0 / conjugate(theta)
    return tail_integral_far(w0, "0") ** pw, i1 ** pw


def V_envelope(v, theta: float, method: str = "closed", grid: LogGrid | None = None) -> MonotoneEnvelope:
    """V_theta as a nonincreasing envelope with its Stieltjes data."""
    theta = float(theta)
    tail0, tailinf = V_tails(v, theta)
    sig = sphere_area(v.dim)
    if tailinf.kind == "inf":
        return MonotoneEnvelope(lambda t: np.full(np.shape(t), INF), Tail.inf(), Tail.inf(), -1)
    if theta == 1.0:
        return _V1_envelope(v, tail0, tailinf)
    w = _v_integrand(v, theta)
    thc = 1.0 if math.isinf(theta) else conjugate(theta)
    # -V' = V^(1 - theta') sigma w / theta'
    dt0 = (tail0 ** (1.0 - thc)) * w.tail("0")
    dt1 = (tailinf ** (1.0 - thc)) * w.tail("inf")

    if method == "closed" and isinstance(w, RadialWeight):
        # log domain: sig * int_t^inf w overflows long before its 1/theta' power does
        lsig = math.log(sig)

        def log_mass(t):
            t = np.asarray(t, dtype=float)
            return (lsig + w.log_upper(t)).reshape(t.shape)

        def fn(t):
            return np.exp(log_mass(t) / thc)

        def deriv(t):
            lm = log_mass(t)
            with np.errstate(invalid="ignore"):
                d = -np.exp(lm / thc - lm + lsig + w.log_at(t)) / thc
            return np.where(np.isneginf(lm), 0.0, d)  # V = 0 beyond the support of 1/v

        return MonotoneEnvelope(fn, tail0, tailinf, -1, deriv=deriv, dtail0=dt0, dtailinf=dt1,
                                breaks=_weight_breaks(w))
    else:
        grid = grid or LogGrid()
        br = _weight_breaks(w)
        pieces = cell_integrals(w, grid.t, br)
        last = quad_integral(w, float(grid.t[-1]), INF, br)
        mass = sig * (np.concatenate((np.cumsum(pieces[::-1])[::-1], [0.0])) + last)
        grid_vals = ext_pow(mass, 1.0 / thc)
        fn = MonotoneEnvelope.from_samples(grid.t, grid_vals, -1, tail0, tailinf).fn

    def deriv(t):
        return -ext_mul(ext_pow(fn(t), 1.0 - thc) / thc, sig * w(t))

    return MonotoneEnvelope(fn, tail0, tailinf, -1, deriv=deriv, dtail0=dt0, dtailinf=dt1,
                            breaks=_weight_breaks(w))


def _V1_envelope(v, tail0, tailinf) -> MonotoneEnvelope:
    """V_1(t) = ess sup_{s > t} 1/v(s), with jumps at breakpoints."""
    if not isinstance(v, RadialWeight):
        raise DomainError("theta = 1 envelopes need a piecewise power weight")
    inv = v.pow(-1.0)

    def fn(t):
        return inv.ess_sup(t, INF)

    def deriv(t):
        t = np.asarray(t, dtype=float)
        cur = inv(t)
        g = fn(t)
        al = inv.alphas[np.searchsorted(inv.breaks, t, side="right")]
        active = (np.abs(cur - g) <= 1e-12 * np.maximum(g, 1e-300)) & (al < 0)
        with np.errstate(invalid="ignore"):
            return np.where(active, al * cur / t, 0.0)

    jumps = []
    for b in inv.breaks:
        after = float(fn(b))
        before = max(float(inv.left(b)), after)
        if before > after * (1 + 1e-14):
            jumps.append((float(b), before, after))

    def left(t):
        t = np.asarray(t, dtype=float)
        return np.maximum(fn(t), inv.left(t))

    def end_dtail(j, end):
        c, al = inv.coefs[j], inv.alphas[j]
        if al < 0 and 0 < c < INF:
            return Tail(al - 1.0)
        return Tail.zero()

    # kinks: breakpoints, and where a decreasing piece meets the plateau to its right
    kinks = list(inv.breaks)
    edges = (0.0,) + tuple(inv.breaks) + (INF,)
    for j, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        c, al = inv.coefs[j], inv.alphas[j]
        if al < 0 and 0 < c < INF and hi < INF:
            top = float(fn(hi))
            if 0 < top < INF:
                lx = (math.log(top) - math.log(c)) / float(al)
                if (lo == 0.0 or math.log(lo) < lx) and lx < math.log(hi):
                    kinks.append(math.exp(lx))
    return MonotoneEnvelope(fn, tail0, tailinf, -1, deriv=deriv, jumps=jumps, left=left,
                            dtail0=end_dtail(0, "0"), dtailinf=end_dtail(-1, "inf"), breaks=kinks)


def calU(x, t, U) -> np.ndarray:
    """U(x) / (U(t) + U(x)) with the 0/0 = 0 and inf/inf = 0 conventions."""
    ux = U(np.asarray(x, dtype=float))
    ut = U(np.asarray(t, dtype=float))
    from .core import ext_div

    # the larger share is taken as a complement so calU(x,t) + calU(t,x) == 1 in floats
    tot = ut + ux
    with np.errstate(invalid="ignore"):
        small = ext_div(np.minimum(ux, ut), tot)
    return np.where(ux > ut, 1.0 - small, small)


# ---------------------------------------------------------------------------
# ball form <-> dual-ball form
def dual_transform(scenario, method: str = "closed"):
    """Map a ball-form scenario to the equivalent dual-ball form.

    u~(t) = u(1/t) t^-2 and v~_i(x) = v_i(x/|x|^2) |x|^(2n(p_i - 1)); for
    p_i = inf the factor is |x|^(2n).  For q = inf the outer weight is u(1/t).
    method='closed' keeps piecewise powers exact; method='pointwise' wraps the
    weights as callables so downstream primitives go through quadrature.
    """
    from .core import Scenario

    ex = scenario.exponents
    n = ex.n
    uk = 0.0 if math.isinf(ex.q) else -2.0

    def vk(p):
        return 2.0 * n if math.isinf(p) else 2.0 * n * (p - 1.0)

    def tr(w, k):
        if w is None:
            return None
        if method == "closed" and isinstance(w, RadialWeight):
            return w.inverted(k)
        return _pointwise_inverse(w, k)

    if scenario.mode == "iterated":
        raise DomainError("ball form is defined for the bilinear inequality only")
    new_form = "dual" if scenario.form == "ball" else "ball"
    return Scenario(
        exponents=ex,
        u=tr(scenario.u, uk),
        v1=tr(scenario.v1, vk(ex.p1)),
        v2=tr(scenario.v2, vk(ex.p2)),
        mu=scenario.mu,
        form=new_form,
        mode=scenario.mode,
        name=scenario.name,
    )


def _pointwise_inverse(w, k: float) -> FunctionWeight:
    t0 = w.tail("0")
    t1 = w.tail("inf")
    e0 = -t1.e + k if t1.kind == "pow" else 0.0
    e1 = -t0.e + k if t0.kind == "pow" else 0.0
    br = tuple(sorted(1.0 / b for b in _weight_breaks(w)))

    def fn(s):
        with np.errstate(over="ignore"):
            return ext_mul(w(1.0 / s), s ** k)

    return FunctionWeight(fn, e0, e1, w.dim, br)


# ---------------------------------------------------------------------------
def grid_sup(values, tail0: Tail | None = None, tailinf: Tail | None = None) -> float:
    """sup over (0, inf) from grid samples, +inf when a tail class grows."""
    values = np.asarray(values, dtype=float)
    if tail0 is not None and tail0.grows("0"):
        return INF
    if tailinf is not None and tailinf.grows("inf"):
        return INF
    if values.size == 0:
        return 0.0
    if np.any(np.isinf(values)):
        return INF
    return float(np.nanmax(values))


def sup_product(F: Profile, G, grid: LogGrid | None = None, direction: int | None = None) -> float:
    """sup_t F(t) * (running sup of G), the monotone-F exchange of suprema.

    For F nonincreasing the running sup is over tau < t; for F nondecreasing
    over tau > t.  Both equal sup_t F(t) G(t).
    """
    grid = grid or LogGrid()
    if direction is None:
        direction = getattr(F, "direction", -1)
    f = np.asarray(F(grid.t), dtype=float)
    g = np.asarray(G(grid.t), dtype=float)
    if not np.any(f):
        return 0.0
    if direction < 0:
        run = np.maximum.accumulate(g)
        rt0 = running_sup(_tail_of(G, "0"), "0")
        rtinf = running_sup_far(_tail_of(G, "inf"), "inf")
    else:
        run = np.maximum.accumulate(g[::-1])[::-1]
        rt0 = running_sup_far(_tail_of(G, "0"), "0")
        rtinf = running_sup(_tail_of(G, "inf"), "inf")
    vals = ext_mul(f, run)
    return grid_sup(vals, _tail_of(F, "0") * rt0, _tail_of(F, "inf") * rtinf)


def _tail_of(f, end: str) -> Tail:
    tl = getattr(f, "tail0" if end == "0" else "tailinf", None)
    return tl if isinstance(tl, Tail) else Tail.const()
