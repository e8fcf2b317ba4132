"""Log grids, quadrature on them, and tail-exponent bookkeeping.

A ``Tail`` records how a function behaves at one end of (0, inf):
f(t) ~ t**e * |log t|**k.  Divergence decisions are made from these
exponents, never from truncated sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

INF = math.inf
EXP_TOL = 1e-9

# dyadic default: every power of 2 between 2^-20 and 2^20 is a grid point
DEFAULT_TMIN = 2.0 ** -20
DEFAULT_TMAX = 2.0 ** 20
DEFAULT_POINTS = 2001


def _eq(a: float, b: float) -> bool:
    return abs(a - b) <= EXP_TOL * max(1.0, abs(a), abs(b))


@dataclass(frozen=True)
class Tail:
    """Asymptotic class t**e |log t|**k at one end.

    kind is 'pow' (finite positive), 'zero' (identically zero near the end)
    or 'inf' (identically infinite).
    """

    e: float = 0.0
    k: float = 0.0
    kind: str = "pow"

    @staticmethod
    def zero() -> "Tail":
        return Tail(0.0, 0.0, "zero")

    @staticmethod
    def inf() -> "Tail":
        return Tail(0.0, 0.0, "inf")

    @staticmethod
    def const() -> "Tail":
        return Tail(0.0, 0.0)

    def __mul__(self, other: "Tail") -> "Tail":
        if self.kind == "zero" or other.kind == "zero":
            return Tail.zero()
        if self.kind == "inf" or other.kind == "inf":
            return Tail.inf()
        return Tail(self.e + other.e, self.k + other.k)

    def __pow__(self, a: float) -> "Tail":
        if a == 0:
            return Tail.const()
        if self.kind == "zero":
            return Tail.zero() if a > 0 else Tail.inf()
        if self.kind == "inf":
            return Tail.inf() if a > 0 else Tail.zero()
        return Tail(self.e * a, self.k * a)

    def grows(self, end: str) -> bool:
        """True when f -> inf at this end (end is '0' or 'inf')."""
        if self.kind == "inf":
            return True
        if self.kind == "zero":
            return False
        s = -1.0 if end == "0" else 1.0
        e = s * self.e
        if _eq(self.e, 0.0):
            return self.k > EXP_TOL
        return e > 0

    def vanishes(self, end: str) -> bool:
        """True when f -> 0 at this end."""
        if self.kind == "zero":
            return True
        if self.kind == "inf":
            return False
        s = -1.0 if end == "0" else 1.0
        if _eq(self.e, 0.0):
            return self.k < -EXP_TOL
        return s * self.e < 0

    def bounded(self, end: str) -> bool:
        return not self.grows(end)


def tail_sum(a: Tail, b: Tail, end: str) -> Tail:
    """Dominant class of f + g (also of max(f, g))."""
    if a.kind == "inf" or b.kind == "inf":
        return Tail.inf()
    if a.kind == "zero":
        return b
    if b.kind == "zero":
        return a
    s = -1.0 if end == "0" else 1.0
    if _eq(a.e, b.e):
        return Tail(a.e, max(a.k, b.k))
    return a if s * a.e > s * b.e else b


def integrable(t: Tail, end: str) -> bool:
    """Whether the integral of f converges at this end."""
    if t.kind == "zero":
        return True
    if t.kind == "inf":
        return False
    if _eq(t.e, -1.0):
        return t.k < -1.0 - EXP_TOL
    return t.e > -1.0 if end == "0" else t.e < -1.0


def tail_integral_near(t: Tail, end: str) -> Tail:
    """Class of the integral of f over the piece adjacent to ``end``.

    For end='0' this is x -> int_0^x f; for end='inf' it is x -> int_x^inf f.
    Returns Tail.inf() when that integral diverges.
    """
    if t.kind == "zero":
        return Tail.zero()
    if not integrable(t, end):
        return Tail.inf()
    if _eq(t.e, -1.0):
        return Tail(0.0, t.k + 1.0)
    return Tail(t.e + 1.0, t.k)


def tail_integral_far(t: Tail, end: str) -> Tail:
    """Class at ``end`` of the integral taken from the opposite side.

    For end='inf' this is x -> int_c^x f as x -> inf; for end='0' it is
    x -> int_x^c f as x -> 0.  Bounded integrals give a constant.
    """
    if t.kind == "zero":
        return Tail.const()  # constant beyond the support
    if t.kind == "inf":
        return Tail.inf()
    if integrable(t, end):
        return Tail.const()
    if _eq(t.e, -1.0):
        return Tail(0.0, max(t.k + 1.0, EXP_TOL * 10))
    return Tail(t.e + 1.0, t.k)


def running_sup(t: Tail, end: str) -> Tail:
    """Class of the running sup of f taken from ``end`` outward."""
    if t.grows(end):
        return Tail.inf()
    if t.kind == "zero":
        return Tail.zero()
    if t.vanishes(end):
        return t
    return Tail.const()


def running_sup_far(t: Tail, end: str) -> Tail:
    """Class at ``end`` of the sup of f taken over the opposite side."""
    if t.grows(end):
        return t
    return Tail.const()


class LogGrid:
    """Log-uniform grid on [tmin, tmax] with Simpson weights in log t."""

    def __init__(self, tmin=DEFAULT_TMIN, tmax=DEFAULT_TMAX, points=DEFAULT_POINTS):
        if not (0 < tmin < tmax) or points < 3:
            raise ValueError("grid needs 0 < tmin < tmax and at least 3 points")
        if points % 2 == 0:
            points += 1  # odd count keeps Simpson's rule exact on cubics
        self.tmin, self.tmax, self.points = float(tmin), float(tmax), int(points)
        self.x = np.linspace(math.log(tmin), math.log(tmax), self.points)
        self.t = np.exp(self.x)
        self.t[0], self.t[-1] = tmin, tmax
        self.h = self.x[1] - self.x[0]

    @property
    def weights(self) -> np.ndarray:
        """Composite Simpson weights for int F dt = sum w_i F(t_i) on the grid."""
        w = np.full(self.points, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * self.h / 3.0 * self.t

    def integrate(self, values, tail0: Tail | None = None, tailinf: Tail | None = None):
        """int_0^inf F dt from samples F(t_i), tails from the given classes."""
        values = np.asarray(values, dtype=float)
        if np.any(np.isinf(values)):
            return INF
        core = float(simpson(values * self.t, x=self.x))
        return core + self.tail_mass(values[0], tail0, "0") + self.tail_mass(values[-1], tailinf, "inf")

    def cumulative(self, values, tail0: Tail | None = None):
        """x -> int_0^x F at every grid point (lower tail included)."""
        values = np.asarray(values, dtype=float)
        out = np.full(values.shape, INF)
        bad = np.isinf(values)
        stop = int(np.argmax(bad)) if bad.any() else values.size
        if stop == 0:
            return out
        head = self.tail_mass(values[0], tail0, "0")
        if stop == 1:
            out[0] = head
            return out
        out[:stop] = head + cumulative_simpson(values[:stop] * self.t[:stop], x=self.x[:stop], initial=0.0)
        return out

    def cumulative_from_right(self, values, tailinf: Tail | None = None):
        """x -> int_x^inf F at every grid point (upper tail included)."""
        values = np.asarray(values, dtype=float)
        out = np.full(values.shape, INF)
        bad = np.isinf(values)
        start = int(values.size - np.argmax(bad[::-1])) if bad.any() else 0
        if start >= values.size:
            return out
        tail = self.tail_mass(values[-1], tailinf, "inf")
        seg = (values * self.t)[start:][::-1]
        if seg.size == 1:
            out[start] = tail
            return out
        rev = cumulative_simpson(seg, x=-self.x[start:][::-1], initial=0.0)
        out[start:] = tail + rev[::-1]
        return out

    def tail_mass(self, edge_value: float, tail: Tail | None, end: str) -> float:
        """Integral of the tail beyond the grid edge from the edge value."""
        if tail is None or tail.kind == "zero" or edge_value == 0.0:
            return 0.0
        if not integrable(tail, end):
            return INF
        t0 = self.tmin if end == "0" else self.tmax
        if _eq(tail.e, -1.0):
            lg = abs(math.log(t0))
            return edge_value * t0 * lg / abs(tail.k + 1.0)
        return edge_value * t0 / abs(tail.e + 1.0)


def loglog_interp(t, grid_t, values):
    """Piecewise-power interpolation of positive samples; linear for zeros."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    pos = np.all(v > 0) and np.all(np.isfinite(v))
    if pos:
        return np.exp(np.interp(np.log(t), np.log(grid_t), np.log(v)))
    return np.interp(np.log(t), np.log(grid_t), v)


def _as_tail(t) -> Tail:
    return t if isinstance(t, Tail) else Tail.const()


class GridFn:
    """Samples of a non-negative function on a LogGrid plus its tail classes.

    The tail classes describe the function beyond the grid edges, so sups and
    integrals over all of (0, inf) can be closed off analytically.
    """

    def __init__(self, grid: LogGrid, values, tail0: Tail | None = None, tailinf: Tail | None = None):
        self.grid = grid
        self.v = np.broadcast_to(np.asarray(values, dtype=float), grid.t.shape).copy()
        self.tail0 = _as_tail(tail0)
        self.tailinf = _as_tail(tailinf)

    @classmethod
    def of(cls, grid: LogGrid, prof) -> "GridFn":
        """Sample a profile (callable with tail0/tailinf attributes)."""
        return cls(grid, prof(grid.t), getattr(prof, "tail0", None), getattr(prof, "tailinf", None))

    # algebra ------------------------------------------------------------------
    def __mul__(self, other) -> "GridFn":
        from .core import ext_mul

        if isinstance(other, GridFn):
            return GridFn(self.grid, ext_mul(self.v, other.v), self.tail0 * other.tail0,
                          self.tailinf * other.tailinf)
        c = float(other)
        if c == 0.0:
            return GridFn(self.grid, 0.0, Tail.zero(), Tail.zero())
        return GridFn(self.grid, ext_mul(self.v, c), self.tail0, self.tailinf)

    __rmul__ = __mul__

    def __pow__(self, a: float) -> "GridFn":
        from .core import ext_pow

        return GridFn(self.grid, ext_pow(self.v, a), self.tail0 ** a, self.tailinf ** a)

    def __add__(self, other: "GridFn") -> "GridFn":
        return GridFn(self.grid, self.v + other.v, tail_sum(self.tail0, other.tail0, "0"),
                      tail_sum(self.tailinf, other.tailinf, "inf"))

    # reductions ---------------------------------------------------------------
    def sup(self) -> float:
        """sup over (0, inf); +inf when a tail grows."""
        if self.tail0.grows("0") or self.tailinf.grows("inf"):
            return INF
        if np.any(np.isinf(self.v)):
            return INF
        return float(np.max(self.v)) if self.v.size else 0.0

    def integral(self) -> float:
        """int_0^inf f(t) dt."""
        if self.tail0.kind == "inf" or self.tailinf.kind == "inf":
            return INF
        tot = self.grid.integrate(self.v, self.tail0, self.tailinf)
        return tot

    def cum_left(self) -> "GridFn":
        """x -> int_0^x f."""
        near = tail_integral_near(self.tail0, "0")
        if near.kind == "inf":
            return GridFn(self.grid, INF, Tail.inf(), Tail.inf())
        vals = self.grid.cumulative(self.v, self.tail0)
        return GridFn(self.grid, vals, near, tail_integral_far(self.tailinf, "inf"))

    def cum_right(self) -> "GridFn":
        """x -> int_x^inf f."""
        near = tail_integral_near(self.tailinf, "inf")
        if near.kind == "inf":
            return GridFn(self.grid, INF, Tail.inf(), Tail.inf())
        vals = self.grid.cumulative_from_right(self.v, self.tailinf)
        return GridFn(self.grid, vals, tail_integral_far(self.tail0, "0"), near)

    def runsup_left(self) -> "GridFn":
        """x -> sup_{t < x} f."""
        if self.tail0.grows("0"):
            return GridFn(self.grid, INF, Tail.inf(), Tail.inf())
        vals = np.maximum.accumulate(self.v)
        return GridFn(self.grid, vals, running_sup(self.tail0, "0"), running_sup_far(self.tailinf, "inf"))

    def runsup_right(self) -> "GridFn":
        """x -> sup_{t > x} f."""
        if self.tailinf.grows("inf"):
            return GridFn(self.grid, INF, Tail.inf(), Tail.inf())
        vals = np.maximum.accumulate(self.v[::-1])[::-1]
        return GridFn(self.grid, vals, running_sup_far(self.tail0, "0"), running_sup(self.tailinf, "inf"))

    def at(self, t):
        """Value at arbitrary t: interpolation inside the grid, tail power law outside."""
        t = np.asarray(t, dtype=float)
        g = self.grid.t
        inside = loglog_interp(np.clip(t, g[0], g[-1]), g, self.v)
        lo = self.tail0.e if self.tail0.kind == "pow" else 0.0
        hi = self.tailinf.e if self.tailinf.kind == "pow" else 0.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.where(t < g[0], self.v[0] * (t / g[0]) ** lo, inside)
            out = np.where(t > g[-1], self.v[-1] * (t / g[-1]) ** hi, out)
        return out
