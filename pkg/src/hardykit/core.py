"""Exponent arithmetic, extended reals and theorem-case classification.

Values live in [0, +inf] and follow the products/quotients convention
0*inf = 0, inf/inf = 0, 0/0 = 0.  The bilinear inequality is indexed by
(n, p1, p2, q, theta); the iterated inequality by (n, p, q, theta).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

INF = math.inf


class DomainError(ValueError):
    """Raised when exponents or weights fall outside the admissible domain."""


class ExtReal(float):
    """Non-negative extended real with the 0*inf = 0 conventions.

    Subclasses float so it drops into numeric code; only multiplication,
    division and powers are redefined.
    """

    def __new__(cls, value=0.0):
        v = float(value)
        if math.isnan(v) or v < 0.0:
            raise DomainError(f"ExtReal must be in [0, inf], got {value!r}")
        return super().__new__(cls, v)

    @property
    def is_inf(self) -> bool:
        return math.isinf(self)

    def __add__(self, other):
        return ExtReal(float(self) + float(other))

    __radd__ = __add__

    def __mul__(self, other):
        return ExtReal(ext_mul(float(self), float(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return ExtReal(ext_div(float(self), float(other)))

    def __rtruediv__(self, other):
        return ExtReal(ext_div(float(other), float(self)))

    def __pow__(self, e):
        return ExtReal(ext_pow(float(self), float(e)))

    def __repr__(self) -> str:
        return "ExtReal(inf)" if self.is_inf else f"ExtReal({float(self)!r})"


def ext_mul(a, b):
    """Product with 0*inf = 0; works on scalars and arrays."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    out = np.where((a == 0.0) | (b == 0.0), 0.0, out)
    return out[()] if out.ndim == 0 else out


def ext_div(a, b):
    """Quotient with inf/inf = 0, 0/0 = 0 and c/0 = inf for c > 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = a / b
    out = np.where((a == 0.0) | (np.isinf(a) & np.isinf(b)), 0.0, out)
    out = np.where((b == 0.0) & (a > 0.0), INF, out)
    return out[()] if out.ndim == 0 else out


def ext_pow(a, e):
    """a**e on [0, inf] with 0**(-e) = inf, inf**(-e) = 0 and x**0 = 1."""
    a = np.asarray(a, dtype=float)
    e = np.asarray(e, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.power(a, e)
    out = np.where(e == 0.0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def recip(p: float) -> float:
    """1/p with 1/inf = 0 and 1/0 = inf."""
    if p == 0:
        return INF
    return 0.0 if math.isinf(p) else 1.0 / p


def conjugate(p: float) -> float:
    """Conjugate exponent: 1/p + 1/p' = 1 (1' = inf, inf' = 1)."""
    if p < 1:
        raise DomainError(f"conjugate exponent needs p >= 1, got {p}")
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _from_recip(x: float) -> Optional[float]:
    if x <= 0:
        return None
    return 1.0 / x


# Tags of the bilinear cases.  T52*: p1 <= q < inf; T53*: q < p1 < inf;
# T54*: p1 = inf; T55*: q = inf.
CASE_TAGS = (
    "T52a", "T52b", "T52c",
    "T53i", "T53ii", "T53iii", "T53iv",
    "T54i", "T54ii", "T54iii",
    "T55a", "T55b", "T55c",
)
ITERATED_TAGS = ("I1", "I2", "I3", "I4", "I5")


@dataclass(frozen=True)
class Exponents:
    """Primary exponents plus every derived exponent (None when undefined)."""

    n: int
    p1: float
    p2: float
    q: float
    theta: float
    p: Optional[float] = None
    r1: Optional[float] = None
    r2: Optional[float] = None
    rho: float = INF
    r: Optional[float] = None
    l: Optional[float] = None
    p1c: float = INF
    p2c: float = INF
    thetac: float = INF
    extra: dict = field(default_factory=dict, compare=False)


def derive_exponents(n, p1, p2, q, theta=INF, p=None) -> Exponents:
    """Fill in r1, r2, rho, r, l and the conjugates.

    r1 exists iff q < p1, r2 iff q < p2, r iff p < theta, l iff p2 > r1.
    """
    n = int(n)
    if n < 1:
        raise DomainError("dimension n must be >= 1")
    p1, p2, q, theta = float(p1), float(p2), float(q), float(theta)
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    for name, val in (("p1", p1), ("p2", p2), ("theta", theta)):
        if not val >= 1:
            raise DomainError(f"{name} must lie in [1, inf], got {val}")
    if p is not None:
        p = float(p)
        if not p > 0:
            raise DomainError(f"p must be positive, got {p}")

    iq = recip(q)
    r1 = _from_recip(iq - recip(p1)) if q < p1 else None
    r2 = _from_recip(iq - recip(p2)) if q < p2 else None
    irho = max(iq - recip(theta), 0.0)
    rho = INF if irho == 0.0 else 1.0 / irho
    r = None
    if p is not None and p < theta:
        r = _from_recip(recip(p) - recip(theta))
    l = None
    if r1 is not None and p2 > r1:
        l = _from_recip(recip(r1) - recip(p2))
    return Exponents(
        n=n, p1=p1, p2=p2, q=q, theta=theta, p=p,
        r1=r1, r2=r2, rho=rho, r=r, l=l,
        p1c=conjugate(p1), p2c=conjugate(p2), thetac=conjugate(theta),
    )


def classify_case(ex: Exponents) -> str:
    """Bilinear theorem case.  Dispatch: q=inf, then p1=inf, then p1<=q."""
    p1, p2, q = ex.p1, ex.p2, ex.q
    if math.isinf(q):
        if not math.isinf(p1) and not math.isinf(p2):
            return "T55a"
        if not math.isinf(p1):
            return "T55b"
        if math.isinf(p2):
            return "T55c"
        # p1 = inf, p2 < inf: symmetric in f and g, handled with roles swapped
        return "T55b"
    if math.isinf(p1):
        if p2 <= q:
            return "T54i"
        return "T54iii" if math.isinf(p2) else "T54ii"
    if p1 <= q:
        if p2 <= q:
            return "T52a"
        return "T52c" if math.isinf(p2) else "T52b"
    r1 = ex.r1
    if p2 <= q:
        return "T53i"
    if math.isinf(p2):
        return "T53iv"
    if p2 <= r1:
        return "T53ii"
    return "T53iii"


def classify_iterated(ex: Exponents) -> str:
    """Iterated case from (p, q, theta).

    The ranges are theta <= min(p,q); q < theta <= p; p < theta <= q;
    max(p,q) < theta < inf; theta = inf.  The point q < theta = p is
    assigned to the second range.
    """
    p, q, th = ex.p, ex.q, ex.theta
    if p is None:
        raise DomainError("iterated classification needs p")
    if math.isinf(q) or math.isinf(p):
        raise DomainError("iterated inequality needs finite p and q")
    if math.isinf(th):
        return "I5"
    if th <= min(p, q):
        return "I1"
    if q < th <= p:
        return "I2"
    if p < th <= q:
        return "I3"
    return "I4"


@dataclass
class Scenario:
    """One inequality instance.

    mode 'bilinear' uses u, v1, v2; mode 'iterated' uses u, v1 (as v) and mu.
    form 'ball' means integrals over balls; it is mapped to 'dual' before
    evaluation.
    """

    exponents: Exponents
    u: object
    v1: object
    v2: object = None
    mu: object = None
    form: str = "dual"
    mode: str = "bilinear"
    name: str = ""

    def __post_init__(self):
        if self.form not in ("ball", "dual"):
            raise DomainError(f"form must be 'ball' or 'dual', got {self.form!r}")
        if self.mode not in ("bilinear", "iterated"):
            raise DomainError(f"mode must be 'bilinear' or 'iterated', got {self.mode!r}")
        if self.mode == "bilinear" and self.v2 is None:
            raise DomainError("bilinear scenario needs v2")
        if self.mode == "iterated" and (self.mu is None or self.exponents.p is None):
            raise DomainError("iterated scenario needs mu and p")

    @property
    def case(self) -> str:
        if self.mode == "iterated":
            return classify_iterated(self.exponents)
        return classify_case(self.exponents)
