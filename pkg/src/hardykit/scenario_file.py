"""Plain-text scenario files.

One ``key value...`` pair per line, ``#`` starts a comment::

    name   E1
    mode   bilinear          # or iterated
    form   dual              # or ball
    n      1
    p1 2
    p2 2
    q  2
    u  power 1 3
    v1 power 1 3
    v2 power 1 3

Weights: ``power c alpha``, ``piecewise b1,b2 c0,c1,c2 a0,a1,a2`` or
``table <path> tail0 A tailinf B`` (two columns: radius value).  Iterated
files give ``theta``, ``p``, ``q``, ``u``, ``v`` and a measure with
``mu density <weight>`` and/or repeated ``mu atom <x> <mass>`` lines.
A file may instead give ``g`` and ``b`` weights for the discretize command.
"""
from __future__ import annotations

import itertools
import math
import os

import numpy as np

from .core import INF, DomainError, Scenario, derive_exponents
from .stieltjes import BorelMeasure
from .weights import piecewise, power, tabulated


class ParseError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def _num(tok: str, line: int) -> float:
    t = tok.strip().lower()
    if t in ("inf", "+inf", "infinity", "oo"):
        return INF
    try:
        val = float(t)
    except ValueError:
        raise ParseError(line, f"not a number: {tok!r}") from None
    if math.isnan(val):
        raise ParseError(line, "nan is not allowed")
    return val


def _nums(tok: str, line: int) -> list:
    return [_num(x, line) for x in tok.split(",") if x.strip()]


def parse_weight(toks: list, line: int, dim: int, base_dir: str = "."):
    if not toks:
        raise ParseError(line, "missing weight spec")
    kind = toks[0].lower()
    try:
        if kind == "power":
            if len(toks) != 3:
                raise ParseError(line, "expected: power c alpha")
            return power(_num(toks[1], line), _num(toks[2], line), dim)
        if kind == "piecewise":
            if len(toks) != 4:
                raise ParseError(line, "expected: piecewise breaks coefs alphas")
            return piecewise(_nums(toks[1], line), _nums(toks[2], line), _nums(toks[3], line), dim)
        if kind == "table":
            opts = dict(zip(toks[2::2], toks[3::2]))
            if len(toks) != 6 or "tail0" not in opts or "tailinf" not in opts:
                raise ParseError(line, "expected: table <path> tail0 A tailinf B")
            path = toks[1] if os.path.isabs(toks[1]) else os.path.join(base_dir, toks[1])
            try:
                data = np.loadtxt(path, ndmin=2)
            except OSError as exc:
                raise ParseError(line, f"cannot read table: {exc}") from None
            return tabulated(data[:, 0], data[:, 1], _num(opts["tail0"], line), _num(opts["tailinf"], line), dim)
    except DomainError as exc:
        raise ParseError(line, str(exc)) from None
    raise ParseError(line, f"unknown weight kind {kind!r}")


def _entries(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            toks = body.split()
            yield i, toks[0].lower(), toks[1:]


def parse_text(text: str, base_dir: str = ".") -> dict:
    """Key map with line numbers: {key: (line, tokens)}; mu lines collected."""
    keys, mu = {}, []
    for line, key, rest in _entries(text):
        if key == "mu":
            mu.append((line, rest))
            continue
        if key in keys:
            raise ParseError(line, f"duplicate key {key!r}")
        keys[key] = (line, rest)
    return {"keys": keys, "mu": mu, "base_dir": base_dir}


def _exp(keys: dict, name: str) -> float:
    if name not in keys:
        raise ParseError(0, f"missing key {name!r}")
    line, toks = keys[name]
    if len(toks) != 1:
        raise ParseError(line, f"{name} takes one value")
    return _num(toks[0], line)


def build_scenario(parsed: dict) -> Scenario:
    keys = parsed["keys"]
    base = parsed["base_dir"]
    name = keys["name"][1][0] if "name" in keys and keys["name"][1] else ""
    mode = keys["mode"][1][0].lower() if "mode" in keys else "bilinear"
    form = keys["form"][1][0].lower() if "form" in keys else "dual"
    if mode not in ("bilinear", "iterated"):
        raise ParseError(keys["mode"][0], f"unknown mode {mode!r}")
    if form not in ("ball", "dual"):
        raise ParseError(keys["form"][0], f"unknown form {form!r}")
    n_line = keys.get("n", (0, ["1"]))
    n = _num(n_line[1][0], n_line[0]) if n_line[1] else 1
    if n != int(n) or n < 1:
        raise ParseError(n_line[0], "n must be a positive integer")
    n = int(n)

    def weight(key, dim):
        if key not in keys:
            raise ParseError(0, f"missing weight {key!r}")
        line, toks = keys[key]
        return parse_weight(toks, line, dim, base)

    def checked(fn, line):
        try:
            return fn()
        except DomainError as exc:
            raise ParseError(line, str(exc)) from None

    if mode == "bilinear":
        p1, p2, q = _exp(keys, "p1"), _exp(keys, "p2"), _exp(keys, "q")
        line = keys["q"][0]
        ex = checked(lambda: derive_exponents(n, p1, p2, q), line)
        return checked(lambda: Scenario(ex, weight("u", 1), weight("v1", n), weight("v2", n),
                                        form=form, mode=mode, name=name), line)
    theta, p, q = _exp(keys, "theta"), _exp(keys, "p"), _exp(keys, "q")
    line = keys["q"][0]
    ex = checked(lambda: derive_exponents(n, max(theta, 1.0), max(theta, 1.0), q, theta, p), line)
    vkey = "v" if "v" in keys else "v1"
    mu = build_measure(parsed)
    return checked(lambda: Scenario(ex, weight("u", 1), weight(vkey, n), mu=mu, form=form,
                                    mode=mode, name=name), line)


def build_measure(parsed: dict) -> BorelMeasure:
    density, atoms = None, []
    for line, toks in parsed["mu"]:
        if not toks:
            raise ParseError(line, "empty mu line")
        kind = toks[0].lower()
        if kind == "density":
            if density is not None:
                raise ParseError(line, "duplicate mu density")
            density = parse_weight(toks[1:], line, 1, parsed["base_dir"])
        elif kind == "atom":
            if len(toks) != 3:
                raise ParseError(line, "expected: mu atom <x> <mass>")
            atoms.append((_num(toks[1], line), _num(toks[2], line)))
        else:
            raise ParseError(line, f"unknown mu kind {kind!r}")
    if density is None and not atoms:
        raise ParseError(0, "iterated scenario needs a measure (mu lines)")
    try:
        return BorelMeasure(atoms=tuple(atoms), density=density, label="file")
    except DomainError as exc:
        raise ParseError(parsed["mu"][0][0], str(exc)) from None


def load(path: str) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build_scenario(parse_text(text, os.path.dirname(os.path.abspath(path))))


def loads(text: str, base_dir: str = ".") -> Scenario:
    return build_scenario(parse_text(text, base_dir))


# ---------------------------------------------------------------------------
def expand_sweep(text: str) -> list[tuple[str, str]]:
    """Expand ``sweep <name> v1,v2,...`` lines over {name} placeholders.

    Returns (scenario_id, scenario text) in cartesian order, the last sweep
    line varying fastest.
    """
    axes, body = [], []
    for i, raw in enumerate(text.splitlines(), start=1):
        toks = raw.split("#", 1)[0].split()
        if toks and toks[0].lower() == "sweep":
            if len(toks) != 3:
                raise ParseError(i, "expected: sweep <name> v1,v2,...")
            vals = [v for v in toks[2].split(",") if v]
            if not vals:
                raise ParseError(i, "empty sweep axis")
            axes.append((toks[1], vals))
        else:
            body.append(raw)
    template = "\n".join(body)
    base_name = "sweep"
    for line in body:
        toks = line.split("#", 1)[0].split()
        if toks and toks[0].lower() == "name" and len(toks) > 1:
            base_name = toks[1]
    out = []
    combos = itertools.product(*[v for _, v in axes]) if axes else [()]
    for k, combo in enumerate(combos):
        txt = template
        for (name, _), val in zip(axes, combo):
            txt = txt.replace("{" + name + "}", val)
        out.append((f"{base_name}-{k:04d}", txt))
    return out
