"""Command line front end: evaluate, verify, discretize, sweep."""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .conditions import VIOLATED, evaluate_scenario, fmt
from .core import INF, DomainError
from ._numerics import GridFn, LogGrid
from .discretize import DEFAULT_LAMBDA, check_clauses, discretizing_sequence
from .oracle import Budget, best_lower, default_cells
from .scenario_file import ParseError, expand_sweep, loads, parse_text, parse_weight
from .stieltjes import fundamental_profile
from .weights import U_envelope

CSV_VERSION = "# hardykit-csv v1"
CSV_COLUMNS = ["scenario_id", "case", "constant", "oracle_lb", "ratio", "verdict"]
EXIT_OK, EXIT_PARSE, EXIT_PRECONDITIONS = 0, 2, 3
WINDOW = (1.0, 50.0)
STABLE_TOL = 0.2
GROWTH = 2.0


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _append_csv(path: str, rows: list) -> None:
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        if new:
            fh.write(CSV_VERSION + "\n")
            csv.writer(fh).writerow(CSV_COLUMNS)
        w = csv.writer(fh)
        for row in rows:
            w.writerow(row)


def _num_str(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return repr(float(x))


# ---------------------------------------------------------------------------
def verify_scenario(sc, cells: int, seed: int, jobs: int = 1, budget: Budget = Budget()) -> dict:
    """Condition constant against oracle bounds at two (or three) grid sizes."""
    rep = evaluate_scenario(sc)
    out = {"report": rep, "constant": rep.constant, "oracle_lb": float("nan"), "ratio": float("nan"),
           "ratio_refined": float("nan"), "stable": False, "bounds": []}
    if rep.verdict == VIOLATED:
        out["verdict"] = VIOLATED
        return out
    sizes = [cells, 2 * cells]
    bounds = [best_lower(sc, n, budget, seed, jobs).value for n in sizes]
    grow = lambda a, b: a > 0 and (math.isinf(b) or b >= GROWTH * a)  # noqa: E731
    if math.isinf(rep.constant) or grow(bounds[0], bounds[1]):
        sizes.append(4 * cells)
        bounds.append(best_lower(sc, 4 * cells, budget, seed, jobs).value)
    out["bounds"] = list(zip(sizes, bounds))
    lb, lb2 = bounds[0], bounds[1]
    out["oracle_lb"] = lb
    c = rep.constant
    with np.errstate(all="ignore"):
        out["ratio"] = c / lb if lb > 0 else INF
        out["ratio_refined"] = c / lb2 if lb2 > 0 else INF
    r, r2 = out["ratio"], out["ratio_refined"]
    out["stable"] = bool(math.isfinite(r) and math.isfinite(r2) and r > 0 and abs(r2 / r - 1.0) < STABLE_TOL)
    if len(bounds) == 3 and grow(bounds[0], bounds[1]) and grow(bounds[1], bounds[2]):
        out["verdict"] = "diverging"
    elif math.isinf(c):
        out["verdict"] = "inconclusive"
    elif not out["stable"]:
        out["verdict"] = "unstable"
    elif WINDOW[0] <= r <= WINDOW[1]:
        out["verdict"] = "certified"
    else:
        out["verdict"] = "outside-window"
    return out


def _evaluate_text(text: str, base_dir: str = "."):
    return evaluate_scenario(loads(text, base_dir))


def _sweep_row(args) -> list:
    sid, text, base_dir, cells, seed, verify = args
    try:
        sc = loads(text, base_dir)
    except ParseError as exc:
        return [sid, "", "nan", "nan", "nan", f"parse-error ({exc})"]
    if verify:
        res = verify_scenario(sc, cells, seed)
        rep = res["report"]
        return [sid, rep.case, _num_str(res["constant"]), _num_str(res["oracle_lb"]),
                _num_str(res["ratio"]), res["verdict"]]
    rep = evaluate_scenario(sc)
    return [sid, rep.case, _num_str(rep.constant), "", "", rep.verdict]


# ---------------------------------------------------------------------------
def cmd_evaluate(args, out) -> int:
    try:
        sc = loads(_read(args.file), os.path.dirname(os.path.abspath(args.file)))
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    rep = evaluate_scenario(sc)
    print(rep.line(), file=out)
    for k, v in rep.factors.items():
        print(f"  factor {k} = {fmt(v) if isinstance(v, float) else v}", file=out)
    for k, v in rep.preconditions.items():
        print(f"  precondition {k} = {v}", file=out)
    if rep.message:
        print(f"  message {rep.message}", file=out)
    if args.csv:
        _append_csv(args.csv, [[sc.name or os.path.basename(args.file), rep.case, _num_str(rep.constant),
                                "", "", rep.verdict]])
    return EXIT_PRECONDITIONS if rep.verdict == VIOLATED else EXIT_OK


def cmd_verify(args, out) -> int:
    try:
        sc = loads(_read(args.file), os.path.dirname(os.path.abspath(args.file)))
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    cells = args.grid or default_cells()
    res = verify_scenario(sc, cells, args.seed, args.jobs)
    rep = res["report"]
    print("case constant oracle_lb ratio ratio_refined stable verdict", file=out)
    print(f"{rep.case} {fmt(res['constant'])} {fmt(res['oracle_lb'])} {fmt(res['ratio'])} "
          f"{fmt(res['ratio_refined'])} {'yes' if res['stable'] else 'no'} {res['verdict']}", file=out)
    for n, b in res["bounds"]:
        print(f"  grid {n} oracle_lb {b!r}", file=out)
    if args.csv:
        _append_csv(args.csv, [[sc.name or os.path.basename(args.file), rep.case, _num_str(res["constant"]),
                                _num_str(res["oracle_lb"]), _num_str(res["ratio"]), res["verdict"]]])
    return EXIT_PRECONDITIONS if res["verdict"] == VIOLATED else EXIT_OK


def _sequence_inputs(text: str, base_dir: str):
    """(g, b) as GridFns: explicit g/b weights, or phi and U^(q/p) of an iterated scenario."""
    parsed = parse_text(text, base_dir)
    keys = parsed["keys"]
    grid = LogGrid()
    if "g" in keys and "b" in keys:
        g = parse_weight(keys["g"][1], keys["g"][0], 1, base_dir)
        b = parse_weight(keys["b"][1], keys["b"][0], 1, base_dir)
        return (GridFn(grid, g(grid.t), g.tail("0"), g.tail("inf")),
                GridFn(grid, b(grid.t), b.tail("0"), b.tail("inf")), None)
    sc = loads(text, base_dir)
    if sc.mode != "iterated":
        raise ParseError(0, "discretize needs an iterated scenario or g/b weights")
    s = sc.exponents.q / sc.exponents.p
    U = U_envelope(sc.u)
    Ug = GridFn.of(grid, U)
    phi = fundamental_profile(sc.mu, U, s, grid, Ug.v)
    return phi, Ug ** s, Ug


def cmd_discretize(args, out) -> int:
    try:
        g, b, Ug = _sequence_inputs(_read(args.file), os.path.dirname(os.path.abspath(args.file)))
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        seq = discretizing_sequence(g, b, args.__dict__["lambda"])
    except DomainError as exc:
        print(f"verdict={VIOLATED} reason={exc}", file=out)
        return EXIT_PRECONDITIONS
    chk = check_clauses(seq, g, b)
    print(f"lambda={seq.lam:g} D={seq.D:g} window=[{seq.kmin},{seq.kmin + len(seq.idx) - 1}]", file=out)
    print("k x_k class g(x_k) b(x_k)", file=out)
    for k, i in zip(seq.ks, seq.idx):
        print(f"{k} {seq.grid.t[i]:.6e} {seq.cls(int(k))} {g.v[i]:.6e} {b.v[i]:.6e}", file=out)
    print("clauses " + " ".join(f"{k}={'ok' if v else 'FAIL'}" for k, v in chk.items()), file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    try:
        items = expand_sweep(_read(args.file))
    except ParseError as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    base = os.path.dirname(os.path.abspath(args.file))
    cells = args.grid or default_cells()
    work = [(sid, txt, base, cells, args.seed, args.verify) for sid, txt in items]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_sweep_row, work))
    else:
        rows = [_sweep_row(w) for w in work]
    buf = io.StringIO()
    buf.write(CSV_VERSION + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS)
    wr.writerows(rows)
    text = buf.getvalue()
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hardykit", description="Weighted bilinear and iterated Hardy constants.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, grid=True):
        p.add_argument("file")
        p.add_argument("--csv", default=None, help="append (evaluate, verify) or write (sweep) CSV here")
        if grid:
            p.add_argument("--grid", type=int, default=None, help="oracle cell count (default 64)")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--jobs", type=int, default=1)

    common(sub.add_parser("evaluate", help="condition constant and verdict"), grid=False)
    common(sub.add_parser("verify", help="condition constant against the oracle"))
    d = sub.add_parser("discretize", help="discretizing sequence listing")
    d.add_argument("file")
    d.add_argument("--lambda", type=float, default=DEFAULT_LAMBDA)
    s = sub.add_parser("sweep", help="CSV over a parameter grid of scenarios")
    common(s)
    s.add_argument("--verify", action="store_true", help="also run the oracle for each row")
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "grid", None) is not None and args.grid < 2:
        print("--grid must be >= 2", file=sys.stderr)
        return EXIT_PARSE
    try:
        handler = {"evaluate": cmd_evaluate, "verify": cmd_verify,
                   "discretize": cmd_discretize, "sweep": cmd_sweep}[args.cmd]
        return handler(args, out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
