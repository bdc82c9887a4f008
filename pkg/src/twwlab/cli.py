"""Command-line entry point: twwlab <command> [options].

Every command prints a short human-readable result, or a RunReport as JSON
with --json. Exit codes: 0 success, 1 domain error, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from twwlab import __version__
from twwlab.builder import DEFAULT_C_CEILING, BuildParams, algo_cor, approx_twinwidth
from twwlab.census import ForbiddenSet, enumerate_avoiding
from twwlab.core import (
    GRAPH,
    ContractionSequence,
    OrderedStructure,
    TwwError,
    dumps,
    loads,
    verify_contraction_sequence,
)
from twwlab.exact import DEFAULT_CAP, twinwidth_exact
from twwlab.logic import evaluate, mc_reduce, parse, to_sexpr
from twwlab.minors import (
    TypeMatrix,
    grid_is_exhaustive,
    minimal_bad_intervals,
    mixed_is_exhaustive,
    search_grid_minor,
    search_mixed_minor,
)
from twwlab.semigrid import (
    Scheme,
    classify_all,
    decode_GS_all,
    enumerate_schemes,
    generate_GS,
    generate_semigrid,
)

REPORT_VERSION = 1
THREADS_VAR = "TWWLAB_THREADS"


@dataclass
class RunReport:
    command: list[str]
    inputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    outcome: dict = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)  # milliseconds
    config: dict = field(default_factory=dict)
    version: int = REPORT_VERSION
    tool: str = f"twwlab {__version__}"

    def to_json(self) -> dict:
        return asdict(self)


def load_schema(name: str) -> dict:
    """One of the shipped JSON schemas: 'run_report' or 'witness'."""
    text = resources.files("twwlab").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


class _Run:
    """Collects inputs, config and timings for one command."""

    def __init__(self, argv: list[str]):
        self.report = RunReport(list(argv))
        self._t0 = time.perf_counter()

    def read(self, path: str) -> str:
        data = Path(path).read_bytes()
        self.report.inputs[path] = hashlib.sha256(data).hexdigest()
        return data.decode()

    def structure(self, path: str) -> OrderedStructure:
        return loads(self.read(path))

    def matrix(self, path: str) -> TypeMatrix:
        """Either an .obs file (its type-code matrix) or rows of whitespace-separated ints."""
        text = self.read(path)
        if text.startswith("obs v1"):
            return TypeMatrix.from_structure(loads(text))
        rows = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                rows.append([int(v) for v in line.split()])
            except ValueError:
                raise TwwError(f"{path}:{lineno}: expected integers") from None
        return TypeMatrix.of(rows)

    def finish(self, outcome: dict, **config) -> RunReport:
        self.report.outcome = outcome
        self.report.config = config
        self.report.timings["totalMs"] = round((time.perf_counter() - self._t0) * 1000, 3)
        return self.report


def threads() -> int:
    raw = os.environ.get(THREADS_VAR, "1")
    try:
        value = int(raw)
    except ValueError:
        raise TwwError(f"{THREADS_VAR} must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise TwwError(f"{THREADS_VAR} must be a positive integer, got {raw!r}")
    return value


def _parse_cells(text: str | None) -> set[tuple[int, int]]:
    if not text:
        return set()
    cells = set()
    for item in text.split(";"):
        i, _, j = item.partition(",")
        try:
            cells.add((int(i), int(j)))
        except ValueError:
            raise TwwError(f"--cells: cannot read {item!r}, expected 'i,j;i,j;...'") from None
    return cells


def _scheme(sid: int) -> Scheme:
    return Scheme.from_id(sid)


def _scheme_json(s: Scheme) -> dict:
    return {"id": s.id, "rtype": s.rtype, "orient": s.orient, "clique": s.clique,
            "dirs": sorted(s.dirs)}


def _sequence_outcome(seq: ContractionSequence, red: int) -> dict:
    return {"kind": "certificate", "n": seq.n, "merges": [list(p) for p in seq.merges],
            "redDegree": red}


# commands ----------------------------------------------------------------------
# Each returns (report, text) where text is the plain-output form.

def cmd_tww_exact(run: _Run, args):
    S = run.structure(args.file)
    value, seq = twinwidth_exact(S, cap=args.cap)
    rep = run.finish(_sequence_outcome(seq, value) | {"value": value}, cap=args.cap)
    return rep, f"{value}\n"


def cmd_tww_approx(run: _Run, args):
    S = run.structure(args.file)
    res = approx_twinwidth(S, args.mt_profile, args.c_ceiling)
    out = _sequence_outcome(res.sequence, res.red_degree) | {"kUsed": res.k_used}
    rep = run.finish(out, mtProfile=args.mt_profile, cCeiling=args.c_ceiling)
    return rep, f"k {res.k_used}\nred-degree {res.red_degree}\n"


def cmd_algo(run: _Run, args):
    S = run.structure(args.file)
    params = BuildParams(args.k, args.t, args.b, args.c, args.mt_profile, args.c_ceiling)
    out = algo_cor(S, args.k, args.t, params)
    config = {"k": args.k, "t": args.t, "b": params.b, "c": params.c,
              "mtProfile": args.mt_profile, "cCeiling": args.c_ceiling}
    if isinstance(out, ContractionSequence):
        red = verify_contraction_sequence(S, out)
        return run.finish(_sequence_outcome(out, red), **config), out.to_text(red)
    doc = out.to_json()
    return run.finish({"kind": "witness", "witness": doc}, **config), json.dumps(doc) + "\n"


def cmd_minors(run: _Run, args):
    M = run.matrix(args.file)
    if args.what == "bad":
        if args.rows is None:
            raise TwwError("minors bad needs --rows A:B")
        a, b = args.rows
        ivs = minimal_bad_intervals(M, (a, b), args.k)
        found = [{"rows": list(iv.rows), "cols": list(iv.cols), "distinct": iv.distinct}
                 for iv in ivs]
        text = "".join(f"[{iv.cols[0]}, {iv.cols[1]}) distinct {iv.distinct}\n" for iv in ivs)
        rep = run.finish({"kind": "counts", "intervals": found,
                          "badColumns": sorted({iv.cols[0] for iv in ivs})},
                         k=args.k, rows=[a, b])
        return rep, text or "none\n"
    if args.what == "grid":
        res = search_grid_minor(M.entries, args.t)
        bounds = {"exhaustive": grid_is_exhaustive(M.m, M.n, args.t)}
        config = {"t": args.t}
    else:
        res = search_mixed_minor(M, args.k, args.t)
        bounds = {"exhaustive": mixed_is_exhaustive(M.m, M.n, args.t)}
        config = {"k": args.k, "t": args.t}
    config["exhaustiveRegime"] = bounds
    if res.witness is None:
        out = {"kind": "witness", "witness": None, "exhaustive": res.exhaustive}
        text = "none (exhaustive)\n" if res.exhaustive else "none found (heuristic)\n"
    else:
        doc = res.witness.to_json()
        out = {"kind": "witness", "witness": doc, "exhaustive": res.exhaustive}
        text = json.dumps(doc) + "\n"
    return run.finish(out, **config), text


def cmd_semigrid(run: _Run, args):
    if args.what == "schemes":
        if args.sig != "graph":
            raise TwwError("--sig: only 'graph' is available from the command line")
        schemes = list(enumerate_schemes(GRAPH))
        out = {"kind": "counts", "count": len(schemes)}
        text = f"{len(schemes)}\n"
        if args.list:
            out["schemes"] = [_scheme_json(s) for s in schemes]
            text += "".join(s.describe() + "\n" for s in schemes)
        return run.finish(out, sig=args.sig), text
    if args.what == "gen":
        s = _scheme(args.scheme)
        if args.cells is None:
            S = generate_semigrid(s, args.m, args.n)
        else:
            S = generate_GS(s, args.m, args.n, _parse_cells(args.cells))
        text = dumps(S)
        out = {"kind": "structure", "obs": text}
        return run.finish(out, scheme=s.id, m=args.m, n=args.n, cells=args.cells), text
    S = run.structure(args.file)
    if args.what == "decode":
        s = _scheme(args.scheme)
        found, reasons = decode_GS_all(S, s)
        if not found:
            raise TwwError("not a G^S for this scheme: " + ("; ".join(reasons) or "too few elements"))
        m, n, cells = found[0]
        out = {"kind": "decoding", "m": m, "n": n, "cells": sorted(map(list, cells)),
               "alternatives": len(found) - 1}
        text = f"m {m}\nn {n}\ncells {';'.join(f'{i},{j}' for i, j in sorted(cells))}\n"
        return run.finish(out, scheme=s.id), text
    found = classify_all(S)
    out = {"kind": "classification",
           "matches": [{"scheme": _scheme_json(s), "m": m, "n": n} for s, m, n in found]}
    text = "".join(f"{s.describe()} m {m} n {n}\n" for s, m, n in found) or "not a regular semigrid\n"
    return run.finish(out), text


def cmd_mc(run: _Run, args):
    phi = parse(run.read(args.formula))
    H = run.structure(args.structure)
    value = evaluate(H, phi, max_depth=args.max_depth)
    out = {"kind": "truth", "value": value}
    text = f"{str(value).lower()}\n"
    if args.via_scheme is not None:
        s = _scheme(args.via_scheme)
        psi, G = mc_reduce(phi, H, s)
        reduced = evaluate(G, psi, max_depth=None)
        if reduced != value:
            raise TwwError("internal error: reduction changed the truth value")
        out |= {"reduced": {"sentence": to_sexpr(psi), "n": G.n, "value": reduced}}
        text += f"via G^S ({G.n} elements): {str(reduced).lower()}\n"
    return run.finish(out, maxDepth=args.max_depth, viaScheme=args.via_scheme), text


def _count(job):
    F, n, budget = job
    t0 = time.perf_counter()
    count = enumerate_avoiding(F, n, budget)
    return n, count, round((time.perf_counter() - t0) * 1000, 3)


def cmd_census(run: _Run, args):
    folder = Path(args.forbid)
    if not folder.is_dir():
        raise TwwError(f"--forbid: {folder} is not a directory")
    paths = sorted(folder.glob("*.obs"))
    pats = [run.structure(str(p)) for p in paths]
    sig = pats[0].sig if pats else GRAPH
    F = ForbiddenSet(pats, sig)
    jobs = [(F, n, args.budget) for n in range(args.n_max + 1)]
    workers = threads()
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_count, jobs))  # map keeps the order of n
    else:
        rows = [_count(j) for j in jobs]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "count", "millis"])
    w.writerows(rows)
    out = {"kind": "counts", "rows": [{"n": n, "count": c, "millis": ms} for n, c, ms in rows]}
    rep = run.finish(out, nMax=args.n_max, budget=args.budget, threads=workers,
                     patterns=[p.name for p in paths])
    return rep, buf.getvalue()


def cmd_verify_seq(run: _Run, args):
    S = run.structure(args.file)
    seq = ContractionSequence.from_text(S.n, run.read(args.seq))
    red = verify_contraction_sequence(S, seq)
    return run.finish(_sequence_outcome(seq, red)), f"{red}\n"


# argument parsing --------------------------------------------------------------

def _rows(text: str) -> tuple[int, int]:
    a, sep, b = text.partition(":")
    try:
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A:B, got {text!r}") from None
    if not sep or lo >= hi:
        raise argparse.ArgumentTypeError(f"expected A:B with A < B, got {text!r}")
    return lo, hi


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonneg(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the RunReport as JSON")
    common.add_argument("--out", help="write output to this file instead of stdout")

    def profile(p):
        p.add_argument("--mt-profile", default="exp8",
                       help="threshold profile: expA, linA or rootA (default exp8)")
        p.add_argument("--c-ceiling", type=_positive, default=DEFAULT_C_CEILING)

    ap = argparse.ArgumentParser(prog="twwlab", description="Twin-width of ordered structures.")
    ap.add_argument("--version", action="version", version=f"twwlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tww-exact", parents=[common], help="exact twin-width")
    p.add_argument("file")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="largest n accepted")
    p.set_defaults(func=cmd_tww_exact)

    p = sub.add_parser("tww-approx", parents=[common], help="approximate twin-width")
    p.add_argument("file")
    profile(p)
    p.set_defaults(func=cmd_tww_approx)

    p = sub.add_parser("algo", parents=[common], help="contraction sequence or mixed minor")
    p.add_argument("file")
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--t", type=_positive, required=True)
    p.add_argument("--b", type=_nonneg, help="exceptional-part threshold")
    p.add_argument("--c", type=_positive, help="distinct-row threshold")
    profile(p)
    p.set_defaults(func=cmd_algo)

    p = sub.add_parser("minors", parents=[common], help="grid and mixed minors, bad intervals")
    p.add_argument("what", choices=("grid", "mixed", "bad"))
    p.add_argument("file", help=".obs file or whitespace-separated integer matrix")
    p.add_argument("--t", type=_positive, default=2)
    p.add_argument("--k", type=_positive, default=2)
    p.add_argument("--rows", type=_rows, help="row interval A:B (half-open) for 'bad'")
    p.set_defaults(func=cmd_minors)

    p = sub.add_parser("semigrid", parents=[common], help="regular semigrids")
    p.add_argument("what", choices=("gen", "decode", "classify", "schemes"))
    p.add_argument("file", nargs="?")
    p.add_argument("--scheme", type=_nonneg, help="scheme id 0..255")
    p.add_argument("--m", type=_positive)
    p.add_argument("--n", type=_positive)
    p.add_argument("--cells", help="cells of S for G^S, as 'i,j;i,j;...'")
    p.add_argument("--sig", default="graph")
    p.add_argument("--list", action="store_true", help="list the schemes as well")
    p.set_defaults(func=cmd_semigrid)

    p = sub.add_parser("mc", parents=[common], help="first-order model checking")
    p.add_argument("--formula", required=True, help="sentence as an s-expression")
    p.add_argument("--structure", required=True)
    p.add_argument("--max-depth", type=_nonneg, default=None)
    p.add_argument("--via-scheme", type=_nonneg,
                   help="also decide it on G^S of this scheme (structure must be bipartite)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("census", parents=[common], help="count structures avoiding patterns")
    p.add_argument("--forbid", required=True, help="directory of .obs patterns")
    p.add_argument("--n-max", type=_nonneg, required=True)
    p.add_argument("--budget", type=_positive, help="search-node cap per n")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("verify-seq", parents=[common], help="red-degree of a merge list")
    p.add_argument("file")
    p.add_argument("seq", help="merge-list text file")
    p.set_defaults(func=cmd_verify_seq)
    return ap


def _check_usage(ap: argparse.ArgumentParser, args) -> None:
    if args.command != "semigrid":
        return
    need = {"gen": ("--scheme", "--m", "--n"), "decode": ("--scheme", "file"),
            "classify": ("file",), "schemes": ()}[args.what]
    for flag in need:
        if getattr(args, flag.lstrip("-")) is None:
            ap.error(f"semigrid {args.what}: argument {flag} is required")
    if args.scheme is not None and args.scheme > 255:
        ap.error(f"argument --scheme: {args.scheme} is out of range 0..255")


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        _check_usage(ap, args)
    except SystemExit as e:
        return int(e.code or 0)
    run = _Run(argv)
    try:
        report, text = args.func(run, args)
    except (TwwError, OSError, UnicodeDecodeError) as e:
        print(f"twwlab: error: {e}", file=sys.stderr)
        return 1
    if args.json:
        text = json.dumps(report.to_json(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
