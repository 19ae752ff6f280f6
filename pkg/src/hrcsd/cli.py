"""Command-line front end.

Exit codes: 0 success, 1 domain failure (rejection, FAIL lines, evaluation
error), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .analysis import classify_pump_case, pump_audit, run_suite, SUITES
from .csd import (CsdError, CsdParseError, descriptor_to_graph, descriptor_to_string, fixture_text, load_grammar,
                  parse_csd_string, parse_descriptor, random_descriptor, tokenize)
from .grammars import (LmCftg, PumpingError, derive_bounded, derive_tag, l0_bound, pump, pump_decompose,
                       pumping_height)
from .sgraph import HRError, RenameCollision, eval_term, parse_term, term_names, to_dot, to_json
from .trees import TreeError, apply_hom, parse_tree, to_text


class UsageError(Exception):
    pass


def _write(path: Optional[str], text: str):
    if path:
        Path(path).write_text(text, encoding="utf-8")


def _read_source(path: str) -> str:
    """A file path, falling back to the packaged fixtures for ``fixtures/NAME``."""
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    if p.parent.name == "fixtures":
        try:
            return fixture_text(p.name)
        except FileNotFoundError:
            pass
    raise UsageError(f"no such file: {path}")


def _strip_comments(text: str) -> str:
    return " ".join(line.split("#", 1)[0] for line in text.splitlines()).strip()


def _parse_range(text: str) -> List[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


# --- csd -------------------------------------------------------------------

def cmd_csd(args) -> int:
    if args.action == "gen":
        if args.random:
            rng = random.Random(args.seed)
            for _ in range(args.random):
                print(" ".join(descriptor_to_string(random_descriptor(rng))))
            return 0
        if not args.items:
            raise UsageError("csd gen needs a descriptor such as n=1 m=1 ka=0 kb=0 kc=0 kd=0")
        try:
            d = parse_descriptor(" ".join(args.items))
        except CsdError as e:
            raise UsageError(str(e))
        print(" ".join(descriptor_to_string(d)))
        g = descriptor_to_graph(d).graph
        _write(args.json, to_json(g, {"descriptor": str(d)}) + "\n")
        _write(args.dot, to_dot(g))
        return 0
    lines = [" ".join(args.items)] if args.items else [l for l in sys.stdin.read().splitlines() if l.strip()]
    status = 0
    for line in lines:
        try:
            print(parse_csd_string(tokenize(line)))
        except CsdParseError as e:
            print(f"REJECT {e}")
            status = 1
    return status


# --- eval ------------------------------------------------------------------

def cmd_eval(args) -> int:
    if (args.expr is None) == (args.file is None):
        raise UsageError("give exactly one of -e TERM or -f FILE")
    text = args.expr if args.expr is not None else _strip_comments(_read_source(args.file))
    try:
        t = parse_term(text)
    except (HRError, TreeError) as e:
        print(f"error: cannot parse term: {e}", file=sys.stderr)
        return 1
    used = sorted(term_names(t))
    if len(used) > args.k:
        print(f"error: term uses {len(used)} source names {used} but -k is {args.k}", file=sys.stderr)
        return 1
    try:
        g = eval_term(t, used)
    except RenameCollision as e:
        print(f"error: rename collision at path {'.'.join(map(str, e.path)) or 'ε'}: {e}", file=sys.stderr)
        return 1
    except HRError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    out = to_json(g)
    print(out)
    _write(args.json, out + "\n")
    _write(args.dot, to_dot(g))
    return 0


# --- derive / rel ----------------------------------------------------------

def _trees(G, limit: int, by: str):
    if isinstance(G, LmCftg):
        kw = {"height": "max_height", "yield": "max_yield", "rules": "max_rules"}[by]
        return [d.tree for d in derive_bounded(G, **{kw: limit})]
    if by != "height":
        raise UsageError("TAG enumeration is bounded by height only")
    return derive_tag(G, limit)


def cmd_derive(args) -> int:
    G, _ = load_grammar(args.grammar)
    for t in _trees(G, args.limit or 8, args.by):
        print(f"{' '.join(G.yield_of(t))}\t{to_text(t)}")
    return 0


def cmd_rel(args) -> int:
    G, h = load_grammar(args.grammar)
    if h is None:
        raise UsageError("grammar has no homomorphism")
    pairs = []
    for t in _trees(G, args.limit or 8, args.by):
        g = eval_term(apply_hom(h, t))
        obj = json.loads(to_json(g))
        print(f"{' '.join(G.yield_of(t))}\t{json.dumps(obj, separators=(',', ':'))}")
        pairs.append({"tokens": list(G.yield_of(t)), "graph": obj})
    _write(args.json, json.dumps(pairs, indent=2) + "\n")
    return 0


# --- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    rep = run_suite(args.suite, cases=args.cases, seed=args.seed, limit=args.limit, k=args.k, l=args.l,
                    grammar=args.grammar)
    if args.suite == "alignment":
        print("NOT ALIGNED" if rep.failures else "ALIGNED")
    for line in rep.lines():
        print(line)
    print(rep.summary())
    _write(args.json, rep.to_json() + "\n")
    return 0 if rep.ok else 1


# --- pump ------------------------------------------------------------------

def cmd_pump(args) -> int:
    G, h = load_grammar(args.grammar)
    if not isinstance(G, LmCftg):
        raise UsageError("pump needs an LM-CFTG grammar")
    p = pumping_height(G)
    limit = args.limit or 12
    tall = [d for d in derive_bounded(G, max_rules=limit, height_cap=4 * p) if d.tree.height() > p]
    if not tall:
        print(f"no derivation taller than the pumping height {p} within {limit} rule applications", file=sys.stderr)
        return 1
    d = tall[min(args.index, len(tall) - 1)]
    try:
        dec = pump_decompose(d, p)
    except PumpingError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(f"tree height={d.tree.height()} p={p} l0={l0_bound(G, h, p) if h else '-'}")
    print(dec.summary())
    for i in _parse_range(args.i):
        w = G.yield_of(pump(dec, i))
        counts = " ".join(f"{z}={w.count(z)}" for z in sorted(set(w)))
        print(f"i={i} |w|={len(w)} [{counts}] {' '.join(w)}")
    status = 0
    if args.audit:
        if h is None:
            raise UsageError("--audit needs a homomorphism")
        res = pump_audit(dec, h)
        print(res.line())
        status |= 0 if res.ok else 1
    if args.case_classify:
        res = classify_pump_case(dec)
        print(res.line())
        status |= 0 if res.ok else 1
    return status


# --- export ----------------------------------------------------------------

def cmd_export(args) -> int:
    if args.descriptor:
        g = descriptor_to_graph(parse_descriptor(" ".join(args.descriptor))).graph
    elif args.tree:
        G, h = load_grammar(args.grammar)
        if h is None:
            raise UsageError("grammar has no homomorphism")
        t = parse_tree(_strip_comments(_read_source(args.tree)))
        g = eval_term(apply_hom(h, t))
    else:
        raise UsageError("give --descriptor or --tree")
    if not args.json and not args.dot:
        print(to_dot(g), end="")
    _write(args.json, to_json(g) + "\n")
    _write(args.dot, to_dot(g))
    return 0


# --- parser ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--limit", type=int, help="enumeration bound")
    common.add_argument("--json", metavar="PATH", help="write JSON output here")
    common.add_argument("--dot", metavar="PATH", help="write Graphviz DOT output here")

    ap = argparse.ArgumentParser(prog="hrcsd", description="HR graph algebra and cross-serial dependency toolkit")
    ap.add_argument("--version", action="version", version=f"hrcsd {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("csd", parents=[common], help="generate or parse CSD strings")
    p.add_argument("action", choices=("gen", "parse"))
    p.add_argument("items", nargs="*", help="descriptor fields (gen) or tokens (parse); parse reads stdin if empty")
    p.add_argument("--random", type=int, default=0, metavar="N", help="gen: N random strings")
    p.set_defaults(func=cmd_csd)

    p = sub.add_parser("eval", parents=[common], help="evaluate an HR term")
    p.add_argument("-k", type=int, default=2, help="number of source names available")
    p.add_argument("-e", dest="expr", help="term text")
    p.add_argument("-f", dest="file", help="term file (# comments allowed)")
    p.set_defaults(func=cmd_eval)

    for name, func, text in (("derive", cmd_derive, "enumerate derivations"),
                             ("rel", cmd_rel, "enumerate string/graph pairs")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--grammar", default="builtin:csd0")
        p.add_argument("--by", choices=("height", "yield", "rules"), default="height")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--cases", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--l", type=int)
    p.add_argument("--grammar")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pump", parents=[common], help="pump a tall derivation")
    p.add_argument("--grammar", default="builtin:csd0")
    p.add_argument("-i", default="0..3", help="exponents, as LO..HI or a comma list")
    p.add_argument("--index", type=int, default=0, help="which tall derivation to use")
    p.add_argument("--audit", action="store_true", help="check the counting identities")
    p.add_argument("--case-classify", action="store_true", help="report the pumping configuration")
    p.set_defaults(func=cmd_pump)

    p = sub.add_parser("export", parents=[common], help="export a graph as DOT or JSON")
    p.add_argument("--descriptor", nargs="+")
    p.add_argument("--tree", help="derivation tree file")
    p.add_argument("--grammar", default="builtin:csd0")
    p.set_defaults(func=cmd_export)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
