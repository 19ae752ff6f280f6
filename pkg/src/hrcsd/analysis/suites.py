"""Named verification suites; each returns a Report with one line per case."""
from __future__ import annotations

import itertools
import random
from typing import Callable, Dict, Optional, Tuple

from ..csd import (NAMES, CsdDescriptor, CsdParseError, builtin_csd0_grammar, descriptor_to_graph, load_grammar,
                   parse_csd_string, random_descriptor, witness_descriptor)
from ..grammars.cftg import (LmCftg, PumpingError, contains_tree, derive_bounded, l0_bound, pump,
                             pump_decompose, pumping_height)
from ..grammars.relation import is_aligned
from ..sgraph import Edge, Forget, Merge
from .boundary import NAME_POOL, check_boundary, random_hr_term
from .distance import (check_lemma2, check_lemma2_half, check_lemma4_instance, distant_witness_check, identity_hom, max_distance,
                       random_graph_term, sample_qualifying_subset)
from .pumping import check_downward_separation, classify_pump_case, pump_audit
from .report import FAIL, INAPPLICABLE, PASS, CheckResult, Report
from .separation import SEP_PAIRS, check_separation_chain


def two_block_toy():
    """A term for the graph of ``a b c d`` whose subterm at position 0.0 holds
    the a- and b-edges while the c- and d-edges sit outside: both blocks split."""
    inside = Merge(Forget("o", Edge("rt", "a", "o")), Forget("o", Edge("s", "b", "o")))
    outside = Merge(Edge("rt", "c", "s"), Forget("o", Edge("s", "d", "o")))
    term = Forget("s", Merge(inside, outside))
    G = descriptor_to_graph(CsdDescriptor.zero(1, 1))
    return term, G, ("rt", "s", "o")


def lemma2_counterexample():
    """A 2-distant term whose only witness has one source.

    Graph of a b c <c'> d: the b-edge of block 2 and the c'-edge of block 1
    both start at the node shared by the two blocks, so the subterm holding them
    splits both blocks through a single boundary node. The witness is at 0.0.0.
    """
    bc = Merge(Forget("o", Edge("s", "b", "o")), Forget("o", Edge("s", "c'", "o")))
    d = Forget("o", Edge("s", "d", "o"))
    ac = Merge(Forget("o", Edge("rt", "a", "o")), Edge("rt", "c", "s"))
    term = Forget("s", Merge(Merge(bc, d), ac))
    G = descriptor_to_graph(CsdDescriptor(1, 1, (0,), (0,), (1,), (0,)))
    return term, G, ("rt", "s", "o")


def _lemma2_case(rep: Report, t, h, G, k, names, case):
    rep.add(check_lemma2(t, h, G, k, names, case))
    rep.add(check_lemma2_half(t, h, G, names, case))


def _cftg(G, h, suite) -> Optional[CheckResult]:
    if not isinstance(G, LmCftg):
        return CheckResult(INAPPLICABLE, suite, "-", "suite needs an LM-CFTG grammar")
    if h is None:
        return CheckResult(FAIL, suite, "-", "grammar has no homomorphism file")
    return None


def suite_boundary(cases: int = 1000, seed: int = 0, **_) -> Report:
    rng = random.Random(seed)
    rep = Report()
    for i in range(cases):
        k = rng.randint(1, 3)
        names = tuple(rng.sample(NAME_POOL, k))
        rep.add(check_boundary(random_hr_term(rng, names), names, f"term{i}"))
    return rep


def suite_lemma2(cases: int = 200, seed: int = 0, limit: Optional[int] = None, **_) -> Report:
    rep = Report()
    term, G, names = two_block_toy()
    _lemma2_case(rep, term, identity_hom(term), G, 2, names, "toy")
    term, G, names = lemma2_counterexample()
    _lemma2_case(rep, term, identity_hom(term), G, 2, names, "shared-node")
    C, h = builtin_csd0_grammar()
    for j, d in enumerate(derive_bounded(C, max_yield=limit or 10)):
        w = C.yield_of(d.tree)
        Gd = descriptor_to_graph(parse_csd_string(w))
        k = max_distance(d.tree, h, Gd, NAMES).k
        _lemma2_case(rep, d.tree, h, Gd, k, NAMES, f"csd0-{j}")
    rng = random.Random(seed)
    for i in range(cases):
        Gr = descriptor_to_graph(random_descriptor(rng, 2, 2))
        term, names = random_graph_term(Gr.graph, rng)
        hid = identity_hom(term)
        dist = max_distance(term, hid, Gr, names)
        if dist.k > Gr.block_count:
            rep.add(CheckResult(FAIL, "lemma2", f"random{i}", f"distance {dist.k} exceeds {Gr.block_count} blocks"))
            continue
        _lemma2_case(rep, term, hid, Gr, dist.k, names, f"random{i}")
    return rep


def suite_lemma4(limit: Optional[int] = None, grammar: str = "builtin:csd0", **_) -> Report:
    G, h = load_grammar(grammar)
    rep = Report()
    bad = _cftg(G, h, "lemma4")
    if bad:
        rep.add(bad)
        return rep
    for r in (0, 1, 2):
        res = check_lemma4_instance(G, r, 6, limit or 12, f"r={r}")
        rep.add(res.result)
    return rep


def suite_lemma5(cases: int = 1000, seed: int = 0, k: Optional[int] = None, l: Optional[int] = None, **_) -> Report:
    rep = Report()
    ks = [k] if k else [1, 2]
    ls = [l] if l else [1, 2]
    for kk, ll in itertools.product(ks, ls):
        rng = random.Random(seed)
        G = descriptor_to_graph(witness_descriptor(kk, ll))
        fails = 0
        for i in range(cases):
            res = distant_witness_check(kk, ll, sample_qualifying_subset(kk, ll, rng, G), G)
            if not res.ok:
                res.case = f"k={kk},l={ll},subset{i}"
                rep.add(res)
                fails += 1
        if not fails:
            rep.add(CheckResult(PASS, "lemma5", f"k={kk},l={ll}", f"{cases} qualifying subsets split >= {kk} blocks"))
    return rep


def tall_derivations(G: LmCftg, cases: int, limit: Optional[int] = None):
    """The first ``cases`` derivations above the pumping height, by rule count."""
    p = pumping_height(G)
    ds = derive_bounded(G, max_rules=limit or 20, height_cap=4 * p)
    return [d for d in ds if d.tree.height() > p][:cases]


def suite_pumping(cases: int = 100, limit: Optional[int] = None, grammar: str = "builtin:csd0",
                  separation: bool = True, **_) -> Report:
    G, h = load_grammar(grammar)
    rep = Report()
    bad = _cftg(G, h, "pumping")
    if bad:
        rep.add(bad)
        return rep
    p = pumping_height(G)
    l0 = l0_bound(G, h, p)
    names = NAMES
    tall = tall_derivations(G, cases, limit)
    if not tall:
        rep.add(CheckResult(FAIL, "pumping", "-", f"no derivation above height {p} within {limit or 20} rules"))
        return rep
    for j, d in enumerate(tall):
        case = f"tall{j}"
        try:
            dec = pump_decompose(d, p)
        except PumpingError as e:
            rep.add(CheckResult(FAIL, "pumping", case, str(e)))
            continue
        member = []
        for i in range(4):
            ti = pump(dec, i)
            try:
                parse_csd_string(G.yield_of(ti))
                parsed = True
            except CsdParseError:
                parsed = False
            member.append(contains_tree(G, ti, ti.height()) and parsed)
        status = PASS if all(member) else FAIL
        rep.add(CheckResult(status, "pumping", case,
                            f"height={d.tree.height()} {dec.nonterminal} i=0..3 in L(G) and CSD_s: {member}"))
        rep.add(pump_audit(dec, h, names, case))
        rep.add(classify_pump_case(dec, case))
        if separation:
            for pair in SEP_PAIRS:
                rep.extend(check_downward_separation(dec, pair, l0, case))
    return rep


def _chain_suite(name: str, keep: Tuple[str, ...]):
    def run(limit: Optional[int] = None, grammar: str = "builtin:csd0", **_) -> Report:
        G, h = load_grammar(grammar)
        rep = Report()
        bad = _cftg(G, h, name)
        if bad:
            rep.add(bad)
            return rep
        l0 = l0_bound(G, h)
        for j, d in enumerate(derive_bounded(G, max_rules=limit or 14, height_cap=64)):
            case = f"d{j}"
            rep.extend(r for r in check_separation_chain(d.tree, h, l0, G.tokens, NAMES, case) if r.checker in keep)
        return rep
    run.__name__ = f"suite_{name}"
    return run


suite_separation = _chain_suite("separation", ("lemma9", "lemma8", "separation"))
suite_bounds = _chain_suite("bounds", ("bounds",))


def suite_alignment(grammar: str = "builtin:csd0", **_) -> Report:
    G, h = load_grammar(grammar)
    rep = Report()
    if h is None:
        rep.add(CheckResult(FAIL, "alignment", grammar, "grammar has no homomorphism file"))
        return rep
    res = is_aligned(G, h)
    if res:
        rep.add(CheckResult(PASS, "alignment", grammar, "ALIGNED"))
    for c, why in res.offending:
        rep.add(CheckResult(FAIL, "alignment", grammar, f"NOT ALIGNED constant {c}: {why}"))
    return rep


SUITES: Dict[str, Callable[..., Report]] = {
    "boundary": suite_boundary,
    "lemma2": suite_lemma2,
    "lemma4": suite_lemma4,
    "lemma5": suite_lemma5,
    "pumping": suite_pumping,
    "bounds": suite_bounds,
    "separation": suite_separation,
    "alignment": suite_alignment,
}


def run_suite(name: str, **opts) -> Report:
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](**{k: v for k, v in opts.items() if v is not None})
