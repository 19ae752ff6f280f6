import random

import pytest
from hypothesis import given, settings

from conftest import hr_terms
from hrcsd.analysis import (FAIL, INAPPLICABLE, PASS, PreconditionError, SEP_PAIRS, all_separations,
                            check_asynchronous, check_boundary, check_downward_separation, check_lemma2,
                            check_lemma2_half, check_lemma4_instance, check_separation_chain, classify_pump_case,
                            count_profile, distant_witness_check, identity_hom, in_segments, is_async_split,
                            is_separation, lemma2_counterexample, max_distance, minimal_separations, pump_audit,
                            random_graph_term, run_suite, sample_qualifying_subset, two_block_toy)
from hrcsd.analysis.suites import tall_derivations
from hrcsd.csd import (NAMES, builtin_csd0_grammar, csd0_derivation, descriptor_to_graph, descriptor_to_string,
                       fig3_tree, fixture_text, parse_csd_string, random_descriptor, witness_descriptor)
from hrcsd.grammars import (derive_bounded, l0_bound, parse_grammar, parse_hom, pump_candidates, pump_decompose,
                            pumping_height)
from hrcsd.sgraph import evaluate, parse_term
from hrcsd.trees import Tree, cfyield, leaf

BAR_EDGE = "forget(s, edge(rt, {0}, s))"


def balanced(tokens):
    if len(tokens) == 1:
        return leaf(tokens[0])
    mid = len(tokens) // 2
    return Tree("f", [balanced(tokens[:mid]), balanced(tokens[mid:])])


def comb(tokens):
    """A balanced binary tree over the tokens whose homomorphic image has one z-edge per token z."""
    t = balanced(tokens)
    lines = ["f/2 -> merge(x1, x2)"] + [f"{z}/0 -> {BAR_EDGE.format(z)}" for z in set(tokens)]
    return t, parse_hom("\n".join(lines))


def barchain():
    return parse_grammar(fixture_text("barchain.grammar")), parse_hom(fixture_text("barchain.hom"))


# --- profiles ------------------------------------------------------------------

def test_fig3_profile():
    G, h = builtin_csd0_grammar()
    prof = count_profile(fig3_tree(), h, G.tokens, NAMES)
    assert {z: prof.n[z] for z in "abcd"} == {"a": 1, "b": 2, "c": 1, "d": 2}
    assert {z: prof.e[z] for z in "abcd"} == {"a": 1, "b": 2, "c": 1, "d": 2}


def test_witness_profile():
    w = list(descriptor_to_string(witness_descriptor(1, 1)))
    t, h = comb(w)
    prof = count_profile(t, h, None, NAMES)
    assert prof.n["a"] == 5 and prof.n["a'"] == 25
    assert prof.m["a'"] == 5 and prof.r["c'"] == 5
    assert prof.e["c'"] == 25


# --- k-distance ------------------------------------------------------------------

def test_two_block_toy():
    term, G, names = two_block_toy()
    h = identity_hom(term)
    assert max_distance(term, h, G, names).k == 2
    assert check_lemma2(term, h, G, 2, names).status == PASS


def test_lemma2_counterexample():
    # chained blocks share a node, so one source can sit on the boundary of two split blocks
    term, G, names = lemma2_counterexample()
    h = identity_hom(term)
    assert max_distance(term, h, G, names).k == 2
    res = check_lemma2(term, h, G, 2, names)
    assert res.status == FAIL and res.witness["sources"] == 1
    assert check_lemma2_half(term, h, G, names).status == PASS


def test_csd0_distance_small():
    G, h = builtin_csd0_grammar()
    for d in derive_bounded(G, max_yield=10):
        Gd = descriptor_to_graph(parse_csd_string(d.yield_()))
        assert max_distance(d.tree, h, Gd, NAMES).k <= 1


def test_lemma2_half_on_random_terms():
    rng = random.Random(3)
    for _ in range(100):
        Gr = descriptor_to_graph(random_descriptor(rng, 2, 2))
        term, names = random_graph_term(Gr.graph, rng)
        assert check_lemma2_half(term, identity_hom(term), Gr, names).ok


def test_lemma4_instances():
    G, _ = builtin_csd0_grammar()
    assert check_lemma4_instance(G, 0, 6, 10).s == 0
    res = check_lemma4_instance(G, 2, 6, 12)
    assert res.s is not None and res.s <= 6
    for w, pos, pair in res.witnesses:
        assert pos is not None and pair in {f"{x}/{y}" for x, y in SEP_PAIRS}


def test_lemma5_preconditions():
    with pytest.raises(PreconditionError):
        distant_witness_check(1, 1, set())
    G = descriptor_to_graph(witness_descriptor(1, 1))
    everything = set(range(len(G.blocks)))
    with pytest.raises(PreconditionError):
        distant_witness_check(1, 1, everything, G)


@pytest.mark.parametrize("k,l", [(1, 1), (2, 1), (1, 2)])
def test_lemma5_samples(k, l):
    rng = random.Random(k * 10 + l)
    G = descriptor_to_graph(witness_descriptor(k, l))
    for _ in range(50):
        assert distant_witness_check(k, l, sample_qualifying_subset(k, l, rng, G), G).status == PASS


# --- boundary ----------------------------------------------------------------------

@given(hr_terms())
def test_boundary_property(term_names):
    t, names = term_names
    assert check_boundary(t, names).status == PASS


def test_boundary_catches_forgotten_shared_node():
    # merge two edges at s, then forget s: the subterm edge(rt,a,s) keeps s as a source
    t = parse_term("forget(s, merge(edge(rt,a,s), edge(s,b,o)))")
    assert check_boundary(t, ("rt", "s", "o")).status == PASS
    ev = evaluate(t, ("rt", "s", "o"))
    assert set(ev.sources_at[(0, 0)]) == {"rt", "s"}


# --- separation and asynchronous splits ---------------------------------------------

def brute_separations(t, x, y, l, tokens):
    out = set()
    for top in t.positions():
        for bottom in t.positions():
            if is_separation(t, top, bottom, x, y, l, tokens):
                out.add((top, bottom))
    return out


def test_separations_match_brute_force():
    G, h = builtin_csd0_grammar()
    for d in derive_bounded(G, max_yield=8):
        for x, y in SEP_PAIRS:
            found = {(s.top, s.bottom) for s in all_separations(d.tree, x, y, 2, G.tokens)}
            assert found == brute_separations(d.tree, x, y, 2, G.tokens)


def test_minimal_separation_is_smallest():
    G, _ = builtin_csd0_grammar()
    t = csd0_derivation(G, 3, 2).tree
    found = 0
    for pair in SEP_PAIRS:
        mins = minimal_separations(t, pair, 1, G.tokens)
        seps = all_separations(t, pair[0], pair[1], 1, G.tokens)
        assert bool(mins) == bool(seps)
        if seps:
            found += 1
            assert all(m.size() == min(s.size() for s in seps) for m in mins)
            assert mins[0] == seps[0]
    assert found


def test_separation_chain_on_csd0():
    G, h = builtin_csd0_grammar()
    l0 = l0_bound(G, h)
    for d in derive_bounded(G, max_rules=8):
        res = check_separation_chain(d.tree, h, l0, G.tokens, NAMES)
        assert res[0].checker == "lemma9" and all(r.ok for r in res)


def test_counter_split_rejected():
    w = list(descriptor_to_string(witness_descriptor(1, 1)))
    t, h = comb(w)
    leaf_pos = max(t.positions(), key=len)
    assert not is_async_split(t, leaf_pos, h, "a", "c", 1, None, NAMES)
    split = check_asynchronous(t, h, ("a", "c"), 1, None, NAMES)
    if split is not None:
        assert is_async_split(t, split.position, h, "a", "c", 1, None, NAMES)


def test_inductive_bounds_mutation():
    G, h = barchain()
    t = derive_bounded(G, max_height=8)[2].tree
    assert all(r.ok for r in check_separation_chain(t, h, 1, G.tokens, NAMES))
    four = "merge(merge({0}, {0}), merge({0}, {0}))".format(BAR_EDGE.format("a'"))
    bad = h.replace("a'", 0, parse_term(four))
    res = [r for r in check_separation_chain(t, bad, 1, G.tokens, NAMES) if r.checker == "bounds"]
    assert any(r.status == FAIL for r in res)


# --- pumping -----------------------------------------------------------------------

def test_in_segments():
    assert in_segments(["a", "<", "a'", ">", "a"], "a")
    assert not in_segments([], "a")
    assert in_segments([], "a", plus=False)
    assert not in_segments(["a", "<", "a'"], "a")


def test_audit_and_classify_csd0():
    G, h = builtin_csd0_grammar()
    dec = pump_decompose(csd0_derivation(G, 10, 1))
    assert pump_audit(dec, h, NAMES).status == PASS
    assert classify_pump_case(dec).detail == "CORE(a,c) configuration 3"
    dec = pump_decompose(csd0_derivation(G, 1, 10))
    assert classify_pump_case(dec).detail == "CORE(b,d) configuration 3"


def test_audit_detects_extra_edge():
    G, h = builtin_csd0_grammar()
    dec = pump_decompose(csd0_derivation(G, 10, 1))
    extra = parse_term("merge(merge(forget(s, edge(rt, a, s)), edge(rt, c, s)), forget(s, edge(rt, a', s)))")
    res = pump_audit(dec, h.replace("a", 0, extra), NAMES)
    assert res.status == FAIL and res.witness["symbol"] == "a'"


def test_classify_bar_only():
    G, h = barchain()
    tall = tall_derivations(G, 1, 20)
    assert tall
    dec = pump_decompose(tall[0])
    assert classify_pump_case(dec).detail == "BAR-ONLY(a') side=left"
    assert pump_audit(dec, h, NAMES).status == PASS


def test_classify_neutral():
    G = parse_grammar("start S\nnt S/0\nnt P/1\nterm g/1\nterm h4/4\nterm a/0 token a\nterm b/0 token b\n"
                      "term c/0 token c\nterm d/0 token d\nS -> h4(a,P(b),c,d)\nP(x) -> g(P(x))\nP(x) -> x\n")
    d = [d for d in derive_bounded(G, max_rules=5) if d.tree.height() >= 5][0]
    dec = pump_candidates(d, 2)[0]
    assert classify_pump_case(dec).detail == "NEUTRAL"


def test_downward_separation():
    G, h = builtin_csd0_grammar()
    l0 = l0_bound(G, h)
    for n, m in ((10, 1), (6, 5)):
        dec = pump_decompose(csd0_derivation(G, n, m))
        for pair in SEP_PAIRS:
            res = check_downward_separation(dec, pair, l0)
            assert all(r.ok for r in res)
            assert {r.checker for r in res} <= {"lemma13", "lemma14"}


def test_inapplicable_outside_csd():
    G, h = barchain()
    bad = parse_grammar(fixture_text("barchain.grammar").replace("S -> h4(a,P(eps),h3(b,c,d))",
                                                                  "S -> h4(a,P(eps),h3(b,d,c))"))
    dec = pump_decompose(tall_derivations(bad, 1, 20)[0])
    assert pump_audit(dec, h, NAMES).status == INAPPLICABLE
    assert classify_pump_case(dec).status == INAPPLICABLE


# --- suites ------------------------------------------------------------------------

def test_small_suites_run():
    assert run_suite("boundary", cases=50).ok
    assert run_suite("lemma5", cases=20, k=1, l=1).ok
    assert not run_suite("alignment").ok
    with pytest.raises(KeyError):
        run_suite("nope")
