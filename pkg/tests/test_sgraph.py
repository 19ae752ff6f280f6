import itertools
import json

import pytest
from hypothesis import given, strategies as st

from conftest import hr_terms
from hrcsd.csd import fixture_text
from hrcsd.sgraph import (EMPTY_GRAPH, HRError, RenameCollision, SGraph, boundary_nodes, canonicalize,
                          const_edge, const_loop, eval_term, evaluate, forget, from_json, iso_check, merge, merge_all,
                          parse_term, relabel, rename, source_count, term_to_text, to_dot, to_json)

NAMES = ("rt", "s", "o")


def brute_iso(g1, g2):
    """Independent oracle: try every node bijection."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    for perm in itertools.permutations(g2.nodes):
        m = dict(zip(g1.nodes, perm))
        if sorted((m[u], m[v], l) for u, v, l in g1.edges) != sorted(g2.edges):
            continue
        if {a: m[n] for a, n in g1.sources.items()} == g2.sources:
            return True
    return False


@st.composite
def sgraphs(draw, max_nodes=4):
    k = draw(st.integers(1, max_nodes))
    nodes = list(range(k))
    edges = draw(st.lists(st.tuples(st.sampled_from(nodes), st.sampled_from(nodes), st.sampled_from("ab")),
                          max_size=5))
    names = draw(st.lists(st.sampled_from(NAMES), unique=True, max_size=min(3, k)))
    targets = draw(st.permutations(nodes))
    sources = dict(zip(names, targets))
    touched = {x for u, v, _ in edges for x in (u, v)} | set(sources.values())
    return SGraph(touched, edges, sources)


def test_const_edge():
    g = const_edge("rt", "ARG1", "o")
    assert len(g.nodes) == 2 and [l for _, _, l in g.edges] == ["ARG1"]
    assert set(g.sources) == {"rt", "o"}
    g = const_edge("s", "c", "rt")
    (u, v, l), = g.edges
    assert (u, v, l) == (g.sources["s"], g.sources["rt"], "c")
    with pytest.raises(HRError):
        const_edge("rt", "ARG1", "rt")


def test_const_loop():
    g = const_loop("o", "Hans")
    assert g.edges == ((0, 0, "Hans"),) and g.sources == {"o": 0}
    g = const_loop("rt", "let")
    assert g.edges == ((0, 0, "let"),) and g.sources == {"rt": 0}
    assert forget(const_loop("rt", "sleep"), "rt").sources == {}


def test_merge_examples():
    g = merge(const_edge("rt", "ARG1", "o"), const_loop("o", "Hans"))
    o, rt = g.sources["o"], g.sources["rt"]
    assert len(g.nodes) == 2
    assert sorted(g.edges) == sorted([(rt, o, "ARG1"), (o, o, "Hans")])
    g = merge(const_edge("rt", "c", "s"), const_edge("rt", "a", "s"))
    assert len(g.nodes) == 2 and {(u, v) for u, v, _ in g.edges} == {(g.sources["rt"], g.sources["s"])}


def test_merge_keeps_parallel_edges():
    g = merge(const_edge("rt", "c", "s"), const_edge("rt", "c", "s"))
    assert len(g.edges) == 2


def test_rename_examples():
    g = const_edge("rt", "c", "s")
    r = rename(g, "rt", "x")
    assert set(r.sources) == {"x", "s"} and r.edges == g.edges
    assert rename(g, "rt", "rt") == g
    assert rename(g, "o", "x") == g
    with pytest.raises(RenameCollision):
        rename(g, "rt", "s")


def test_forget_examples():
    g = forget(const_edge("rt", "c", "s"), "s")
    assert g.sources == {"rt": 0} and len(g.edges) == 1
    assert forget(const_loop("rt", "let"), "rt").sources == {}


def test_source_count():
    assert source_count(const_edge("rt", "a", "s")) == 2
    assert source_count(forget(const_edge("rt", "a", "s"), "s")) == 1
    assert source_count(EMPTY_GRAPH) == 0


def test_c_chain_by_hand():
    # merge fuses rt with rt and s with s; the renamed copy has its rt moved to s.
    t = parse_term("forget(s, merge(edge(rt,c,s), ren(rt,s,forget(s,edge(rt,c,s)))))")
    g = eval_term(t)
    expected = SGraph([0, 1, 2], [(0, 1, "c"), (1, 2, "c")], {"rt": 0})
    assert iso_check(g, expected) and brute_iso(g, expected)


def test_rename_collision_in_term():
    t = parse_term("forget(s, merge(edge(rt,c,s), ren(rt,s,edge(rt,c,s))))")
    with pytest.raises(RenameCollision) as e:
        eval_term(t)
    assert e.value.path == (0, 1)


def test_lond_fixture():
    text = " ".join(l.split("#")[0] for l in fixture_text("lond.term").splitlines())
    g = eval_term(parse_term(text))
    labels = sorted(l for _, _, l in g.edges)
    assert labels == ["ARG1", "ARG1", "ARG2", "Hans", "child", "help", "let"]
    assert set(g.sources) == {"rt"}


def test_boundary_nodes_examples():
    g = eval_term(parse_term("forget(s, merge(edge(rt,c,s), ren(rt,s,forget(s,edge(rt,c,s)))))"))
    assert boundary_nodes(g, g.edges) == set()
    assert boundary_nodes(g, []) == set()
    first = [e for e in g.edges if e[0] == g.sources["rt"]]
    (middle,) = {e[1] for e in first}
    assert boundary_nodes(g, first) == {middle}
    with pytest.raises(HRError):
        boundary_nodes(g, [(9, 9, "c")])


def test_iso_examples():
    g = const_edge("rt", "a", "s")
    assert iso_check(g, g)
    assert iso_check(g, relabel(g, {0: 7, 1: 3}))
    assert not iso_check(g, const_edge("rt", "b", "s"))


def test_json_round_trip():
    g = eval_term(parse_term("merge(edge(rt,a,s),loop(s,b))"))
    obj = json.loads(to_json(g))
    assert set(obj) >= {"nodes", "edges", "sources"}
    assert iso_check(from_json(obj), g)
    assert "digraph" in to_dot(g)


def test_parse_term_round_trip():
    t = parse_term("forget(s,merge(edge(rt,a,s),ren(rt,s,loop(rt,b))))")
    assert parse_term(term_to_text(t)) == t


@given(sgraphs(), sgraphs())
def test_iso_agrees_with_brute_force(g1, g2):
    assert iso_check(g1, g2) == brute_iso(g1, g2)


@given(sgraphs(), st.permutations(range(4)))
def test_iso_invariant_under_renumbering(g, perm):
    assert iso_check(g, relabel(g, {n: perm[n] for n in g.nodes}))


@given(sgraphs(), sgraphs(), sgraphs())
def test_merge_associative_commutative(g1, g2, g3):
    assert iso_check(merge(merge(g1, g2), g3), merge(g1, merge(g2, g3)))
    assert iso_check(merge(g1, g2), merge(g2, g1))


@given(sgraphs(), st.sampled_from(NAMES), st.sampled_from(NAMES))
def test_forget_rename_coherence(g, a, b):
    if b in g.sources and a != b:
        return
    assert iso_check(forget(rename(g, a, b), b), forget(g, a))


@given(hr_terms())
def test_eval_valid_and_bounded(term_names):
    t, names = term_names
    ev = evaluate(t, names)
    g = ev.graph
    SGraph(g.nodes, g.edges, g.sources)  # revalidates
    assert source_count(g) <= len(names)
    assert all(len(s) <= len(names) for s in ev.sources_at.values())


@given(hr_terms())
def test_canonical_form_is_stable(term_names):
    t, names = term_names
    g = eval_term(t, names)
    c1, _ = canonicalize(g)
    c2, _ = canonicalize(relabel(g, {n: 100 - n for n in g.nodes}))
    assert iso_check(c1, g)
    assert to_json(c1) == to_json(c2)


def test_canonical_form_with_many_twins():
    t = merge_all(*[parse_term("forget(s,edge(rt,a,s))")] * 12)
    g = eval_term(t)
    assert len(g.nodes) == 13 and iso_check(canonicalize(g)[0], g)
