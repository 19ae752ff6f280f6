"""k-distance against a reference CSD graph, source counts of witnesses, partner-free subtrees and distant witness pairs."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

from ..csd import CsdGraph, descriptor_to_graph, witness_descriptor, witness_parameters
from ..grammars.cftg import LmCftg, derive_bounded
from ..sgraph import Edge, Forget, Merge, SGraph, boundary_nodes, evaluate, find_isomorphism, source_count
from ..trees import Lth, Position, Tree, Var, apply_hom, count_tokens
from .report import FAIL, INAPPLICABLE, PASS, CheckResult

from .separation import SEP_PAIRS


class AlignmentError(ValueError):
    pass


def identity_hom(t: Tree) -> Lth:
    """h(f) = f(x1..xn) for every symbol of ``t``: a derivation that is its own term."""
    images = {}
    for _, node in t.subtrees():
        n = len(node.children)
        images[node.symbol] = (n, Tree(node.symbol, [Tree(Var(i)) for i in range(1, n + 1)]))
    return Lth(images)


@dataclass
class Alignment:
    """graphof(t) with every edge assigned to a block of the reference graph."""
    tree: Tree
    graph: SGraph
    origin: Tuple[Position, ...]
    blocks: Tuple[int, ...]
    root_of: Dict[Position, Position]

    def edges_of(self, pos: Position) -> List[int]:
        """Edges of the final graph produced by the subtree at ``pos`` (empty if it was deleted)."""
        root = self.root_of.get(pos)
        if root is None:
            return []
        k = len(root)
        return [i for i, o in enumerate(self.origin) if o[:k] == root]


def align(t: Tree, h: Lth, G: CsdGraph, names: Optional[Sequence[str]] = None) -> Alignment:
    image = apply_hom(h, t, trace=True)
    ev = evaluate(image.term, names)
    mapping = find_isomorphism(ev.graph, G.graph)
    if mapping is None:
        raise AlignmentError("graphof(t) is not isomorphic to the reference CSD graph")
    pool: Dict[Tuple[int, int, str], List[int]] = {}
    for j, e in enumerate(G.graph.edges):
        pool.setdefault(e, []).append(j)
    used: Set[int] = set()
    blocks = []
    for u, v, lab in ev.graph.edges:
        cands = [j for j in pool.get((mapping[u], mapping[v], lab), []) if j not in used]
        if not cands:
            raise AlignmentError(f"edge ({u},{v},{lab}) has no partner")
        used.add(cands[0])
        blocks.append(G.blocks[cands[0]])
    return Alignment(t, ev.graph, ev.origin, tuple(blocks), dict(image.root_of))


@dataclass
class DistanceReport:
    k: int
    position: Position
    split_blocks: Tuple[int, ...]


def split_blocks(al: Alignment, pos: Position) -> Tuple[int, ...]:
    inside = set(al.edges_of(pos))
    in_blocks = {al.blocks[i] for i in inside}
    out_blocks = {al.blocks[i] for i in range(len(al.blocks)) if i not in inside}
    return tuple(sorted(in_blocks & out_blocks))


def max_distance(t: Tree, h: Lth, G: CsdGraph, names: Optional[Sequence[str]] = None,
                 alignment: Optional[Alignment] = None) -> DistanceReport:
    """Largest k such that some subtree splits k blocks between inside and outside."""
    al = alignment or align(t, h, G, names)
    best = DistanceReport(0, (), ())
    for pos in t.positions():
        sb = split_blocks(al, pos)
        if len(sb) > best.k:
            best = DistanceReport(len(sb), pos, sb)
    return best


def _witness_sources(t: Tree, h: Lth, al: Alignment, names) -> List[Tuple[Position, Tuple[int, ...], int]]:
    """(position, split blocks, source count) for every subtree that splits a block."""
    image = apply_hom(h, t, trace=True)
    ev = evaluate(image.term, names)
    out = []
    for pos in t.positions():
        sb = split_blocks(al, pos)
        if sb:
            out.append((pos, sb, len(ev.sources_at[al.root_of[pos]])))
    return out


def check_lemma2(t: Tree, h: Lth, G: CsdGraph, k: int, names: Optional[Sequence[str]] = None,
                 case: str = "-") -> CheckResult:
    """Every subtree splitting at least k blocks evaluates to a value with at least k sources."""
    if k <= 0:
        return CheckResult(PASS, "lemma2", case, "k=0 holds trivially")
    al = align(t, h, G, names)
    dist = max_distance(t, h, G, names, al)
    if dist.k < k:
        return CheckResult(INAPPLICABLE, "lemma2", case, f"tree is only {dist.k}-distant")
    rows = [r for r in _witness_sources(t, h, al, names) if len(r[1]) >= k]
    low = [r for r in rows if r[2] < k]
    if low:
        pos, sb, sc = low[0]
        some = any(r[2] >= k for r in rows)
        return CheckResult(FAIL, "lemma2", case,
                           f"subtree at {_fmt(pos)} splits blocks {list(sb)} but has {sc} sources "
                           f"({len(low)}/{len(rows)} witnesses short; another witness has {k}: {'yes' if some else 'no'})",
                           {"position": list(pos), "blocks": list(sb), "sources": sc})
    return CheckResult(PASS, "lemma2", case,
                       f"k={k} distance={dist.k} witnesses={len(rows)} at={_fmt(dist.position)} "
                       f"boundary={len(boundary_nodes(al.graph, [al.graph.edges[i] for i in al.edges_of(dist.position)]))}",
                       {"position": list(dist.position), "blocks": list(dist.split_blocks)})


def check_lemma2_half(t: Tree, h: Lth, G: CsdGraph, names: Optional[Sequence[str]] = None,
                      case: str = "-") -> CheckResult:
    """Chained blocks share one node, so j split blocks force only ceil(j/2) boundary nodes."""
    al = align(t, h, G, names)
    for pos, sb, sc in _witness_sources(t, h, al, names):
        if 2 * sc < len(sb):
            return CheckResult(FAIL, "lemma2-half", case,
                               f"subtree at {_fmt(pos)} splits {len(sb)} blocks but has {sc} sources",
                               {"position": list(pos), "blocks": list(sb), "sources": sc})
    return CheckResult(PASS, "lemma2-half", case, "every subtree has at least half as many sources as split blocks")


def _fmt(pos: Position) -> str:
    return "ε" if not pos else ".".join(map(str, pos))


# --- random derivations of CSD graphs --------------------------------------

def random_graph_term(g: SGraph, rng: random.Random) -> Tuple[Tree, Tuple[str, ...]]:
    """A random HR term for ``g`` built by recursive edge bipartition.

    Every node has its own name n<i>; a subterm keeps as sources exactly the
    nodes it shares with the rest of the graph.  Returns the term and the
    declared names.  ``g`` must have a single source and no loops.
    """
    (src_name, src_node), = g.sources.items()
    name = {v: f"n{v}" for v in g.nodes}
    name[src_node] = src_name
    edges = list(range(len(g.edges)))

    def build(es: List[int], ext: Set[int]) -> Tree:
        if len(es) == 1:
            u, v, lab = g.edges[es[0]]
            t = Edge(name[u], lab, name[v])
            for x in (u, v):
                if x not in ext:
                    t = Forget(name[x], t)
            return t
        rng.shuffle(es)
        cut = rng.randint(1, len(es) - 1)
        left, right = es[:cut], es[cut:]
        nodes_l = {x for i in left for x in g.edges[i][:2]}
        nodes_r = {x for i in right for x in g.edges[i][:2]}
        t = Merge(build(left, (nodes_l & nodes_r) | (nodes_l & ext)),
                  build(right, (nodes_l & nodes_r) | (nodes_r & ext)))
        for x in sorted((nodes_l & nodes_r) - ext):
            t = Forget(name[x], t)
        return t

    term = build(edges, {src_node})
    return term, tuple(sorted(set(name.values())))


# --- partner-free subtrees --------------------------------------------------------------

@dataclass
class Lemma4Result:
    s: Optional[int]
    witnesses: List[Tuple[Tuple[str, ...], Position, str]]
    trees_checked: int
    result: CheckResult


def check_lemma4_instance(G: LmCftg, r: int, s_max: int, height_bound: int, case: str = "-") -> Lemma4Result:
    """Smallest s such that every derivation with yield in a* b^s c^s d* has a subtree
    with at least r occurrences of some x and none of its partner y."""
    derivs = derive_bounded(G, max_height=height_bound)
    yields = [(d.tree, G.yield_of(d.tree)) for d in derivs]
    for s in range(0, s_max + 1):
        family = [(t, w) for t, w in yields if _in_family(w, s)]
        if r >= 1 and not family:
            continue
        witnesses = []
        ok = True
        for t, w in family:
            wit = _lemma4_witness(G, t, r)
            if wit is None:
                ok = False
                break
            witnesses.append((w, wit[0], wit[1]))
        if ok:
            res = CheckResult(PASS, "lemma4", case, f"r={r} s={s} trees={len(family)}")
            return Lemma4Result(s, witnesses, len(family), res)
    return Lemma4Result(None, [], 0, CheckResult(FAIL, "lemma4", case, f"no s <= {s_max} works for r={r}"))


def _in_family(w: Sequence[str], s: int) -> bool:
    """w in a* b^s c^s d* (bars and brackets ignored)."""
    core = [x for x in w if x in ("a", "b", "c", "d")]
    i = 0
    while i < len(core) and core[i] == "a":
        i += 1
    if core[i:i + s] != ["b"] * s or core[i + s:i + 2 * s] != ["c"] * s:
        return False
    return all(x == "d" for x in core[i + 2 * s:])


def _lemma4_witness(G: LmCftg, t: Tree, r: int):
    for pos, sub in t.subtrees():
        w = G.yield_of(sub)
        for x, y in SEP_PAIRS:
            if count_tokens(w, x) >= r and count_tokens(w, y) == 0:
                return pos, f"{x}/{y}"
    return None


# --- distant witness pairs -------------------------------------------------

class PreconditionError(ValueError):
    pass


def distant_witness_check(k: int, l: int, inside: Set[int], G: Optional[CsdGraph] = None) -> CheckResult:
    """Count blocks with an inside c'-edge that also have an edge outside."""
    p = witness_parameters(k, l)
    G = G or descriptor_to_graph(witness_descriptor(k, l))
    labels = [lab for _, _, lab in G.graph.edges]
    na = sum(1 for i in inside if labels[i] == "a'")
    nc = sum(1 for i in inside if labels[i] == "c'")
    if na > p["q_a"] or nc < p["q_c"]:
        raise PreconditionError(f"inside has {na} a'-edges (max {p['q_a']}) and {nc} c'-edges (min {p['q_c']})")
    split = set()
    for i in inside:
        if labels[i] != "c'":
            continue
        b = G.blocks[i]
        if any(j not in inside for j in G.edges_of_block(b)):
            split.add(b)
    status = PASS if len(split) >= k else FAIL
    return CheckResult(status, "lemma5", f"k={k},l={l}", f"a'={na} c'={nc} split_blocks={len(split)} need={k}",
                       {"split_blocks": sorted(split)})


def sample_qualifying_subset(k: int, l: int, rng: random.Random, G: Optional[CsdGraph] = None) -> Set[int]:
    p = witness_parameters(k, l)
    G = G or descriptor_to_graph(witness_descriptor(k, l))
    labels = [lab for _, _, lab in G.graph.edges]
    a_edges = [i for i, lab in enumerate(labels) if lab == "a'"]
    c_edges = [i for i, lab in enumerate(labels) if lab == "c'"]
    others = [i for i, lab in enumerate(labels) if lab not in ("a'", "c'")]
    inside = set(rng.sample(a_edges, rng.randint(0, p["q_a"])))
    inside |= set(rng.sample(c_edges, rng.randint(p["q_c"], len(c_edges))))
    inside |= {i for i in others if rng.random() < 0.5}
    return inside
