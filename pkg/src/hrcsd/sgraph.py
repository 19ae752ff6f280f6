"""The HR algebra over a finite set of source names.

S-graphs are immutable directed edge-labeled multigraphs whose nodes may carry
source names.  Terms over merge / forget / rename and the single-edge
constants are ordinary :class:`~hrcsd.trees.Tree` values whose symbols are
:class:`HrOp` tuples.
"""
from __future__ import annotations

import json
import re
from collections import Counter
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms import isomorphism

from .trees import Position, Tree, TreeError, Var

Edge = Tuple[int, int, str]


class HRError(ValueError):
    pass


class RenameCollision(HRError):
    def __init__(self, old, new, path: Position = ()):
        self.old, self.new, self.path = old, new, tuple(path)
        where = "ε" if not self.path else ".".join(map(str, self.path))
        super().__init__(f"rename {old}->{new}: target source {new!r} already assigned (at path {where})")


class SGraph:
    """nodes: sorted int ids; edges: sorted (from, to, label) multiset; sources: name -> node."""

    __slots__ = ("nodes", "edges", "_sources", "_hash")

    def __init__(self, nodes: Iterable[int] = (), edges: Iterable[Edge] = (), sources: Mapping[str, int] = None, check: bool = True):
        self.nodes = tuple(sorted(set(nodes)))
        self.edges = tuple(sorted(edges))
        self._sources = tuple(sorted((sources or {}).items()))
        self._hash = None
        if check:
            self._validate()

    def _validate(self):
        nodes = set(self.nodes)
        touched = set()
        for u, v, lab in self.edges:
            if u not in nodes or v not in nodes:
                raise HRError(f"edge ({u},{v},{lab}) has an endpoint outside the node set")
            touched.add(u)
            touched.add(v)
        for name, n in self._sources:
            if n not in nodes:
                raise HRError(f"source {name!r} points at unknown node {n}")
            touched.add(n)
        isolated = nodes - touched
        if isolated:
            raise HRError(f"isolated unnamed nodes {sorted(isolated)}")

    @property
    def sources(self) -> Dict[str, int]:
        return dict(self._sources)

    def names_at(self, node: int) -> Tuple[str, ...]:
        return tuple(sorted(n for n, v in self._sources if v == node))

    def source(self, name: str) -> Optional[int]:
        for n, v in self._sources:
            if n == name:
                return v
        return None

    def label_counts(self) -> Counter:
        return Counter(lab for _, _, lab in self.edges)

    def __eq__(self, other):
        return (isinstance(other, SGraph) and self.nodes == other.nodes
                and self.edges == other.edges and self._sources == other._sources)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nodes, self.edges, self._sources))
        return self._hash

    def __repr__(self):
        return f"SGraph(nodes={len(self.nodes)}, edges={list(self.edges)}, sources={self.sources})"


EMPTY_GRAPH = SGraph()


# --- operations on values --------------------------------------------------

def _check_names(names, *used):
    if names is None:
        return
    for n in used:
        if n not in names:
            raise HRError(f"source name {n!r} is not declared (have {sorted(names)})")


def const_edge(a: str, label: str, b: str, names=None) -> SGraph:
    _check_names(names, a, b)
    if a == b:
        raise HRError(f"edge constant needs two distinct sources, got {a!r} twice (use a loop)")
    return SGraph([0, 1], [(0, 1, label)], {a: 0, b: 1})


def const_loop(a: str, label: str, names=None) -> SGraph:
    _check_names(names, a)
    return SGraph([0], [(0, 0, label)], {a: 0})


def merge(g1: SGraph, g2: SGraph) -> SGraph:
    """Disjoint union, then fuse the nodes carrying the same source name."""
    m1 = {n: i for i, n in enumerate(g1.nodes)}
    offset = len(g1.nodes)
    s1 = g1.sources
    m2 = {}
    for name, n in g2.sources.items():
        if name in s1:
            m2[n] = m1[s1[name]]
    for n in g2.nodes:
        if n not in m2:
            m2[n] = offset
            offset += 1
    edges = [(m1[u], m1[v], l) for u, v, l in g1.edges] + [(m2[u], m2[v], l) for u, v, l in g2.edges]
    sources = {name: m1[n] for name, n in s1.items()}
    for name, n in g2.sources.items():
        sources.setdefault(name, m2[n])
    return SGraph(set(m1.values()) | set(m2.values()), edges, sources, check=False)


def rename(g: SGraph, a: str, b: str) -> SGraph:
    src = g.sources
    if a == b or a not in src:
        return g
    if b in src:
        raise RenameCollision(a, b)
    node = src.pop(a)
    src[b] = node
    return SGraph(g.nodes, g.edges, src, check=False)


def forget(g: SGraph, a: str) -> SGraph:
    src = g.sources
    if a not in src:
        return g
    del src[a]
    return SGraph(g.nodes, g.edges, src, check=False)


def source_count(g: SGraph) -> int:
    return len(g.sources)


def boundary_nodes(g: SGraph, sub: Iterable[Edge]) -> Set[int]:
    """Nodes incident to an edge in ``sub`` and to an edge of ``g`` outside ``sub``."""
    inside = Counter(sub)
    whole = Counter(g.edges)
    if inside - whole:
        raise HRError(f"edges {sorted((inside - whole).elements())} are not in the graph")
    outside = whole - inside
    touch_in = {x for u, v, _ in inside.elements() for x in (u, v)}
    touch_out = {x for u, v, _ in outside.elements() for x in (u, v)}
    return touch_in & touch_out


def to_networkx(g: SGraph) -> nx.MultiDiGraph:
    G = nx.MultiDiGraph()
    for n in g.nodes:
        G.add_node(n, names=g.names_at(n))
    for u, v, lab in g.edges:
        G.add_edge(u, v, label=lab)
    return G


def _edge_labels_match(d1, d2):
    return sorted(d["label"] for d in d1.values()) == sorted(d["label"] for d in d2.values())


def iso_check(g1: SGraph, g2: SGraph) -> bool:
    """Isomorphism preserving edge labels with multiplicities and the source map."""
    if len(g1.nodes) != len(g2.nodes) or len(g1.edges) != len(g2.edges):
        return False
    if g1.label_counts() != g2.label_counts() or sorted(g1.sources) != sorted(g2.sources):
        return False
    return find_isomorphism(g1, g2) is not None


def find_isomorphism(g1: SGraph, g2: SGraph) -> Optional[Dict[int, int]]:
    """A node bijection g1 -> g2 witnessing ``iso_check``, or None."""
    G1, G2 = to_networkx(g1), to_networkx(g2)
    gm = isomorphism.MultiDiGraphMatcher(
        G1, G2,
        node_match=lambda a, b: a["names"] == b["names"],
        edge_match=_edge_labels_match,
    )
    for mapping in gm.isomorphisms_iter():
        return dict(mapping)
    return None


def relabel(g: SGraph, mapping: Mapping[int, int]) -> SGraph:
    return SGraph([mapping[n] for n in g.nodes],
                  [(mapping[u], mapping[v], l) for u, v, l in g.edges],
                  {name: mapping[n] for name, n in g.sources.items()}, check=False)


def _refine(g: SGraph, colors: Dict[int, int], adj) -> Dict[int, int]:
    """Colour refinement: split classes by the multiset of (direction, label, colour) of neighbours."""
    while True:
        sig = {n: (colors[n], tuple(sorted((d, l, colors[m]) for d, l, m in adj[n]))) for n in g.nodes}
        ranks = {x: i for i, x in enumerate(sorted(set(sig.values())))}
        new = {n: ranks[sig[n]] for n in g.nodes}
        if len(ranks) == len(set(colors.values())):
            return new
        colors = new


def canonical_order(g: SGraph) -> List[int]:
    """An order that depends only on the isomorphism class of ``g``.

    Source nodes come first in name order. Ties left by colour refinement
    are broken by trying each candidate and keeping the smallest encoding.
    """
    adj: Dict[int, List[Tuple[int, str, int]]] = {n: [] for n in g.nodes}
    for u, v, lab in g.edges:
        adj[u].append((0, lab, v))
        adj[v].append((1, lab, u))
    init = {n: (0, g.names_at(n)) if g.names_at(n) else (1, ()) for n in g.nodes}
    ranks = {x: i for i, x in enumerate(sorted(set(init.values())))}
    names = sorted(g.sources.items())
    twin_key = {n: (g.names_at(n), tuple(sorted((d, l, -1 if m == n else m) for d, l, m in adj[n])))
                for n in g.nodes}

    def search(colors):
        colors = _refine(g, colors, adj)
        cells: Dict[int, List[int]] = {}
        for n, c in colors.items():
            cells.setdefault(c, []).append(n)
        open_cells = [c for c, ns in cells.items() if len(ns) > 1]
        if not open_cells:
            key = (tuple(sorted((colors[u], colors[v], l) for u, v, l in g.edges)),
                   tuple((a, colors[n]) for a, n in names))
            return key, colors
        cell = cells[min(open_cells)]
        # swapping two nodes with the same neighbourhood is an automorphism, so one of them suffices
        reps = {}
        for n in sorted(cell):
            reps.setdefault(twin_key[n], n)
        best = None
        for n in reps.values():
            res = search({m: 2 * c + (0 if m == n else 1) for m, c in colors.items()})
            if best is None or res[0] < best[0]:
                best = res
        return best

    _, colors = search({n: ranks[init[n]] for n in g.nodes})
    return sorted(g.nodes, key=colors.get)


def canonicalize(g: SGraph) -> Tuple[SGraph, Dict[int, int]]:
    mapping = {n: i for i, n in enumerate(canonical_order(g))}
    return relabel(g, mapping), mapping


# --- terms -----------------------------------------------------------------

class HrOp(NamedTuple):
    kind: str
    args: Tuple[str, ...] = ()

    def __str__(self):
        return self.kind if not self.args else f"{self.kind}[{','.join(self.args)}]"


RANKS = {"merge": 2, "forget": 1, "ren": 1, "edge": 0, "loop": 0, "empty": 0}


def Merge(t1: Tree, t2: Tree) -> Tree:
    return Tree(HrOp("merge"), [t1, t2])


def Forget(a: str, t: Tree) -> Tree:
    return Tree(HrOp("forget", (a,)), [t])


def Ren(a: str, b: str, t: Tree) -> Tree:
    return Tree(HrOp("ren", (a, b)), [t])


def Edge(a: str, label: str, b: str) -> Tree:
    return Tree(HrOp("edge", (a, label, b)))


def Loop(a: str, label: str) -> Tree:
    return Tree(HrOp("loop", (a, label)))


EMPTY = Tree(HrOp("empty"))


def merge_all(*terms: Tree) -> Tree:
    """Right-nested merge of one or more terms."""
    if not terms:
        return EMPTY
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = Merge(t, out)
    return out


def term_names(t: Tree) -> Set[str]:
    names = set()
    for _, node in t.subtrees():
        op = node.symbol
        if isinstance(op, HrOp):
            if op.kind in ("forget", "loop"):
                names.add(op.args[0])
            elif op.kind == "ren":
                names.update(op.args)
            elif op.kind == "edge":
                names.update((op.args[0], op.args[2]))
    return names


def check_term(t: Tree, names=None, allow_vars: bool = False) -> None:
    """Well-formedness over the HR signature (ranks, declared names, edge a != b)."""
    for pos, node in t.subtrees():
        op = node.symbol
        if isinstance(op, Var):
            if not allow_vars:
                raise HRError(f"variable {op} in a closed term at {pos}")
            continue
        if not isinstance(op, HrOp) or op.kind not in RANKS:
            raise HRError(f"not an HR operation at {pos}: {op!r}")
        if RANKS[op.kind] != len(node.children):
            raise HRError(f"{op.kind} at {pos} has {len(node.children)} children")
        if op.kind == "edge" and op.args[0] == op.args[2]:
            raise HRError(f"edge constant with identical sources at {pos}")
    if names is not None:
        _check_names(names, *sorted(term_names(t)))


class Evaluation:
    """Value of a term together with edge provenance.

    ``origin[i]`` is the term position of the constant that produced
    ``graph.edges[i]``; ``sources_at[pos]`` is the source map of the subterm
    at ``pos`` expressed in the final graph's node ids.
    """

    def __init__(self, graph: SGraph, origin: Tuple[Position, ...], sources_at: Dict[Position, Dict[str, int]]):
        self.graph = graph
        self.origin = origin
        self.sources_at = sources_at

    def edges_below(self, pos: Position) -> List[int]:
        n = len(pos)
        return [i for i, o in enumerate(self.origin) if o[:n] == pos]

    def subgraph(self, pos: Position) -> SGraph:
        """The value of the subterm at ``pos``, embedded in the final node ids."""
        idx = self.edges_below(pos)
        edges = [self.graph.edges[i] for i in idx]
        src = self.sources_at[pos]
        nodes = {x for u, v, _ in edges for x in (u, v)} | set(src.values())
        return SGraph(nodes, edges, src, check=False)

    def edge_multiset(self, pos: Position) -> List[Edge]:
        return [self.graph.edges[i] for i in self.edges_below(pos)]


class _UF:
    def __init__(self):
        self.parent: List[int] = []

    def new(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)
        return min(ra, rb)


def evaluate(t: Tree, names=None) -> Evaluation:
    """Bottom-up evaluation with provenance; the graph is canonicalized."""
    if names is not None:
        check_term(t, names)
    uf = _UF()
    raw_edges: List[Tuple[int, int, str, Position]] = []
    raw_sources: Dict[Position, Dict[str, int]] = {}

    def go(node: Tree, pos: Position) -> Dict[str, int]:
        op = node.symbol
        if not isinstance(op, HrOp):
            raise HRError(f"cannot evaluate non-HR symbol {op!r} at {pos}")
        kind = op.kind
        if kind == "edge":
            a, lab, b = op.args
            if a == b:
                raise HRError(f"edge constant with identical sources at {pos}")
            u, v = uf.new(), uf.new()
            raw_edges.append((u, v, lab, pos))
            res = {a: u, b: v}
        elif kind == "loop":
            a, lab = op.args
            u = uf.new()
            raw_edges.append((u, u, lab, pos))
            res = {a: u}
        elif kind == "empty":
            res = {}
        elif kind == "merge":
            left = go(node.children[0], pos + (0,))
            right = go(node.children[1], pos + (1,))
            res = dict(left)
            for name, n in right.items():
                if name in res:
                    uf.union(res[name], n)
                else:
                    res[name] = n
        elif kind == "forget":
            res = dict(go(node.children[0], pos + (0,)))
            res.pop(op.args[0], None)
        elif kind == "ren":
            a, b = op.args
            res = dict(go(node.children[0], pos + (0,)))
            if a != b and a in res:
                if b in res:
                    raise RenameCollision(a, b, pos)
                res[b] = res.pop(a)
        else:
            raise HRError(f"unknown operation {kind!r}")
        raw_sources[pos] = res
        return res

    top = go(t, ())
    edges = [(uf.find(u), uf.find(v), lab, o) for u, v, lab, o in raw_edges]
    sources = {name: uf.find(n) for name, n in top.items()}
    nodes = {x for u, v, _, _ in edges for x in (u, v)} | set(sources.values())
    raw = SGraph(nodes, [(u, v, l) for u, v, l, _ in edges], sources, check=False)
    mapping = {n: i for i, n in enumerate(canonical_order(raw))}
    final = sorted(((mapping[u], mapping[v], l), o) for u, v, l, o in edges)
    graph = SGraph(mapping.values(), [e for e, _ in final], {k: mapping[v] for k, v in sources.items()})
    sources_at = {p: {k: mapping[uf.find(v)] for k, v in m.items()} for p, m in raw_sources.items()}
    return Evaluation(graph, tuple(o for _, o in final), sources_at)


def eval_term(t: Tree, names=None) -> SGraph:
    return evaluate(t, names).graph


class HRAlgebra:
    """An HR algebra instance with a declared tuple of k source names."""

    def __init__(self, names: Sequence[str]):
        self.names = tuple(names)
        if len(set(self.names)) != len(self.names):
            raise HRError("duplicate source names")

    @property
    def k(self) -> int:
        return len(self.names)

    def const_edge(self, a, label, b) -> SGraph:
        return const_edge(a, label, b, self.names)

    def const_loop(self, a, label) -> SGraph:
        return const_loop(a, label, self.names)

    def check(self, t: Tree, allow_vars=False):
        check_term(t, self.names, allow_vars)

    def evaluate(self, t: Tree) -> Evaluation:
        return evaluate(t, self.names)

    def eval_term(self, t: Tree) -> SGraph:
        return evaluate(t, self.names).graph

    def __repr__(self):
        return f"HRAlgebra({list(self.names)})"


# --- text formats ----------------------------------------------------------

_NAME = r"[A-Za-z0-9_'<>]+"
_HR_TOKEN = re.compile(rf"\s*(\(|\)|,|{_NAME})")


def _hr_lex(text):
    toks, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _HR_TOKEN.match(text, pos)
        if not m:
            raise HRError(f"bad character in term at offset {pos}: {text[pos:pos + 12]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


_VAR = re.compile(r"^x([1-9][0-9]*)$")


def parse_term(text: str, allow_vars: bool = False) -> Tree:
    """Parse ``merge(T,T)``, ``forget(a,T)``, ``ren(a,b,T)``, ``edge(a,l,b)``, ``loop(a,l)``, ``empty``."""
    toks = _hr_lex(text)
    pos = 0

    def expect(tok):
        nonlocal pos
        if pos >= len(toks) or toks[pos] != tok:
            got = toks[pos] if pos < len(toks) else "end of input"
            raise HRError(f"expected {tok!r}, got {got!r}")
        pos += 1

    def name():
        nonlocal pos
        if pos >= len(toks) or toks[pos] in "(),":
            raise HRError("expected a name")
        pos += 1
        return toks[pos - 1]

    def term():
        nonlocal pos
        head = name()
        if head == "merge":
            expect("(")
            a = term()
            expect(",")
            b = term()
            expect(")")
            return Merge(a, b)
        if head == "forget":
            expect("(")
            n = name()
            expect(",")
            a = term()
            expect(")")
            return Forget(n, a)
        if head == "ren":
            expect("(")
            old = name()
            expect(",")
            new = name()
            expect(",")
            a = term()
            expect(")")
            return Ren(old, new, a)
        if head == "edge":
            expect("(")
            a = name()
            expect(",")
            lab = name()
            expect(",")
            b = name()
            expect(")")
            if a == b:
                raise HRError(f"edge({a},{lab},{b}) needs distinct sources")
            return Edge(a, lab, b)
        if head == "loop":
            expect("(")
            a = name()
            expect(",")
            lab = name()
            expect(")")
            return Loop(a, lab)
        if head == "empty":
            return EMPTY
        m = _VAR.match(head)
        if m and allow_vars:
            return Tree(Var(int(m.group(1))))
        raise HRError(f"unknown operation {head!r}")

    t = term()
    if pos != len(toks):
        raise HRError(f"trailing input: {' '.join(toks[pos:])}")
    return t


def term_to_text(t: Tree) -> str:
    op = t.symbol
    if isinstance(op, Var):
        return str(op)
    if op.kind == "merge":
        return f"merge({term_to_text(t.children[0])},{term_to_text(t.children[1])})"
    if op.kind == "forget":
        return f"forget({op.args[0]},{term_to_text(t.children[0])})"
    if op.kind == "ren":
        return f"ren({op.args[0]},{op.args[1]},{term_to_text(t.children[0])})"
    if op.kind == "edge":
        return "edge({},{},{})".format(*op.args)
    if op.kind == "loop":
        return "loop({},{})".format(*op.args)
    return "empty"


def node_id(n: int) -> str:
    return f"n{n}"


def to_json_obj(g: SGraph, extra: Optional[dict] = None) -> dict:
    edges = sorted((node_id(u), node_id(v), l) for u, v, l in g.edges)
    obj = {
        "nodes": [node_id(n) for n in g.nodes],
        "edges": [{"from": u, "to": v, "label": l} for u, v, l in edges],
        "sources": {name: node_id(n) for name, n in sorted(g.sources.items())},
    }
    if extra:
        obj.update(extra)
    return obj


def to_json(g: SGraph, extra: Optional[dict] = None) -> str:
    return json.dumps(to_json_obj(g, extra), indent=2, sort_keys=False)


def from_json(data) -> SGraph:
    obj = json.loads(data) if isinstance(data, str) else data
    ids = {s: i for i, s in enumerate(obj["nodes"])}
    edges = [(ids[e["from"]], ids[e["to"]], e["label"]) for e in obj["edges"]]
    return SGraph(ids.values(), edges, {k: ids[v] for k, v in obj["sources"].items()})


def to_dot(g: SGraph, shade: Iterable[int] = (), name: str = "G") -> str:
    shade = set(shade)
    lines = [f"digraph {name} {{"]
    for n in g.nodes:
        attrs = []
        names = g.names_at(n)
        attrs.append('label="{}"'.format(",".join(f"<{x}>" for x in names)) if names else 'label=""')
        if n in shade:
            attrs.append("style=filled")
            attrs.append("fillcolor=gray")
        lines.append(f"  {node_id(n)} [{' '.join(attrs)}];")
    for u, v, lab in g.edges:
        lines.append(f'  {node_id(u)} -> {node_id(v)} [label="{lab}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
