"""The CSD string/graph relation and its two builtin grammars."""
from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .grammars.cftg import Derivation, LmCftg, parse_grammar
from .grammars.relation import parse_hom
from .grammars.tag import TagGrammar, parse_tag
from .sgraph import SGraph
from .trees import Lth, Tree, parse_tree

NAMES = ("rt", "s")
CORE = ("a", "b", "c", "d")
BARS = ("a'", "b'", "c'", "d'")
BAR_OF = dict(zip(CORE, BARS))
PARTNER = {"a": "c", "c": "a", "b": "d", "d": "b"}
ALPHABET = CORE + BARS + ("<", ">")
SYMBOLS = CORE + BARS


class CsdError(ValueError):
    pass


class CsdParseError(CsdError):
    def __init__(self, kind: str, position: int, message: str):
        self.kind, self.position = kind, position
        super().__init__(f"{kind} at token {position}: {message}")


@dataclass(frozen=True)
class CsdDescriptor:
    n: int
    m: int
    ka: Tuple[int, ...]
    kb: Tuple[int, ...]
    kc: Tuple[int, ...]
    kd: Tuple[int, ...]

    def __post_init__(self):
        for name in ("ka", "kb", "kc", "kd"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if self.n < 1 or self.m < 1:
            raise CsdError("n and m must be at least 1")
        for name, want in (("ka", self.n), ("kc", self.n), ("kb", self.m), ("kd", self.m)):
            vals = getattr(self, name)
            if len(vals) != want:
                raise CsdError(f"{name} has {len(vals)} entries, expected {want}")
            if any(v < 0 for v in vals):
                raise CsdError(f"{name} has a negative entry")

    def k(self, x: str) -> Tuple[int, ...]:
        return getattr(self, "k" + x)

    def __str__(self):
        fmt = lambda v: ",".join(map(str, v))
        return f"n={self.n} m={self.m} ka={fmt(self.ka)} kb={fmt(self.kb)} kc={fmt(self.kc)} kd={fmt(self.kd)}"

    def tuple_form(self) -> str:
        fmt = lambda v: "(" + ", ".join(map(str, v)) + ")"
        return f"({fmt(self.ka)}, {fmt(self.kb)}, {fmt(self.kc)}, {fmt(self.kd)})"

    @classmethod
    def from_tuples(cls, ka, kb, kc, kd) -> "CsdDescriptor":
        return cls(len(ka), len(kb), ka, kb, kc, kd)

    @classmethod
    def zero(cls, n: int, m: int) -> "CsdDescriptor":
        return cls(n, m, (0,) * n, (0,) * m, (0,) * n, (0,) * m)


def parse_descriptor(text: str) -> CsdDescriptor:
    """``n=1 m=2 ka=2 kb=1,0 kc=1 kd=0,0``."""
    fields: Dict[str, str] = {}
    for part in text.split():
        if "=" not in part:
            raise CsdError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        fields[k] = v
    missing = {"n", "m", "ka", "kb", "kc", "kd"} - set(fields)
    if missing:
        raise CsdError(f"missing descriptor fields: {sorted(missing)}")
    try:
        vec = lambda s: tuple(int(x) for x in s.split(",") if x != "")
        return CsdDescriptor(int(fields["n"]), int(fields["m"]), vec(fields["ka"]), vec(fields["kb"]),
                             vec(fields["kc"]), vec(fields["kd"]))
    except ValueError as exc:
        raise CsdError(str(exc)) from exc


def descriptor_family(max_nm: int, max_k: int):
    """Every descriptor with n, m <= max_nm and chain lengths <= max_k."""
    for n in range(1, max_nm + 1):
        for m in range(1, max_nm + 1):
            rng = range(max_k + 1)
            for ka in itertools.product(rng, repeat=n):
                for kc in itertools.product(rng, repeat=n):
                    for kb in itertools.product(rng, repeat=m):
                        for kd in itertools.product(rng, repeat=m):
                            yield CsdDescriptor(n, m, ka, kb, kc, kd)


def random_descriptor(rng: random.Random, max_nm: int = 3, max_k: int = 3) -> CsdDescriptor:
    n, m = rng.randint(1, max_nm), rng.randint(1, max_nm)
    vec = lambda size: tuple(rng.randint(0, max_k) for _ in range(size))
    return CsdDescriptor(n, m, vec(n), vec(m), vec(n), vec(m))


# --- strings ---------------------------------------------------------------

def segment(x: str, k: int) -> List[str]:
    return [x] + ["<"] * k + [BAR_OF[x]] * k + [">"] * k


def descriptor_to_string(d: CsdDescriptor) -> Tuple[str, ...]:
    out: List[str] = []
    for x in CORE:
        for k in d.k(x):
            out.extend(segment(x, k))
    return tuple(out)


def tokenize(text: str) -> Tuple[str, ...]:
    toks = tuple(text.split())
    for i, t in enumerate(toks):
        if t not in ALPHABET:
            raise CsdParseError("unknown-token", i, f"{t!r} is not in the CSD alphabet")
    return toks


def parse_csd_string(w: Sequence[str]) -> CsdDescriptor:
    """The unique descriptor of ``w``; raises CsdParseError on the first violation."""
    w = tuple(w)
    i = 0
    segs: List[Tuple[str, int, int]] = []  # (core token, chain length, start position)
    while i < len(w):
        x = w[i]
        if x not in CORE:
            kind = "unknown-token" if x not in ALPHABET else "segment-start"
            raise CsdParseError(kind, i, f"expected one of a b c d, got {x!r}")
        start = i
        i += 1
        opens = 0
        while i < len(w) and w[i] == "<":
            opens += 1
            i += 1
        bars = 0
        while i < len(w) and w[i] in BARS:
            if w[i] != BAR_OF[x]:
                raise CsdParseError("wrong-bar", i, f"{w[i]} inside an {x}-segment")
            bars += 1
            i += 1
        closes = 0
        while i < len(w) and w[i] == ">" and closes < opens:
            closes += 1
            i += 1
        if bars != opens:
            raise CsdParseError("bar-count", start, f"{x}-segment has {bars} bars but bracket depth {opens}")
        if closes != opens:
            raise CsdParseError("bracket-balance", i, f"{x}-segment opens {opens} brackets but closes {closes}")
        segs.append((x, opens, start))
    if not segs:
        raise CsdParseError("empty", 0, "the empty string is not in CSD")
    rank = {x: j for j, x in enumerate(CORE)}
    for (x, _, _), (y, _, pos) in zip(segs, segs[1:]):
        if rank[y] < rank[x]:
            raise CsdParseError("segment-order", pos, f"{y}-segment after {x}-segment")
    groups = {x: [k for y, k, _ in segs if y == x] for x in CORE}
    for x in CORE:
        if not groups[x]:
            raise CsdParseError("segment-order", len(w), f"no {x}-segment")
    if len(groups["a"]) != len(groups["c"]):
        raise CsdParseError("count-mismatch", len(w), f"{len(groups['a'])} a-segments but {len(groups['c'])} c-segments")
    if len(groups["b"]) != len(groups["d"]):
        raise CsdParseError("count-mismatch", len(w), f"{len(groups['b'])} b-segments but {len(groups['d'])} d-segments")
    return CsdDescriptor(len(groups["a"]), len(groups["b"]), groups["a"], groups["b"], groups["c"], groups["d"])


def in_csd_strings(w: Sequence[str]) -> bool:
    try:
        parse_csd_string(w)
        return True
    except CsdParseError:
        return False


# --- graphs ----------------------------------------------------------------

@dataclass(frozen=True)
class CsdGraph:
    graph: SGraph
    blocks: Tuple[int, ...]  # block id (1-based) of graph.edges[i]
    descriptor: Optional[CsdDescriptor] = None

    @property
    def block_count(self) -> int:
        return len(set(self.blocks))

    def block_of(self, e: int) -> int:
        if not 0 <= e < len(self.blocks):
            raise CsdError(f"edge index {e} is not an edge of this graph")
        return self.blocks[e]

    def edges_of_block(self, b: int) -> List[int]:
        return [i for i, x in enumerate(self.blocks) if x == b]


def descriptor_to_graph(d: CsdDescriptor) -> CsdGraph:
    """Blocks chained through their v node; the rt source sits on u of block 1."""
    edges: List[Tuple[int, int, str, int]] = []
    counter = [0]

    def fresh():
        counter[0] += 1
        return counter[0] - 1

    def chain(start, label, length, block):
        cur = start
        for _ in range(length):
            nxt = fresh()
            edges.append((cur, nxt, label, block))
            cur = nxt

    u = fresh()
    root = u
    block = 0
    for x, y in (("a", "c"), ("b", "d")):
        for kx, ky in zip(d.k(x), d.k(y)):
            block += 1
            w, v = fresh(), fresh()
            edges.append((u, w, x, block))
            edges.append((u, v, y, block))
            chain(u, BAR_OF[x], kx, block)
            chain(v, BAR_OF[y], ky, block)
            u = v
    edges.sort()
    g = SGraph(range(counter[0]), [(a, b, l) for a, b, l, _ in edges], {"rt": root})
    return CsdGraph(g, tuple(blk for _, _, _, blk in edges), d)


def csd_pair(d: CsdDescriptor) -> Tuple[Tuple[str, ...], CsdGraph]:
    return descriptor_to_string(d), descriptor_to_graph(d)


def edges_equivalent(G: CsdGraph, e: int, f: int) -> bool:
    return G.block_of(e) == G.block_of(f)


def edge_count(g: SGraph, label: str) -> int:
    return sum(1 for _, _, lab in g.edges if lab == label)


def validate_csd_graph(g: SGraph) -> Tuple[CsdDescriptor, Tuple[int, ...]]:
    """Recover descriptor and blocks from the graph alone, checking every structural rule."""
    out_edges: Dict[int, List[Tuple[int, str, int]]] = {n: [] for n in g.nodes}
    indeg: Dict[int, int] = {n: 0 for n in g.nodes}
    for i, (u, v, lab) in enumerate(g.edges):
        out_edges[u].append((v, lab, i))
        indeg[v] += 1
    if set(g.sources) != {"rt"}:
        raise CsdError(f"expected exactly the source rt, got {sorted(g.sources)}")
    blocks: Dict[int, int] = {}

    def follow_chain(start, label, block) -> int:
        length, cur = 0, start
        while True:
            nxt = [(v, i) for v, lab, i in out_edges[cur] if lab == label]
            if not nxt:
                return length
            if len(nxt) > 1:
                raise CsdError(f"node {cur} has {len(nxt)} outgoing {label} edges")
            v, i = nxt[0]
            if indeg[v] != 1 or any(lab != label for _, lab, _ in out_edges[v]):
                raise CsdError(f"{label}-chain node {v} has foreign incidences")
            blocks[i] = block
            length += 1
            cur = v

    u = g.sources["rt"]
    if indeg[u] != 0:
        raise CsdError("the rt node has incoming edges")
    ks: Dict[str, List[int]] = {x: [] for x in CORE}
    block = 0
    phase = 0
    while True:
        # the previous block's bar chain may also start here; it is already assigned
        labels = sorted(lab for _, lab, i in out_edges[u] if i not in blocks)
        cores = [lab for lab in labels if lab in CORE]
        if not cores:
            if labels:
                raise CsdError(f"node {u} ends the block chain but has edges {labels}")
            break
        pair = ("a", "c") if "a" in cores else ("b", "d")
        if pair == ("a", "c") and phase == 1:
            raise CsdError("a-block after a b-block")
        phase = 0 if pair == ("a", "c") else 1
        x, y = pair
        expect = sorted([x, y] + [BAR_OF[x]] * labels.count(BAR_OF[x]))
        if labels != expect or len([l for l in labels if l == BAR_OF[x]]) > 1:
            raise CsdError(f"block at node {u} has out-edges {labels}")
        block += 1
        (w, _, iw), = [(v, lab, i) for v, lab, i in out_edges[u] if lab == x]
        (v, _, iv), = [(v, lab, i) for v, lab, i in out_edges[u] if lab == y]
        if out_edges[w] or indeg[w] != 1:
            raise CsdError(f"target of the {x}-edge of block {block} is not a fresh leaf")
        if indeg[v] != 1:
            raise CsdError(f"v node of block {block} has extra incoming edges")
        blocks[iw] = blocks[iv] = block
        ks[x].append(follow_chain(u, BAR_OF[x], block))
        ks[y].append(follow_chain(v, BAR_OF[y], block))
        u = v
    if len(blocks) != len(g.edges):
        raise CsdError(f"{len(g.edges) - len(blocks)} edges belong to no block")
    d = CsdDescriptor(len(ks["a"]), len(ks["b"]), ks["a"], ks["b"], ks["c"], ks["d"])
    return d, tuple(blocks[i] for i in range(len(g.edges)))


# --- distant witness pairs -------------------------------------------------

def witness_parameters(k: int, l: int) -> Dict[str, int]:
    if k < 1 or l < 1:
        raise CsdError("k and l must be at least 1")
    r = s = 3 * l + k + 1
    return {"r": r, "s": s, "q_a": (2 * l + 1) * s, "q_c": (2 * l + k + 1) * s}


def witness_descriptor(k: int, l: int) -> CsdDescriptor:
    p = witness_parameters(k, l)
    r, s = p["r"], p["s"]
    return CsdDescriptor(r, r, (s,) * r, (s,) * r, (s,) * r, (s,) * r)


def witness_pair(k: int, l: int) -> Tuple[Tuple[str, ...], CsdGraph]:
    return csd_pair(witness_descriptor(k, l))


# --- builtin grammars ------------------------------------------------------

def fixture_text(name: str) -> str:
    return resources.files("hrcsd.fixtures").joinpath(name).read_text(encoding="utf-8")


def builtin_csd0_grammar() -> Tuple[LmCftg, Lth]:
    return parse_grammar(fixture_text("csd0.grammar")), parse_hom(fixture_text("csd0.hom"), NAMES)


def builtin_csd_tag() -> Tuple[TagGrammar, Lth]:
    return parse_tag(fixture_text("csdtag.tag")), parse_hom(fixture_text("csdtag.hom"), NAMES)


BUILTINS = {"builtin:csd0": builtin_csd0_grammar, "builtin:csdtag": builtin_csd_tag}


def load_grammar(spec: str):
    """A builtin name or a grammar file path; the homomorphism is read from the
    sibling file with suffix .hom.  Returns (grammar, homomorphism)."""
    if spec in BUILTINS:
        return BUILTINS[spec]()
    path = Path(spec)
    text = path.read_text(encoding="utf-8")
    G = parse_tag(text) if path.suffix == ".tag" else parse_grammar(text)
    hom = path.with_suffix(".hom")
    return G, parse_hom(hom.read_text(encoding="utf-8")) if hom.exists() else None


def fig3_tree() -> Tree:
    return parse_tree(fixture_text("fig3.tree").strip())


def csd0_derivation(G: LmCftg, n: int, m: int) -> Derivation:
    """The derivation of a^n b^m c^n d^m in the builtin CSD_0 grammar."""
    if n < 1 or m < 1:
        raise CsdError("n and m must be at least 1")
    idx = {str(r): i for i, r in enumerate(G.rules)}
    r_s, r_a, r_ab, r_b, r_end = (idx[k] for k in (
        "S -> *1(a,A(c))", "A -> *1(a,A(*0(X,c)))", "A -> B(X)", "B -> *1(b,B(*0(X,d)))", "B -> *0(b!,*0(X,d))"))
    meta = Tree(r_end)
    for _ in range(m - 1):
        meta = Tree(r_b, [meta])
    meta = Tree(r_ab, [meta])
    for _ in range(n - 1):
        meta = Tree(r_a, [meta])
    return Derivation(G, Tree(r_s, [meta]))


def _chain(x: str, k: int) -> Tree:
    t = Tree("nil" + x)
    for _ in range(k):
        t = Tree("step" + x, [t])
    return t


def tag_derivation(d: CsdDescriptor) -> Tree:
    """The derivation tree of the builtin CSD TAG for descriptor ``d``."""
    nxt = Tree("end")
    for i in reversed(range(d.m)):
        name = "gamma1" if i == 0 else "gamma"
        nxt = Tree(name, [_chain("b", d.kb[i]), nxt, _chain("d", d.kd[i])])
    for i in reversed(range(d.n)):
        name = "alpha" if i == 0 else "beta"
        nxt = Tree(name, [_chain("a", d.ka[i]), nxt, _chain("c", d.kc[i])])
    return nxt
