"""Tree-adjoining grammars evaluated through their derivation trees.

An elementary tree is written in the ordinary tree syntax with annotated
node labels:

* ``@anchor(w)``  a lexical leaf with token ``w``
* ``Cat@subst``   a substitution site of category ``Cat``
* ``Cat@adj``     a node of category ``Cat`` that is an adjunction site
* ``Cat@foot``    the foot node of an auxiliary tree

Substitution and adjunction sites are the operation slots of the tree, in
pre-order; a derivation tree node labelled with the tree's name has one child
per slot.  Every slot must be filled: optional adjunction is expressed with a
trivial auxiliary tree ``Cat(Cat@foot)``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..trees import Position, RankedSignature, Tree, TreeError, cfyield, parse_tree, to_text


class TagError(ValueError):
    pass


@dataclass(frozen=True)
class TagNode:
    """A node label in an elementary tree."""
    cat: str
    kind: str = "plain"  # plain | anchor | subst | adj | foot

    def __str__(self):
        if self.kind == "anchor":
            return f"@anchor({self.cat})"
        return self.cat if self.kind == "plain" else f"{self.cat}@{self.kind}"


@dataclass(frozen=True)
class Slot:
    kind: str       # subst | adj
    cat: str
    path: Position


class ElementaryTree:
    def __init__(self, name: str, tree: Tree, auxiliary: bool):
        self.name = name
        self.tree = tree
        self.auxiliary = auxiliary
        self.slots: List[Slot] = []
        feet = []
        for pos, node in tree.subtrees():
            lab: TagNode = node.symbol
            if lab.kind in ("subst", "adj"):
                self.slots.append(Slot(lab.kind, lab.cat, pos))
            if lab.kind == "foot":
                feet.append(pos)
            if lab.kind in ("anchor", "subst", "foot") and node.children:
                raise TagError(f"{name}: {lab} must be a leaf")
        self.root_cat = tree.symbol.cat
        if auxiliary:
            if len(feet) != 1:
                raise TagError(f"auxiliary tree {name} needs exactly one foot, has {len(feet)}")
            if tree.at(feet[0]).symbol.cat != self.root_cat:
                raise TagError(f"auxiliary tree {name}: foot category differs from root category {self.root_cat}")
            self.foot: Optional[Position] = feet[0]
        else:
            if feet:
                raise TagError(f"initial tree {name} has a foot node")
            self.foot = None

    @property
    def rank(self) -> int:
        return len(self.slots)

    def __repr__(self):
        kind = "auxiliary" if self.auxiliary else "initial"
        return f"{kind} {self.name}: {to_text(self.tree)}"


class TagGrammar:
    def __init__(self, trees: Sequence[ElementaryTree], start: Optional[str] = None):
        self.trees: Dict[str, ElementaryTree] = {}
        for e in trees:
            if e.name in self.trees:
                raise TagError(f"duplicate elementary tree {e.name}")
            self.trees[e.name] = e
        self.start = start
        cats = {n.symbol.cat for e in trees for _, n in e.tree.subtrees() if n.symbol.kind != "anchor"}
        toks = {n.symbol.cat for e in trees for _, n in e.tree.subtrees() if n.symbol.kind == "anchor"}
        if cats & toks:
            raise TagError(f"category names clash with tokens: {sorted(cats & toks)}")
        self.token_set = frozenset(toks)

    def signature(self) -> RankedSignature:
        return RankedSignature({name: e.rank for name, e in self.trees.items()})

    def constants(self) -> List[str]:
        return [n for n, e in self.trees.items() if e.rank == 0]

    def constant_yield(self, name: str) -> Tuple[str, ...]:
        e = self.trees[name]
        return tuple(n.symbol.cat for _, n in e.tree.subtrees() if n.symbol.kind == "anchor")

    def yield_of(self, d: Tree) -> Tuple[str, ...]:
        return tag_yield(self, d)

    def check_derivation(self, d: Tree) -> None:
        if self.start is not None and d.symbol != self.start:
            e = self.trees.get(d.symbol)
            if e is None or e.auxiliary:
                raise TagError(f"derivation must start with an initial tree, got {d.symbol!r}")
        tag_realize(self, d)


def tag_realize(T: TagGrammar, d: Tree, trace: bool = False):
    """Perform all substitutions and adjunctions named by the derivation tree ``d``.

    Derived-tree leaves that are anchors carry their token as symbol; other
    nodes carry their category.  With ``trace`` also return, for each leaf
    position of the derived tree, the derivation-tree position owning it.
    """
    def build(dnode: Tree, dpos: Position, foot_filler: Optional[Tuple[Tree, Dict]]) -> Tuple[Tree, Dict]:
        e = T.trees.get(dnode.symbol)
        if e is None:
            raise TagError(f"unknown elementary tree {dnode.symbol!r} at derivation position {dpos}")
        if len(dnode.children) != e.rank:
            raise TagError(f"{e.name} at {dpos} has {len(dnode.children)} children but {e.rank} slots")
        slot_of = {s.path: i for i, s in enumerate(e.slots)}

        def walk(node: Tree, epos: Position) -> Tuple[Tree, Dict]:
            lab: TagNode = node.symbol
            if lab.kind == "foot":
                return foot_filler
            if lab.kind == "anchor":
                return Tree(lab.cat), {(): dpos}
            if lab.kind == "subst":
                i = slot_of[epos]
                child = dnode.children[i]
                ce = T.trees.get(child.symbol)
                if ce is None or ce.auxiliary or ce.root_cat != lab.cat:
                    raise TagError(f"unresolved substitution site {lab.cat} in {e.name} at derivation position {dpos}: "
                                   f"{child.symbol!r} is not an initial tree of category {lab.cat}")
                return build(child, dpos + (i,), None)
            kids, own = [], {}
            for j, c in enumerate(node.children):
                kt, ko = walk(c, epos + (j,))
                kids.append(kt)
                for p, o in ko.items():
                    own[(j,) + p] = o
            here = (Tree(lab.cat, kids), own)
            if lab.kind == "adj":
                i = slot_of[epos]
                child = dnode.children[i]
                ce = T.trees.get(child.symbol)
                if ce is None or not ce.auxiliary:
                    raise TagError(f"adjunction of non-auxiliary {child.symbol!r} at {lab.cat} in {e.name}")
                if ce.root_cat != lab.cat:
                    raise TagError(f"adjunction of {ce.name} (category {ce.root_cat}) at a {lab.cat} site")
                return build(child, dpos + (i,), here)
            return here

        return walk(e.tree, ())

    root = T.trees.get(d.symbol)
    if root is not None and root.auxiliary:
        raise TagError(f"derivation root {d.symbol} is an auxiliary tree")
    tree, own = build(d, (), None)
    if trace:
        return tree, own
    return tree


def tag_yield(T: TagGrammar, d: Tree) -> Tuple[str, ...]:
    return cfyield(tag_realize(T, d), lambda s: s if s in T.token_set else None)


def derivation_spans(T: TagGrammar, d: Tree) -> Dict[Position, List[int]]:
    """For each derivation-tree position, the yield indices contributed by its subtree."""
    tree, own = tag_realize(T, d, trace=True)
    leaves = [p for p, n in tree.subtrees() if not n.children and n.symbol in T.token_set]
    spans: Dict[Position, List[int]] = {p: [] for p in d.positions()}
    for i, lp in enumerate(leaves):
        owner = own[lp]
        for k in range(len(owner) + 1):
            spans[owner[:k]].append(i)
    return spans


def non_projective_witness(T: TagGrammar, d: Tree) -> Optional[Tuple[Position, List[int]]]:
    """A derivation subtree whose yield is not a contiguous part of the full yield."""
    for pos, idx in sorted(derivation_spans(T, d).items()):
        if idx and idx[-1] - idx[0] + 1 != len(idx):
            return pos, idx
    return None


# --- enumeration -----------------------------------------------------------

def derive_tag(T: TagGrammar, max_height: int, roots: Optional[Sequence[str]] = None) -> List[Tree]:
    """Well-typed derivation trees up to a height bound, rooted at initial trees."""
    def options(kind: str, cat: str, h: int) -> List[Tree]:
        key = (kind, cat, h)
        if key in memo:
            return memo[key]
        out = []
        for name, e in T.trees.items():
            if e.root_cat != cat or e.auxiliary != (kind == "adj"):
                continue
            out.extend(expand(name, h))
        memo[key] = out
        return out

    def expand(name: str, h: int) -> List[Tree]:
        e = T.trees[name]
        if h < 1:
            return []
        if e.rank == 0:
            return [Tree(name)]
        pools = [options(s.kind, s.cat, h - 1) for s in e.slots]
        if any(not p for p in pools):
            return []
        return [Tree(name, combo) for combo in itertools.product(*pools)]

    memo: Dict = {}
    names = roots if roots is not None else ([T.start] if T.start else [n for n, e in T.trees.items() if not e.auxiliary])
    out = []
    for n in names:
        out.extend(expand(n, max_height))
    return out


# --- text format -----------------------------------------------------------

_ENTRY = re.compile(r"^(initial|auxiliary)\s+(\S+)\s*:\s*(.+)$")


def _convert(t: Tree) -> Tree:
    sym = t.symbol
    if sym == "@anchor":
        if len(t.children) != 1 or t.children[0].children:
            raise TagError("@anchor takes exactly one token")
        return Tree(TagNode(t.children[0].symbol, "anchor"))
    if "@" in sym:
        cat, kind = sym.split("@", 1)
        if kind not in ("subst", "adj", "foot"):
            raise TagError(f"unknown annotation @{kind}")
        if kind == "subst" and t.children:
            raise TagError(f"{sym} must be a leaf")
        return Tree(TagNode(cat, kind), [_convert(c) for c in t.children])
    return Tree(TagNode(sym), [_convert(c) for c in t.children])


def parse_tag(text: str) -> TagGrammar:
    """``initial NAME: TREE`` / ``auxiliary NAME: TREE`` lines plus an optional ``start NAME``."""
    trees, start = [], None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("start "):
            start = line.split()[1]
            continue
        m = _ENTRY.match(line)
        if not m:
            raise TagError(f"line {lineno}: cannot parse {line!r}")
        try:
            tree = _convert(parse_tree(m.group(3)))
        except TreeError as exc:
            raise TagError(f"line {lineno}: {exc}") from exc
        trees.append(ElementaryTree(m.group(2), tree, m.group(1) == "auxiliary"))
    return TagGrammar(trees, start)


def tag_to_text(T: TagGrammar) -> str:
    lines = [f"start {T.start}"] if T.start else []
    for e in T.trees.values():
        lines.append(f"{'auxiliary' if e.auxiliary else 'initial'} {e.name}: {to_text(e.tree)}")
    return "\n".join(lines) + "\n"
