"""Ranked trees, one-hole contexts, projective yields and linear tree homomorphisms."""
from __future__ import annotations

import re
from typing import Callable, Dict, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple

Position = Tuple[int, ...]

HOLE = "X"


class TreeError(ValueError):
    pass


class Tree:
    """Immutable ranked tree; ``symbol`` is any hashable, children a tuple of trees."""

    __slots__ = ("symbol", "children", "_hash", "_height", "_size")

    def __init__(self, symbol: Hashable, children: Sequence["Tree"] = ()):
        self.symbol = symbol
        self.children = tuple(children)
        self._hash = None
        self._height = None
        self._size = None

    @property
    def rank(self) -> int:
        return len(self.children)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Tree) or hash(self) != hash(other):
            return False
        return self.symbol == other.symbol and self.children == other.children

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.symbol, self.children))
        return self._hash

    def __repr__(self):
        return f"Tree({to_text(self)})"

    def __str__(self):
        return to_text(self)

    def height(self) -> int:
        if self._height is None:
            self._height = 1 + max((c.height() for c in self.children), default=0)
        return self._height

    def size(self) -> int:
        if self._size is None:
            self._size = 1 + sum(c.size() for c in self.children)
        return self._size

    def at(self, pos: Position) -> "Tree":
        node = self
        for i in pos:
            node = node.children[i]
        return node

    def positions(self) -> Iterator[Position]:
        """Pre-order positions (document order)."""
        stack: List[Tuple[Position, Tree]] = [((), self)]
        while stack:
            pos, node = stack.pop()
            yield pos
            for i in range(len(node.children) - 1, -1, -1):
                stack.append((pos + (i,), node.children[i]))

    def subtrees(self) -> Iterator[Tuple[Position, "Tree"]]:
        for pos in self.positions():
            yield pos, self.at(pos)

    def replace_at(self, pos: Position, new: "Tree") -> "Tree":
        if not pos:
            return new
        i = pos[0]
        kids = list(self.children)
        kids[i] = kids[i].replace_at(pos[1:], new)
        return Tree(self.symbol, kids)

    def symbols(self) -> Iterator[Hashable]:
        for _, node in self.subtrees():
            yield node.symbol


def leaf(symbol) -> Tree:
    return Tree(symbol)


def height(t: Tree) -> int:
    return t.height()


# --- contexts --------------------------------------------------------------

class Context:
    """A tree with exactly one occurrence of the hole symbol ``X``."""

    __slots__ = ("tree", "hole")

    def __init__(self, tree: Tree, hole: Optional[Position] = None):
        if hole is None:
            holes = [p for p, n in tree.subtrees() if n.symbol == HOLE and not n.children]
            if len(holes) != 1:
                raise TreeError(f"a context needs exactly one hole, found {len(holes)}")
            hole = holes[0]
        elif tree.at(hole).symbol != HOLE:
            raise TreeError("hole path does not point at X")
        self.tree = tree
        self.hole = tuple(hole)

    @classmethod
    def trivial(cls) -> "Context":
        return cls(Tree(HOLE), ())

    def is_trivial(self) -> bool:
        return self.hole == ()

    def height(self) -> int:
        return self.tree.height()

    def size(self) -> int:
        """Number of non-hole nodes."""
        return self.tree.size() - 1

    def __eq__(self, other):
        return isinstance(other, Context) and self.tree == other.tree

    def __hash__(self):
        return hash(("ctx", self.tree))

    def __repr__(self):
        return f"Context({to_text(self.tree)})"

    def __str__(self):
        return to_text(self.tree)


def _contains_hole(t: Tree) -> bool:
    return any(n.symbol == HOLE and not n.children for _, n in t.subtrees())


def substitute(C: Context, t: Tree) -> Tree:
    """C[t]."""
    if _contains_hole(t):
        raise TreeError("cannot plug a tree that contains X")
    return C.tree.replace_at(C.hole, t)


def compose(C1: Context, C2: Context) -> Context:
    """The context C1[C2]."""
    return Context(C1.tree.replace_at(C1.hole, C2.tree), C1.hole + C2.hole)


def context_at(t: Tree, top: Position, bottom: Position) -> Context:
    """The context spanning from ``top`` down to (excluding) ``bottom``."""
    if bottom[: len(top)] != top:
        raise TreeError(f"{bottom} is not below {top}")
    sub = t.at(top)
    rel = bottom[len(top):]
    return Context(sub.replace_at(rel, Tree(HOLE)), rel)


# --- yields ----------------------------------------------------------------

TokenMap = Mapping[Hashable, Optional[str]]


def _token_of(symbol, tokens) -> Optional[str]:
    if tokens is None:
        return symbol
    if callable(tokens):
        return tokens(symbol)
    return tokens.get(symbol)


def cfyield(t: Tree, tokens=None) -> Tuple[str, ...]:
    """Left-to-right concatenation of leaf tokens.

    ``tokens`` maps leaf symbols to a token; unmapped symbols and None are
    epsilon. Without a map every leaf symbol is its own token. The hole
    contributes nothing.
    """
    out: List[str] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if node.children:
            stack.extend(reversed(node.children))
        elif node.symbol != HOLE:
            tok = _token_of(node.symbol, tokens)
            if tok is not None:
                out.append(tok)
    return tuple(out)


def context_yields(C: Context, tokens=None) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """(left(C), right(C)): tokens before and after the hole."""
    left: List[str] = []
    right: List[str] = []
    seen_hole = False
    stack = [C.tree]
    while stack:
        node = stack.pop()
        if node.children:
            stack.extend(reversed(node.children))
            continue
        if node.symbol == HOLE:
            seen_hole = True
            continue
        tok = _token_of(node.symbol, tokens)
        if tok is not None:
            (right if seen_hole else left).append(tok)
    return tuple(left), tuple(right)


def count_tokens(w: Sequence[str], a: str) -> int:
    return sum(1 for x in w if x == a)


# --- ranked signatures -----------------------------------------------------

class RankedSignature(dict):
    """symbol -> rank."""

    def check(self, t: Tree, extra: Optional[Mapping] = None):
        for pos, node in t.subtrees():
            if extra and node.symbol in extra:
                rank = extra[node.symbol]
            elif node.symbol in self:
                rank = self[node.symbol]
            else:
                raise TreeError(f"symbol {node.symbol!r} at {pos} not in signature")
            if rank != len(node.children):
                raise TreeError(
                    f"symbol {node.symbol!r} at {pos} has {len(node.children)} children, rank is {rank}"
                )

    def constants(self):
        return [s for s, r in self.items() if r == 0]


# --- text format -----------------------------------------------------------

_TOKEN = re.compile(r"\s*([(),]|[^\s(),]+)")


def _lex(text: str) -> List[str]:
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise TreeError(f"cannot tokenize at {pos}: {text[pos:pos + 10]!r}")
        toks.append(m.group(1))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


def parse_tree(text: str, symbol: Callable[[str], Hashable] = str) -> Tree:
    """Parse prefix notation ``f(t1,...,tn)``; constants are bare symbols."""
    toks = _lex(text)
    if not toks:
        raise TreeError("empty tree")
    t, i = _parse(toks, 0, symbol)
    if i != len(toks):
        raise TreeError(f"trailing input after tree: {' '.join(toks[i:])}")
    return t


def _parse(toks, i, symbol):
    head = toks[i]
    if head in "(),":
        raise TreeError(f"expected a symbol, got {head!r}")
    i += 1
    if i < len(toks) and toks[i] == "(":
        i += 1
        kids = []
        while True:
            kid, i = _parse(toks, i, symbol)
            kids.append(kid)
            if i >= len(toks):
                raise TreeError("unbalanced parentheses")
            if toks[i] == ",":
                i += 1
                continue
            if toks[i] == ")":
                i += 1
                break
            raise TreeError(f"unexpected {toks[i]!r}")
        return Tree(symbol(head), kids), i
    return Tree(symbol(head)), i


def parse_context(text: str) -> Context:
    return Context(parse_tree(text))


def to_text(t: Tree) -> str:
    def sym(s):
        return s if isinstance(s, str) else str(s)

    parts: List[str] = []

    def go(n: Tree):
        parts.append(sym(n.symbol))
        if n.children:
            parts.append("(")
            for j, c in enumerate(n.children):
                if j:
                    parts.append(",")
                go(c)
            parts.append(")")

    go(t)
    return "".join(parts)


# --- linear tree homomorphisms ---------------------------------------------

class Var:
    """Variable x_i (1-based) inside a homomorphic image."""

    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index

    def __eq__(self, other):
        return isinstance(other, Var) and other.index == self.index

    def __hash__(self):
        return hash(("var", self.index))

    def __repr__(self):
        return f"x{self.index}"

    __str__ = __repr__


class Lth:
    """Linear tree homomorphism: each source symbol maps to a tree with variables x1..xn.

    Every variable is used at most once (deletion allowed, copying not).
    """

    def __init__(self, images: Mapping[Hashable, Tuple[int, Tree]], target_check: Optional[Callable[[Tree], None]] = None):
        self.images: Dict[Hashable, Tuple[int, Tree]] = {}
        self._var_paths: Dict[Hashable, Dict[int, Position]] = {}
        for sym, (rank, image) in images.items():
            paths: Dict[int, Position] = {}
            for pos, node in image.subtrees():
                if isinstance(node.symbol, Var):
                    if node.children:
                        raise TreeError(f"variable with children in image of {sym!r}")
                    i = node.symbol.index
                    if not 1 <= i <= rank:
                        raise TreeError(f"x{i} out of range in image of {sym!r}/{rank}")
                    if i in paths:
                        raise TreeError(f"x{i} used twice in image of {sym!r} (not linear)")
                    paths[i] = pos
            if target_check is not None:
                target_check(image)
            self.images[sym] = (rank, image)
            self._var_paths[sym] = paths

    def rank(self, sym) -> int:
        return self.images[sym][0]

    def image(self, sym) -> Tree:
        return self.images[sym][1]

    def var_path(self, sym, i: int) -> Optional[Position]:
        return self._var_paths[sym].get(i)

    def source_signature(self) -> RankedSignature:
        return RankedSignature({s: r for s, (r, _) in self.images.items()})

    def replace(self, sym, rank: int, image: Tree) -> "Lth":
        new = dict(self.images)
        new[sym] = (rank, image)
        return Lth(new)


class HomImage:
    """Result of ``apply_hom(..., trace=True)``.

    ``root_of`` maps a source-tree position to the position of its image root
    in ``term`` (absent when a deleting ancestor dropped it); ``owner`` maps a
    term position to the source-tree position whose image produced it.
    """

    __slots__ = ("term", "root_of", "owner")

    def __init__(self, term, root_of, owner):
        self.term = term
        self.root_of = root_of
        self.owner = owner

    def term_position(self, pos: Position) -> Optional[Position]:
        return self.root_of.get(pos)


def apply_hom(h: Lth, t: Tree, trace: bool = False):
    """Homomorphic image h(t); with ``trace`` also return position bookkeeping."""
    root_of: Dict[Position, Position] = {}
    owner: Dict[Position, Position] = {}

    def go(node: Tree, src_pos: Position, dst_pos: Optional[Position]) -> Tree:
        if node.symbol not in h.images:
            raise TreeError(f"symbol {node.symbol!r} has no image")
        rank, image = h.images[node.symbol]
        if rank != len(node.children):
            raise TreeError(f"rank mismatch at {src_pos}: {node.symbol!r} has {len(node.children)} children, image rank {rank}")
        paths = h._var_paths[node.symbol]
        kids: Dict[int, Tree] = {}
        for i, child in enumerate(node.children, start=1):
            vp = paths.get(i)
            child_dst = None if (dst_pos is None or vp is None) else dst_pos + vp
            sub = go(child, src_pos + (i - 1,), child_dst)
            if vp is not None:
                kids[i] = sub
        if trace and dst_pos is not None:
            root_of[src_pos] = dst_pos
            for p, n in image.subtrees():
                if not isinstance(n.symbol, Var):
                    owner[dst_pos + p] = src_pos
        return _fill(image, kids)

    result = go(t, (), ())
    if trace:
        return HomImage(result, root_of, owner)
    return result


def _fill(image: Tree, kids: Mapping[int, Tree]) -> Tree:
    if isinstance(image.symbol, Var):
        return kids[image.symbol.index]
    if not image.children:
        return image
    return Tree(image.symbol, [_fill(c, kids) for c in image.children])
