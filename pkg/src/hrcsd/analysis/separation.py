"""Separations, asynchronous splits and the inductive x/y bounds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from ..sgraph import SGraph
from ..trees import Context, Lth, Position, Tree, cfyield, context_at, count_tokens
from .profiles import graphof, runs
from .report import FAIL, INAPPLICABLE, PASS, CheckResult

SEP_PAIRS = (("a", "c"), ("c", "a"), ("b", "d"), ("d", "b"))


def bar(x: str) -> str:
    return x + "'"


@dataclass(frozen=True)
class Separation:
    """t = C_x[C_0[t_y]] with C_0 spanning from ``top`` down to ``bottom``."""
    tree: Tree
    top: Position
    bottom: Position

    @property
    def C_x(self) -> Context:
        return context_at(self.tree, (), self.top)

    @property
    def C_0(self) -> Context:
        return context_at(self.tree, self.top, self.bottom)

    @property
    def t_y(self) -> Tree:
        return self.tree.at(self.bottom)

    @property
    def t_0(self) -> Tree:
        return self.tree.at(self.top)

    def size(self) -> int:
        return self.tree.at(self.top).size() - self.tree.at(self.bottom).size()

    def key(self):
        return (self.size(), self.bottom, self.top)


class TreeCounts:
    """Per-position token counts of subtrees, for O(1) context counts."""

    def __init__(self, t: Tree, tokens):
        self.tree = t
        self.tokens = tokens
        self.yields: Dict[Position, Tuple[str, ...]] = {}
        self._fill(t, ())

    def _fill(self, node: Tree, pos: Position) -> Tuple[str, ...]:
        if node.children:
            w: Tuple[str, ...] = ()
            for i, c in enumerate(node.children):
                w += self._fill(c, pos + (i,))
        else:
            w = cfyield(node, self.tokens)
        self.yields[pos] = w
        return w

    def count(self, pos: Position, z: str) -> int:
        return count_tokens(self.yields[pos], z)


def is_separation(t: Tree, top: Position, bottom: Position, x: str, y: str, l: int, tokens) -> bool:
    """Re-check the three defining constraints directly from the yields."""
    if bottom[: len(top)] != top:
        return False
    ty = cfyield(t.at(bottom), tokens)
    cx = cfyield(context_at(t, (), top).tree, tokens)
    c0 = cfyield(context_at(t, top, bottom).tree, tokens)
    return count_tokens(ty, x) == 0 and count_tokens(cx, y) == 0 and count_tokens(c0, x) <= l


def all_separations(t: Tree, x: str, y: str, l: int, tokens) -> List[Separation]:
    """Every x,y,l-separation, ordered by C_0 node count, then bottom path, then top path."""
    tc = TreeCounts(t, tokens)
    total_y = tc.count((), y)
    positions = list(t.positions())
    out = []
    for top in positions:
        if total_y - tc.count(top, y) != 0:
            continue
        x_top = tc.count(top, x)
        for bottom in positions:
            if bottom[: len(top)] != top:
                continue
            x_bot = tc.count(bottom, x)
            if x_bot == 0 and x_top - x_bot <= l:
                out.append(Separation(t, top, bottom))
    out.sort(key=Separation.key)
    return out


def find_separation(t: Tree, pair: Tuple[str, str], l: int, tokens) -> Optional[Separation]:
    """A minimal x,y,l-separation (fewest C_0 nodes; ties by leftmost hole path), or None."""
    seps = all_separations(t, pair[0], pair[1], l, tokens)
    return seps[0] if seps else None


def minimal_separations(t: Tree, pair: Tuple[str, str], l: int, tokens) -> List[Separation]:
    seps = all_separations(t, pair[0], pair[1], l, tokens)
    if not seps:
        return []
    best = seps[0].size()
    return [s for s in seps if s.size() == best]


# --- asynchronous splits ---------------------------------------------------

@dataclass(frozen=True)
class Split:
    tree: Tree
    position: Position

    @property
    def C(self) -> Context:
        return context_at(self.tree, (), self.position)

    @property
    def sub(self) -> Tree:
        return self.tree.at(self.position)


class SubtreeGraphs:
    """Cache of graphof(t') for the subtrees of one tree."""

    def __init__(self, t: Tree, h: Lth, names=None):
        self.t, self.h, self.names = t, h, names
        self._cache: Dict[Position, SGraph] = {}

    def __call__(self, pos: Position) -> SGraph:
        g = self._cache.get(pos)
        if g is None:
            g = graphof(self.t.at(pos), self.h, self.names)
            self._cache[pos] = g
        return g

    def edges(self, pos: Position, label: str) -> int:
        return self(pos).label_counts().get(label, 0)


def async_bounds(t: Tree, x: str, y: str, l: int, tokens) -> Tuple[int, int]:
    """(lower bound on e_y'(t'), upper bound on e_x'(t')) of an asynchronous split."""
    w = cfyield(t, tokens)
    n_x = count_tokens(w, x)
    m_y = max(runs(w, bar(y)), default=0)
    m_x = max(runs(w, bar(x)), default=0)
    return count_tokens(w, bar(y)) - n_x * l - m_y, n_x * l + m_x * (l + 1)


def is_async_split(t: Tree, pos: Position, h: Lth, x: str, y: str, l: int, tokens, names=None,
                   graphs: Optional[SubtreeGraphs] = None) -> bool:
    lo, hi = async_bounds(t, x, y, l, tokens)
    g = graphs(pos) if graphs is not None else graphof(t.at(pos), h, names)
    lab = g.label_counts()
    return lab.get(bar(y), 0) >= lo and lab.get(bar(x), 0) <= hi


def check_asynchronous(t: Tree, h: Lth, pair: Tuple[str, str], l: int, tokens, names=None,
                       graphs: Optional[SubtreeGraphs] = None) -> Optional[Split]:
    """The split with the smallest t' (ties by position) meeting both inequalities."""
    x, y = pair
    graphs = graphs or SubtreeGraphs(t, h, names)
    for pos in sorted(t.positions(), key=lambda p: (t.at(p).size(), p)):
        if is_async_split(t, pos, h, x, y, l, tokens, graphs=graphs):
            return Split(t, pos)
    return None


# --- inductive bounds ------------------------------------------------------

def check_inductive_bounds(t: Tree, h: Lth, pair: Tuple[str, str], l0: int, tokens, names=None,
                           case: str = "-", graphs: Optional[SubtreeGraphs] = None) -> CheckResult:
    """x bound on every l0-separation; y bound on at least one minimal separation."""
    x, y = pair
    seps = all_separations(t, x, y, l0, tokens)
    tag = f"{x}/{y}"
    if not seps:
        return CheckResult(INAPPLICABLE, "bounds", case, f"{tag}: not {l0}-separated")
    graphs = graphs or SubtreeGraphs(t, h, names)
    w = cfyield(t, tokens)
    n_x = count_tokens(w, x)
    n_yb = count_tokens(w, bar(y))
    r_yb = (runs(w, bar(y)) or [0])[-1]
    for s in seps:
        w0 = cfyield(s.t_0, tokens)
        e_xb = graphs.edges(s.top, bar(x))
        if e_xb > count_tokens(w0, bar(x)) + n_x * l0:
            return CheckResult(FAIL, "bounds", case,
                               f"{tag}: x bound fails at top={list(s.top)} bottom={list(s.bottom)}: "
                               f"e={e_xb} > {count_tokens(w0, bar(x))}+{n_x}*{l0}")
    best = seps[0].size()
    lower = n_yb - n_x * l0 - r_yb
    for s in seps:
        if s.size() != best:
            break
        if graphs.edges(s.top, bar(y)) >= lower:
            return CheckResult(PASS, "bounds", case,
                               f"{tag}: x bound on {len(seps)} separations, y bound at top={list(s.top)} "
                               f"(e={graphs.edges(s.top, bar(y))} >= {lower})")
    return CheckResult(FAIL, "bounds", case, f"{tag}: no minimal separation meets the y bound {lower}")


def check_separation_chain(t: Tree, h: Lth, l0: int, tokens, names=None, case: str = "-") -> List[CheckResult]:
    """Run the separation checks for every pair in SEP_PAIRS on one tree."""
    graphs = SubtreeGraphs(t, h, names)
    out = []
    separated = []
    for pair in SEP_PAIRS:
        sep = find_separation(t, pair, l0, tokens)
        if sep is None:
            continue
        x, y = pair
        if not is_separation(t, sep.top, sep.bottom, x, y, l0, tokens):
            out.append(CheckResult(FAIL, "separation", case, f"{x}/{y}: returned separation does not re-check"))
            continue
        separated.append(pair)
        split = check_asynchronous(t, h, pair, l0, tokens, graphs=graphs)
        if split is None:
            out.append(CheckResult(FAIL, "lemma8", case, f"{x}/{y}: separated but no asynchronous split"))
        else:
            out.append(CheckResult(PASS, "lemma8", case, f"{x}/{y}: split at {list(split.position)}"))
        out.append(check_inductive_bounds(t, h, pair, l0, tokens, names, case, graphs))
    if separated:
        out.insert(0, CheckResult(PASS, "lemma9", case, "separated for " + ",".join(f"{x}/{y}" for x, y in separated)))
    else:
        out.insert(0, CheckResult(FAIL, "lemma9", case, f"no pair in Sep gives an {l0}-separation"))
    return out
