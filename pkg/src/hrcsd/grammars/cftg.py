"""Linear monadic context-free tree grammars: enumeration, membership, pumping."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..trees import (HOLE, Context, Lth, Position, Tree, TreeError, cfyield, compose,
                     context_at, context_yields, parse_tree, substitute, to_text)


class GrammarError(ValueError):
    pass


class PumpingError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: Tree  # for rank-1 lhs the variable is spelled as the hole X

    def nt_occurrences(self, nts: Mapping[str, int]) -> List[Position]:
        return [p for p, n in self.rhs.subtrees() if n.symbol in nts]

    def __str__(self):
        return f"{self.lhs} -> {to_text(self.rhs)}"


class LmCftg:
    """G = (N, Sigma, R, S) with nonterminals of rank at most one.

    ``tokens`` maps each terminal constant to its surface token (None for
    epsilon); symbols missing from the map are epsilon.
    """

    def __init__(self, nonterminals: Mapping[str, int], terminals: Mapping[str, int],
                 rules: Sequence[Rule], start: str, tokens: Optional[Mapping[str, Optional[str]]] = None):
        self.nonterminals = dict(nonterminals)
        self.terminals = dict(terminals)
        self.rules = tuple(rules)
        self.start = start
        if tokens is None:
            tokens = {s: s for s, r in self.terminals.items() if r == 0}
        self.tokens = dict(tokens)
        self._validate()
        self._occ = [r.nt_occurrences(self.nonterminals) for r in self.rules]

    def _validate(self):
        overlap = set(self.nonterminals) & set(self.terminals)
        if overlap:
            raise GrammarError(f"symbols declared both terminal and nonterminal: {sorted(overlap)}")
        for a, r in self.nonterminals.items():
            if r not in (0, 1):
                raise GrammarError(f"nonterminal {a} has rank {r}; only 0 and 1 are allowed")
        if self.nonterminals.get(self.start) != 0:
            raise GrammarError(f"start symbol {self.start!r} must be a rank-0 nonterminal")
        if HOLE in self.terminals or HOLE in self.nonterminals:
            raise GrammarError("X is reserved for the rule variable")
        for rule in self.rules:
            if rule.lhs not in self.nonterminals:
                raise GrammarError(f"rule for undeclared nonterminal {rule.lhs}")
            holes = 0
            for pos, node in rule.rhs.subtrees():
                if node.symbol == HOLE and not node.children:
                    holes += 1
                    continue
                rank = self.nonterminals.get(node.symbol, self.terminals.get(node.symbol))
                if rank is None:
                    raise GrammarError(f"undeclared symbol {node.symbol!r} in rule {rule}")
                if rank != len(node.children):
                    raise GrammarError(f"{node.symbol} used with {len(node.children)} children in rule {rule}")
            if holes != self.nonterminals[rule.lhs]:
                raise GrammarError(f"rule {rule} must use its variable exactly {self.nonterminals[rule.lhs]} time(s)")

    def token(self, sym) -> Optional[str]:
        return self.tokens.get(sym)

    def yield_of(self, t: Tree) -> Tuple[str, ...]:
        return cfyield(t, self.tokens)

    def context_yields(self, C: Context):
        return context_yields(C, self.tokens)

    def rules_for(self, a: str) -> List[int]:
        return [i for i, r in enumerate(self.rules) if r.lhs == a]

    def __repr__(self):
        return f"LmCftg(start={self.start}, |N|={len(self.nonterminals)}, |R|={len(self.rules)})"


# --- meta-derivations -----------------------------------------------------
#
# A meta-derivation is a Tree whose symbols are rule indices; the children of
# a node expand the nonterminal occurrences of that rule's right-hand side in
# pre-order.

@dataclass(frozen=True)
class MetaInfo:
    nonterminal: str
    root: Position
    hole: Optional[Position]


def _build(G: LmCftg, rhs: Tree, metas: List[Tree], path: Position, start: int, infos: Dict[Position, MetaInfo]):
    """Realize an rhs fragment; returns (tree, next meta child index).

    ``infos`` receives per meta-node positions relative to the fragment root.
    """
    sym = rhs.symbol
    if sym == HOLE and not rhs.children:
        return rhs, start
    if sym in G.nonterminals:
        k = start
        meta_path = path + (k,)
        sub_infos: Dict[Position, MetaInfo] = {}
        body = _realize(G, metas[k], meta_path, sub_infos)
        k += 1
        if G.nonterminals[sym] == 0:
            infos.update(sub_infos)
            return body, k
        arg, k = _build(G, rhs.children[0], metas, path, k, infos_arg := {})
        hole = sub_infos[meta_path].hole
        infos.update(sub_infos)
        for mp, inf in infos_arg.items():
            infos[mp] = MetaInfo(inf.nonterminal, hole + inf.root, None if inf.hole is None else hole + inf.hole)
        return body.replace_at(hole, arg), k
    kids = []
    k = start
    for i, c in enumerate(rhs.children):
        sub: Dict[Position, MetaInfo] = {}
        kid, k = _build(G, c, metas, path, k, sub)
        for mp, inf in sub.items():
            infos[mp] = MetaInfo(inf.nonterminal, (i,) + inf.root, None if inf.hole is None else (i,) + inf.hole)
        kids.append(kid)
    return Tree(sym, kids), k


def _realize(G: LmCftg, meta: Tree, path: Position, infos: Dict[Position, MetaInfo]) -> Tree:
    rule = G.rules[meta.symbol]
    body, used = _build(G, rule.rhs, list(meta.children), path, 0, infos)
    if used != len(meta.children):
        raise GrammarError(f"meta node {path} has {len(meta.children)} children, rule uses {used}")
    hole = None
    if G.nonterminals[rule.lhs] == 1:
        hole = next(p for p, n in body.subtrees() if n.symbol == HOLE and not n.children)
    infos[path] = MetaInfo(rule.lhs, (), hole)
    return body


def realize(G: LmCftg, meta: Tree) -> Tuple[Tree, Dict[Position, MetaInfo]]:
    """Replay a meta-derivation; returns the derived tree (or context tree) and
    the root/hole position of every meta node in it."""
    infos: Dict[Position, MetaInfo] = {}
    tree = _realize(G, meta, (), infos)
    return tree, infos


class Derivation:
    """A derived tree together with its meta-derivation."""

    def __init__(self, G: LmCftg, meta: Tree, tree: Optional[Tree] = None):
        self.grammar = G
        self.meta = meta
        built, self._infos = realize(G, meta)
        if tree is not None and tree != built:
            raise GrammarError("meta-derivation does not reproduce the tree")
        self.tree = built

    @property
    def nonterminal(self) -> str:
        return self.grammar.rules[self.meta.symbol].lhs

    @property
    def infos(self) -> Dict[Position, MetaInfo]:
        return self._infos

    def yield_(self) -> Tuple[str, ...]:
        return self.grammar.yield_of(self.tree)

    def height(self) -> int:
        return self.tree.height()

    def __repr__(self):
        return f"Derivation({to_text(self.tree)})"


# --- bounded enumeration ---------------------------------------------------

def _token_count(G: LmCftg, t: Tree) -> int:
    return sum(1 for _, n in t.subtrees() if not n.children and n.symbol != HOLE and G.token(n.symbol) is not None)


def derive_bounded(G: LmCftg, max_height: Optional[int] = None, max_yield: Optional[int] = None,
                   height_cap: int = 64, max_rules: Optional[int] = None) -> List[Derivation]:
    """All trees of L(G) within the bounds, each with one meta-derivation.

    ``max_yield`` bounds the number of tokens and ``max_rules`` the number of
    rule applications; with either of them alone, items above ``height_cap``
    are dropped.  Output is ordered by meta-derivation size, then text.
    """
    if max_height is None and max_yield is None and max_rules is None:
        raise ValueError("give max_height, max_yield or max_rules")
    H = max_height if max_height is not None else height_cap
    if H < 1:
        raise ValueError("limit must be at least 1")

    # items[A]: realized tree/context -> (meta, token count)
    items: Dict[str, Dict[Tree, Tree]] = {a: {} for a in G.nonterminals}
    order: Dict[str, List[Tree]] = {a: [] for a in G.nonterminals}
    delta: Dict[str, List[Tree]] = {a: [] for a in G.nonterminals}
    first = True
    while True:
        new: Dict[str, List[Tuple[Tree, Tree]]] = {a: [] for a in G.nonterminals}
        for ri, rule in enumerate(G.rules):
            occ = G._occ[ri]
            occ_nts = [G.rules[ri].rhs.at(p).symbol for p in occ]
            if not occ_nts:
                if not first:
                    continue
                combos: Iterable = [()]
            else:
                pools = [order[a] for a in occ_nts]
                if any(not pool for pool in pools):
                    continue
                combos = itertools.product(*pools)
            for combo in combos:
                if occ_nts and not first and not any(c in delta_set[a] for c, a in zip(combo, occ_nts)):
                    continue
                metas = [items[a][c] for c, a in zip(combo, occ_nts)]
                meta = Tree(ri, metas)
                if max_rules is not None and meta.size() > max_rules:
                    continue
                try:
                    body, _ = _build(G, rule.rhs, metas, (), 0, {})
                except TreeError:
                    continue
                if body.height() > H:
                    continue
                if max_yield is not None and _token_count(G, body) > max_yield:
                    continue
                if body in items[rule.lhs]:
                    continue
                new[rule.lhs].append((body, meta))
        first = False
        added = False
        for a in G.nonterminals:
            fresh = []
            for body, meta in sorted(new[a], key=lambda bm: (bm[1].size(), to_text(bm[0]))):
                if body not in items[a]:
                    items[a][body] = meta
                    order[a].append(body)
                    fresh.append(body)
            delta[a] = fresh
            added = added or bool(fresh)
        delta_set = {a: set(v) for a, v in delta.items()}
        if not added:
            break
    out = [Derivation(G, items[G.start][t]) for t in order[G.start]]
    out.sort(key=lambda d: (d.meta.size(), to_text(d.tree)))
    return out


# --- membership ------------------------------------------------------------

def _match(G: LmCftg, pat: Tree, t: Tree, pos: Position, facts0, facts1) -> List[Optional[Position]]:
    """Ways to match a rhs fragment at ``pos``; each result is the hole position (or None)."""
    sym = pat.symbol
    if sym == HOLE and not pat.children:
        return [pos]
    try:
        node = t.at(pos)
    except IndexError:
        return []
    if sym in G.nonterminals:
        if G.nonterminals[sym] == 0:
            return [None] if (sym, pos) in facts0 else []
        out = []
        for hole in facts1.get((sym, pos), ()):
            out.extend(_match(G, pat.children[0], t, hole, facts0, facts1))
        return out
    if node.symbol != sym or len(node.children) != len(pat.children):
        return []
    results: List[Optional[Position]] = [None]
    for i, c in enumerate(pat.children):
        sub = _match(G, c, t, pos + (i,), facts0, facts1)
        if not sub:
            return []
        merged = []
        for r in results:
            for s in sub:
                if r is not None and s is not None:
                    continue
                merged.append(r if r is not None else s)
        results = merged
        if not results:
            return []
    return results


def contains_tree(G: LmCftg, t: Tree, bound: int) -> bool:
    """Membership witnessed by a meta-derivation of height at most ``bound``."""
    positions = list(t.positions())
    facts0 = set()
    facts1: Dict[Tuple[str, Position], set] = {}
    for _ in range(bound):
        new0 = set()
        new1 = []
        for rule in G.rules:
            rank = G.nonterminals[rule.lhs]
            for pos in positions:
                for hole in _match(G, rule.rhs, t, pos, facts0, facts1):
                    if rank == 0 and (rule.lhs, pos) not in facts0:
                        new0.add((rule.lhs, pos))
                    elif rank == 1 and hole is not None and hole not in facts1.get((rule.lhs, pos), ()):
                        new1.append((rule.lhs, pos, hole))
        if not new0 and not new1:
            break
        facts0 |= new0
        for a, pos, hole in new1:
            facts1.setdefault((a, pos), set()).add(hole)
        if (G.start, ()) in facts0:
            return True
    return (G.start, ()) in facts0


# --- bounds ----------------------------------------------------------------

def pumping_height(G: LmCftg) -> int:
    return (len(G.nonterminals) + 1) * (1 + max((r.rhs.height() for r in G.rules), default=0))


def rule_emission(G: LmCftg, h: Optional[Lth] = None) -> List[Tuple[int, int]]:
    """Per rule: (tokens emitted, edge constants in the images of emitted terminals)."""
    out = []
    for rule in G.rules:
        toks = edges = 0
        for _, n in rule.rhs.subtrees():
            if n.symbol in G.terminals:
                if not n.children and G.token(n.symbol) is not None:
                    toks += 1
                if h is not None and n.symbol in h.images:
                    edges += _edge_constants(h.image(n.symbol))
        out.append((toks, edges))
    return out


def _edge_constants(image: Tree) -> int:
    return sum(1 for _, n in image.subtrees() if getattr(n.symbol, "kind", None) in ("edge", "loop"))


def l0_bound(G: LmCftg, h: Lth, p: Optional[int] = None) -> int:
    p = pumping_height(G) if p is None else p
    em = rule_emission(G, h)
    return p * (max((t for t, _ in em), default=0) + max((e for _, e in em), default=0))


# --- pumping ---------------------------------------------------------------

@dataclass
class PumpingDecomposition:
    C1: Context
    C2: Context
    C3: Context
    C4: Context
    t5: Tree
    grammar: LmCftg = field(repr=False)
    tree: Tree = field(repr=False)
    nonterminal: str = ""
    outer: Position = ()
    inner: Position = ()
    p: int = 0

    def whole(self) -> Tree:
        return substitute(compose(compose(compose(self.C1, self.C2), self.C3), self.C4), self.t5)

    def pumped_part(self) -> Context:
        return compose(compose(self.C2, self.C3), self.C4)

    def s_yield(self) -> Tuple[str, ...]:
        """yield(C2[C4]): left(C2) left(C4) right(C4) right(C2)."""
        l2, r2 = self.grammar.context_yields(self.C2)
        l4, r4 = self.grammar.context_yields(self.C4)
        return l2 + l4 + r4 + r2

    def down_positions(self) -> Dict[Position, Position]:
        """Positions of C1[C3[t5]] mapped to the positions of the same nodes in the tree."""
        top = self.C1.hole
        mid = top + self.C2.hole
        bottom = mid + self.C3.hole + self.C4.hole
        h3 = self.C3.hole
        out: Dict[Position, Position] = {}
        small = pump(self, 0)
        for q in small.positions():
            if q[: len(top)] != top:
                out[q] = q
                continue
            rel = q[len(top):]
            if rel[: len(h3)] == h3:
                out[q] = bottom + rel[len(h3):]
            else:
                out[q] = mid + rel
        return out

    def summary(self) -> str:
        l2, r2 = self.grammar.context_yields(self.C2)
        l4, r4 = self.grammar.context_yields(self.C4)
        return (f"nonterminal={self.nonterminal} outer={_fmt(self.outer)} inner={_fmt(self.inner)} "
                f"p={self.p} height(C2C3C4)={self.pumped_part().height()} "
                f"C2=({' '.join(l2)} | {' '.join(r2)}) C4=({' '.join(l4)} | {' '.join(r4)})")


def _fmt(pos: Position) -> str:
    return "ε" if not pos else ".".join(map(str, pos))


def pump_candidates(d: Derivation, p: Optional[int] = None) -> List[PumpingDecomposition]:
    """Every valid decomposition from a repeated nonterminal on one meta path, best first."""
    G = d.grammar
    p = pumping_height(G) if p is None else p
    t = d.tree
    infos = d.infos
    paths = sorted(infos, key=lambda mp: (-len(mp), mp))
    cands = []
    for outer in paths:
        N = infos[outer]
        for inner in sorted(infos, key=lambda mp: (len(mp), mp)):
            if len(inner) <= len(outer) or inner[: len(outer)] != outer:
                continue
            M = infos[inner]
            if M.nonterminal != N.nonterminal:
                continue
            C1 = context_at(t, (), N.root)
            C2 = context_at(t, N.root, M.root)
            if N.hole is None:
                C3 = Context.trivial()
                C4 = Context.trivial()
                t5 = t.at(M.root)
            else:
                if N.hole[: len(M.hole)] != M.hole:
                    continue
                C3 = context_at(t, M.root, M.hole)
                C4 = context_at(t, M.hole, N.hole)
                t5 = t.at(N.hole)
            if C2.is_trivial() and C4.is_trivial():
                continue
            dec = PumpingDecomposition(C1, C2, C3, C4, t5, G, t, N.nonterminal, outer, inner, p)
            if dec.pumped_part().height() > p:
                continue
            cands.append(dec)
    return cands


def pump_decompose(d: Derivation, p: Optional[int] = None) -> PumpingDecomposition:
    """The lowest repeated-nonterminal decomposition (deepest outer node, closest inner)."""
    G = d.grammar
    p = pumping_height(G) if p is None else p
    if d.tree.height() <= p:
        raise PumpingError(f"tree height {d.tree.height()} does not exceed the pumping height {p}")
    cands = pump_candidates(d, p)
    if not cands:
        raise PumpingError("no repeated nonterminal found within the pumping height; raise the bound")
    return cands[0]


def pump(dec: PumpingDecomposition, i: int) -> Tree:
    """C1[v^i[t5]] with v^0 = C3 and v^(i+1) = C2[v^i[C4]]."""
    if i < 0:
        raise ValueError("pumping exponent must be non-negative")
    v = dec.C3
    for _ in range(i):
        v = compose(compose(dec.C2, v), dec.C4)
    return substitute(compose(dec.C1, v), dec.t5)


# --- text format -----------------------------------------------------------

_DECL_NT = re.compile(r"^nt\s+(\S+)/([01])$")
_DECL_T = re.compile(r"^term\s+(\S+)/(\d+)(?:\s+(eps|token\s+\S+))?$")
_RULE = re.compile(r"^(\S+?)(\(x\))?\s*->\s*(.+)$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_grammar(text: str) -> LmCftg:
    """Grammar files: ``start S``, ``nt A/1``, ``term s/n [token w|eps]``, ``A -> t``, ``A(x) -> C``."""
    start = None
    nts: Dict[str, int] = {}
    terms: Dict[str, int] = {}
    tokens: Dict[str, Optional[str]] = {}
    raw_rules = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _strip(line)
        if not line:
            continue
        if line.startswith("start "):
            start = line.split()[1]
            continue
        m = _DECL_NT.match(line)
        if m:
            nts[m.group(1)] = int(m.group(2))
            continue
        m = _DECL_T.match(line)
        if m:
            sym, rank, tok = m.group(1), int(m.group(2)), m.group(3)
            terms[sym] = rank
            if rank == 0:
                if tok is None:
                    tokens[sym] = sym
                elif tok == "eps":
                    tokens[sym] = None
                else:
                    tokens[sym] = tok.split()[1]
            continue
        m = _RULE.match(line)
        if m:
            raw_rules.append((lineno, m.group(1), bool(m.group(2)), m.group(3)))
            continue
        raise GrammarError(f"line {lineno}: cannot parse {line!r}")
    if start is None:
        raise GrammarError("missing 'start' line")
    rules = []
    for lineno, lhs, has_var, body in raw_rules:
        if nts.get(lhs) is None:
            raise GrammarError(f"line {lineno}: undeclared nonterminal {lhs}")
        if has_var != (nts[lhs] == 1):
            raise GrammarError(f"line {lineno}: rule shape does not match rank of {lhs}")
        rhs = parse_tree(body, symbol=lambda s: HOLE if s == "x" else s)
        rules.append(Rule(lhs, rhs))
    return LmCftg(nts, terms, rules, start, tokens)


def grammar_to_text(G: LmCftg) -> str:
    lines = [f"start {G.start}"]
    for a, r in G.nonterminals.items():
        lines.append(f"nt {a}/{r}")
    for s, r in G.terminals.items():
        if r == 0:
            tok = G.tokens.get(s)
            lines.append(f"term {s}/0 " + ("eps" if tok is None else f"token {tok}"))
        else:
            lines.append(f"term {s}/{r}")
    for rule in G.rules:
        body = to_text(rule.rhs)
        if G.nonterminals[rule.lhs] == 1:
            body = re.sub(r"(?<![^\s(,])X(?![^\s),])", "x", body)
            lines.append(f"{rule.lhs}(x) -> {body}")
        else:
            lines.append(f"{rule.lhs} -> {body}")
    return "\n".join(lines) + "\n"
