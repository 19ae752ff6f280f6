"""Homomorphism files, the string/graph relation of a grammar, and alignment."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..sgraph import HRError, SGraph, check_term, eval_term, iso_check, parse_term, term_to_text
from ..trees import Lth, Tree, apply_hom
from .cftg import LmCftg, derive_bounded
from .tag import TagGrammar, derive_tag

TreeGrammar = Union[LmCftg, TagGrammar]

_HOM_LINE = re.compile(r"^(\S+)/(\d+)\s*->\s*(.+)$")


def parse_hom(text: str, names: Optional[Sequence[str]] = None) -> Lth:
    """Lines ``sym/n -> term`` where the term may use x1..xn."""
    images = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HOM_LINE.match(line)
        if not m:
            raise HRError(f"line {lineno}: cannot parse homomorphism entry {line!r}")
        sym, rank = m.group(1), int(m.group(2))
        image = parse_term(m.group(3), allow_vars=True)
        check_term(image, names, allow_vars=True)
        images[sym] = (rank, image)
    return Lth(images)


def hom_to_text(h: Lth) -> str:
    return "".join(f"{s}/{r} -> {term_to_text(img)}\n" for s, (r, img) in h.images.items())


def derivations(G: TreeGrammar, max_height: Optional[int] = None, max_yield: Optional[int] = None) -> List[Tree]:
    if isinstance(G, LmCftg):
        return [d.tree for d in derive_bounded(G, max_height=max_height, max_yield=max_yield)]
    if max_height is None:
        raise ValueError("TAG enumeration needs a height bound")
    out = derive_tag(G, max_height)
    if max_yield is not None:
        out = [t for t in out if len(G.yield_of(t)) <= max_yield]
    return out


@dataclass
class RelationPair:
    tokens: Tuple[str, ...]
    graph: SGraph
    derivation: Tree = field(repr=False)


def build_relation(G: TreeGrammar, h: Lth, names: Sequence[str], max_height: Optional[int] = None,
                   max_yield: Optional[int] = None) -> List[RelationPair]:
    """{(yield(t), [[h(t)]]) : t in L(G) within the bound}, one entry per pair up to isomorphism."""
    out: List[RelationPair] = []
    by_yield: Dict[Tuple[str, ...], List[RelationPair]] = {}
    for t in derivations(G, max_height, max_yield):
        w = G.yield_of(t)
        g = eval_term(apply_hom(h, t), names)
        seen = by_yield.setdefault(w, [])
        if any(iso_check(g, other.graph) for other in seen):
            continue
        pair = RelationPair(w, g, t)
        seen.append(pair)
        out.append(pair)
    return out


def _constants(G: TreeGrammar) -> List[Tuple[str, Tuple[str, ...]]]:
    if isinstance(G, LmCftg):
        out = []
        for s, r in G.terminals.items():
            if r == 0:
                tok = G.token(s)
                out.append((s, () if tok is None else (tok,)))
        return out
    return [(c, G.constant_yield(c)) for c in G.constants()]


@dataclass
class AlignmentReport:
    aligned: bool
    offending: List[Tuple[str, str]]

    def __bool__(self):
        return self.aligned

    def lines(self) -> List[str]:
        if self.aligned:
            return ["ALIGNED"]
        return ["NOT ALIGNED"] + [f"  constant {c}: {why}" for c, why in self.offending]


def is_aligned(G: TreeGrammar, h: Lth, names: Optional[Sequence[str]] = None) -> AlignmentReport:
    """Every constant's image is a single edge labelled with the constant's own token."""
    bad = []
    for c, toks in _constants(G):
        if c not in h.images:
            bad.append((c, "no image"))
            continue
        g = eval_term(h.image(c), names)
        labels = sorted(lab for _, _, lab in g.edges)
        if len(toks) != 1:
            bad.append((c, f"yield {' '.join(toks) or 'ε'} is not a single token"))
        elif len(labels) != 1:
            bad.append((c, f"image has {len(labels)} edges (labels {', '.join(labels)}), token {toks[0]}"))
        elif labels[0] != toks[0]:
            bad.append((c, f"image edge {labels[0]} differs from token {toks[0]}"))
    return AlignmentReport(not bad, bad)
