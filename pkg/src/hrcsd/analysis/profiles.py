"""Token and edge count profiles of derivation trees and contexts."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Union

from ..csd import BARS, SYMBOLS
from ..sgraph import EMPTY, SGraph, eval_term
from ..trees import HOLE, Context, Lth, Tree, apply_hom, cfyield, context_yields


def hom_with_hole(h: Lth) -> Lth:
    """h extended with the hole symbol X mapped to the empty graph."""
    if HOLE in h.images:
        return h
    return h.replace(HOLE, 0, EMPTY)


def graphof(u: Union[Tree, Context], h: Lth, names: Optional[Sequence[str]] = None) -> SGraph:
    if isinstance(u, Context):
        return eval_term(apply_hom(hom_with_hole(h), u.tree), names)
    return eval_term(apply_hom(h, u), names)


def runs(w: Sequence[str], z: str):
    """Lengths of the maximal z-only substrings of ``w``, left to right."""
    out, cur = [], 0
    for tok in w:
        if tok == z:
            cur += 1
        elif cur:
            out.append(cur)
            cur = 0
    if cur:
        out.append(cur)
    return out


@dataclass
class CountProfile:
    n: Dict[str, int]
    e: Dict[str, int]
    m: Dict[str, int]
    r: Dict[str, int]

    def __str__(self):
        fmt = lambda d: " ".join(f"{k}={v}" for k, v in d.items() if v)
        return f"n[{fmt(self.n)}] e[{fmt(self.e)}] m[{fmt(self.m)}] r[{fmt(self.r)}]"


def count_profile(u: Union[Tree, Context], h: Lth, tokens=None, names: Optional[Sequence[str]] = None,
                  graph: Optional[SGraph] = None) -> CountProfile:
    """n_z, e_z, m_z' and r_z' for a tree or a context.

    For a context the two sides of the hole are separate strings: a bar run
    never continues across the hole, and r is taken from the right side when
    it has a bar run.
    """
    if isinstance(u, Context):
        left, right = context_yields(u, tokens)
        parts = [left, right]
    else:
        parts = [cfyield(u, tokens)]
    counts = Counter(tok for part in parts for tok in part)
    g = graph if graph is not None else graphof(u, h, names)
    labels = g.label_counts()
    n = {z: counts.get(z, 0) for z in SYMBOLS}
    e = {z: labels.get(z, 0) for z in SYMBOLS}
    m, r = {}, {}
    for z in BARS:
        all_runs = [runs(part, z) for part in parts]
        m[z] = max((x for rs in all_runs for x in rs), default=0)
        r[z] = next((rs[-1] for rs in reversed(all_runs) if rs), 0)
    return CountProfile(n, e, m, r)
