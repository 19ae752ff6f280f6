"""Random well-formed HR terms and the boundary-node check."""
from __future__ import annotations

import random
from typing import FrozenSet, Optional, Sequence, Tuple

from ..sgraph import EMPTY, Edge, Forget, Loop, Merge, Ren, evaluate, term_to_text
from ..trees import Tree
from .report import FAIL, PASS, CheckResult

NAME_POOL = ("rt", "s", "o")
LABELS = ("a", "b", "c")


def random_hr_term(rng: random.Random, names: Sequence[str], max_ops: int = 12) -> Tree:
    """A term with at most ``max_ops`` operator nodes that evaluates without error.

    Source sets are tracked while building so that rename never hits an
    occupied target.
    """

    def const() -> Tuple[Tree, FrozenSet[str]]:
        a = rng.choice(names)
        if rng.random() < 0.15:
            return Loop(a, rng.choice(LABELS)), frozenset({a})
        rest = [n for n in names if n != a]
        if not rest:
            return Loop(a, rng.choice(LABELS)), frozenset({a})
        b = rng.choice(rest)
        return Edge(a, rng.choice(LABELS), b), frozenset({a, b})

    def build(budget: int) -> Tuple[Tree, FrozenSet[str]]:
        if budget <= 1:
            if rng.random() < 0.05:
                return EMPTY, frozenset()
            return const()
        kind = rng.choice(("merge", "merge", "forget", "ren"))
        if kind == "merge" and budget >= 3:
            left = rng.randint(1, budget - 2)
            t1, s1 = build(left)
            t2, s2 = build(budget - 1 - left)
            return Merge(t1, t2), s1 | s2
        t, src = build(budget - 1)
        if kind == "forget" and src:
            a = rng.choice(sorted(src))
            return Forget(a, t), src - {a}
        free = [n for n in names if n not in src]
        if src and free:
            a, b = rng.choice(sorted(src)), rng.choice(free)
            return Ren(a, b, t), (src - {a}) | {b}
        return t, src

    return build(rng.randint(1, max_ops))[0]


def check_boundary(t: Tree, names: Optional[Sequence[str]] = None, case: str = "-") -> CheckResult:
    """For every subterm: the nodes its edges share with the other edges are its sources."""
    ev = evaluate(t, names)
    edges = ev.graph.edges
    splits = 0
    for pos, _ in t.subtrees():
        inside = set(ev.edges_below(pos))
        touch_in = {x for i in inside for x in edges[i][:2]}
        touch_out = {x for i in range(len(edges)) if i not in inside for x in edges[i][:2]}
        boundary = touch_in & touch_out
        missing = boundary - set(ev.sources_at[pos].values())
        splits += 1
        if missing:
            return CheckResult(FAIL, "boundary", case,
                               f"subterm at {'.'.join(map(str, pos)) or 'ε'} has boundary nodes {sorted(missing)} "
                               f"without a source", {"term": term_to_text(t), "position": list(pos)})
    return CheckResult(PASS, "boundary", case, f"ops={t.size()} edges={len(edges)} splits={splits}")
