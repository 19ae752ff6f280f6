"""Checks on pumping decompositions of CSD derivations."""
from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from ..csd import BAR_OF, BARS, CORE, SYMBOLS, CsdParseError, parse_csd_string
from ..grammars.cftg import PumpingDecomposition, pump
from ..trees import Lth, Position, Tree, count_tokens
from .profiles import graphof
from .report import FAIL, INAPPLICABLE, PASS, CheckResult
from .separation import all_separations, is_separation, minimal_separations

CORE_PAIRS = (("a", "c"), ("b", "d"))
BRACKETS = ("<", ">")


def _fmt(pos: Position) -> str:
    return "ε" if not pos else ".".join(map(str, pos))


def _parses(w) -> bool:
    try:
        parse_csd_string(w)
        return True
    except CsdParseError:
        return False


def pump_audit(dec: PumpingDecomposition, h: Lth, names: Optional[Sequence[str]] = None,
               case: str = "-") -> CheckResult:
    """Both counting identities for s = yield(C2[C4]) and t' = C1[C3[t5]]."""
    G = dec.grammar
    t, t0 = dec.tree, pump(dec, 0)
    w, w0 = G.yield_of(t), G.yield_of(t0)
    if not (_parses(w) and _parses(w0)):
        return CheckResult(INAPPLICABLE, "lemma10", case, "t or t' yields a string outside CSD_s")
    s = dec.s_yield()
    for x, y in CORE_PAIRS:
        if count_tokens(s, x) != count_tokens(s, y):
            return CheckResult(FAIL, "lemma10", case,
                               f"|s|_{x}={count_tokens(s, x)} but |s|_{y}={count_tokens(s, y)}")
    e_t = graphof(t, h, names).label_counts()
    e_t0 = graphof(t0, h, names).label_counts()
    for z in SYMBOLS:
        lhs, rhs = e_t.get(z, 0), e_t0.get(z, 0) + count_tokens(s, z)
        if lhs != rhs:
            return CheckResult(FAIL, "lemma10", case, f"e_{z}(t)={lhs} but e_{z}(t')+|s|_{z}={rhs}",
                               {"symbol": z})
    counts = " ".join(f"{z}={count_tokens(s, z)}" for z in SYMBOLS if count_tokens(s, z))
    return CheckResult(PASS, "lemma10", case, f"s=[{counts or 'ε'}] both identities hold")


# --- case classification ---------------------------------------------------

def in_segments(w: Sequence[str], x: str, plus: bool = True) -> bool:
    """w is a concatenation of segments x <^k x'^k >^k (at least one when ``plus``)."""
    xb = BAR_OF[x]
    i, n, seen = 0, len(w), 0
    while i < n:
        if w[i] != x:
            return False
        i += 1
        k = 0
        while i < n and w[i] == "<":
            k, i = k + 1, i + 1
        if tuple(w[i:i + 2 * k]) != (xb,) * k + (">",) * k:
            return False
        i += 2 * k
        seen += 1
    return seen > 0 or not plus


def _only(w: Sequence[str], allowed) -> bool:
    return all(tok in allowed for tok in w)


def _core_free(w: Sequence[str]) -> bool:
    return not any(tok in CORE for tok in w)


def classify_pump_case(dec: PumpingDecomposition, case: str = "-") -> CheckResult:
    """NEUTRAL, BAR-ONLY(z') or CORE(x,y) configuration n, as a report whose detail is the tag."""
    G = dec.grammar
    if not _parses(G.yield_of(dec.tree)):
        return CheckResult(INAPPLICABLE, "classify", case, "yield of t is outside CSD_s")
    l2, r2 = G.context_yields(dec.C2)
    l3, r3 = G.context_yields(dec.C3)
    l4, r4 = G.context_yields(dec.C4)
    s = l2 + l4 + r4 + r2
    if not any(tok in CORE or tok in BARS for tok in s):
        return CheckResult(PASS, "classify", case, "NEUTRAL")
    if _core_free(s):
        return _bar_only(dec, l2 + r2, l3, r3, l4, r4, case)
    for x, y in CORE_PAIRS:
        if count_tokens(s, x) == 0:
            continue
        conf = _core_config(x, y, l2, r2, l4, r4)
        if conf is None:
            return CheckResult(FAIL, "classify", case,
                               f"CORE({x},{y}) matches no configuration: C2=({' '.join(l2)} | {' '.join(r2)}) "
                               f"C4=({' '.join(l4)} | {' '.join(r4)})")
        return CheckResult(PASS, "classify", case, f"CORE({x},{y}) configuration {conf}")
    return CheckResult(FAIL, "classify", case, "pumped part has c or d tokens but no a or b tokens")


def _bar_only(dec, y2, l3, r3, l4, r4, case) -> CheckResult:
    if not _only(y2, BRACKETS):
        return CheckResult(FAIL, "classify", case, "BAR-ONLY: C2 yields a bar token")
    kinds = {tok for tok in l4 + r4 if tok in BARS}
    if len(kinds) != 1:
        return CheckResult(FAIL, "classify", case, f"BAR-ONLY: C4 yields bar kinds {sorted(kinds)}")
    (xb,) = kinds
    left_ok = _only(l4, (xb,)) and _core_free(l3)
    right_ok = _only(r4, (xb,)) and _core_free(r3)
    if not (left_ok or right_ok):
        return CheckResult(FAIL, "classify", case, f"BAR-ONLY({xb}): neither side of C4 is {xb}-only with core-free C3")
    if not _core_free(dec.grammar.yield_of(dec.t5)):
        return CheckResult(FAIL, "classify", case, f"BAR-ONLY({xb}): t5 yields a core token")
    return CheckResult(PASS, "classify", case, f"BAR-ONLY({xb}) side={'left' if left_ok else 'right'}")


def _core_config(x, y, l2, r2, l4, r4) -> Optional[int]:
    seg = in_segments
    sides = {2: (l2, r2), 4: (l4, r4)}
    for i, j in ((2, 4), (4, 2)):
        (li, ri), (lj, rj) = sides[i], sides[j]
        if seg(li, x) and seg(ri, y) and seg(lj, x, False) and seg(rj, y, False):
            return 1
    if seg(l2, "a") and seg(r2, "d") and seg(l4, "b") and seg(r4, "c"):
        return 2
    if seg(l2, x) and not r2 and seg(tuple(l4) + tuple(r4), y):
        return 3
    if not l2 and seg(r2, y) and seg(tuple(l4) + tuple(r4), x):
        return 3
    return None


# --- downward separation ---------------------------------------------------

def _under(p: Position, top: Position) -> bool:
    return p[: len(top)] == top


def _highest(qs: List[Position]) -> Optional[Position]:
    if not qs:
        return None
    top = min(qs, key=lambda q: (len(q), q))
    return top if all(_under(q, top) for q in qs) else None


def check_downward_separation(dec: PumpingDecomposition, pair: Tuple[str, str], l: int,
                              case: str = "-") -> List[CheckResult]:
    """Separations carried down by removing the nodes of C2 and C4, then nesting of minimal separations."""
    G = dec.grammar
    x, y = pair
    tag = f"{x}/{y}"
    t = dec.tree
    seps = all_separations(t, x, y, l, G.tokens)
    if not seps:
        return [CheckResult(INAPPLICABLE, "lemma13", case, f"{tag}: t is not {l}-separated")]
    t0 = pump(dec, 0)
    down = dec.down_positions()
    out = []
    for D in seps:
        in0 = [q for q, p in down.items() if _under(p, D.top)]
        iny = [q for q, p in down.items() if _under(p, D.bottom)]
        top, bottom = _highest(in0), _highest(iny)
        built = (top is not None and bottom is not None
                 and set(in0) == {q for q in down if _under(q, top)}
                 and set(iny) == {q for q in down if _under(q, bottom)})
        if built:
            if not is_separation(t0, top, bottom, x, y, l, G.tokens):
                out.append(CheckResult(FAIL, "lemma13", case,
                                       f"{tag}: image of separation top={_fmt(D.top)} bottom={_fmt(D.bottom)} "
                                       "is not a separation of t'"))
                return out
        elif not all_separations(t0, x, y, l, G.tokens):
            out.append(CheckResult(FAIL, "lemma13", case, f"{tag}: t' is not separated"))
            return out
    out.append(CheckResult(PASS, "lemma13", case, f"{tag}: {len(seps)} separations carried to t'"))
    mins_t = minimal_separations(t, pair, l, G.tokens)
    mins_t0 = minimal_separations(t0, pair, l, G.tokens)
    # Every pair of minimal separations: the nodes of C_0 lie in D_0[t_y].
    for D in mins_t:
        for C in mins_t0:
            stray = [q for q in t0.positions()
                     if _under(q, C.top) and not _under(q, C.bottom) and not _under(down[q], D.top)]
            if stray:
                out.append(CheckResult(FAIL, "lemma14", case,
                                       f"{tag}: node {_fmt(down[stray[0]])} of C_0 (top={_fmt(C.top)}) "
                                       f"lies outside D_0[t_y] (top={_fmt(D.top)})"))
                return out
    # The tie-broken pair: all of C_0[t'_y] lies in D_0[t_y].
    D, C = mins_t[0], mins_t0[0]
    if not _under(down[C.top], D.top):
        out.append(CheckResult(FAIL, "lemma14", case,
                               f"{tag}: C_0[t'_y] at {_fmt(C.top)} maps to {_fmt(down[C.top])}, "
                               f"outside D_0[t_y] at {_fmt(D.top)}"))
        return out
    out.append(CheckResult(PASS, "lemma14", case,
                           f"{tag}: D_0[t_y] at {_fmt(D.top)} contains C_0[t'_y] at {_fmt(C.top)} "
                           f"(mapped to {_fmt(down[C.top])})",
                           {"t_top": list(D.top), "t_prime_top": list(C.top), "mapped": list(down[C.top])}))
    return out
