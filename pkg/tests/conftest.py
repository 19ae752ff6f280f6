import random

from hypothesis import settings, strategies as st

from hrcsd.analysis import random_hr_term
from hrcsd.csd import CsdDescriptor
from hrcsd.trees import HOLE, Context, Tree

settings.register_profile("default", deadline=None)
settings.load_profile("default")

LEAVES = ("a", "b", "c")
BINARY = ("f", "g")


def trees(max_leaves=8):
    return st.recursive(st.sampled_from(LEAVES).map(Tree),
                        lambda kids: st.tuples(st.sampled_from(BINARY), kids, kids).map(
                            lambda x: Tree(x[0], [x[1], x[2]])),
                        max_leaves=max_leaves)


@st.composite
def contexts(draw, max_leaves=6):
    t = draw(trees(max_leaves))
    pos = draw(st.sampled_from(list(t.positions())))
    return Context(t.replace_at(pos, Tree(HOLE)))


@st.composite
def descriptors(draw, max_nm=3, max_k=3):
    n = draw(st.integers(1, max_nm))
    m = draw(st.integers(1, max_nm))
    vec = lambda size: draw(st.lists(st.integers(0, max_k), min_size=size, max_size=size))
    return CsdDescriptor(n, m, vec(n), vec(m), vec(n), vec(m))


@st.composite
def hr_terms(draw, names=("rt", "s", "o")):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    k = draw(st.integers(1, len(names)))
    return random_hr_term(random.Random(seed), names[:k]), names[:k]
