"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from mvlattice.mvset import MVSet
from mvlattice.terms import OPS, Const, LatticeTerm, Var, fold


def elements(L):
    return st.integers(0, L.n - 1)


def mvsets(L, M, max_size=3, min_size=0):
    pair = st.tuples(elements(L), st.integers(0, M.n - 1).filter(lambda m: m != M.bottom))
    return st.lists(pair, min_size=min_size, max_size=max_size).map(lambda ps: MVSet(L, M, ps))


def exprs(params, constants, ops=tuple(OPS), max_leaves=5):
    leaf = st.sampled_from([Var(p) for p in params] + [Const(c) for c in constants])

    def extend(children):
        return st.tuples(st.sampled_from(ops), children, children).map(lambda t: fold(t[0], [t[1], t[2]]))

    return st.recursive(leaf, extend, max_leaves=max_leaves)


def terms(params=("x", "y", "z"), constants=("top", "bottom"), ops=tuple(OPS), max_leaves=5):
    """Terms whose parameter list is exactly the variables they use."""

    def make(expr):
        used = []
        for v in expr.variables():
            if v not in used:
                used.append(v)
        return LatticeTerm(tuple(used) or ("x",), expr if used else fold("or", [Var("x"), expr]))

    return exprs(params, constants, ops, max_leaves).map(make)
