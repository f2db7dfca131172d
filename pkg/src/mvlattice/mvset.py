"""Multi-valued sets and the lattice extension principle.

A multi-valued set pairs elements of a carrier lattice ``L`` with confidence
values in a scale lattice ``M``.  Elements that are not listed carry the
bottom confidence, and the canonical form never stores that bottom value.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Iterable, Mapping, Sequence

from .errors import ArityMismatch, MismatchedScales
from .lattice import Lattice
from .terms import (
    BinOp,
    Const,
    Expr,
    LatticeTerm,
    Var,
    _binop_impl,
    check_interpretable,
    resolve_constant,
)


class MVSet:
    """An immutable multi-valued set over ``(carrier, scale)``.

    ``entries`` may be a mapping or an iterable of ``(element, confidence)``
    pairs, given as ids or labels.  Repeated elements have their confidences
    joined.
    """

    __slots__ = ("carrier", "scale", "_items", "_conf")

    def __init__(self, carrier: Lattice, scale: Lattice, entries=()):
        self.carrier = carrier
        self.scale = scale
        pairs = entries.items() if isinstance(entries, Mapping) else entries
        conf: dict[int, int] = {}
        for x, m in pairs:
            x = carrier.index(x)
            m = scale.index(m)
            conf[x] = scale._join[conf[x]][m] if x in conf else m
        self._conf = {x: m for x, m in conf.items() if m != scale.bottom}
        self._items = tuple(sorted(self._conf.items()))

    @classmethod
    def singleton(cls, carrier: Lattice, scale: Lattice, x, conf=None) -> "MVSet":
        return cls(carrier, scale, [(x, scale.top if conf is None else conf)])

    @classmethod
    def empty(cls, carrier: Lattice, scale: Lattice) -> "MVSet":
        return cls(carrier, scale)

    def items(self) -> tuple[tuple[int, int], ...]:
        return self._items

    @property
    def entries(self) -> dict[int, int]:
        return dict(self._conf)

    def support(self) -> frozenset[int]:
        return frozenset(self._conf)

    def confidence(self, x) -> int:
        return self._conf.get(self.carrier.index(x), self.scale.bottom)

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def __bool__(self):
        return bool(self._items)

    def __eq__(self, other):
        return (
            isinstance(other, MVSet)
            and self._items == other._items
            and self.carrier == other.carrier
            and self.scale == other.scale
        )

    def __hash__(self):
        return hash(self._items)

    def __or__(self, other: "MVSet") -> "MVSet":
        """Union with confidences of shared elements joined."""
        same_scales([self, other])
        return MVSet(self.carrier, self.scale, self._items + other._items)

    def is_crisp(self) -> bool:
        return len(self._items) == 1

    def to_labels(self) -> list[tuple[str, str]]:
        return [(self.carrier.labels[x], self.scale.labels[m]) for x, m in self._items]

    def __str__(self):
        return "{" + ", ".join(f"({x}, {m})" for x, m in self.to_labels()) + "}"

    def __repr__(self):
        return f"MVSet({self})"


def support(A: MVSet) -> frozenset[int]:
    return A.support()


def confidence(A: MVSet, x) -> int:
    return A.confidence(x)


def same_scales(args: Sequence[MVSet]) -> tuple[Lattice, Lattice]:
    if not args:
        raise ArityMismatch("no arguments given")
    L, M = args[0].carrier, args[0].scale
    for a in args[1:]:
        if a.carrier != L or a.scale != M:
            raise MismatchedScales("arguments do not share the same carrier and scale lattices")
    return L, M


def _check_arity(t: LatticeTerm, args: Sequence) -> None:
    if len(args) != t.arity:
        raise ArityMismatch(f"term takes {t.arity} arguments, got {len(args)}")


class _Propagator:
    """Enumerates the achievable ``(carrier value, confidence value)`` pairs
    of every subterm.

    Subterms that share no variable combine as a plain product of their pair
    sets, so only variables that occur more than once are enumerated
    explicitly; this is exact for any operations because nothing is joined
    before the root.
    """

    def __init__(self, expr: Expr, L: Lattice, M: Lattice | None, conf_mode: str):
        self.L, self.M = L, M
        self.conf_mode = conf_mode
        self.expr = expr
        self._ops: dict = {}

    def _op(self, node: BinOp):
        key = node.op
        if key not in self._ops:
            fl = _binop_impl(node.op, self.L)
            if self.M is None:
                fm = None
            elif self.conf_mode == "term":
                fm = _binop_impl(node.op, self.M)
            else:
                meet = self.M._meet
                fm = lambda a, b: meet[a][b]
            self._ops[key] = (fl, fm)
        return self._ops[key]

    def pairs(self, node: Expr, domains: Mapping[str, Iterable[tuple[int, int]]]) -> set:
        if isinstance(node, Var):
            return set(domains[node.name])
        if isinstance(node, Const):
            lv = resolve_constant(node.label, self.L)
            if self.M is None:
                return {(lv, None)}
            if self.conf_mode == "term":
                return {(lv, resolve_constant(node.label, self.M))}
            return {(lv, self.M.top)}
        fl, fm = self._op(node)
        left = self.pairs(node.left, domains)
        right = self.pairs(node.right, domains)
        if fm is None:
            return {(fl(a, c), None) for a, _ in left for c, _ in right}
        return {(fl(a, c), fm(b, d)) for a, b in left for c, d in right}


def _propagate(expr: Expr, params: Sequence[str], args: Sequence[MVSet], L, M, conf_mode,
               enumerate_unused=False) -> dict[int, int | None]:
    occurrences = Counter(expr.variables())
    domain = {p: list(a.items()) for p, a in zip(params, args)}
    if any(not d for d in domain.values()):
        return {}
    shared = [p for p in params if occurrences[p] > 1 or (enumerate_unused and occurrences[p] == 0)]
    prop = _Propagator(expr, L, M, conf_mode)
    acc: dict[int, int | None] = {}
    for choice in itertools.product(*(domain[p] for p in shared)):
        doms = dict(domain)
        extra = None
        for p, pair in zip(shared, choice):
            doms[p] = [pair]
            if occurrences[p] == 0 and M is not None:
                extra = pair[1] if extra is None else M._meet[extra][pair[1]]
        for lv, mv in prop.pairs(expr, doms):
            if M is None:
                acc[lv] = None
                continue
            if extra is not None:
                mv = M._meet[mv][extra]
            acc[lv] = M._join[acc[lv]][mv] if lv in acc else mv
    return acc


def extend(t: LatticeTerm, args: Sequence[MVSet]) -> MVSet:
    """Apply ``t`` to multi-valued sets.

    Each reachable value ``y = t(x1..xn)`` (over tuples from the argument
    supports) gets the join, over its preimage tuples, of ``t`` itself
    evaluated on the tuple's confidences in the scale lattice.
    """
    _check_arity(t, args)
    L, M = same_scales(args)
    check_interpretable(t.body, L)
    check_interpretable(t.body, M)
    acc = _propagate(t.body, t.params, args, L, M, "term")
    return MVSet(L, M, acc)


def classical_extend(t: LatticeTerm, args: Sequence[MVSet]) -> MVSet:
    """Sup-min extension: the confidence of a tuple is the meet of the
    argument confidences.  Kept as a reference for comparison."""
    _check_arity(t, args)
    L, M = same_scales(args)
    check_interpretable(t.body, L)
    acc = _propagate(t.body, t.params, args, L, M, "meet", enumerate_unused=True)
    return MVSet(L, M, acc)


def image(t: LatticeTerm, L: Lattice, supports: Sequence[Iterable[int]]) -> frozenset[int]:
    """Crisp image ``{t(x1..xn)}`` over the product of element sets."""
    _check_arity(t, supports)
    check_interpretable(t.body, L)
    sets = []
    for s in supports:
        s = sorted({L.index(x) for x in s})
        sets.append([(x, None) for x in s])
    if any(not s for s in sets):
        return frozenset()
    occurrences = Counter(t.body.variables())
    domain = dict(zip(t.params, sets))
    shared = [p for p in t.params if occurrences[p] > 1]
    prop = _Propagator(t.body, L, None, "term")
    out = set()
    for choice in itertools.product(*(domain[p] for p in shared)):
        doms = dict(domain)
        doms.update({p: [pair] for p, pair in zip(shared, choice)})
        out.update(lv for lv, _ in prop.pairs(t.body, doms))
    return frozenset(out)

