"""Set-valued means of partially ordered expert assessments.

There is no division on a finite lattice, so "averaging" two sets of
assessments produces another set: the pessimistic mean collects joins of
pairwise meets, the optimistic mean meets of pairwise joins.  The difference
measure reads elements as sets of atoms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyAssessmentSet, FewerThanTwoSets, MismatchedCarriers
from .lattice import Lattice
from .mvset import MVSet, same_scales

PESSIMISTIC = "pessimistic"
OPTIMISTIC = "optimistic"
KINDS = (PESSIMISTIC, OPTIMISTIC)


@dataclass(frozen=True)
class AssessmentSet:
    """A non-empty set of elements of one lattice, kept sorted by id."""

    carrier: Lattice
    elems: tuple[int, ...]

    def __post_init__(self):
        elems = tuple(sorted({self.carrier.index(x) for x in self.elems}))
        if not elems:
            raise EmptyAssessmentSet("an assessment set needs at least one element")
        object.__setattr__(self, "elems", elems)

    @classmethod
    def of(cls, carrier: Lattice, elems: Iterable) -> "AssessmentSet":
        return cls(carrier, tuple(elems))

    @classmethod
    def _from_ids(cls, carrier: Lattice, ids: Iterable[int]) -> "AssessmentSet":
        # ids are known to be valid element ids of carrier
        out = object.__new__(cls)
        object.__setattr__(out, "carrier", carrier)
        object.__setattr__(out, "elems", tuple(sorted(set(ids))))
        return out

    def __iter__(self):
        return iter(self.elems)

    def __len__(self):
        return len(self.elems)

    def __contains__(self, x):
        return self.carrier.index(x) in self.elems

    def labels(self) -> list[str]:
        return [self.carrier.labels[x] for x in self.elems]

    def __str__(self):
        return "{" + ", ".join(self.labels()) + "}"


def _carrier(*sets: AssessmentSet) -> Lattice:
    L = sets[0].carrier
    if any(s.carrier is not L and s.carrier != L for s in sets[1:]):
        raise MismatchedCarriers("assessment sets live in different lattices")
    return L


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, not {kind!r}")


def difference(A: AssessmentSet, B: AssessmentSet) -> AssessmentSet:
    """``{meet over a of (b \\ a) : b in B} ∪ {meet over b of (a \\ b) : a in A}``."""
    L = _carrier(A, B)
    out = [L.meet_all(L.set_difference(b, a) for a in A) for b in B]
    out += [L.meet_all(L.set_difference(a, b) for b in B) for a in A]
    return AssessmentSet(L, tuple(out))


def _half(A, B, inner, outer, start) -> list[int]:
    # [outer over a of inner(b, a) : b in B], straight from the tables
    out = []
    for b in B.elems:
        row, acc = inner[b], start
        for a in A.elems:
            acc = outer[acc][row[a]]
        out.append(acc)
    return out


def pessimistic_mean(A: AssessmentSet, B: AssessmentSet) -> AssessmentSet:
    L = _carrier(A, B)
    out = _half(A, B, L._meet, L._join, L.bottom) + _half(B, A, L._meet, L._join, L.bottom)
    return AssessmentSet._from_ids(L, out)


def optimistic_mean(A: AssessmentSet, B: AssessmentSet) -> AssessmentSet:
    L = _carrier(A, B)
    out = _half(A, B, L._join, L._meet, L.top) + _half(B, A, L._join, L._meet, L.top)
    return AssessmentSet._from_ids(L, out)


def mean(kind: str, A: AssessmentSet, B: AssessmentSet) -> AssessmentSet:
    _check_kind(kind)
    return pessimistic_mean(A, B) if kind == PESSIMISTIC else optimistic_mean(A, B)


def nary_mean(kind: str, sets: Sequence[AssessmentSet]) -> AssessmentSet:
    """Union of the pairwise means over all unordered pairs of inputs."""
    _check_kind(kind)
    if len(sets) < 2:
        raise FewerThanTwoSets(f"a mean needs at least two sets, got {len(sets)}")
    L = _carrier(*sets)
    out: set[int] = set()
    for A, B in itertools.combinations(sets, 2):
        out.update(mean(kind, A, B).elems)
    return AssessmentSet(L, tuple(out))


def _element_mean(kind: str, L: Lattice, xs: Sequence[int]) -> set[int]:
    # nary mean of singleton sets: pairwise meets (or joins) of the elements
    op = L._meet if kind == PESSIMISTIC else L._join
    return {op[a][b] for a, b in itertools.combinations(xs, 2)}


def mean_confidences(kind: str, inputs: Sequence[MVSet], *, full_preimage: bool = False) -> dict[int, int]:
    """Confidence of every reached mean value, bottom confidences omitted.

    A tuple ``(a1..an)`` reaches ``y`` when ``y`` belongs to the mean of the
    singletons ``{a1}..{an}``; its contribution is the join of the mean of
    the confidences, computed in the scale lattice.  Tuples are drawn from
    the supports, or from the whole carrier with ``full_preimage=True``.
    """
    _check_kind(kind)
    if len(inputs) < 2:
        raise FewerThanTwoSets(f"a mean needs at least two sets, got {len(inputs)}")
    L, M = same_scales(inputs)
    if full_preimage:
        pools = [[(x, A.confidence(x)) for x in range(L.n)] for A in inputs]
    else:
        pools = [list(A.items()) for A in inputs]
    acc: dict[int, int] = {}
    for tup in itertools.product(*pools):
        elems = [x for x, _ in tup]
        confs = [m for _, m in tup]
        value = M.join_all(_element_mean(kind, M, confs))
        for y in _element_mean(kind, L, elems):
            acc[y] = M._join[acc[y]][value] if y in acc else value
    return {y: m for y, m in acc.items() if m != M.bottom}


def mean_confidence(kind: str, inputs: Sequence[MVSet], target, *, full_preimage: bool = False) -> int:
    """Confidence of ``target`` as a mean value; bottom when no tuple reaches it."""
    L, M = same_scales(inputs)
    target = L.index(target)
    return mean_confidences(kind, inputs, full_preimage=full_preimage).get(target, M.bottom)


def mean_mvset(kind: str, inputs: Sequence[MVSet]) -> MVSet:
    """The mean of the input supports, each member carrying its mean confidence.

    Members whose confidence comes out as bottom drop out (canonical form).
    """
    L, M = same_scales(inputs)
    members = nary_mean(kind, [AssessmentSet(L, tuple(A.support())) for A in inputs])
    conf = mean_confidences(kind, inputs)
    return MVSet(L, M, {y: conf.get(y, M.bottom) for y in members})
