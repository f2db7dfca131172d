import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import LATTICES
from mvlattice.errors import (
    BadLabel,
    BadMonoid,
    CycleInOrder,
    DuplicateLabel,
    ForeignElement,
    LatticeTooLarge,
    NotALattice,
    NotAtomRepresentable,
    NotBrouwer,
    NotResiduated,
    SumNotInLattice,
)
from mvlattice.lattice import build_lattice, chain, product

NAMES = sorted(LATTICES)
DISTRIBUTIVE = [n for n in NAMES if n not in ("N5", "M3")]


@pytest.mark.parametrize("name", NAMES)
def test_join_meet_match_brute_force(name):
    L = LATTICES[name]
    for a in range(L.n):
        for b in range(L.n):
            assert L.join(a, b) == oracles.lub(L, a, b)
            assert L.meet(a, b) == oracles.glb(L, a, b)


@pytest.mark.parametrize("name", NAMES)
def test_bounds(name):
    L = LATTICES[name]
    assert L.top == oracles.top(L)
    assert L.bottom == oracles.bottom(L)
    assert sorted(L.atoms) == oracles.atoms(L)


@pytest.mark.parametrize("name", NAMES)
def test_distributivity_flag(name):
    L = LATTICES[name]
    assert L.is_distributive() == oracles.distributive(L)


@pytest.mark.parametrize("name", DISTRIBUTIVE)
def test_heyting_implication(name):
    L = LATTICES[name]
    assert L.is_brouwer()
    for a in range(L.n):
        for b in range(L.n):
            assert L.heyting_implies(a, b) == oracles.implies(L, a, b)


@pytest.mark.parametrize("name", ["N5", "M3"])
def test_non_distributive_lattices_are_not_brouwer(name):
    L = LATTICES[name]
    assert not L.is_distributive()
    assert not L.is_brouwer()
    with pytest.raises(NotBrouwer):
        L.heyting_implies(1, 2)


def test_structure_of_fixtures():
    for name in ("L1", "L2", "L", "M"):
        rep = LATTICES[name].structure_report()
        for key in ("distributive", "brouwer", "atomic", "residuated", "integrally_closed", "integral"):
            assert rep[key], (name, key)


def test_fixture_sizes_and_labels():
    L1, L2, L = LATTICES["L1"], LATTICES["L2"], LATTICES["L"]
    assert L1.labels == ("0", "c", "d", "h")
    assert L2.n == 8
    assert L2.labels_of(L2.atoms) == ["ba0", "b", "bn0"]
    assert L.n == 32
    assert L.labels_of(L.atoms) == ["0c", "0d", "ba0", "b", "bn0"]
    assert L.pair_label("bc") == "(b,c)"
    assert L.pair_label("0d") == "(0,d)"


def test_diamond_examples(diamond):
    x, y = diamond.index("x"), diamond.index("y")
    assert diamond.labels[diamond.join(x, y)] == "1"
    assert diamond.labels[diamond.meet(x, y)] == "0"
    assert diamond.labels_of(diamond.generators()) == ["x", "y"]
    assert diamond.is_atomic()
    assert diamond.labels[diamond.heyting_implies("x", "y")] == "y"


def test_three_chain_generators_and_atomicity():
    C3 = LATTICES["3-chain"]
    assert C3.labels_of(C3.generators()) == ["a", "1"]
    assert not C3.is_atomic()
    assert not C3.is_atomistic()


def test_boolean_generators_are_atoms():
    B = LATTICES["2^3"]
    assert B.generators() == B.atoms
    assert B.is_atomic() and B.is_atomistic()


def test_generators_generate():
    for L in LATTICES.values():
        assert L._closure_mask(L.generators()) == (1 << L.n) - 1


def test_generators_are_minimal():
    for L in LATTICES.values():
        gens = L.generators()
        for g in gens:
            assert L._closure_mask(gens - {g}) != (1 << L.n) - 1


# --------------------------------------------------------------- residuation

MEET_MULT = [n for n in NAMES if LATTICES[n].has_mult()]


@pytest.mark.parametrize("name", MEET_MULT)
def test_residuals_match_brute_force(name):
    L = LATTICES[name]
    mul = L.mul
    for a in range(L.n):
        for b in range(L.n):
            r, l = L.residuals(a, b)
            assert r == oracles.right_residual(L, mul, a, b)
            assert l == oracles.left_residual(L, mul, b, a)


def lukasiewicz3():
    labels = ["0", "h", "1"]
    table = {}
    val = {"0": 0, "h": 1, "1": 2}
    for a in labels:
        for b in labels:
            v = max(0, val[a] + val[b] - 2)
            table[(a, b)] = labels[v]
    return build_lattice(labels, [("0", "h"), ("h", "1")], table, "1", name="luk3")


def test_non_idempotent_monoid():
    L = lukasiewicz3()
    assert L.is_residuated()
    assert L.labels[L.mul("h", "h")] == "0"
    assert L.labels[L.residuals("h", "0")[0]] == "h"
    assert L.is_integrally_closed() and L.is_integral()
    for a in range(L.n):
        for b in range(L.n):
            r, l = L.residuals(a, b)
            assert r == oracles.right_residual(L, L.mul, a, b)
            assert l == oracles.left_residual(L, L.mul, b, a)


def test_non_integral_unit():
    # the two-element chain with multiplication "meet", but unit declared... the
    # 3-chain with unit a: a*1 must be 1, so a*a = a and 1*1 = 1
    labels = ["0", "a", "1"]
    table = {("0", x): "0" for x in labels}
    table.update({(x, "0"): "0" for x in labels})
    table.update({("a", "a"): "a", ("a", "1"): "1", ("1", "a"): "1", ("1", "1"): "1"})
    L = build_lattice(labels, [("0", "a"), ("a", "1")], table, "a")
    assert L.unit == L.index("a")
    assert not L.is_integral()


def test_bad_monoids():
    with pytest.raises(BadMonoid, match="no entry"):
        build_lattice(["0", "1"], [("0", "1")], {("0", "0"): "0"})
    with pytest.raises(BadMonoid, match="unit"):
        build_lattice(["0", "1"], [("0", "1")], {("0", "0"): "0", ("0", "1"): "0", ("1", "0"): "0", ("1", "1"): "0"})
    with pytest.raises(BadMonoid, match="not a unit"):
        build_lattice(["0", "1"], [("0", "1")], "meet", "0")
    with pytest.raises(BadMonoid):
        build_lattice(["0", "1"], [("0", "1")], "plus")


def test_missing_mult_raises():
    N5 = LATTICES["N5"]
    assert not N5.is_residuated()
    with pytest.raises(NotResiduated):
        N5.residuals(0, 1)
    with pytest.raises(NotResiduated):
        N5.mul(0, 1)


# ------------------------------------------------------------------- ring sum

@pytest.mark.parametrize("name", ["2^3", "L1", "L2", "L", "M", "2-chain"])
def test_ring_sum_and_difference(name):
    L = LATTICES[name]
    assert L.has_ring_sum()
    for a in range(L.n):
        assert L.ring_sum(a, a) == L.bottom
        for b in range(L.n):
            assert L.ring_sum(a, b) == oracles.ring_sum(L, a, b)
            assert L.set_difference(a, b) == oracles.set_difference(L, a, b)


def test_ring_sum_named_example():
    L2 = LATTICES["L2"]
    assert L2.labels[L2.ring_sum("bora", "born")] == "aorn"


def test_ring_sum_outside_lattice():
    # subsets 0, p, q, s, pq, pqs: atom sets are distinct, but p + s = {p, s} is missing
    V = build_lattice(
        ["0", "p", "q", "s", "pq", "1"],
        [("0", "p"), ("0", "q"), ("0", "s"), ("p", "pq"), ("q", "pq"), ("pq", "1"), ("s", "1")],
    )
    assert V.is_atom_representable()
    assert not V.has_ring_sum()
    assert V.labels[V.ring_sum("pq", "1")] == "s"
    with pytest.raises(SumNotInLattice):
        V.ring_sum("p", "s")
    C3 = LATTICES["3-chain"]
    assert not C3.is_atom_representable()


def test_not_atom_representable():
    N5 = LATTICES["N5"]
    assert not N5.is_atom_representable()
    with pytest.raises(NotAtomRepresentable):
        N5.ring_sum("a", "b")
    with pytest.raises(NotAtomRepresentable):
        N5.atom_repr()


# ------------------------------------------------------------ construction

def test_construction_errors():
    with pytest.raises(DuplicateLabel):
        build_lattice(["0", "0"], [])
    with pytest.raises(CycleInOrder):
        build_lattice(["0", "a", "b", "1"], [("0", "a"), ("a", "b"), ("b", "a"), ("b", "1")])
    with pytest.raises(ForeignElement):
        build_lattice(["0", "1"], [("0", "2")])
    with pytest.raises(NotALattice):
        # two maximal elements
        build_lattice(["0", "a", "b"], [("0", "a"), ("0", "b")])
    with pytest.raises(NotALattice):
        # a and b have two minimal upper bounds
        build_lattice(
            ["0", "a", "b", "c", "d", "1"],
            [("0", "a"), ("0", "b"), ("a", "c"), ("b", "c"), ("a", "d"), ("b", "d"), ("c", "1"), ("d", "1")],
        )
    with pytest.raises(NotALattice):
        build_lattice([], [])
    with pytest.raises(BadLabel):
        build_lattice(["0", "a b"], [("0", "a b")])


def test_foreign_elements():
    L = LATTICES["diamond"]
    for bad in ("z", -1, 4, True, 1.0):
        with pytest.raises(ForeignElement):
            L.index(bad)


def test_size_cap(monkeypatch):
    monkeypatch.setenv("MVCM_MAX_LATTICE", "5")
    with pytest.raises(LatticeTooLarge):
        chain([str(i) for i in range(6)])
    monkeypatch.setenv("MVCM_MAX_LATTICE", "6")
    assert chain([str(i) for i in range(6)]).n == 6


def test_unvalidated_large_lattice():
    L = build_lattice([str(i) for i in range(300)], [(str(i), str(i + 1)) for i in range(299)],
                      exhaustive=False)
    assert L.n == 300 and L.join("3", "7") == L.index("7")
    assert L.is_distributive()


def test_product_labels_and_order():
    L1, L2 = LATTICES["L1"], LATTICES["L2"]
    P = product(L2, L1)
    assert "0c" in P.labels and "b" in P.labels and "borah" in P.labels
    Q = product(LATTICES["2-chain"], LATTICES["2-chain"])
    # "0"+"1" and "1"+"0"->"1" would be fine, but "1"+"1" = "11" is unique too
    assert Q.n == 4
    R = product(L1, L1)
    assert R.n == 16 and len(set(R.labels)) == 16
    P2 = product(L2, L1, pair_labels=True)
    assert "b|c" in P2.labels
    for a in range(P.n):
        for b in range(P.n):
            (a1, a2), (b1, b2) = P.components[a], P.components[b]
            assert P.leq(a, b) == (L2.leq(a1, b1) and L1.leq(a2, b2))


def test_ambiguous_product_labels_fall_back():
    A = chain(["0", "a", "ab"], name="A")
    B = chain(["0", "b"], name="B")
    P = product(A, B)  # (a, b) and (ab, 0) would both read "ab"
    assert all("|" in lab for lab in P.labels)


def test_equality_and_hash():
    a = chain(["0", "1"])
    b = chain(["0", "1"])
    assert a == b and hash(a) == hash(b)
    assert a != chain(["0", "1"], mult=None)
    assert a != chain(["0", "2"])


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_subset_lattices(data):
    """Down-closed families of subsets ordered by inclusion are distributive
    lattices when closed under union and intersection; check the tables."""
    k = data.draw(st.integers(1, 3))
    universe = list(range(k))
    subsets = [frozenset(c) for r in range(k + 1) for c in itertools.combinations(universe, r)]
    family = {frozenset(), frozenset(universe)}
    family |= set(data.draw(st.lists(st.sampled_from(subsets), max_size=6)))
    changed = True
    while changed:
        changed = False
        for a in list(family):
            for b in list(family):
                for c in (a | b, a & b):
                    if c not in family:
                        family.add(c)
                        changed = True
    members = sorted(family, key=lambda s: (len(s), sorted(s)))
    labels = ["s" + "".join(map(str, sorted(s))) for s in members]
    covers = [
        (labels[i], labels[j]) for i, a in enumerate(members) for j, b in enumerate(members)
        if a < b and not any(a < c < b for c in members)
    ]
    L = build_lattice(labels, covers, "meet")
    assert L.is_distributive() and L.is_brouwer()
    for i, a in enumerate(members):
        for j, b in enumerate(members):
            assert L.labels[L.join(i, j)] == labels[members.index(a | b)]
            assert L.labels[L.meet(i, j)] == labels[members.index(a & b)]
            assert L.heyting_implies(i, j) == oracles.implies(L, i, j)
