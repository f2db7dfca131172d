"""Finite bounded lattices with optional monoid multiplication.

Elements are small integers ``0 .. n-1``; every public method also accepts an
element label and normalises it through :meth:`Lattice.index`.  All tables
(join, meet, implication, residuals, ring sum) are computed and checked when
the lattice is built, so after construction the only runtime failure is a
foreign element or an operation the structure does not support.
"""

from __future__ import annotations

import itertools
import os
import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadMonoid,
    CycleInOrder,
    DuplicateLabel,
    ForeignElement,
    LatticeTooLarge,
    BadLabel,
    NotALattice,
    NotAtomRepresentable,
    NotBrouwer,
    NotResiduated,
    SumNotInLattice,
)

DEFAULT_MAX_ELEMENTS = 256
# labels must be single words of the text format
LABEL_RE = re.compile(r"^[\w.?!+'|/*]+$")


def max_elements() -> int:
    """Soft cap on lattice size for exhaustive validation (``MVCM_MAX_LATTICE``)."""
    raw = os.environ.get("MVCM_MAX_LATTICE")
    if raw:
        try:
            return int(raw)
        except ValueError:
            pass
    return DEFAULT_MAX_ELEMENTS


def _extremum(sets: np.ndarray, leq: np.ndarray, greatest: bool):
    """For each row of ``sets`` (boolean membership over elements) find the
    element of the set that is above (or below) every other member.

    Returns ``(index, ok)``; ``ok`` is False where no such element exists.
    """
    s = sets.astype(np.float32)
    # count[r, c] = number of members x with x <= c (greatest) / c <= x (least)
    count = s @ (leq if greatest else leq.T).astype(np.float32)
    size = s.sum(axis=1, keepdims=True)
    hit = sets & (count == size)
    ok = hit.sum(axis=1) == 1
    return hit.argmax(axis=1), ok


class Lattice:
    """An immutable finite bounded lattice.

    Build instances with :func:`build_lattice` or :func:`product`; the
    constructor expects an already transitive order relation.
    """

    def __init__(
        self,
        labels: Sequence[str],
        leq: np.ndarray,
        mult: np.ndarray | None = None,
        unit: int | None = None,
        *,
        name: str | None = None,
        exhaustive: bool = True,
        components: Sequence[tuple[int, int]] | None = None,
        factors: tuple["Lattice", "Lattice"] | None = None,
    ):
        self.name = name
        self.labels = tuple(labels)
        self.n = n = len(self.labels)
        if n == 0:
            raise NotALattice("a lattice needs at least one element")
        seen = {}
        for i, lab in enumerate(self.labels):
            if not isinstance(lab, str) or not LABEL_RE.match(lab):
                raise BadLabel(f"{lab!r} is not a valid element label")
            if lab in seen:
                raise DuplicateLabel(f"label {lab!r} declared twice")
            seen[lab] = i
        self._index = seen
        if exhaustive and n > max_elements():
            raise LatticeTooLarge(
                f"{n} elements exceeds the validation cap of {max_elements()} "
                "(pass exhaustive=False or raise MVCM_MAX_LATTICE)"
            )
        self.exhaustive = exhaustive
        self.components = tuple(components) if components is not None else None
        self.factors = factors

        leq = np.asarray(leq, dtype=bool).copy()
        leq[np.arange(n), np.arange(n)] = True
        leq.flags.writeable = False
        self._leq_np = leq
        self._leq = leq.tolist()

        join = np.empty((n, n), dtype=np.int64)
        meet = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            up = leq[a][None, :] & leq
            idx, ok = _extremum(up, leq, greatest=False)
            if not ok.all():
                b = int(np.flatnonzero(~ok)[0])
                raise NotALattice(
                    f"{self.labels[a]!r} and {self.labels[b]!r} have no least upper bound"
                )
            join[a] = idx
            down = leq[:, a][None, :] & leq.T
            idx, ok = _extremum(down, leq, greatest=True)
            if not ok.all():
                b = int(np.flatnonzero(~ok)[0])
                raise NotALattice(
                    f"{self.labels[a]!r} and {self.labels[b]!r} have no greatest lower bound"
                )
            meet[a] = idx
        self._join_np, self._meet_np = join, meet
        self._join = join.tolist()
        self._meet = meet.tolist()

        self.bottom = int(np.flatnonzero(leq.all(axis=1))[0])
        self.top = int(np.flatnonzero(leq.all(axis=0))[0])
        self.atoms = frozenset(
            x for x in range(n) if x != self.bottom and int(leq[:, x].sum()) == 2
        )

        self._distributive = self._check_distributive() if exhaustive else None
        self._imp = self._heyting_table()

        self.mult = None
        self.unit = None
        self._rres = self._lres = None
        self._residuated_error = "no multiplication declared"
        if mult is not None:
            self._install_mult(np.asarray(mult, dtype=np.int64), unit)

        self._init_atom_repr()
        self._key = (
            self.labels,
            leq.tobytes(),
            None if self.mult is None else (bytes(np.asarray(self.mult).tobytes()), self.unit),
        )

    # ------------------------------------------------------------------ basics

    def __repr__(self):
        name = f" {self.name}" if self.name else ""
        return f"<Lattice{name} with {self.n} elements>"

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(range(self.n))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def index(self, x) -> int:
        """Normalise an element given as id or label; raise ForeignElement."""
        if isinstance(x, str):
            try:
                return self._index[x]
            except KeyError:
                raise ForeignElement(f"{x!r} is not an element of {self._display()}") from None
        if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
            if 0 <= x < self.n:
                return int(x)
        raise ForeignElement(f"{x!r} is not an element of {self._display()}")

    def label(self, x) -> str:
        return self.labels[self.index(x)]

    def labels_of(self, xs: Iterable) -> list[str]:
        return [self.labels[i] for i in sorted(self.index(x) for x in xs)]

    def has_label(self, label: str) -> bool:
        return label in self._index

    def pair_label(self, x) -> str:
        """Full ``(l1,l2)`` label for elements of a product lattice."""
        i = self.index(x)
        if self.components is None:
            return self.labels[i]
        a, b = self.components[i]
        f1, f2 = self.factors
        return f"({f1.labels[a]},{f2.labels[b]})"

    def _display(self):
        return f"lattice {self.name}" if self.name else "the lattice"

    # ------------------------------------------------------- order operations

    def leq(self, a, b) -> bool:
        return self._leq[self.index(a)][self.index(b)]

    def join(self, a, b) -> int:
        return self._join[self.index(a)][self.index(b)]

    def meet(self, a, b) -> int:
        return self._meet[self.index(a)][self.index(b)]

    def join_all(self, xs: Iterable) -> int:
        acc = self.bottom
        for x in xs:
            acc = self._join[acc][self.index(x)]
        return acc

    def meet_all(self, xs: Iterable) -> int:
        acc = self.top
        for x in xs:
            acc = self._meet[acc][self.index(x)]
        return acc

    def upper_covers(self, a) -> list[int]:
        a = self.index(a)
        above = [x for x in range(self.n) if x != a and self._leq[a][x]]
        return [x for x in above if not any(y != x and self._leq[y][x] for y in above)]

    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram edges ``(lower, upper)``."""
        return [(a, b) for a in range(self.n) for b in self.upper_covers(a)]

    # ------------------------------------------------------------- structure

    def _check_distributive(self) -> bool:
        j, m = self._join_np, self._meet_np
        for a in range(self.n):
            lhs = m[a][j]                      # a ^ (b v c)
            rhs = j[m[a][:, None], m[a][None, :]]  # (a ^ b) v (a ^ c)
            if not np.array_equal(lhs, rhs):
                b, c = np.argwhere(lhs != rhs)[0]
                self._distributive_witness = (a, int(b), int(c))
                return False
        self._distributive_witness = None
        return True

    def is_distributive(self) -> bool:
        if self._distributive is None:
            return self._check_distributive()
        return self._distributive

    def _heyting_table(self):
        # a => b is the largest c with a ^ c == a ^ b
        m = self._meet_np
        table = np.empty((self.n, self.n), dtype=np.int64)
        for a in range(self.n):
            sets = m[a][None, :] == m[a][:, None]  # [b, c]
            idx, ok = _extremum(sets, self._leq_np, greatest=True)
            if not ok.all():
                b = int(np.flatnonzero(~ok)[0])
                self._brouwer_error = (
                    f"no largest c with {self.labels[a]} ^ c = "
                    f"{self.labels[a]} ^ {self.labels[b]}"
                )
                return None
            table[a] = idx
        self._brouwer_error = None
        return table.tolist()

    def is_brouwer(self) -> bool:
        """Distributive, so the internal implication exists for every pair.

        Some non-distributive lattices (the pentagon N5, for one) still have
        a largest ``c`` with ``a ^ c = a ^ b`` for every pair; they are not
        treated as Brouwer.  With ``exhaustive=False`` distributivity is not
        checked and only the existence of the table counts.
        """
        return self._imp is not None and self._distributive is not False

    def heyting_implies(self, a, b) -> int:
        """Largest ``c`` with ``a ^ c = a ^ b``."""
        a, b = self.index(a), self.index(b)
        if self._imp is None:
            raise NotBrouwer(f"{self._display()} is not Brouwer: {self._brouwer_error}")
        if self._distributive is False:
            x, y, z = (self.labels[i] for i in self._distributive_witness)
            raise NotBrouwer(
                f"{self._display()} is not Brouwer: distributivity fails at "
                f"{x} ^ ({y} v {z})"
            )
        return self._imp[a][b]

    def generators(self) -> frozenset[int]:
        """A minimal generating set, found by greedy elimination.

        Bottom is treated as available for free (the empty join), so it never
        appears in the result.  Elimination tries the tallest elements first
        (most elements below them), smallest id first among equals, so
        composite elements go before the ones they are built from.  Minimal
        generating sets are not unique in general.
        """
        full = (1 << self.n) - 1
        keep = [x for x in range(self.n) if x != self.bottom]
        height = {x: sum(self._leq[y][x] for y in range(self.n)) for x in keep}
        for x in sorted(keep, key=lambda x: (-height[x], x)):
            trial = [y for y in keep if y != x]
            if self._closure_mask(trial) == full:
                keep = trial
        return frozenset(keep)

    def _closure_mask(self, xs) -> int:
        cur = set(xs) | {self.bottom}
        frontier = list(cur)
        while frontier:
            new = []
            for a in frontier:
                for b in list(cur):
                    for c in (self._join[a][b], self._meet[a][b]):
                        if c not in cur:
                            cur.add(c)
                            new.append(c)
            frontier = new
        mask = 0
        for c in cur:
            mask |= 1 << c
        return mask

    def is_atomic(self, using: str = "generators") -> bool:
        """Every two distinct generators meet to bottom.

        ``using="generators"`` tests the greedily computed generating set,
        ``using="atoms"`` tests the atoms, which always holds once the lattice
        is atomistic (see :meth:`atomic_report`).
        """
        if using == "generators":
            gens = self.generators()
        elif using == "atoms":
            if not self.is_atomistic():
                return False
            gens = self.atoms
        else:
            raise ValueError(f"unknown generator reading {using!r}")
        return all(
            self._meet[a][b] == self.bottom for a, b in itertools.combinations(sorted(gens), 2)
        )

    def atomic_report(self) -> dict:
        return {
            "generators": sorted(self.generators()),
            "atomic_generators": self.is_atomic("generators"),
            "atomic_atoms": self.is_atomic("atoms"),
        }

    def is_atomistic(self) -> bool:
        """Standard notion: every element is the join of the atoms below it."""
        return all(
            self.join_all(a for a in self.atoms if self._leq[a][x]) == x for x in range(self.n)
        )

    # ----------------------------------------------------------- residuation

    def _install_mult(self, mult: np.ndarray, unit: int | None):
        n = self.n
        if mult.shape != (n, n) or mult.min() < 0 or mult.max() >= n:
            raise BadMonoid("multiplication table must be total over the elements")
        lab = self.labels
        units = [u for u in range(n) if (mult[u] == np.arange(n)).all()
                 and (mult[:, u] == np.arange(n)).all()]
        if unit is None:
            if not units:
                raise BadMonoid("multiplication has no unit element")
            unit = units[0]
        elif unit not in units:
            raise BadMonoid(f"{lab[unit]!r} is not a unit of the multiplication")
        if (mult[:, self.bottom] != self.bottom).any() or (mult[self.bottom] != self.bottom).any():
            raise BadMonoid("x*0 = 0*x = 0 fails")
        if self.exhaustive:
            j = self._join_np
            for a in range(n):
                lhs = mult[mult[a]]              # (a*b)*c  [b, c]
                rhs = mult[a][mult]              # a*(b*c)
                if not np.array_equal(lhs, rhs):
                    b, c = np.argwhere(lhs != rhs)[0]
                    raise BadMonoid(f"associativity fails at {lab[a]}, {lab[b]}, {lab[c]}")
                if not np.array_equal(mult[a][j], j[mult[a][:, None], mult[a][None, :]]):
                    raise BadMonoid(f"left multiplication by {lab[a]} does not distribute over join")
                if not np.array_equal(mult[:, a][j], j[mult[:, a][:, None], mult[:, a][None, :]]):
                    raise BadMonoid(f"right multiplication by {lab[a]} does not distribute over join")
        mult.flags.writeable = False
        self.mult = mult.tolist()
        self.unit = int(unit)

        leq = self._leq_np
        rres = np.empty((n, n), dtype=np.int64)
        lres = np.empty((n, n), dtype=np.int64)
        self._residuated_error = None
        for a in range(n):
            # a -> b = max{y : a*y <= b};   b <- a = max{x : x*a <= b}
            right = leq[mult[a]].T          # [b, y]
            left = leq[mult[:, a]].T        # [b, x]
            for table, sets, kind in ((rres, right, "->"), (lres, left, "<-")):
                idx, ok = _extremum(sets, leq, greatest=True)
                if not ok.all():
                    b = int(np.flatnonzero(~ok)[0])
                    self._residuated_error = f"residual {lab[a]} {kind} {lab[b]} has no greatest element"
                    return
                table[a] = idx
        if self.exhaustive:
            for x in range(n):
                # [y, z]
                prod = leq[mult[x]]
                via_r = leq[:, rres[x]]
                via_l = leq[x][lres]
                if not (np.array_equal(prod, via_r) and np.array_equal(prod, via_l)):
                    self._residuated_error = f"residuation law fails for x = {lab[x]}"
                    return
        self._rres = rres.tolist()
        self._lres = lres.tolist()

    def has_mult(self) -> bool:
        return self.mult is not None

    def is_residuated(self) -> bool:
        return self._rres is not None

    def mul(self, a, b) -> int:
        if self.mult is None:
            raise NotResiduated(f"{self._display()} has no multiplication")
        return self.mult[self.index(a)][self.index(b)]

    def residuals(self, a, b) -> tuple[int, int]:
        """``(a -> b, b <- a)``: the greatest y with a*y <= b and the greatest
        x with x*a <= b."""
        a, b = self.index(a), self.index(b)
        if self._rres is None:
            raise NotResiduated(f"{self._display()} is not residuated: {self._residuated_error}")
        return self._rres[a][b], self._lres[a][b]

    def is_integrally_closed(self) -> bool:
        if self._rres is None:
            return False
        return all(
            self._rres[x][x] == self.unit and self._lres[x][x] == self.unit for x in range(self.n)
        )

    def is_integral(self) -> bool:
        if self.unit is None:
            return False
        return all(self._leq[x][self.unit] for x in range(self.n))

    # --------------------------------------------------- atoms as generators

    def _init_atom_repr(self):
        atoms = sorted(self.atoms)
        bit = {a: 1 << k for k, a in enumerate(atoms)}
        masks = []
        for x in range(self.n):
            m = 0
            for a in atoms:
                if self._leq[a][x]:
                    m |= bit[a]
            masks.append(m)
        self._atom_list = atoms
        by_mask = {}
        self._atom_error = None
        for x, m in enumerate(masks):
            if m in by_mask:
                self._atom_error = (
                    f"{self.labels[by_mask[m]]!r} and {self.labels[x]!r} "
                    "have the same atoms below them"
                )
                self._atom_masks = None
                self._by_mask = None
                return
            by_mask[m] = x
        self._atom_masks = masks
        self._by_mask = by_mask

    def atom_repr(self) -> dict[int, frozenset[int]]:
        """Map each element to the set of atoms below it (must be injective)."""
        if self._atom_masks is None:
            raise NotAtomRepresentable(
                f"{self._display()} is not atom-representable: {self._atom_error}"
            )
        return {x: self.atoms_below(x) for x in range(self.n)}

    def atoms_below(self, x) -> frozenset[int]:
        x = self.index(x)
        return frozenset(a for a in self._atom_list if self._leq[a][x])

    def is_atom_representable(self) -> bool:
        return self._atom_masks is not None

    def _from_mask(self, mask: int, what: str, a: int, b: int) -> int:
        try:
            return self._by_mask[mask]
        except KeyError:
            atoms = [self.labels[at] for k, at in enumerate(self._atom_list) if mask >> k & 1]
            raise SumNotInLattice(
                f"{what} of {self.labels[a]!r} and {self.labels[b]!r} would have atoms "
                f"{{{', '.join(atoms)}}}, which is no element of {self._display()}"
            ) from None

    def _require_atoms(self):
        if self._atom_masks is None:
            raise NotAtomRepresentable(
                f"{self._display()} is not atom-representable: {self._atom_error}"
            )

    def ring_sum(self, a, b) -> int:
        """Symmetric difference of the atom sets of ``a`` and ``b``."""
        a, b = self.index(a), self.index(b)
        self._require_atoms()
        return self._from_mask(self._atom_masks[a] ^ self._atom_masks[b], "ring sum", a, b)

    def set_difference(self, a, b) -> int:
        a, b = self.index(a), self.index(b)
        self._require_atoms()
        m = self._atom_masks
        return self._from_mask(m[a] & ~m[b], "set difference", a, b)

    def has_ring_sum(self) -> bool:
        """True when the ring sum is defined for every pair of elements."""
        if self._atom_masks is None:
            return False
        masks = self._atom_masks
        return all(masks[a] ^ masks[b] in self._by_mask
                   for a in range(self.n) for b in range(a + 1, self.n))

    # ----------------------------------------------------------------- report

    def structure_report(self) -> dict:
        return {
            "elements": self.n,
            "distributive": self.is_distributive(),
            "brouwer": self.is_brouwer(),
            "atomic": self.is_atomic(),
            "atomic_by_atoms": self.is_atomic("atoms"),
            "atomistic": self.is_atomistic(),
            "residuated": self.is_residuated(),
            "integrally_closed": self.is_integrally_closed(),
            "integral": self.is_integral(),
            "ring_sum": self.has_ring_sum(),
        }


def _order_from_covers(labels: Sequence[str], covers: Iterable[tuple[str, str]]) -> np.ndarray:
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    rel = np.zeros((n, n), dtype=bool)
    for lo, hi in covers:
        for lab in (lo, hi):
            if lab not in index:
                raise ForeignElement(f"cover mentions undeclared element {lab!r}")
        if lo == hi:
            raise CycleInOrder(f"{lo!r} < {lo!r}")
        rel[index[lo], index[hi]] = True
    for k in range(n):
        rel |= rel[:, k:k + 1] & rel[k:k + 1, :]
    cyc = np.flatnonzero(np.diag(rel))
    if len(cyc):
        raise CycleInOrder(f"covers contain a cycle through {labels[cyc[0]]!r}")
    return rel


def build_lattice(
    elements: Sequence[str],
    covers: Iterable[tuple[str, str]],
    mult: str | Mapping[tuple[str, str], str] | None = None,
    unit: str | None = None,
    *,
    name: str | None = None,
    exhaustive: bool = True,
) -> Lattice:
    """Build and validate a lattice from labels and Hasse covers.

    ``mult`` is either ``"meet"`` (Heyting case) or a total table mapping
    label pairs to labels; ``unit`` names the monoid unit (found
    automatically when omitted).
    """
    labels = list(elements)
    seen = set()
    for lab in labels:
        if lab in seen:
            raise DuplicateLabel(f"label {lab!r} declared twice")
        seen.add(lab)
    leq = _order_from_covers(labels, covers)
    lat = Lattice(labels, leq, name=name, exhaustive=exhaustive)
    if mult is None:
        return lat
    table = _mult_table(lat, mult)
    u = lat.index(unit) if unit is not None else None
    return Lattice(labels, leq, table, u, name=name, exhaustive=exhaustive)


def _mult_table(lat: Lattice, mult) -> np.ndarray:
    if isinstance(mult, str):
        if mult == "meet":
            return np.array(lat._meet, dtype=np.int64)
        raise BadMonoid(f"unknown multiplication {mult!r}")
    table = np.full((lat.n, lat.n), -1, dtype=np.int64)
    for (a, b), c in mult.items():
        table[lat.index(a), lat.index(b)] = lat.index(c)
    missing = np.argwhere(table < 0)
    if len(missing):
        a, b = missing[0]
        raise BadMonoid(f"multiplication table has no entry for {lat.labels[a]} * {lat.labels[b]}")
    return table


def product(l1: Lattice, l2: Lattice, *, name: str | None = None, pair_labels: bool = False) -> Lattice:
    """Componentwise product lattice.

    Short labels concatenate the component labels and drop the second one
    when it is that factor's bottom, so ``(b, 0)`` becomes ``b`` and
    ``(0, c)`` becomes ``0c``.  If that scheme is ambiguous (or
    ``pair_labels`` is set) labels are written ``l1|l2``.
    """
    comps = [(a, b) for a in range(l1.n) for b in range(l2.n)]
    labels = [
        l1.labels[a] if b == l2.bottom else l1.labels[a] + l2.labels[b] for a, b in comps
    ]
    if pair_labels or len(set(labels)) != len(labels):
        labels = [f"{l1.labels[a]}|{l2.labels[b]}" for a, b in comps]
    leq1, leq2 = l1._leq_np, l2._leq_np
    leq = np.array([[leq1[a, c] and leq2[b, d] for c, d in comps] for a, b in comps], dtype=bool)
    mult = unit = None
    if l1.mult is not None and l2.mult is not None:
        n2 = l2.n
        m1, m2 = l1.mult, l2.mult
        mult = np.array(
            [[m1[a][c] * n2 + m2[b][d] for c, d in comps] for a, b in comps], dtype=np.int64
        )
        unit = l1.unit * n2 + l2.unit
    exhaustive = l1.exhaustive and l2.exhaustive
    return Lattice(
        labels, leq, mult, unit, name=name, exhaustive=exhaustive,
        components=comps, factors=(l1, l2),
    )


def chain(labels: Sequence[str], *, name: str | None = None, mult: str | None = "meet") -> Lattice:
    """Convenience: a linear order in the given order, bottom first."""
    return build_lattice(labels, zip(labels, labels[1:]), mult, name=name)


def boolean(atoms: Sequence[str], *, name: str | None = None, names: Mapping[frozenset, str] | None = None,
            mult: str | None = "meet") -> Lattice:
    """The lattice of subsets of ``atoms``.

    Subsets are labelled via ``names`` when given, otherwise by joining atom
    labels with ``+`` (the empty set is ``0``).
    """
    subsets = [frozenset(c) for r in range(len(atoms) + 1) for c in itertools.combinations(atoms, r)]

    def lab(s):
        if names and s in names:
            return names[s]
        return "+".join(a for a in atoms if a in s) if s else "0"

    labels = [lab(s) for s in subsets]
    covers = [(lab(s), lab(t)) for s in subsets for t in subsets if s < t and len(t) == len(s) + 1]
    return build_lattice(labels, covers, mult, name=name)
