"""Multi-valued cognitive maps.

Concept values, weights and coefficients are multi-valued sets over a
carrier lattice ``L`` (values) and a scale lattice ``M`` (confidences).  One
iteration computes, for every concept ``i``::

    A_i(k) = c_i(k-1) ^ f_i(k-1) ^ COMBINE_j (w_ji ^ A_j(k-1))

where COMBINE is the lattice join or the ring sum, evaluated through
:func:`~mvlattice.mvset.extend` so supports and confidences propagate
together.  Afterwards the coefficients are refreshed::

    f_i(k) = I_i(k) => (A_i(k) v A_i(k-1))
    r_i(k) = I_i(k) => (A_i(k) ^ A_i(k-1))
    c_i(k) = top, or f_i(k) => r_i(k) once the map has looped

with ``I_i(k) = COMBINE_j (w_ji ^ A_j(k))``.  Coefficients are control
parameters rather than assessments, so they always carry the top confidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .aggregation import KINDS, mean_mvset
from .errors import MapSpecError, MismatchedScales, NotAtomRepresentable, NotBrouwer
from .lattice import Lattice
from .mvset import MVSet, extend, image
from .terms import Const, Expr, Implies, Join, LatticeTerm, Meet, Var, fold

JOIN = "join"
SUM = "sum"
COMBINES = (JOIN, SUM)
MERGED = "*"


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """One expert's weights: ``cells[(j, i)]`` is the influence of concept
    ``j`` on concept ``i``.  Missing or empty cells mean no influence."""

    cells: Mapping[tuple[int, int], MVSet]
    name: str | None = None

    def cell(self, j: int, i: int) -> MVSet | None:
        w = self.cells.get((j, i))
        return w if w else None


@dataclass(frozen=True, eq=False)
class MapSpec:
    concepts: tuple[str, ...]
    carrier: Lattice
    scale: Lattice
    initial: tuple[MVSet, ...]
    matrices: tuple[WeightMatrix, ...]
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "concepts", tuple(self.concepts))
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "matrices", tuple(self.matrices))
        n = len(self.concepts)
        if n == 0:
            raise MapSpecError("a map needs at least one concept")
        if len(set(self.concepts)) != n:
            raise MapSpecError("concept names must be distinct")
        if len(self.initial) != n:
            raise MapSpecError(f"{n} concepts but {len(self.initial)} initial values")
        if not self.matrices:
            raise MapSpecError("a map needs at least one weight matrix")
        for A in self.initial:
            self._check_scales(A)
        for m, W in enumerate(self.matrices):
            for (j, i), w in W.cells.items():
                if not (0 <= j < n and 0 <= i < n):
                    raise MapSpecError(f"matrix {m + 1} has a cell outside the {n} concepts")
                self._check_scales(w)

    def _check_scales(self, A: MVSet):
        if A.carrier != self.carrier or A.scale != self.scale:
            raise MismatchedScales("map values must live in the map's carrier and scale")

    @property
    def n(self) -> int:
        return len(self.concepts)

    def index(self, concept: str) -> int:
        try:
            return self.concepts.index(concept)
        except ValueError:
            raise MapSpecError(f"unknown concept {concept!r}") from None

    def crisp(self, x) -> MVSet:
        return MVSet.singleton(self.carrier, self.scale, x)


@dataclass(frozen=True)
class MapState:
    k: int
    values: tuple[MVSet, ...]
    f: tuple[MVSet, ...]
    r: tuple[MVSet, ...]
    c: tuple[MVSet, ...]
    looped: bool = False

    def key(self):
        return (self.values, self.f, self.r, self.c, self.looped)


def initial_state(spec: MapSpec) -> MapState:
    top = (spec.crisp(spec.carrier.top),) * spec.n
    return MapState(0, spec.initial, top, top, top)


def _check_combine(spec: MapSpec, combine: str) -> None:
    if combine not in COMBINES:
        raise ValueError(f"combine must be one of {COMBINES}, not {combine!r}")
    L = spec.carrier
    if not L.is_brouwer():
        raise NotBrouwer(f"map carrier {L._display()} must be a Brouwer lattice")
    if combine == SUM:
        for lat in (spec.carrier, spec.scale):
            if not lat.has_ring_sum():
                raise NotAtomRepresentable(
                    f"sum mode needs a ring sum on {lat._display()}"
                )


def _incoming(spec: MapSpec, i: int, matrix: int) -> list[int]:
    W = spec.matrices[matrix]
    return [j for j in range(spec.n) if W.cell(j, i) is not None]


def _influence(js: Sequence[int], combine: str, L: Lattice) -> Expr:
    if not js:
        return Const(L.labels[L.bottom])
    parts = [Meet(Var(f"w{j}"), Var(f"a{j}")) for j in js]
    return fold("or" if combine == JOIN else "xor", parts)


def _update(spec: MapSpec, state: MapState, i: int, combine: str, matrix: int) -> MVSet:
    L, M = spec.carrier, spec.scale
    js = _incoming(spec, i, matrix)
    if not js:
        # nothing flows in: the influence is the empty join, known for certain
        return MVSet.singleton(L, M, L.bottom)
    W = spec.matrices[matrix]
    params = ["c", "f"]
    args = [state.c[i], state.f[i]]
    for j in js:
        params += [f"w{j}", f"a{j}"]
        args += [W.cells[(j, i)], state.values[j]]
    body = Meet(Var("c"), Meet(Var("f"), _influence(js, combine, L)))
    return extend(LatticeTerm(tuple(params), body), args)


def _coefficient_terms(spec: MapSpec, i: int, combine: str, matrix: int):
    """Parameters plus the bodies of f, r and the looped choice of c."""
    L = spec.carrier
    js = _incoming(spec, i, matrix)
    infl = _influence(js, combine, L)
    cur, prev = Var(f"a{i}"), Var("prev")
    f_body = Implies(infl, Join(cur, prev))
    r_body = Implies(infl, Meet(cur, prev))
    params = []
    for j in js:
        params.append(f"w{j}")
    for j in sorted(set(js) | {i}):
        params.append(f"a{j}")
    params.append("prev")
    return js, tuple(params), f_body, r_body


def _coefficient_supports(spec, i, js, params, values, prev_values, matrix):
    W = spec.matrices[matrix]
    sup = {f"w{j}": W.cells[(j, i)].support() for j in js}
    sup.update({f"a{j}": values[j].support() for j in range(spec.n)})
    sup["prev"] = prev_values[i].support()
    return [sup[p] for p in params]


def _coefficients(spec: MapSpec, values, prev_values, combine: str, matrix: int, looped: bool):
    L, M = spec.carrier, spec.scale
    fs, rs, cs = [], [], []
    for i in range(spec.n):
        js, params, f_body, r_body = _coefficient_terms(spec, i, combine, matrix)
        sups = _coefficient_supports(spec, i, js, params, values, prev_values, matrix)
        f = image(LatticeTerm(params, f_body), L, sups)
        r = image(LatticeTerm(params, r_body), L, sups)
        if looped:
            c = image(LatticeTerm(params, Implies(f_body, r_body)), L, sups)
        else:
            c = {L.top}
        fs.append(MVSet(L, M, [(x, M.top) for x in f]))
        rs.append(MVSet(L, M, [(x, M.top) for x in r]))
        cs.append(MVSet(L, M, [(x, M.top) for x in c]))
    return tuple(fs), tuple(rs), tuple(cs)


def _as_state(values) -> tuple:
    return values.values if isinstance(values, MapState) else tuple(values)


def coeff_f(spec: MapSpec, state_k, state_km1, combine: str = JOIN, matrix: int = 0) -> tuple[MVSet, ...]:
    """``f_i = I_i => (A_i(k) v A_i(k-1))`` for every concept."""
    _check_combine(spec, combine)
    return _coefficients(spec, _as_state(state_k), _as_state(state_km1), combine, matrix, False)[0]


def coeff_r(spec: MapSpec, state_k, state_km1, combine: str = JOIN, matrix: int = 0) -> tuple[MVSet, ...]:
    """``r_i = I_i => (A_i(k) ^ A_i(k-1))`` for every concept."""
    _check_combine(spec, combine)
    return _coefficients(spec, _as_state(state_k), _as_state(state_km1), combine, matrix, False)[1]


def choose_c(L: Lattice, f, r, looped: bool) -> int:
    """Top until the map loops, then the smallest admissible ``f => r``."""
    if not looped:
        return L.top
    return L.heyting_implies(f, r)


def step(spec: MapSpec, state: MapState, combine: str = JOIN, matrix: int = 0) -> MapState:
    """One iteration using weight matrix ``matrix`` (0-based)."""
    _check_combine(spec, combine)
    if not 0 <= matrix < len(spec.matrices):
        raise MapSpecError(f"matrix index {matrix} out of range")
    values = tuple(_update(spec, state, i, combine, matrix) for i in range(spec.n))
    f, r, c = _coefficients(spec, values, state.values, combine, matrix, state.looped)
    return MapState(state.k + 1, values, f, r, c, state.looped)


def mark_looped(spec: MapSpec, state: MapState, prev: MapState, combine: str, matrix: int) -> MapState:
    """Switch ``state`` to the corrective choice of c."""
    f, r, c = _coefficients(spec, state.values, prev.values, combine, matrix, True)
    return replace(state, f=f, r=r, c=c, looped=True)


def detect_cycle(history: Sequence) -> int | None:
    """Length of the cycle closed by the last entry of ``history``, if any."""
    if not history:
        return None
    last = history[-1]
    for back in range(len(history) - 2, -1, -1):
        if history[back] == last:
            return len(history) - 1 - back
    return None


# --------------------------------------------------------------------- runs

CONVERGED = "converged"
NOT_CONVERGED = "not-converged"
LOOPED = "looped"      # a cycle survived the corrective coefficients


@dataclass
class BranchRun:
    branch: str
    states: list[MapState]
    status: str = NOT_CONVERGED
    converged_at: int | None = None
    loops: list[tuple[int, int]] = field(default_factory=list)  # (k, cycle length)


def run_schedule(spec: MapSpec, combine: str, schedule: Sequence[int], max_iter: int,
                 branch: str = "") -> BranchRun:
    """Iterate with ``schedule[k-1]`` as the matrix of step k; the last entry
    repeats forever.  Fixed points and loops are only judged once the
    schedule has become constant."""
    _check_combine(spec, combine)
    if not schedule:
        raise MapSpecError("empty matrix schedule")
    out = BranchRun(branch, [initial_state(spec)])
    settle = len(schedule) - 1          # from this state on the matrix never changes
    seen: dict = {}
    if settle == 0:
        seen[out.states[0].key()] = 0
    for k in range(1, max_iter + 1):
        matrix = schedule[min(k, len(schedule)) - 1]
        prev = out.states[-1]
        cur = step(spec, prev, combine, matrix)
        out.states.append(cur)
        if k < settle:
            continue
        key = cur.key()
        if key in seen:
            length = k - seen[key]
            if length == 1:
                out.status = CONVERGED
                out.converged_at = k
                return out
            out.loops.append((k, length))
            if cur.looped:
                # the corrective coefficients did not break the cycle
                out.status = LOOPED
                return out
            cur = mark_looped(spec, cur, prev, combine, matrix)
            out.states[-1] = cur
            seen = {}
            key = cur.key()
        seen[key] = k
    return out


@dataclass
class TraceRow:
    k: int
    branch: str
    concept: str
    values: MVSet
    f: MVSet
    r: MVSet
    c: MVSet


@dataclass
class TraceTable:
    concepts: tuple[str, ...]
    combine: str
    weights: str
    rows: list[TraceRow] = field(default_factory=list)
    status: str = NOT_CONVERGED
    converged_at: int | None = None
    branches: list[BranchRun] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def terminated(self) -> bool:
        """Stopped at a fixed point or at a cycle the correction could not break."""
        return self.status != NOT_CONVERGED

    def branch_ids(self) -> list[str]:
        seen = []
        for row in self.rows:
            if row.branch not in seen:
                seen.append(row.branch)
        return seen

    def final(self, branch: str | None = None) -> dict[str, MVSet]:
        """Concept values at the last recorded iteration of a branch
        (the merged branch for enumerate runs)."""
        if branch is None:
            branch = self.branch_ids()[0]
        rows = [r for r in self.rows if r.branch == branch]
        last = max(r.k for r in rows)
        return {r.concept: r.values for r in rows if r.k == last}

    def series(self, concept: str, branch: str | None = None) -> list[MVSet]:
        if branch is None:
            branch = self.branch_ids()[0]
        return [r.values for r in self.rows if r.branch == branch and r.concept == concept]


def parse_weights(weights) -> tuple[str, int | None]:
    """``"enumerate" | "pessimistic" | "optimistic" | "single:<i>"`` (1-based)."""
    if isinstance(weights, int):
        return "single", weights
    if weights in ("enumerate",) + KINDS:
        return weights, None
    if isinstance(weights, str) and weights.startswith("single:"):
        try:
            return "single", int(weights.split(":", 1)[1])
        except ValueError:
            pass
    raise ValueError(f"bad weight mode {weights!r}")


def mean_spec(spec: MapSpec, kind: str) -> MapSpec:
    """Collapse all expert matrices into one whose cells are the means."""
    keys = sorted({key for W in spec.matrices for key, w in W.cells.items() if w})
    cells = {}
    for key in keys:
        present = [W.cells[key] for W in spec.matrices if W.cells.get(key)]
        cells[key] = present[0] if len(present) == 1 else mean_mvset(kind, present)
    return replace(spec, matrices=(WeightMatrix(cells, name=kind),))


def _rows_for(spec, branch_id, states, rows):
    for s in states:
        for i, name in enumerate(spec.concepts):
            rows.append(TraceRow(s.k, branch_id, name, s.values[i], s.f[i], s.r[i], s.c[i]))


def run(spec: MapSpec, combine: str = JOIN, weights="single:1", max_iter: int = 50,
        branch_depth: int = 4) -> TraceTable:
    """Iterate a map until every branch reaches a fixed point or ``max_iter``.

    ``weights`` selects one expert matrix (``single:<i>``, 1-based), the
    pessimistic or optimistic mean of all matrices, or ``enumerate``: every
    sequence of matrix choices over the first ``branch_depth`` steps, each
    continuing with its last choice, merged per iteration by joining
    confidences of equal values.
    """
    mode, index = parse_weights(weights)
    _check_combine(spec, combine)
    if max_iter < 0:
        raise ValueError("max_iter must be non-negative")
    table = TraceTable(spec.concepts, combine, weights if isinstance(weights, str) else f"single:{weights}")

    if mode in KINDS:
        mspec = mean_spec(spec, mode)
        b = run_schedule(mspec, combine, [0], max_iter, branch=mode)
        branches = [b]
    elif mode == "single":
        if not 1 <= index <= len(spec.matrices):
            raise MapSpecError(f"matrix {index} does not exist (map has {len(spec.matrices)})")
        branches = [run_schedule(spec, combine, [index - 1], max_iter, branch=str(index))]
    else:
        if branch_depth < 1:
            raise ValueError("branch_depth must be at least 1")
        m = len(spec.matrices)
        branches = []
        for sched in itertools.product(range(m), repeat=branch_depth):
            bid = "".join(str(x + 1) for x in sched)
            branches.append(run_schedule(spec, combine, list(sched), max_iter, branch=bid))

    table.branches = branches
    statuses = {b.status for b in branches}
    if NOT_CONVERGED in statuses:
        table.status = NOT_CONVERGED
    elif LOOPED in statuses:
        table.status = LOOPED
    else:
        table.status = CONVERGED
    done = [b.converged_at for b in branches if b.converged_at is not None]
    table.converged_at = max(done) if done else None

    rows: list[TraceRow] = []
    if mode == "enumerate":
        length = max(len(b.states) for b in branches)
        padded = [b.states + [replace(b.states[-1], k=k) for k in range(len(b.states), length)]
                  for b in branches]
        merged = []
        for k in range(length):
            col = [p[k] for p in padded]
            merged.append(MapState(
                k,
                *(tuple(_union(getattr(s, attr)[i] for s in col) for i in range(spec.n))
                  for attr in ("values", "f", "r", "c")),
                looped=any(s.looped for s in col),
            ))
        _rows_for(spec, MERGED, merged, rows)
        seen = set()
        for b, p in zip(branches, padded):
            traj = tuple(s.key() for s in p)
            if traj in seen:
                continue
            seen.add(traj)
            _rows_for(spec, b.branch, b.states, rows)
    else:
        for b in branches:
            _rows_for(spec, b.branch, b.states, rows)
    table.rows = rows
    return table


def _union(sets) -> MVSet:
    sets = list(sets)
    acc = sets[0]
    for s in sets[1:]:
        acc = acc | s
    return acc


# ---------------------------------------------------------------- rendering

TSV_COLUMNS = ("k", "branch", "concept", "values", "confidences", "f", "r", "c")


def _elements(A: MVSet) -> str:
    return ";".join(A.carrier.labels[x] for x, _ in A.items()) or "-"


def _confs(A: MVSet) -> str:
    return ";".join(A.scale.labels[m] for _, m in A.items()) or "-"


def _md(text: str) -> str:
    return text.replace("|", "\\|")


def render_trace(t: TraceTable, format: str = "tsv") -> str:
    """Render a trace as TSV (one row per iteration, branch and concept) or
    as Markdown tables with a concept per row and an iteration per column."""
    if format == "tsv":
        lines = ["\t".join(TSV_COLUMNS)]
        for row in t.rows:
            lines.append("\t".join([
                str(row.k), row.branch, row.concept, _elements(row.values), _confs(row.values),
                _elements(row.f), _elements(row.r), _elements(row.c),
            ]))
        return "\n".join(lines) + "\n"
    if format != "markdown":
        raise ValueError(f"unknown trace format {format!r}")
    if not t.rows:
        return "| concept |\n|---|\n"
    out = []
    for bid in t.branch_ids():
        rows = [r for r in t.rows if r.branch == bid]
        ks = sorted({r.k for r in rows})
        cell = {(r.concept, r.k): r for r in rows}
        head = "| concept | " + " | ".join(f"k={k}" for k in ks) + " |"
        rule = "|---" * (len(ks) + 1) + "|"
        out.append(f"branch {bid} values")
        out.append("")
        out += [head, rule]
        for name in t.concepts:
            out.append(f"| {_md(name)} | " + " | ".join(
                _md(str(cell[(name, k)].values)) if (name, k) in cell else "" for k in ks) + " |")
        out.append("")
        out.append(f"branch {bid} coefficients f / r / c")
        out.append("")
        out += [head, rule]
        for name in t.concepts:
            vals = []
            for k in ks:
                r = cell.get((name, k))
                vals.append(_md(f"{_elements(r.f)} / {_elements(r.r)} / {_elements(r.c)}") if r else "")
            out.append(f"| {_md(name)} | " + " | ".join(vals) + " |")
        out.append("")
    return "\n".join(out)
