"""Lattice terms: expression trees interpretable in any compatible lattice.

A term is the same syntactic object whether it is evaluated on carrier
elements or on confidence values; which operations it uses decides where it
can be interpreted.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, ClassVar, Mapping

from .errors import ArityMismatch, DuplicateName, MissingVariable, UninterpretableTerm, UnknownConstant
from .lattice import Lattice

# Constant names that resolve to the bounds of whatever lattice the term is
# evaluated in, unless that lattice has an element with the same label.
TOP = "top"
BOTTOM = "bottom"


class Expr:
    """Base class for term nodes."""

    def variables(self) -> list[str]:
        """Variable occurrences, left to right, with repetition."""
        raise NotImplementedError

    def ops(self) -> set[str]:
        raise NotImplementedError

    def constants(self) -> set[str]:
        raise NotImplementedError


@dataclass(frozen=True)
class Var(Expr):
    name: str

    def variables(self):
        return [self.name]

    def ops(self):
        return set()

    def constants(self):
        return set()

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const(Expr):
    label: str

    def variables(self):
        return []

    def ops(self):
        return set()

    def constants(self):
        return {self.label}

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class BinOp(Expr):
    left: Expr
    right: Expr
    op: ClassVar[str] = ""

    def variables(self):
        return self.left.variables() + self.right.variables()

    def ops(self):
        return {self.op} | self.left.ops() | self.right.ops()

    def constants(self):
        return self.left.constants() | self.right.constants()

    def __str__(self):
        return f"{self.op}({self.left}, {self.right})"


class Join(BinOp):
    op = "or"


class Meet(BinOp):
    op = "and"


class Mult(BinOp):
    op = "mul"


class Implies(BinOp):
    op = "imp"


class RingSum(BinOp):
    op = "xor"


OPS: dict[str, type[BinOp]] = {cls.op: cls for cls in (Join, Meet, Mult, Implies, RingSum)}


def fold(op: str, args: list[Expr]) -> Expr:
    """Left-fold a list of operands into nested binary nodes."""
    cls = OPS[op]
    acc = args[0]
    for nxt in args[1:]:
        acc = cls(acc, nxt)
    return acc


@dataclass(frozen=True)
class LatticeTerm:
    """A term with an ordered parameter list, e.g. ``t(x, y) = or(x, y)``."""

    params: tuple[str, ...]
    body: Expr
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if not self.params:
            raise ArityMismatch("a term needs at least one parameter")
        dup = [p for p, k in Counter(self.params).items() if k > 1]
        if dup:
            raise DuplicateName(f"parameter {dup[0]!r} declared twice")
        free = set(self.body.variables()) - set(self.params)
        if free:
            raise MissingVariable(f"variable {sorted(free)[0]!r} is not a parameter")

    @property
    def arity(self) -> int:
        return len(self.params)

    def __str__(self):
        head = self.name or "t"
        return f"{head}({', '.join(self.params)}) = {self.body}"


def _binop_impl(op: str, L: Lattice) -> Callable[[int, int], int]:
    if op == "or":
        return lambda a, b: L._join[a][b]
    if op == "and":
        return lambda a, b: L._meet[a][b]
    if op == "mul":
        mult = L.mult
        return lambda a, b: mult[a][b]
    if op == "imp":
        if L.is_brouwer():
            imp = L._imp
            return lambda a, b: imp[a][b]
        rres = L._rres
        return lambda a, b: rres[a][b]
    if op == "xor":
        return L.ring_sum
    raise UninterpretableTerm(f"unknown operation {op!r}")


def op_available(op: str, L: Lattice) -> bool:
    if op in ("or", "and"):
        return True
    if op == "mul":
        return L.has_mult()
    if op == "imp":
        return L.is_brouwer() or L.is_residuated()
    if op == "xor":
        return L.has_ring_sum()
    return False


def resolve_constant(label: str, L: Lattice) -> int:
    if L.has_label(label):
        return L.index(label)
    if label == TOP:
        return L.top
    if label == BOTTOM:
        return L.bottom
    raise UnknownConstant(f"constant {label!r} is not an element of {L._display()}")


def check_interpretable(expr: Expr, L: Lattice) -> None:
    """Raise UninterpretableTerm / UnknownConstant if ``expr`` cannot be
    evaluated in ``L``."""
    needs = {
        "mul": "a multiplication",
        "imp": "an implication (Brouwer or residuated structure)",
        "xor": "a total ring sum (atom-representable and closed)",
    }
    for op in sorted(expr.ops()):
        if not op_available(op, L):
            raise UninterpretableTerm(f"'{op}' needs {needs.get(op, op)}, which {L._display()} lacks")
    for c in expr.constants():
        resolve_constant(c, L)


def is_interpretable(expr: Expr | LatticeTerm, L: Lattice) -> bool:
    if isinstance(expr, LatticeTerm):
        expr = expr.body
    try:
        check_interpretable(expr, L)
    except (UninterpretableTerm, UnknownConstant):
        return False
    return True


def compile_expr(expr: Expr, L: Lattice, slots: Mapping[str, int]) -> Callable[[list], int]:
    """Turn ``expr`` into a function of a value list indexed by ``slots``."""
    if isinstance(expr, Var):
        k = slots[expr.name]
        return lambda env: env[k]
    if isinstance(expr, Const):
        c = resolve_constant(expr.label, L)
        return lambda env: c
    f = _binop_impl(expr.op, L)
    lf = compile_expr(expr.left, L, slots)
    rf = compile_expr(expr.right, L, slots)
    return lambda env: f(lf(env), rf(env))


def eval_term(t: LatticeTerm | Expr, L: Lattice, valuation: Mapping[str, object]) -> int:
    """Evaluate a term bottom-up in ``L`` at a valuation (names -> elements)."""
    expr = t.body if isinstance(t, LatticeTerm) else t
    check_interpretable(expr, L)
    names = t.params if isinstance(t, LatticeTerm) else sorted(set(expr.variables()))
    env = []
    for name in names:
        if name not in valuation:
            raise MissingVariable(f"no value given for variable {name!r}")
        env.append(L.index(valuation[name]))
    return compile_expr(expr, L, {n: i for i, n in enumerate(names)})(env)
