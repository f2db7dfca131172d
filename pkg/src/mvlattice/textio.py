"""Text format for lattices, terms, multi-valued sets and maps.

A document is a sequence of blocks::

    # comments run to the end of the line
    lattice C2 { elems 0 1; covers 0<1 }
    lattice D { elems 0 x y 1; covers 0<x<1 0<y<1; mult meet }
    lattice P = product C2 D;
    term t(x, y) = or(x, and(y, top));
    mvset A over D C2 { (x, 1), (y, 1) }
    set S over D { x, y }
    map m over D C2 {
      concepts A B;
      initial A = { (x, 1) };
      initial B = { (y, 1) };
      matrix expert1 { A -> B = { (x, 1) }; }
    }

:func:`parse` checks syntax and names; :func:`build` turns a document into
validated lattices, terms, sets and maps.  :func:`serialize` writes the
canonical form: blocks sorted by kind then name, LF line endings, no
trailing whitespace.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Union

from .aggregation import AssessmentSet
from .errors import (
    DSLSyntaxError,
    DuplicateName,
    MapSpecError,
    MVError,
    UnknownFixture,
    UnresolvedReference,
)
from .lattice import Lattice, build_lattice, product
from .mvcm import MapSpec, WeightMatrix
from .mvset import MVSet
from .terms import OPS, BinOp, Const, Expr, LatticeTerm, Var, fold

Pairs = tuple[tuple[str, str], ...]

# ------------------------------------------------------------------- AST


@dataclass(frozen=True)
class LatticeBlock:
    name: str
    elems: tuple[str, ...]
    covers: tuple[tuple[str, str], ...] = ()
    mult: Union[None, str, tuple[tuple[str, str, str], ...]] = None
    unit: str | None = None
    kind = "lattice"


@dataclass(frozen=True)
class ProductBlock:
    name: str
    left: str
    right: str
    pair_labels: bool = False
    kind = "lattice"


@dataclass(frozen=True)
class TermBlock:
    name: str
    params: tuple[str, ...]
    body: Expr
    kind = "term"


@dataclass(frozen=True)
class MVSetBlock:
    name: str
    carrier: str
    scale: str
    pairs: Pairs
    kind = "mvset"


@dataclass(frozen=True)
class SetBlock:
    name: str
    carrier: str
    elems: tuple[str, ...]
    kind = "set"


@dataclass(frozen=True)
class MatrixBlock:
    name: str | None
    cells: tuple[tuple[str, str, Pairs], ...]


@dataclass(frozen=True)
class MapBlock:
    name: str
    carrier: str
    scale: str
    concepts: tuple[str, ...]
    initial: tuple[tuple[str, Pairs], ...]
    matrices: tuple[MatrixBlock, ...]
    kind = "map"


Block = Union[LatticeBlock, ProductBlock, TermBlock, MVSetBlock, SetBlock, MapBlock]
KIND_ORDER = {"lattice": 0, "term": 1, "mvset": 2, "set": 3, "map": 4}


def _canon_pairs(pairs) -> Pairs:
    return tuple(sorted(set((str(x), str(m)) for x, m in pairs)))


@dataclass(frozen=True)
class Document:
    blocks: tuple[Block, ...] = ()

    def __post_init__(self):
        blocks = tuple(sorted(self.blocks, key=lambda b: (KIND_ORDER[b.kind], b.name)))
        object.__setattr__(self, "blocks", blocks)

    def get(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise UnresolvedReference(f"no block named {name!r}")

    def names(self, kind: str | None = None) -> list[str]:
        return [b.name for b in self.blocks if kind is None or b.kind == kind]


# ----------------------------------------------------------------- lexer

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<punct>[{}(),;=<])
  | (?P<word>[\w.?!+'|/*]+)
    """,
    re.VERBOSE,
)
TERM_OPS = tuple(OPS)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    out = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise DSLSyntaxError(line, col, "a word or punctuation", text[pos])
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("arrow", "punct", "word"):
                out.append(Token("word" if kind == "word" else "punct", s, line, col))
            col += len(s)
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def fail(self, expected: str):
        t = self.tok
        raise DSLSyntaxError(t.line, t.col, expected, t.text if t.kind != "eof" else "end of input")

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.pos += 1
        return t

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def word(self, what: str = "a name") -> str:
        if self.tok.kind != "word":
            self.fail(what)
        s = self.tok.text
        self.pos += 1
        return s

    def words_until(self, stops=(";", "}")) -> list[str]:
        out = []
        while self.tok.kind == "word":
            out.append(self.word())
        if not any(self.at(s) for s in stops):
            self.fail("a label, ';' or '}'")
        return out

    def end_statement(self):
        # ';' separates statements; it is optional before '}' and after a
        # statement that itself ends in a braced body
        if self.accept(";") or self.at("}"):
            return
        if self.pos and self.toks[self.pos - 1].text == "}" and self.toks[self.pos - 1].kind == "punct":
            return
        self.fail("';' or '}'")

    # --------------------------------------------------------- blocks

    def document(self) -> tuple[list[Block], dict]:
        blocks, where = [], {}
        while self.tok.kind != "eof":
            start = self.tok
            kw = self.word("'lattice', 'term', 'mvset', 'set' or 'map'")
            parse = {
                "lattice": self.lattice,
                "term": self.term,
                "mvset": self.mvset,
                "set": self.aset,
                "map": self.map,
            }.get(kw)
            if parse is None:
                self.pos -= 1
                self.fail("'lattice', 'term', 'mvset', 'set' or 'map'")
            block = parse()
            if block.name in where:
                raise DuplicateName(
                    f"line {start.line}: name {block.name!r} already used on line {where[block.name][0]}"
                )
            where[block.name] = (start.line, start.col)
            blocks.append(block)
        return blocks, where

    def lattice(self):
        name = self.word("a lattice name")
        if self.accept("="):
            self.expect("product")
            left = self.word("a lattice name")
            right = self.word("a lattice name")
            pairs = self.accept("pairs")
            self.accept(";")
            return ProductBlock(name, left, right, pairs)
        self.expect("{")
        elems: list[str] = []
        covers: list[tuple[str, str]] = []
        mult = None
        unit = None
        while not self.accept("}"):
            kw = self.word("'elems', 'covers' or 'mult'")
            if kw == "elems":
                elems += self.words_until()
            elif kw == "covers":
                while self.tok.kind == "word":
                    chain = [self.word()]
                    while self.accept("<"):
                        chain.append(self.word("a label after '<'"))
                    if len(chain) < 2:
                        self.fail("'<'")
                    covers += list(zip(chain, chain[1:]))
            elif kw == "mult":
                if self.accept("meet"):
                    mult = "meet"
                else:
                    mult, unit = self.mult_table()
            else:
                self.pos -= 1
                self.fail("'elems', 'covers' or 'mult'")
            self.end_statement()
        self.accept(";")
        return _lattice_block(name, elems, covers, mult, unit)

    def mult_table(self):
        self.expect("{")
        entries = []
        unit = None
        while not self.accept("}"):
            if self.accept("unit"):
                unit = self.word("a unit label")
            else:
                self.expect("mul")
                self.expect("(")
                a = self.word("a label")
                self.expect(",")
                b = self.word("a label")
                self.expect(")")
                self.expect("=")
                c = self.word("a label")
                entries.append((a, b, c))
            self.end_statement()
        return tuple(sorted(set(entries))), unit

    def term(self):
        name = self.word("a term name")
        self.expect("(")
        params = [self.word("a parameter name")]
        while self.accept(","):
            params.append(self.word("a parameter name"))
        self.expect(")")
        self.expect("=")
        body = self.expr(set(params))
        self.accept(";")
        if len(set(params)) != len(params):
            raise DuplicateName(f"term {name!r} repeats a parameter")
        return TermBlock(name, tuple(params), body)

    def expr(self, params: set[str]) -> Expr:
        head = self.word("a term")
        if self.at("(") and head in TERM_OPS:
            self.expect("(")
            args = [self.expr(params)]
            while self.accept(","):
                args.append(self.expr(params))
            self.expect(")")
            if head == "imp" and len(args) != 2:
                self.pos -= 1
                self.fail("exactly two arguments for 'imp'")
            if len(args) < 2:
                self.pos -= 1
                self.fail(f"at least two arguments for {head!r}")
            return fold(head, args)
        if self.at("("):
            self.fail(f"one of {', '.join(TERM_OPS)} before '('")
        return Var(head) if head in params else Const(head)

    def pairs(self) -> Pairs:
        self.expect("{")
        out = []
        while not self.accept("}"):
            self.expect("(")
            x = self.word("an element label")
            self.expect(",")
            m = self.word("a confidence label")
            self.expect(")")
            out.append((x, m))
            if not self.accept(","):
                if not self.at("}"):
                    self.fail("',' or '}'")
        return _canon_pairs(out)

    def mvset(self):
        name = self.word("an mvset name")
        self.expect("over")
        carrier = self.word("a lattice name")
        scale = self.word("a lattice name")
        pairs = self.pairs()
        self.accept(";")
        return MVSetBlock(name, carrier, scale, pairs)

    def aset(self):
        name = self.word("a set name")
        self.expect("over")
        carrier = self.word("a lattice name")
        self.expect("{")
        elems = []
        while not self.accept("}"):
            elems.append(self.word("an element label"))
            if not self.accept(","):
                if not self.at("}"):
                    self.fail("',' or '}'")
        self.accept(";")
        return SetBlock(name, carrier, tuple(sorted(set(elems))))

    def map(self):
        name = self.word("a map name")
        self.expect("over")
        carrier = self.word("a lattice name")
        scale = self.word("a lattice name")
        self.expect("{")
        concepts: list[str] = []
        initial: dict[str, Pairs] = {}
        matrices = []
        while not self.accept("}"):
            kw = self.word("'concepts', 'initial' or 'matrix'")
            if kw == "concepts":
                concepts += self.words_until()
            elif kw == "initial":
                c = self.word("a concept name")
                self.expect("=")
                if c in initial:
                    raise DuplicateName(f"initial value of {c!r} given twice")
                initial[c] = self.pairs()
            elif kw == "matrix":
                mname = None if self.at("{") else self.word("a matrix name")
                self.expect("{")
                cells = {}
                while not self.accept("}"):
                    src = self.word("a concept name")
                    self.expect("->")
                    dst = self.word("a concept name")
                    self.expect("=")
                    if (src, dst) in cells:
                        raise DuplicateName(f"cell {src} -> {dst} given twice")
                    cells[(src, dst)] = self.pairs()
                    self.end_statement()
                matrices.append((mname, cells))
            else:
                self.pos -= 1
                self.fail("'concepts', 'initial' or 'matrix'")
            self.end_statement()
        self.accept(";")
        return _map_block(name, carrier, scale, concepts, initial, matrices)


def _lattice_block(name, elems, covers, mult, unit) -> LatticeBlock:
    if len(set(elems)) != len(elems):
        dup = next(e for e in elems if elems.count(e) > 1)
        raise DuplicateName(f"lattice {name!r} declares {dup!r} twice")
    pos = {e: i for i, e in enumerate(elems)}
    for pair in covers:
        for lab in pair:
            if lab not in pos:
                raise UnresolvedReference(f"lattice {name!r}: cover uses undeclared element {lab!r}")
    covers = tuple(sorted(set(covers), key=lambda p: (pos[p[0]], pos[p[1]])))
    if isinstance(mult, tuple):
        for a, b, c in mult:
            for lab in (a, b, c):
                if lab not in pos:
                    raise UnresolvedReference(f"lattice {name!r}: mult uses undeclared element {lab!r}")
        mult = tuple(sorted(mult, key=lambda e: (pos[e[0]], pos[e[1]], pos[e[2]])))
    if unit is not None and unit not in pos:
        raise UnresolvedReference(f"lattice {name!r}: unit {unit!r} is not declared")
    return LatticeBlock(name, tuple(elems), covers, mult, unit)


def _map_block(name, carrier, scale, concepts, initial, matrices) -> MapBlock:
    if len(set(concepts)) != len(concepts):
        raise DuplicateName(f"map {name!r} declares a concept twice")
    pos = {c: i for i, c in enumerate(concepts)}
    for c in initial:
        if c not in pos:
            raise UnresolvedReference(f"map {name!r}: initial value for undeclared concept {c!r}")
    missing = [c for c in concepts if c not in initial]
    if missing:
        raise MapSpecError(f"map {name!r}: concept {missing[0]!r} has no initial value")
    mats = []
    for mname, cells in matrices:
        for src, dst in cells:
            for c in (src, dst):
                if c not in pos:
                    raise UnresolvedReference(f"map {name!r}: cell uses undeclared concept {c!r}")
        ordered = sorted(cells.items(), key=lambda kv: (pos[kv[0][0]], pos[kv[0][1]]))
        mats.append(MatrixBlock(mname, tuple((s, d, p) for (s, d), p in ordered)))
    return MapBlock(
        name, carrier, scale, tuple(concepts),
        tuple((c, initial[c]) for c in concepts), tuple(mats),
    )


def _check_references(blocks: list[Block], where: dict) -> None:
    kinds = {b.name: b.kind for b in blocks}

    def need_lattice(ref, owner):
        if kinds.get(ref) != "lattice":
            line, col = where.get(owner, (0, 0))
            raise UnresolvedReference(f"line {line}: {owner!r} refers to unknown lattice {ref!r}")

    for b in blocks:
        if isinstance(b, ProductBlock):
            need_lattice(b.left, b.name)
            need_lattice(b.right, b.name)
        elif isinstance(b, (MVSetBlock, MapBlock)):
            need_lattice(b.carrier, b.name)
            need_lattice(b.scale, b.name)
        elif isinstance(b, SetBlock):
            need_lattice(b.carrier, b.name)
    # products must not depend on themselves
    deps = {b.name: (b.left, b.right) for b in blocks if isinstance(b, ProductBlock)}
    for start in deps:
        stack, seen = [start], set()
        while stack:
            cur = stack.pop()
            for d in deps.get(cur, ()):
                if d == start:
                    raise UnresolvedReference(f"lattice {start!r} is defined in terms of itself")
                if d not in seen:
                    seen.add(d)
                    stack.append(d)


def parse(text: str) -> Document:
    """Parse a document; raise DSLSyntaxError with line and column, or
    UnresolvedReference / DuplicateName for bad names."""
    if not isinstance(text, str):
        raise TypeError("parse expects text")
    p = _Parser(text)
    blocks, where = p.document()
    _check_references(blocks, where)
    return Document(tuple(blocks))


def parse_term(text: str, params) -> Expr:
    """Parse a bare term expression such as ``or(x, and(y, b))``."""
    p = _Parser(text)
    expr = p.expr(set(params))
    if p.tok.kind != "eof":
        p.fail("end of term")
    return expr


# ------------------------------------------------------------- serializer


def format_expr(e: Expr) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return e.label
    assert isinstance(e, BinOp)
    return f"{e.op}({format_expr(e.left)}, {format_expr(e.right)})"


def format_pairs(pairs: Pairs) -> str:
    if not pairs:
        return "{}"
    return "{ " + ", ".join(f"({x}, {m})" for x, m in pairs) + " }"


def _serialize_block(b: Block) -> list[str]:
    if isinstance(b, ProductBlock):
        return [f"lattice {b.name} = product {b.left} {b.right}{' pairs' if b.pair_labels else ''};"]
    if isinstance(b, LatticeBlock):
        out = [f"lattice {b.name} {{", f"  elems {' '.join(b.elems)};"]
        if b.covers:
            out.append("  covers " + " ".join(f"{lo}<{hi}" for lo, hi in b.covers) + ";")
        if b.mult == "meet":
            out.append("  mult meet;")
        elif b.mult is not None:
            out.append("  mult {")
            if b.unit is not None:
                out.append(f"    unit {b.unit};")
            out += [f"    mul({a}, {c}) = {d};" for a, c, d in b.mult]
            out.append("  };")
        out.append("}")
        return out
    if isinstance(b, TermBlock):
        return [f"term {b.name}({', '.join(b.params)}) = {format_expr(b.body)};"]
    if isinstance(b, MVSetBlock):
        return [f"mvset {b.name} over {b.carrier} {b.scale} {format_pairs(b.pairs)}"]
    if isinstance(b, SetBlock):
        return [f"set {b.name} over {b.carrier} {{ {', '.join(b.elems)} }}"]
    if isinstance(b, MapBlock):
        out = [f"map {b.name} over {b.carrier} {b.scale} {{", f"  concepts {' '.join(b.concepts)};"]
        out += [f"  initial {c} = {format_pairs(p)};" for c, p in b.initial]
        for mat in b.matrices:
            head = f"  matrix {mat.name} {{" if mat.name else "  matrix {"
            out.append(head)
            out += [f"    {s} -> {d} = {format_pairs(p)};" for s, d, p in mat.cells]
            out.append("  };")
        out.append("}")
        return out
    raise TypeError(f"not a block: {b!r}")


def serialize(doc: Document) -> str:
    chunks = ["\n".join(_serialize_block(b)) for b in doc.blocks]
    return "\n\n".join(chunks) + "\n" if chunks else ""


def to_json(doc: Document) -> str:
    """Machine-readable export (not read back by the parser)."""

    def enc(b):
        d = {"kind": b.kind, "name": b.name}
        if isinstance(b, ProductBlock):
            d.update(product=[b.left, b.right], pair_labels=b.pair_labels)
        elif isinstance(b, LatticeBlock):
            d.update(elems=list(b.elems), covers=[list(c) for c in b.covers])
            if b.mult == "meet":
                d["mult"] = "meet"
            elif b.mult is not None:
                d["mult"] = [list(e) for e in b.mult]
                d["unit"] = b.unit
        elif isinstance(b, TermBlock):
            d.update(params=list(b.params), body=format_expr(b.body))
        elif isinstance(b, MVSetBlock):
            d.update(carrier=b.carrier, scale=b.scale, pairs=[list(p) for p in b.pairs])
        elif isinstance(b, SetBlock):
            d.update(carrier=b.carrier, elems=list(b.elems))
        elif isinstance(b, MapBlock):
            d.update(
                carrier=b.carrier, scale=b.scale, concepts=list(b.concepts),
                initial={c: [list(p) for p in ps] for c, ps in b.initial},
                matrices=[
                    {"name": m.name, "cells": [[s, t, [list(p) for p in ps]] for s, t, ps in m.cells]}
                    for m in b.matrices
                ],
            )
        return d

    return json.dumps({"blocks": [enc(b) for b in doc.blocks]}, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------- building


@dataclass
class Workspace:
    """Validated objects built from a document, looked up by name."""

    document: Document
    lattices: dict[str, Lattice] = field(default_factory=dict)
    terms: dict[str, LatticeTerm] = field(default_factory=dict)
    mvsets: dict[str, MVSet] = field(default_factory=dict)
    sets: dict[str, AssessmentSet] = field(default_factory=dict)
    maps: dict[str, MapSpec] = field(default_factory=dict)

    def lattice(self, name: str) -> Lattice:
        return _lookup(self.lattices, name, "lattice")

    def term(self, name: str) -> LatticeTerm:
        return _lookup(self.terms, name, "term")

    def mvset(self, name: str) -> MVSet:
        return _lookup(self.mvsets, name, "mvset")

    def set(self, name: str) -> AssessmentSet:
        return _lookup(self.sets, name, "set")

    def map(self, name: str | None = None) -> MapSpec:
        if name is None:
            if len(self.maps) != 1:
                raise UnresolvedReference(f"document has {len(self.maps)} maps; name one")
            return next(iter(self.maps.values()))
        return _lookup(self.maps, name, "map")


def _lookup(table, name, kind):
    try:
        return table[name]
    except KeyError:
        raise UnresolvedReference(f"no {kind} named {name!r}") from None


def build(doc: Document, *, exhaustive: bool = True) -> Workspace:
    ws = Workspace(doc)
    blocks = {b.name: b for b in doc.blocks}

    def lattice(name: str) -> Lattice:
        if name in ws.lattices:
            return ws.lattices[name]
        b = blocks[name]
        if isinstance(b, ProductBlock):
            lat = product(lattice(b.left), lattice(b.right), name=name, pair_labels=b.pair_labels)
        else:
            mult = b.mult
            if isinstance(mult, tuple):
                mult = {(x, y): z for x, y, z in mult}
            lat = build_lattice(b.elems, b.covers, mult, b.unit, name=name, exhaustive=exhaustive)
        ws.lattices[name] = lat
        return lat

    for b in doc.blocks:
        try:
            if b.kind == "lattice":
                lattice(b.name)
            elif isinstance(b, TermBlock):
                ws.terms[b.name] = LatticeTerm(b.params, b.body, name=b.name)
            elif isinstance(b, MVSetBlock):
                ws.mvsets[b.name] = MVSet(lattice(b.carrier), lattice(b.scale), b.pairs)
            elif isinstance(b, SetBlock):
                ws.sets[b.name] = AssessmentSet(lattice(b.carrier), b.elems)
            elif isinstance(b, MapBlock):
                ws.maps[b.name] = _build_map(b, lattice(b.carrier), lattice(b.scale))
        except MVError as exc:
            raise type(exc)(f"in {b.kind} {b.name!r}: {exc}") if not isinstance(exc, DSLSyntaxError) else exc
    return ws


def _build_map(b: MapBlock, L: Lattice, M: Lattice) -> MapSpec:
    pos = {c: i for i, c in enumerate(b.concepts)}
    initial = tuple(MVSet(L, M, p) for _, p in b.initial)
    matrices = []
    for mat in b.matrices:
        cells = {(pos[s], pos[d]): MVSet(L, M, p) for s, d, p in mat.cells}
        matrices.append(WeightMatrix(cells, mat.name))
    return MapSpec(b.concepts, L, M, initial, tuple(matrices), name=b.name)


def loads(text: str, **kw) -> Workspace:
    return build(parse(text), **kw)


# ---------------------------------------------------------------- fixtures

FIXTURES = {
    "L1": "L1.lat",
    "L2": "L2.lat",
    "L": "L.lat",
    "M": "M.lat",
    "hybrid-energy-map": "hybrid.map",
}


def fixture_text(name: str) -> str:
    try:
        fname = FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}") from None
    return resources.files("mvlattice.fixtures").joinpath(fname).read_text(encoding="utf-8")


def load_fixture(name: str) -> Document:
    return parse(fixture_text(name))


def iter_fixtures() -> Iterator[str]:
    return iter(FIXTURES)
