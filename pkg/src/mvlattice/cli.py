"""Command-line front end.

Exit status: 0 on success, 1 when the library reports a domain error
(printed as ``ErrorName: message``), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import mvcm
from .aggregation import KINDS, AssessmentSet, difference, mean_mvset, nary_mean
from .errors import MVError, NotConverged, UnresolvedReference
from .lattice import Lattice
from .mvset import MVSet, classical_extend, extend
from .terms import BOTTOM, OPS, TOP, LatticeTerm, eval_term
from .textio import ProductBlock, Workspace, _Parser, build, parse, parse_term, tokenize


class UsageError(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage().strip()}\n{self.prog}: error: {message}")


def _weights(text: str) -> str:
    try:
        mvcm.parse_weights(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return text


def _non_negative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    value = _non_negative(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def make_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="mvlattice", description="Finite lattices, multi-valued sets and cognitive maps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    lat = sub.add_parser("lattice", help="inspect a lattice")
    lsub = lat.add_subparsers(dest="action", required=True, parser_class=_ArgParser)
    for action, text in (("check", "validate and report structure"), ("show", "print elements and covers")):
        q = lsub.add_parser(action, help=text)
        q.add_argument("file")
        q.add_argument("--name", help="lattice to use (default: the file's main lattice)")
        q.add_argument("--format", choices=("text", "json"), default="text")

    ev = sub.add_parser("eval", help="evaluate a term at a valuation")
    ev.add_argument("file")
    ev.add_argument("--term", required=True, help="term name from the file, or an expression")
    ev.add_argument("--lattice", help="lattice to evaluate in")
    ev.add_argument("--at", nargs="+", action="extend", default=[], metavar="VAR=LABEL")

    ex = sub.add_parser("extend", help="apply a term to multi-valued sets")
    ex.add_argument("file")
    ex.add_argument("--term", required=True, help="term name from the file, or an expression")
    ex.add_argument("--lattice", help="carrier lattice for inline literals")
    ex.add_argument("--scale", help="scale lattice for inline literals")
    ex.add_argument("--classical", action="store_true", help="use meet of confidences instead")
    ex.add_argument("args", nargs="+", metavar="MVSET", help="mvset names or literals like '{(b, hi)}'")

    mn = sub.add_parser("mean", help="pessimistic or optimistic mean of assessment sets")
    mn.add_argument("file")
    mn.add_argument("--kind", choices=KINDS, required=True)
    mn.add_argument("--lattice", help="carrier lattice for inline literals")
    mn.add_argument("--scale", help="scale lattice for inline mvset literals")
    mn.add_argument("sets", nargs="+", metavar="SET", help="set or mvset names, or literals like '{b, bc}'")

    df = sub.add_parser("diff", help="difference of two assessment sets")
    df.add_argument("file")
    df.add_argument("--lattice", help="carrier lattice for inline literals")
    df.add_argument("sets", nargs=2, metavar="SET")

    mp = sub.add_parser("map", help="cognitive map runs")
    msub = mp.add_subparsers(dest="action", required=True, parser_class=_ArgParser)
    mr = msub.add_parser("run", help="iterate a map and print its trace")
    mr.add_argument("file")
    mr.add_argument("--map", dest="map_name", help="map to run (default: the only one)")
    mr.add_argument("--combine", choices=mvcm.COMBINES, default=mvcm.JOIN)
    mr.add_argument("--weights", type=_weights, default="single:1",
                    help="enumerate | pessimistic | optimistic | single:<i>")
    mr.add_argument("--max-iter", type=_non_negative, default=50)
    mr.add_argument("--branch-depth", type=_positive, default=4)
    mr.add_argument("--format", choices=("tsv", "markdown"), default="tsv")
    mr.add_argument("--output", help="write the trace here instead of stdout")
    return p


# ------------------------------------------------------------------ helpers


def _load(path: str) -> Workspace:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None
    return build(parse(text))


def _main_lattice(ws: Workspace, path: str, name: str | None, flag: str = "--name") -> Lattice:
    if name:
        return ws.lattice(name)
    if not ws.lattices:
        raise UnresolvedReference(f"{path} defines no lattice")
    stem = Path(path).stem
    if stem in ws.lattices:
        return ws.lattices[stem]
    used = set()
    for b in ws.document.blocks:
        if isinstance(b, ProductBlock):
            used.update((b.left, b.right))
    roots = [n for n in ws.lattices if n not in used]
    if len(roots) == 1:
        return ws.lattices[roots[0]]
    raise UnresolvedReference(f"{path} defines several lattices ({', '.join(sorted(ws.lattices))}); pick one with {flag}")


def _term(ws: Workspace, text: str, params: Sequence[str] | None = None) -> LatticeTerm:
    if text in ws.terms:
        return ws.terms[text]
    if "(" not in text:
        raise UnresolvedReference(f"no term named {text!r}")
    if params is None:
        raise UsageError("inline terms need named arguments")
    expr = parse_term(text, params)
    return LatticeTerm(tuple(params), expr)


def _free_words(text: str, L: Lattice) -> list[str]:
    """Identifiers of an inline term that are not element labels, in order
    of first appearance; these become the term's parameters."""
    words = []
    for tok in tokenize(text):
        w = tok.text
        if tok.kind == "word" and w not in OPS and w not in (TOP, BOTTOM) and not L.has_label(w):
            if w not in words:
                words.append(w)
    return words


def _yes(flag) -> str:
    return "yes" if flag else "no"


def _labels(L: Lattice, xs) -> str:
    return " ".join(L.labels[x] for x in sorted(xs))


def _check_report(L: Lattice) -> tuple[list[str], dict]:
    rep = L.structure_report()
    gens = L.generators()
    info = {
        "name": L.name,
        "elements": L.n,
        "top": L.labels[L.top],
        "bottom": L.labels[L.bottom],
        "atoms": [L.labels[a] for a in sorted(L.atoms)],
        "generators": [L.labels[g] for g in sorted(gens)],
        **{k: v for k, v in rep.items() if k != "elements"},
    }
    lines = [
        f"lattice {L.name}: {L.n} elements, bottom {info['bottom']}, top {info['top']}",
        "lattice axioms: ok",
        f"atoms: {_labels(L, L.atoms)}",
        f"generators: {_labels(L, gens)}",
        f"distributive: {_yes(rep['distributive'])}",
        f"brouwer: {_yes(rep['brouwer'])}",
        f"atomic: {_yes(rep['atomic'])}",
        f"atomistic: {_yes(rep['atomistic'])}",
        f"residuated: {_yes(rep['residuated'])}",
        f"integrally closed: {_yes(rep['integrally_closed'])}",
        f"integral: {_yes(rep['integral'])}",
        f"ring sum: {_yes(rep['ring_sum'])}",
    ]
    return lines, info


def _show(L: Lattice) -> tuple[list[str], dict]:
    covers = [(L.labels[a], L.labels[b]) for a, b in L.covers()]
    info = {"name": L.name, "elements": list(L.labels), "covers": [list(c) for c in covers]}
    if L.mult is not None:
        info["mult"] = [[L.labels[L.mult[a][b]] for b in range(L.n)] for a in range(L.n)]
        info["unit"] = L.labels[L.unit]
    lines = [f"lattice {L.name}", f"elements: {' '.join(L.labels)}",
             "covers: " + " ".join(f"{a}<{b}" for a, b in covers)]
    if L.mult is not None:
        lines.append(f"mult: declared, unit {L.labels[L.unit]}")
    return lines, info


def _is_literal(text: str) -> bool:
    return text.lstrip().startswith("{")


def _carrier_name(ws: Workspace, args, texts: Sequence[str]) -> str | None:
    """--lattice, or the file's main lattice when inline literals need one."""
    if args.lattice or not any(_is_literal(t) for t in texts):
        return args.lattice
    return _main_lattice(ws, args.file, None, "--lattice").name


def _literal_mvset(ws: Workspace, text: str, carrier: str | None, scale: str | None) -> MVSet:
    if not _is_literal(text):
        return ws.mvset(text)
    if not carrier or not scale:
        raise UsageError("inline mvset literals need --scale")
    p = _Parser(text)
    pairs = p.pairs()
    if p.tok.kind != "eof":
        p.fail("end of literal")
    return MVSet(ws.lattice(carrier), ws.lattice(scale), pairs)


def _literal_set(ws: Workspace, text: str, carrier: str | None) -> AssessmentSet:
    if not _is_literal(text):
        return ws.set(text)
    if not carrier:
        raise UsageError("inline set literals need --lattice")
    p = _Parser(text)
    p.expect("{")
    elems = []
    while not p.accept("}"):
        elems.append(p.word("an element label"))
        if not p.accept(",") and not p.at("}"):
            p.fail("',' or '}'")
    if p.tok.kind != "eof":
        p.fail("end of literal")
    return AssessmentSet(ws.lattice(carrier), tuple(elems))


# ----------------------------------------------------------------- commands


def cmd_lattice(args, out) -> int:
    ws = _load(args.file)
    L = _main_lattice(ws, args.file, args.name)
    lines, info = _check_report(L) if args.action == "check" else _show(L)
    if args.format == "json":
        out.write(json.dumps(info, sort_keys=True, indent=2) + "\n")
    else:
        out.write("\n".join(lines) + "\n")
    return 0


def cmd_eval(args, out) -> int:
    ws = _load(args.file)
    valuation = {}
    for item in args.at:
        if "=" not in item:
            raise UsageError(f"expected VAR=LABEL, got {item!r}")
        var, label = item.split("=", 1)
        valuation[var.strip()] = label.strip()
    t = _term(ws, args.term, list(valuation) if args.term not in ws.terms else None)
    L = _main_lattice(ws, args.file, args.lattice, "--lattice")
    value = eval_term(t, L, valuation)
    out.write(L.labels[value] + "\n")
    return 0


def cmd_extend(args, out) -> int:
    ws = _load(args.file)
    if not args.scale and any(_is_literal(a) for a in args.args):
        raise UsageError("inline mvset literals need --scale")
    carrier = _carrier_name(ws, args, args.args)
    sets = [_literal_mvset(ws, a, carrier, args.scale) for a in args.args]
    if args.term in ws.terms:
        t = ws.terms[args.term]
    else:
        t = _term(ws, args.term, _free_words(args.term, sets[0].carrier))
    result = (classical_extend if args.classical else extend)(t, sets)
    out.write(str(result) + "\n")
    return 0


def cmd_mean(args, out) -> int:
    ws = _load(args.file)
    carrier = _carrier_name(ws, args, args.sets)
    if all(not _is_literal(s) and s in ws.mvsets for s in args.sets) or (
        args.scale and all(_is_literal(s) for s in args.sets)
    ):
        inputs = [_literal_mvset(ws, s, carrier, args.scale) for s in args.sets]
        out.write(str(mean_mvset(args.kind, inputs)) + "\n")
        return 0
    sets = [_literal_set(ws, s, carrier) for s in args.sets]
    out.write(str(nary_mean(args.kind, sets)) + "\n")
    return 0


def cmd_diff(args, out) -> int:
    ws = _load(args.file)
    carrier = _carrier_name(ws, args, args.sets)
    A, B = (_literal_set(ws, s, carrier) for s in args.sets)
    out.write(str(difference(A, B)) + "\n")
    return 0


def cmd_map_run(args, out, err) -> int:
    ws = _load(args.file)
    spec = ws.map(args.map_name)
    table = mvcm.run(spec, args.combine, args.weights, args.max_iter, args.branch_depth)
    text = mvcm.render_trace(table, args.format)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    if table.status == mvcm.NOT_CONVERGED:
        raise NotConverged(f"no fixed point within {args.max_iter} iterations")
    if table.status == mvcm.LOOPED:
        err.write("note: a cycle persisted after the corrective coefficients; run stopped there\n")
    return 0


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = make_parser()
    try:
        args = parser.parse_args(list(sys.argv[1:] if argv is None else argv))
        if args.command == "lattice":
            return cmd_lattice(args, out)
        if args.command == "eval":
            return cmd_eval(args, out)
        if args.command == "extend":
            return cmd_extend(args, out)
        if args.command == "mean":
            return cmd_mean(args, out)
        if args.command == "diff":
            return cmd_diff(args, out)
        return cmd_map_run(args, out, err)
    except UsageError as exc:
        msg = str(exc)
        if not msg.startswith("usage:"):
            msg = f"{parser.format_usage().strip()}\n{parser.prog}: error: {msg}"
        err.write(msg + "\n")
        return 2
    except MVError as exc:
        err.write(f"{type(exc).__name__}: {exc}\n")
        return 1
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
