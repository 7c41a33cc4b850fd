"""Command-line interface: ``nsbox <command> ...``.

Exit codes: 0 success, 1 domain error (a precondition or check failed),
2 usage error (bad arguments, unreadable or malformed input).
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import List, Optional

from . import io
from .appendix import PartialDecomposition, decompose_to_table2
from .catalog import (
    BarrettSpec,
    ExtremalSpec,
    barrett_box,
    enumerate_classes,
    from_xor_characterization,
    pr_box,
    table2_box,
)
from .core import CorrelationTable, Scenario, canonical_form, is_nonsignaling, marginals, validate
from .errors import FormatError, NsboxError
from .interconversion import simulate_exact, simulate_sampled
from .polytope import caratheodory_decompose, enumerate_vertices, is_extremal, is_local
from .quantum import PRESETS, QuantumScenario, born_table, preset, quantum_to_prbox_report

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(args, text: str):
    if args.output and args.output != "-":
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# commands whose output is an exchange document rather than a report
DOCUMENT_COMMANDS = frozenset({"make", "canonical", "decompose", "reconstruct", "vertices", "classes"})


def _json(args) -> bool:
    return (args.format or args.default_format) == "json"


def _read_table(args) -> CorrelationTable:
    return io.table_from_dict(io.read_document(args.input), strict=args.strict)


def _emit_table(args, table: CorrelationTable):
    _emit(args, io.dumps(io.table_to_dict(table)) if _json(args) else io.table_text(table) + "\n")


def _frac_list(vals) -> List[str]:
    return [io.rational_str(v) for v in vals]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    t = _read_table(args)
    rep = validate(t)
    if _json(args):
        _emit(args, io.dumps({
            "ok": rep.ok,
            "violations": [
                {"kind": v.kind, "index": list(v.index), "value": io.rational_str(v.value)}
                for v in rep.violations
            ],
        }))
    else:
        lines = ["valid" if rep.ok else "invalid"]
        lines += [f"  {v.kind} at {tuple(v.index)}: {io.rational_str(v.value)}" for v in rep.violations]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_nonsignaling(args) -> int:
    t = _read_table(args)
    rep = is_nonsignaling(t)
    viol = [list(v) if isinstance(v, tuple) else v for v in rep.violations]
    if _json(args):
        _emit(args, io.dumps({"ok": rep.ok, "violations": [[str(e) for e in v] for v in viol]}))
    else:
        lines = ["nonsignaling" if rep.ok else "signaling"]
        lines += [f"  {' '.join(str(e) for e in v)}" for v in viol]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_DOMAIN


def cmd_marginals(args) -> int:
    t = _read_table(args)
    mg = marginals(t)
    if _json(args):
        doc = {
            "alice": [_frac_list(row) for row in mg.alice],
            "bob": [_frac_list(row) for row in mg.bob],
        }
        if t.scenario.binary:
            doc["l"] = _frac_list(mg.l)
            doc["m"] = _frac_list(mg.m)
        _emit(args, io.dumps(doc))
    else:
        lines = [f"alice x={x}: {' '.join(_frac_list(row))}" for x, row in enumerate(mg.alice)]
        lines += [f"bob   y={y}: {' '.join(_frac_list(row))}" for y, row in enumerate(mg.bob)]
        if t.scenario.binary:
            lines.append("l = " + " ".join(_frac_list(mg.l)))
            lines.append("m = " + " ".join(_frac_list(mg.m)))
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_local(args) -> int:
    t = _read_table(args)
    res = is_local(t, budget=args.budget)
    if _json(args):
        doc = {"local": res.local}
        if res.local:
            doc["model"] = [
                {"weight": io.rational_str(w), "alice": list(f), "bob": list(g)} for w, f, g in res.model.weights
            ]
        else:
            doc["bell"] = _frac_list(res.bell)
        _emit(args, io.dumps(doc))
    else:
        if res.local:
            lines = ["local"] + [
                f"  {io.rational_str(w)}  a(x)={list(f)} b(y)={list(g)}" for w, f, g in res.model.weights
            ]
        else:
            lines = ["nonlocal", "  bell functional (<= 0 on local tables, > 0 here):",
                     "  " + " ".join(_frac_list(res.bell))]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_extremal(args) -> int:
    t = _read_table(args)
    res = is_extremal(t)
    if _json(args):
        doc = {"extremal": res.extremal}
        if res.direction is not None:
            doc["direction"] = _frac_list(res.direction)
        _emit(args, io.dumps(doc))
    else:
        _emit(args, ("extremal" if res.extremal else "not extremal") + "\n")
    return EXIT_OK


def cmd_canonical(args) -> int:
    t = _read_table(args)
    canon, r = canonical_form(t, budget=args.budget)
    if _json(args):
        _emit(args, io.dumps({"table": io.table_to_dict(canon), "relabeling": io.relabeling_to_dict(r)}))
    else:
        _emit(args, io.table_text(canon) + "\n")
    return EXIT_OK


def cmd_make(args) -> int:
    kind = args.kind
    if kind == "pr":
        t = pr_box()
    elif kind == "barrett":
        if args.k is None:
            raise UsageError("make barrett needs --k")
        t = barrett_box(BarrettSpec(args.k))
    elif kind == "table2":
        if args.spec is None:
            raise UsageError("make table2 needs --spec")
        t = table2_box(_spec(args.spec))
    elif kind == "xor":
        if args.dx is None or args.dy is None:
            raise UsageError("make xor needs --dx and --dy")
        t = from_xor_characterization(args.dx, args.dy, _cells(args.q))
    else:  # quantum-preset
        if args.name is None:
            raise UsageError(f"make quantum-preset needs --name ({', '.join(PRESETS)})")
        t = born_table(_preset(args), max_denominator=args.max_denominator)
    _emit_table(args, t)
    return EXIT_OK


def _cells(text: Optional[str]):
    """``"2,2;1,2"`` -> [(2, 2), (1, 2)]."""
    if not text:
        return []
    out = []
    for part in text.split(";"):
        try:
            x, y = (int(v) for v in part.split(","))
        except ValueError:
            raise UsageError(f"bad cell {part!r}; expected 'x,y' pairs separated by ';'")
        out.append((x, y))
    return out


def _angles(text: Optional[str]):
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad angle list {text!r}")


def _preset(args) -> QuantumScenario:
    return preset(args.name, _angles(getattr(args, "alice_angles", None)), _angles(getattr(args, "bob_angles", None)))


def _spec(arg: str) -> ExtremalSpec:
    try:
        return io.parse_spec_arg(arg)
    except FormatError:
        raise
    except NsboxError as exc:
        raise FormatError(str(exc)) from exc


def cmd_decompose(args) -> int:
    t = _read_table(args)
    if args.method == "appendix":
        try:
            dec = decompose_to_table2(t, budget=args.budget, trace=args.trace is not None)
        except PartialDecomposition as exc:
            sys.stderr.write(f"{exc}: {len(exc.done)} finished components, {len(exc.frontier)} open\n")
            return EXIT_DOMAIN
        comps = [(c.weight, c.table) for c in dec.components]
        specs = [(c.spec, c.relabeling) for c in dec.components]
        if args.trace:
            with open(args.trace, "w", encoding="utf-8") as fh:
                fh.write("\n".join(dec.trace) + "\n")
    else:
        dec = caratheodory_decompose(t)
        comps = list(dec.components)
        specs = None
    if _json(args):
        _emit(args, io.dumps(io.decomposition_to_dict(comps, specs, args.method)))
    else:
        lines = [f"{len(comps)} components ({args.method})"]
        for i, (w, c) in enumerate(comps):
            head = f"[{i}] weight {io.rational_str(w)}"
            if specs is not None:
                spec = specs[i][0]
                head += f"  spec gx={spec.gx} gy={spec.gy} Q={sorted(spec.anticorrelated)}"
            lines += [head, io.table_text(c), ""]
        _emit(args, "\n".join(lines))
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    from .core import mix

    comps = io.decomposition_from_dict(io.read_document(args.input), strict=args.strict)
    total = sum((w for w, _ in comps), Fraction(0))
    if total != 1:
        raise NsboxError(f"weights sum to {total}, not 1")
    _emit_table(args, mix(comps))
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = _spec(args.spec)
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    if args.trials == 0:
        cell = simulate_exact(spec, args.x, args.y)
        if _json(args):
            grid = [[io.rational_str(cell[a][b]) for a in range(2)] for b in range(2)]
            _emit(args, io.dumps({"x": args.x, "y": args.y, "mode": "exact", "cell": grid}))
        else:
            rows = [" ".join(io.rational_str(cell[a][b]) for a in range(2)) for b in range(2)]
            _emit(args, " / ".join(rows) + "\n")
        return EXIT_OK
    if args.seed is None:
        raise UsageError("sampling mode (--trials > 0) needs --seed")
    res = simulate_sampled(spec, args.x, args.y, args.trials, args.seed)
    for run in res.runs:
        run.check()
    if args.transcript:
        with open(args.transcript, "w", encoding="utf-8") as fh:
            fh.write(res.transcript())
    freq = res.frequencies()
    if _json(args):
        doc = {
            "x": args.x, "y": args.y, "mode": "sampled", "trials": res.trials, "seed": args.seed,
            "counts": [[res.counts[a][b] for a in range(2)] for b in range(2)],
            "frequencies": [[io.rational_str(freq[a][b]) for a in range(2)] for b in range(2)],
        }
        _emit(args, io.dumps(doc))
    else:
        text = "" if args.transcript else res.transcript()
        rows = [" ".join(str(res.counts[a][b]) for a in range(2)) for b in range(2)]
        text += f"counts (rows b, columns a): {' / '.join(rows)}\n"
        _emit(args, text)
    return EXIT_OK


def cmd_vertices(args) -> int:
    verts = enumerate_vertices(Scenario(args.dx, args.dy, args.da, args.db))
    if _json(args):
        _emit(args, io.dumps({"count": len(verts), "vertices": [io.table_to_dict(v) for v in verts]}))
    else:
        _emit(args, f"{len(verts)} vertices\n")
    return EXIT_OK


def cmd_classes(args) -> int:
    specs = enumerate_classes(args.dx, args.dy)
    if _json(args):
        _emit(args, io.dumps({"count": len(specs), "classes": [io.spec_to_dict(s) for s in specs]}))
    else:
        lines = [f"{len(specs)} classes"]
        lines += [f"  gx={s.gx} gy={s.gy} Q={sorted(s.anticorrelated)}" for s in specs]
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_quantum_report(args) -> int:
    if args.scenario in PRESETS:
        args.name = args.scenario
        qs = _preset(args)
    else:
        qs = QuantumScenario.from_dict(io.read_document(args.scenario))
    rep = quantum_to_prbox_report(qs, max_denominator=args.max_denominator)
    if _json(args):
        doc = {
            "scenario": rep.name,
            "chsh": rep.chsh,
            "ns_residual": rep.ns_residual,
            "local": rep.local,
            "table": io.table_to_dict(rep.table),
            "nonlocal_weight": io.rational_str(rep.nonlocal_weight),
            "pr_boxes_per_run": rep.pr_boxes_per_run,
            "components": [
                {"weight": io.rational_str(w), "slots": s, "nonzero_terms": n} for w, s, n in rep.box_counts
            ],
        }
        _emit(args, io.dumps(doc))
    else:
        _emit(args, "\n".join(rep.lines()) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument(
        "--format",
        choices=("json", "text"),
        help="output format (default: json for documents, text for reports)",
    )
    common.add_argument("--output", "-o", help="write to this file instead of standard output")
    table_in = _Parser(add_help=False)
    table_in.add_argument("input", nargs="?", default="-", help="table document (default: standard input)")
    table_in.add_argument("--strict", action="store_true", help="reject rationals that are not in lowest terms")

    p = _Parser(prog="nsbox", description="Exact nonsignaling correlation tables.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, parents, help_):
        sp = sub.add_parser(name, parents=parents, help=help_)
        sp.set_defaults(func=func, default_format="json" if name in DOCUMENT_COMMANDS else "text")
        return sp

    add("validate", cmd_validate, [common, table_in], "check positivity and normalization")
    add("nonsignaling", cmd_nonsignaling, [common, table_in], "check the nonsignaling constraints")
    add("marginals", cmd_marginals, [common, table_in], "print the marginals")
    sp = add("local", cmd_local, [common, table_in], "exact locality test")
    sp.add_argument("--budget", type=int, default=4096, help="max deterministic strategies")
    add("extremal", cmd_extremal, [common, table_in], "is the table a vertex of the polytope")
    sp = add("canonical", cmd_canonical, [common, table_in], "canonical representative under relabelings")
    sp.add_argument("--budget", type=int, default=10**7)

    sp = add("make", cmd_make, [common], "build a named table")
    sp.add_argument("kind", choices=("pr", "barrett", "table2", "xor", "quantum-preset"))
    sp.add_argument("--k", type=int, help="Barrett output count")
    sp.add_argument("--spec", help="spec: 'pr', inline JSON, or a file")
    sp.add_argument("--dx", type=int)
    sp.add_argument("--dy", type=int)
    sp.add_argument("--q", help="anticorrelated cells as 'x,y;x,y'")
    sp.add_argument("--name", help=f"quantum preset ({', '.join(PRESETS)})")
    sp.add_argument("--alice-angles", help="comma-separated angles for singlet_angles")
    sp.add_argument("--bob-angles", help="comma-separated angles for singlet_angles")
    sp.add_argument("--max-denominator", type=int, default=10**6)

    sp = add("decompose", cmd_decompose, [common, table_in], "convex decomposition into vertices")
    sp.add_argument("--method", choices=("appendix", "caratheodory"), default="appendix")
    sp.add_argument("--budget", type=int, default=200_000, help="leaf budget (appendix)")
    sp.add_argument("--trace", help="write the split trace here (appendix)")
    sp = add("reconstruct", cmd_reconstruct, [common], "mix a decomposition back into a table")
    sp.add_argument("input", nargs="?", default="-")
    sp.add_argument("--strict", action="store_true")

    sp = add("simulate", cmd_simulate, [common], "run the PR-box protocol")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--y", type=int, required=True)
    sp.add_argument("--trials", type=int, default=0, help="0 = exact distribution")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--transcript", help="write the transcript here (sampling mode)")

    sp = add("vertices", cmd_vertices, [common], "enumerate polytope vertices")
    for d in ("--dx", "--dy"):
        sp.add_argument(d, type=int, required=True)
    sp.add_argument("--da", type=int, default=2)
    sp.add_argument("--db", type=int, default=2)
    sp = add("classes", cmd_classes, [common], "catalog classes for binary outputs")
    sp.add_argument("--dx", type=int, required=True)
    sp.add_argument("--dy", type=int, required=True)
    sp = add("quantum-report", cmd_quantum_report, [common], "quantum table -> locality -> PR boxes")
    sp.add_argument("--scenario", required=True, help=f"preset ({', '.join(PRESETS)}) or scenario file")
    sp.add_argument("--alice-angles")
    sp.add_argument("--bob-angles")
    sp.add_argument("--max-denominator", type=int, default=10**6)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except FormatError as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_USAGE
    except NsboxError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(f"io error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
