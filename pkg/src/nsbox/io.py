"""Exchange formats (JSON) and plain-text renderings.

Table document::

    {"dx": 2, "dy": 2, "da": 2, "db": 2,
     "p": {"0,0": [["1/2", "0"], ["0", "1/2"]], ...}}

``p["x,y"]`` is a ``db x da`` grid: row ``b``, column ``a``.  Rationals are
strings ``"num/den"`` (``"0"`` and ``"1"`` written out as integers).  Lenient
parsing (default) normalizes any exact rational (``"2/4"``, ``"0.5"``, JSON
integers); strict parsing accepts only lowest-terms ``"num/den"`` or integer
strings.
"""
from __future__ import annotations

import json
import re
import sys
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

from .catalog import PR_SPEC, ExtremalSpec
from .core import CorrelationTable, LocalRelabeling, Scenario
from .errors import FormatError, NsboxError, ShapeError

_STRICT_RE = re.compile(r"^(0|-?[1-9][0-9]*)(/[1-9][0-9]*)?$")


def rational_str(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def parse_rational(s, strict: bool = False, where: str = "") -> Fraction:
    ctx = f" at {where}" if where else ""
    if isinstance(s, bool):
        raise FormatError(f"boolean is not a rational{ctx}")
    if strict:
        if not isinstance(s, str) or not _STRICT_RE.match(s):
            raise FormatError(f"{s!r} is not a 'num/den' string{ctx}")
        v = Fraction(s)
        if "/" in s and (v.denominator == 1 or f"{v.numerator}/{v.denominator}" != s):
            raise FormatError(f"{s!r} is not in lowest terms{ctx}")
        return v
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise FormatError(f"cannot parse rational {s!r}{ctx}") from exc
    raise FormatError(f"expected a rational string, got {type(s).__name__}{ctx}")


# ---------------------------------------------------------------------------
# tables


def table_to_dict(table: CorrelationTable) -> dict:
    s = table.scenario
    p = {}
    for x in range(s.dx):
        for y in range(s.dy):
            p[f"{x},{y}"] = [[rational_str(table[x, y, a, b]) for a in range(s.da)] for b in range(s.db)]
    return {"dx": s.dx, "dy": s.dy, "da": s.da, "db": s.db, "p": p}


def _int_field(d: dict, key: str, what: str) -> int:
    if key not in d:
        raise FormatError(f"{what}: missing field {key!r}")
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{what}: field {key!r} must be an integer")
    return v


def table_from_dict(d: dict, strict: bool = False) -> CorrelationTable:
    if not isinstance(d, dict):
        raise FormatError("table document must be an object")
    dims = [_int_field(d, k, "table") for k in ("dx", "dy", "da", "db")]
    try:
        s = Scenario(*dims)
    except (ValueError, NsboxError) as exc:
        raise FormatError(f"table: {exc}") from exc
    p = d.get("p")
    if not isinstance(p, dict):
        raise FormatError("table: field 'p' must be an object keyed by 'x,y'")
    expected = {f"{x},{y}" for x in range(s.dx) for y in range(s.dy)}
    keys = set(p)
    if keys != expected:
        missing, extra = sorted(expected - keys), sorted(keys - expected)
        raise FormatError(f"table: cell keys mismatch (missing {missing}, unexpected {extra})")
    entries = [[[[None] * s.db for _ in range(s.da)] for _ in range(s.dy)] for _ in range(s.dx)]
    for x in range(s.dx):
        for y in range(s.dy):
            grid = p[f"{x},{y}"]
            if not isinstance(grid, list) or len(grid) != s.db or any(
                not isinstance(row, list) or len(row) != s.da for row in grid
            ):
                raise FormatError(f"table: cell {x},{y} must be a {s.db}x{s.da} grid (rows b, columns a)")
            for b, row in enumerate(grid):
                for a, v in enumerate(row):
                    entries[x][y][a][b] = parse_rational(v, strict, f"p[{x},{y}][{b}][{a}]")
    return CorrelationTable(s, entries)


def cell_text(table: CorrelationTable, x: int, y: int) -> str:
    """Cell as ``"row_b0 / row_b1"`` with rows indexed by b and columns by a."""
    s = table.scenario
    return " / ".join(
        " ".join(rational_str(table[x, y, a, b]) for a in range(s.da)) for b in range(s.db)
    )


def table_text(table: CorrelationTable) -> str:
    """Readable grid: one block per y, Alice's inputs side by side."""
    s = table.scenario
    cols = [
        [rational_str(table[x, y, a, b]) for y in range(s.dy) for b in range(s.db)]
        for x in range(s.dx)
        for a in range(s.da)
    ]
    width = max(len(v) for col in cols for v in col)
    lines = [f"scenario {s.dx} {s.dy} {s.da} {s.db}  (rows: y, b; columns: x, a)"]
    for y in range(s.dy):
        for b in range(s.db):
            blocks = []
            for x in range(s.dx):
                blocks.append(" ".join(rational_str(table[x, y, a, b]).rjust(width) for a in range(s.da)))
            lines.append(f"y={y} b={b}  " + " | ".join(blocks))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# specs and relabelings


def spec_to_dict(spec: ExtremalSpec) -> dict:
    return spec.to_dict()


def spec_from_dict(d: dict) -> ExtremalSpec:
    if not isinstance(d, dict):
        raise FormatError("spec document must be an object")
    return ExtremalSpec.from_dict(d)


def relabeling_to_dict(r: LocalRelabeling) -> dict:
    return {
        "alice_input_perm": list(r.alice_input_perm),
        "bob_input_perm": list(r.bob_input_perm),
        "alice_output_perms": [list(p) for p in r.alice_output_perms],
        "bob_output_perms": [list(p) for p in r.bob_output_perms],
    }


def relabeling_from_dict(d: dict) -> LocalRelabeling:
    try:
        return LocalRelabeling(
            tuple(d["alice_input_perm"]),
            tuple(d["bob_input_perm"]),
            tuple(tuple(p) for p in d["alice_output_perms"]),
            tuple(tuple(p) for p in d["bob_output_perms"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed relabeling: {exc}") from exc


# ---------------------------------------------------------------------------
# decompositions


def decomposition_to_dict(
    components: Sequence[Tuple[Fraction, CorrelationTable]],
    specs: Optional[Sequence[Optional[Tuple[ExtremalSpec, LocalRelabeling]]]] = None,
    method: str = "",
) -> dict:
    comps = []
    for i, (w, t) in enumerate(components):
        c = {"weight": rational_str(w), "table": table_to_dict(t)}
        if specs is not None and specs[i] is not None:
            spec, r = specs[i]
            c["spec"] = spec_to_dict(spec)
            c["relabeling"] = relabeling_to_dict(r)
        comps.append(c)
    doc = {"components": comps}
    if method:
        doc["method"] = method
    return doc


def decomposition_from_dict(d: dict, strict: bool = False) -> List[Tuple[Fraction, CorrelationTable]]:
    if not isinstance(d, dict) or not isinstance(d.get("components"), list):
        raise FormatError("decomposition document needs a 'components' list")
    out = []
    for i, c in enumerate(d["components"]):
        if not isinstance(c, dict) or "weight" not in c or "table" not in c:
            raise FormatError(f"component {i} needs 'weight' and 'table'")
        out.append((parse_rational(c["weight"], strict, f"components[{i}].weight"), table_from_dict(c["table"], strict)))
    if not out:
        raise FormatError("decomposition has no components")
    return out


# ---------------------------------------------------------------------------
# documents


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def loads(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def read_document(path: str):
    """Read a JSON document from ``path`` ('-' for standard input)."""
    if path == "-":
        return loads(sys.stdin.read(), "<stdin>")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from exc
    return loads(text, path)


def parse_spec_arg(arg: str) -> ExtremalSpec:
    """``pr``, an inline JSON spec, or a path to a spec document."""
    if arg == "pr":
        return PR_SPEC
    if arg.lstrip().startswith("{"):
        return spec_from_dict(loads(arg, "--spec"))
    return spec_from_dict(read_document(arg))
