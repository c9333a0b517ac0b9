"""Fixed-format MPS encoding of canonical models.

Field layout follows the classic fixed columns (indicator at 2-3, names
at 5-12 and 15-22, values at 25-36).  Name fields hold at most eight
characters, so every variable and row is written under a deterministic
positional short name (``X0000001``, ``R0000001``) with a sidecar map
back to the original names.  The objective sense is declared in an
OBJSENSE section; all variables are integer (binaries carry ``BV``
bounds, general integers ``UP``), and every variable appears in COLUMNS
with an explicit objective entry so that parsing recovers the exact
variable set.

``emit -> parse -> emit`` reaches a byte fixpoint after one round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

from .mip import BINARY, INTEGER, SENSE_EQ, SENSE_GE, SENSE_LE, CanonicalModel

_SENSE_TO_ROW = {SENSE_EQ: "E", SENSE_LE: "L", SENSE_GE: "G"}
_ROW_TO_SENSE = {v: k for k, v in _SENSE_TO_ROW.items()}

OBJ_ROW = "OBJ"
MAX_NAME_LEN = 8


class MpsFormatError(ValueError):
    """Raised when MPS data cannot be parsed."""


@dataclass(frozen=True)
class MpsDocument:
    data: bytes
    variable_names: dict[str, str]  # short -> original
    row_names: dict[str, str]

    def original_variable(self, short: str) -> str:
        return self.variable_names.get(short, short)


def format_number(value: float) -> str:
    """Deterministic numeric literal fitting the 12-character value field."""
    if value == int(value) and abs(value) < 1e11:
        return str(int(value))
    best = None
    for precision in range(1, 12):
        text = f"{value:.{precision}G}"
        if len(text) <= 12:
            best = text
            if float(text) == value:
                return text
    if best is None:
        best = f"{value:.4E}"
    return best


def _short_var(i: int) -> str:
    return f"X{i + 1:07d}"


def _short_row(i: int) -> str:
    return f"R{i + 1:07d}"


def emit_mps(model: CanonicalModel, name: str = "ROSTER") -> MpsDocument:
    """Serialize a model to fixed MPS bytes plus the short-name sidecar."""
    lines: list[str] = [f"NAME          {name}", "OBJSENSE", "    MAX", "ROWS", f" N  {OBJ_ROW}"]
    row_names: dict[str, str] = {}
    for j, c in enumerate(model.constraints):
        short = _short_row(j)
        row_names[short] = c.name
        lines.append(f" {_SENSE_TO_ROW[c.sense]}  {short}")

    # Column-major entries: collect each variable's constraint rows in order.
    per_var: list[list[tuple[int, float]]] = [[] for _ in model.variables]
    for j, c in enumerate(model.constraints):
        for i, coef in c.terms:
            per_var[i].append((j, coef))

    var_names: dict[str, str] = {}
    lines.append("COLUMNS")
    lines.append(f"    {'MARKER':<10}{chr(39) + 'MARKER' + chr(39):<25}'INTORG'")
    for i, v in enumerate(model.variables):
        short = _short_var(i)
        var_names[short] = v.name
        lines.append(f"    {short:<10}{OBJ_ROW:<10}{format_number(v.objective)}")
        for j, coef in per_var[i]:
            lines.append(f"    {short:<10}{_short_row(j):<10}{format_number(coef)}")
    lines.append(f"    {'MARKER':<10}{chr(39) + 'MARKER' + chr(39):<25}'INTEND'")

    lines.append("RHS")
    for j, c in enumerate(model.constraints):
        if c.rhs != 0.0:
            lines.append(f"    {'RHS':<10}{_short_row(j):<10}{format_number(c.rhs)}")

    lines.append("BOUNDS")
    for i, v in enumerate(model.variables):
        short = _short_var(i)
        if v.kind == BINARY:
            lines.append(f" BV {'BND':<10}{short}")
        else:
            lines.append(f" UP {'BND':<10}{short:<10}{format_number(v.upper)}")
    lines.append("ENDATA")
    data = ("\n".join(lines) + "\n").encode("ascii")
    return MpsDocument(data=data, variable_names=var_names, row_names=row_names)


def parse_mps(
    data: bytes | str,
    variable_names: dict[str, str] | None = None,
    row_names: dict[str, str] | None = None,
) -> CanonicalModel:
    """Parse MPS bytes back into a canonical model.

    Optional sidecar maps restore the original long names; without them
    the short file names are kept.  Provenance tags are not part of the
    wire format and come back as ``"mps"``.
    """
    text = data.decode("ascii") if isinstance(data, bytes) else data
    section = None
    maximize = False
    expect_objsense_value = False

    row_order: list[str] = []
    row_sense: dict[str, str] = {}
    obj_rows: set[str] = set()
    var_order: list[str] = []
    var_entries: dict[str, list[tuple[str, float]]] = {}
    var_obj: dict[str, float] = {}
    var_integer: dict[str, bool] = {}
    rhs: dict[str, float] = {}
    bound_kind: dict[str, str] = {}
    bound_value: dict[str, float] = {}
    in_integer = False

    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            token = raw.split()[0].upper()
            if token in ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "OBJSENSE", "ENDATA"):
                section = token
                expect_objsense_value = section == "OBJSENSE"
                if section == "ENDATA":
                    break
                continue
            raise MpsFormatError(f"unknown MPS section line: {raw!r}")
        fields = raw.split()
        if expect_objsense_value:
            maximize = fields[0].upper() in ("MAX", "MAXIMIZE")
            expect_objsense_value = False
            continue
        if section == "ROWS":
            kind, rname = fields[0].upper(), fields[1]
            if kind == "N":
                obj_rows.add(rname)
            elif kind in _ROW_TO_SENSE:
                row_order.append(rname)
                row_sense[rname] = _ROW_TO_SENSE[kind]
            else:
                raise MpsFormatError(f"unknown row type {kind!r}")
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1] == "'MARKER'":
                if fields[2] == "'INTORG'":
                    in_integer = True
                elif fields[2] == "'INTEND'":
                    in_integer = False
                continue
            vname = fields[0]
            if vname not in var_entries:
                var_order.append(vname)
                var_entries[vname] = []
                var_integer[vname] = in_integer
            pairs = fields[1:]
            if len(pairs) % 2:
                raise MpsFormatError(f"odd COLUMNS entry: {raw!r}")
            for k in range(0, len(pairs), 2):
                rname, value = pairs[k], float(pairs[k + 1])
                if rname in obj_rows:
                    var_obj[vname] = var_obj.get(vname, 0.0) + value
                elif rname in row_sense:
                    var_entries[vname].append((rname, value))
                else:
                    raise MpsFormatError(f"COLUMNS references unknown row {rname!r}")
        elif section == "RHS":
            pairs = fields[1:]
            for k in range(0, len(pairs), 2):
                rname, value = pairs[k], float(pairs[k + 1])
                if rname not in row_sense:
                    raise MpsFormatError(f"RHS references unknown row {rname!r}")
                rhs[rname] = value
        elif section == "BOUNDS":
            btype = fields[0].upper()
            vname = fields[2]
            if vname not in var_entries:
                raise MpsFormatError(f"BOUNDS references unknown column {vname!r}")
            if btype == "BV":
                bound_kind[vname] = "BV"
            elif btype in ("UP", "UI"):
                bound_kind[vname] = "UP"
                bound_value[vname] = float(fields[3])
            elif btype == "PL":
                bound_kind[vname] = "PL"
            elif btype in ("LO", "LI", "FX", "MI", "FR"):
                raise MpsFormatError(f"unsupported bound type {btype!r} for this model family")
            else:
                raise MpsFormatError(f"unknown bound type {btype!r}")
        elif section == "RANGES":
            raise MpsFormatError("RANGES sections are not produced or accepted here")
        elif section in ("NAME", None):
            continue
        else:
            raise MpsFormatError(f"unexpected data in section {section!r}: {raw!r}")

    if not maximize:
        raise MpsFormatError("missing OBJSENSE MAX declaration")

    model = CanonicalModel()
    vmap = variable_names or {}
    rmap = row_names or {}
    for vname in var_order:
        if not var_integer.get(vname, False):
            raise MpsFormatError(f"column {vname!r} is continuous; expected integer markers")
        kind = bound_kind.get(vname)
        if kind == "BV":
            model.add_variable(vmap.get(vname, vname), BINARY, 1, var_obj.get(vname, 0.0))
        elif kind == "UP":
            model.add_variable(vmap.get(vname, vname), INTEGER, bound_value[vname], var_obj.get(vname, 0.0))
        elif kind == "PL" or kind is None:
            model.add_variable(vmap.get(vname, vname), INTEGER, float("inf"), var_obj.get(vname, 0.0))

    by_row: dict[str, list[tuple[int, float]]] = {rname: [] for rname in row_order}
    index_of = {vname: i for i, vname in enumerate(var_order)}
    for vname in var_order:
        for rname, value in var_entries[vname]:
            by_row[rname].append((index_of[vname], value))
    for rname in row_order:
        terms = sorted(by_row[rname])
        model.add_constraint(rmap.get(rname, rname), "mps", terms, row_sense[rname], rhs.get(rname, 0.0))
    return model
