"""Qutrit correction tables and their line-oriented text format.

A table row gives Bob's operator on the diagonal subspace span{|r,r>} as
``U = sum_r omega**t_r |p_r,p_r><r,r|``. On the full two-qudit space it acts as
``|x,y> -> omega**t_x |p_x,p_y>``, which agrees with the closed-form
corrections wherever those are phase-and-shift operators.

File format (UTF-8, ``#`` starts a comment)::

    dimension 3
    ruleset OURS_TABLE
    0 0 0 : perm=[0 1 2] phase=[0 0 0]
    0 0 1 : perm=[2 0 1] phase=[0 0 0]
    ...
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .linalg import DomainError, PhasePermOp
from .protocol import CorrectionRuleset, Outcome, all_outcomes

# Rows as printed for the qutrit case. "ab<cd" is |ab><cd|; a leading "+" or
# "-" is the factor exp(+2pi i/3) or exp(-2pi i/3). Columns: corrected, original.
_PRINTED_ROWS = """
0 0 0 | I | I
1 1 0 | I | 00<00 + -11<11 + +22<22
2 2 0 | I | 00<00 + +11<11 + -22<22
0 2 0 | 00<00 + +11<11 + -22<22 | 00<00 + -11<11 + +22<22
1 0 0 | 00<00 + +11<11 + -22<22 | 00<00 + +11<11 + -22<22
2 1 0 | 00<00 + +11<11 + -22<22 | I
0 1 0 | 00<00 + -11<11 + +22<22 | 00<00 + +11<11 + -22<22
1 2 0 | 00<00 + -11<11 + +22<22 | I
2 0 0 | 00<00 + -11<11 + +22<22 | 00<00 + -11<11 + +22<22
0 0 1 | 00<11 + 11<22 + 22<00 | 00<11 + 11<22 + 22<00
1 1 1 | 00<11 + 11<22 + 22<00 | 00<11 + -11<22 + +22<00
2 2 1 | 00<11 + 11<22 + 22<00 | 00<11 + +11<22 + -22<00
0 2 1 | 00<11 + +11<22 + -22<00 | 00<11 + -11<22 + +22<00
1 0 1 | 00<11 + +11<22 + -22<00 | 00<11 + +11<22 + -22<00
2 1 1 | 00<11 + +11<22 + -22<00 | 00<11 + 11<22 + 22<00
0 1 1 | 00<11 + -11<22 + +22<00 | 00<11 + +11<22 + -22<00
1 2 1 | 00<11 + -11<22 + +22<00 | 00<11 + 11<22 + 22<00
2 0 1 | 00<11 + -11<22 + +22<00 | 00<11 + -11<22 + +22<00
0 0 2 | 00<22 + 11<00 + 22<11 | 00<22 + 11<00 + 22<11
1 1 2 | 00<22 + 11<00 + 22<11 | 00<22 + -11<00 + +22<11
2 2 2 | 00<22 + 11<00 + 22<11 | 00<22 + +11<00 + -22<11
0 2 2 | 00<22 + +11<00 + -22<11 | 00<22 + -11<00 + +22<11
1 0 2 | 00<22 + +11<00 + -22<11 | 00<22 + +11<00 + -22<11
2 1 2 | 00<22 + +11<00 + -22<11 | 00<22 + 11<00 + 22<11
0 1 2 | 00<22 + -11<00 + +22<11 | 00<22 + +11<00 + -22<11
1 2 2 | 00<22 + -11<00 + +22<11 | 00<22 + 11<00 + 22<11
2 0 2 | 00<22 + -11<00 + +22<11 | 00<22 + -11<00 + +22<11
"""

_TERM = re.compile(r"^([+-]?)(\d)(\d)<(\d)(\d)$")


class TableParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class DiagonalRow:
    """``perm[r]`` is the output label of ``|r,r>``; ``phase[r]`` its exponent."""

    perm: tuple[int, ...]
    phase: tuple[int, ...]

    def operator(self, dim: int) -> PhasePermOp:
        p = np.asarray(self.perm)
        single = PhasePermOp(p, np.asarray(self.phase), dim)
        return single.kron(PhasePermOp(p, np.zeros(dim, dtype=np.int64), dim))


@dataclass(frozen=True)
class CorrectionTable:
    """Outcome-indexed corrections, one :class:`DiagonalRow` per ``(l, m, n)``."""

    dim: int
    name: str
    rows: dict[Outcome, DiagonalRow] = field(hash=False)

    def operator(self, o: Outcome) -> PhasePermOp:
        try:
            row = self.rows[Outcome(*o)]
        except KeyError:
            raise DomainError(f"table {self.name} has no row for {tuple(o)}") from None
        return row.operator(self.dim)


def parse_printed_operator(text: str, dim: int = 3) -> DiagonalRow:
    """Turn a printed sum like ``00<11 + -11<22 + +22<00`` into a row."""
    text = text.strip()
    if text == "I":
        return DiagonalRow(tuple(range(dim)), (0,) * dim)
    perm: list[int | None] = [None] * dim
    phase = [0] * dim
    for term in text.split(" + "):
        match = _TERM.match(term.strip())
        if not match:
            raise ValueError(f"unrecognized term {term!r}")
        sign, a, b, c, d = match.groups()
        if a != b or c != d:
            raise ValueError(f"term {term!r} leaves the diagonal subspace")
        src, dst = int(c), int(a)
        perm[src] = dst
        phase[src] = {"": 0, "+": 1, "-": dim - 1}[sign]
    if any(p is None for p in perm):
        raise ValueError(f"operator {text!r} does not cover every |r,r>")
    return DiagonalRow(tuple(perm), tuple(phase))


@lru_cache(maxsize=None)
def printed_tables() -> tuple[CorrectionTable, CorrectionTable]:
    ours: dict[Outcome, DiagonalRow] = {}
    baan: dict[Outcome, DiagonalRow] = {}
    for line in _PRINTED_ROWS.strip().splitlines():
        idx, col_ours, col_baan = line.split("|")
        o = Outcome(*(int(v) for v in idx.split()))
        ours[o] = parse_printed_operator(col_ours)
        baan[o] = parse_printed_operator(col_baan)
    return CorrectionTable(3, "OURS_TABLE", ours), CorrectionTable(3, "BAAN_TABLE", baan)


def builtin_table(rs: CorrectionRuleset) -> CorrectionTable:
    ours, baan = printed_tables()
    if rs is CorrectionRuleset.OURS_TABLE:
        return ours
    if rs is CorrectionRuleset.BAAN_TABLE:
        return baan
    raise DomainError(f"{rs.value} is not a table ruleset")


def diagonal_row(op: PhasePermOp, dim: int) -> DiagonalRow:
    """Read back the diagonal-subspace action of a phase-permutation operator."""
    if op.dim != dim * dim:
        raise DomainError(f"operator acts on dimension {op.dim}, expected {dim * dim}")
    perm, phase = [], []
    for r in range(dim):
        out = int(op.perm[r * (dim + 1)])
        a, b = divmod(out, dim)
        if a != b:
            raise DomainError(f"operator maps |{r}{r}> off the diagonal subspace")
        perm.append(a)
        phase.append(int(op.phases[r * (dim + 1)]))
    return DiagonalRow(tuple(perm), tuple(phase))


def table_from_ruleset(rs, dim: int) -> CorrectionTable:
    from .protocol import correction

    name = rs.value if isinstance(rs, CorrectionRuleset) else rs.name
    rows = {o: diagonal_row(correction(rs, dim, o), dim) for o in all_outcomes(dim)}
    return CorrectionTable(dim, name, rows)


def format_table(table: CorrectionTable) -> str:
    lines = [f"dimension {table.dim}", f"ruleset {table.name}"]
    for o in all_outcomes(table.dim):
        row = table.rows[o]
        lines.append(
            f"{o.l} {o.m} {o.n} : perm=[{' '.join(map(str, row.perm))}] "
            f"phase=[{' '.join(map(str, row.phase))}]"
        )
    return "\n".join(lines) + "\n"


_ROW = re.compile(
    r"^(\d+)\s+(\d+)\s+(\d+)\s*:\s*perm=\[([\d\s]*)\]\s+phase=\[([\d\s]*)\]$"
)


def parse_table(text: str) -> CorrectionTable:
    dim: int | None = None
    name: str | None = None
    rows: dict[Outcome, DiagonalRow] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dimension"):
            parts = line.split()
            if dim is not None or len(parts) != 2 or not parts[1].isdigit():
                raise TableParseError("bad or repeated dimension header", lineno)
            dim = int(parts[1])
            if dim < 2:
                raise TableParseError(f"dimension must be >= 2, got {dim}", lineno)
            continue
        if line.startswith("ruleset"):
            parts = line.split()
            if name is not None or len(parts) != 2:
                raise TableParseError("bad or repeated ruleset header", lineno)
            name = parts[1]
            continue
        if dim is None:
            raise TableParseError("row before the dimension header", lineno)
        match = _ROW.match(line)
        if not match:
            raise TableParseError(f"cannot parse row {line!r}", lineno)
        o = Outcome(*(int(match.group(i)) for i in (1, 2, 3)))
        if not all(0 <= v < dim for v in o):
            raise TableParseError(f"outcome {tuple(o)} out of range", lineno)
        if o in rows:
            raise TableParseError(f"duplicate row {o.l} {o.m} {o.n}", lineno)
        perm = tuple(int(v) for v in match.group(4).split())
        phase = tuple(int(v) for v in match.group(5).split())
        if len(perm) != dim or sorted(perm) != list(range(dim)):
            raise TableParseError(f"perm {list(perm)} is not a bijection on 0..{dim - 1}", lineno)
        if len(phase) != dim or any(not 0 <= t < dim for t in phase):
            raise TableParseError(f"phase {list(phase)} must hold {dim} values in 0..{dim - 1}", lineno)
        rows[o] = DiagonalRow(perm, phase)
    if dim is None:
        raise TableParseError("missing dimension header")
    if len(rows) != dim**3:
        raise TableParseError(f"expected {dim**3} rows, found {len(rows)}")
    return CorrectionTable(dim, name or "CUSTOM", rows)


def read_table(path: str | Path) -> CorrectionTable:
    return parse_table(Path(path).read_text(encoding="utf-8"))


def write_table(table: CorrectionTable, path: str | Path) -> None:
    Path(path).write_text(format_table(table), encoding="utf-8")


def render_row(row: DiagonalRow, dim: int) -> str:
    """Exact text form, e.g. ``|00><11| + ω^1|11><22| + ω^2|22><00|``."""
    if row.perm == tuple(range(dim)) and not any(row.phase):
        return "I"
    terms = []
    for r in range(dim):
        p, t = row.perm[r], row.phase[r]
        coef = f"ω^{t}" if t else ""
        terms.append(f"{coef}|{p}{p}><{r}{r}|")
    order = sorted(range(dim), key=lambda r: row.perm[r])
    return " + ".join(terms[r] for r in order)
