"""Treatment-allocation matrices for stepped wedge designs.

A design is a list of allocation rows (one per distinct rollout sequence)
with multiplicities, so ``6 0 1 1`` means six clusters following the
sequence control, intervention, intervention.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DesignParseError, WarningRecord, W_SHAPE


@dataclass(frozen=True)
class Design:
    """An I x J treatment allocation with row multiplicities.

    Attributes:
        rows: (multiplicity, allocation) pairs; allocation entries are 0/1.
        J: number of time periods.
        I: total number of clusters (sum of multiplicities).
        warnings: soft diagnostics collected while building (e.g. W-SHAPE).
    """

    rows: tuple[tuple[int, tuple[int, ...]], ...]
    J: int
    I: int
    warnings: tuple[WarningRecord, ...] = field(default=(), compare=False)

    @staticmethod
    def from_rows(rows) -> "Design":
        """Build and validate a design from (multiplicity, allocation) pairs."""
        norm = []
        warnings = []
        if not rows:
            raise DesignParseError("design has no rows")
        J = len(rows[0][1])
        if J < 2:
            raise DesignParseError("design needs at least 2 time periods")
        for i, (mult, alloc) in enumerate(rows):
            if int(mult) != mult or mult <= 0:
                raise DesignParseError(
                    f"row {i + 1}: cluster count must be a positive integer, got {mult!r}"
                )
            if len(alloc) != J:
                raise DesignParseError(
                    f"row {i + 1}: expected {J} columns, got {len(alloc)} (ragged rows)"
                )
            cells = []
            for x in alloc:
                if x not in (0, 1):
                    raise DesignParseError(
                        f"row {i + 1}: allocation cells must be 0 or 1, got {x!r}"
                    )
                cells.append(int(x))
            if any(a > b for a, b in zip(cells, cells[1:])):
                warnings.append(
                    WarningRecord(
                        W_SHAPE,
                        f"row {i + 1} switches back from intervention to control; "
                        "this is not a stepped-wedge rollout but the calculation "
                        "remains valid.",
                    )
                )
            norm.append((int(mult), tuple(cells)))
        I = sum(m for m, _ in norm)
        if I < 2:
            raise DesignParseError("design needs at least 2 clusters")
        return Design(rows=tuple(norm), J=J, I=I, warnings=tuple(warnings))

    @staticmethod
    def from_matrix(matrix) -> "Design":
        """Build from an I x J 0/1 matrix (every row gets multiplicity 1)."""
        return Design.from_rows([(1, tuple(r)) for r in matrix])

    def expanded(self) -> list[tuple[int, ...]]:
        """All I allocation rows with multiplicities unrolled."""
        out = []
        for mult, alloc in self.rows:
            out.extend([alloc] * mult)
        return out


@dataclass(frozen=True)
class DesignSummary:
    """Design counts entering the variance formulas.

    U is the number of treated cluster-period cells, W the sum over periods
    of squared treated-cluster counts, V the sum over clusters of squared
    treated-period counts, all on the expanded matrix.
    """

    U: int
    W: int
    V: int
    I: int
    J: int


def design_summaries(design: Design) -> DesignSummary:
    """Compute the (U, W, V) summaries of the expanded allocation matrix."""
    J = design.J
    U = 0
    V = 0
    per_period = [0] * J
    for mult, alloc in design.rows:
        row_sum = sum(alloc)
        U += mult * row_sum
        V += mult * row_sum * row_sum
        for j, x in enumerate(alloc):
            per_period[j] += mult * x
    W = sum(c * c for c in per_period)
    return DesignSummary(U=U, W=W, V=V, I=design.I, J=J)


def total_sample_size(design: Design, K: int, type: str) -> int:
    """Total number of observations: I*J*K cross-sectional, I*K cohort."""
    if type == "cohort":
        return design.I * K
    return design.I * design.J * K


def _data_lines(text: str) -> list[str]:
    lines = []
    for raw in text.replace("\r\n", "\n").replace("\r", "\n").split("\n"):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lines.append(line)
    return lines


def _tokenize(line: str) -> list[str]:
    return line.replace(",", " ").split()


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_design(text: str, format: str = "auto") -> Design:
    """Parse a design from text.

    Two formats are accepted. ``tabular``: an ignored header line followed by
    rows ``count x1 ... xJ``. ``matrix``: one 0/1 row per cluster, whitespace
    or comma separated. ``auto`` detects tabular by a non-numeric header line
    or a first column exceeding 1. ``#`` comment lines and blank lines are
    skipped; LF and CRLF both work.
    """
    if format not in ("auto", "tabular", "matrix"):
        raise DesignParseError(f"unknown design format {format!r}")
    lines = _data_lines(text)
    if not lines:
        raise DesignParseError("design input is empty")

    has_header = not all(_is_number(t) for t in _tokenize(lines[0]))
    body = lines[1:] if has_header else lines
    if not body:
        raise DesignParseError("design input has a header but no data rows")

    if format == "auto":
        first_cols = []
        for line in body:
            toks = _tokenize(line)
            if not toks or not _is_number(toks[0]):
                raise DesignParseError(f"cannot parse design row: {line!r}")
            first_cols.append(float(toks[0]))
        tabular = has_header or any(c not in (0.0, 1.0) for c in first_cols)
    else:
        tabular = format == "tabular"
        if format == "matrix" and has_header:
            raise DesignParseError("matrix format does not take a header line")

    rows = []
    for line in body:
        toks = _tokenize(line)
        vals = []
        for t in toks:
            if not _is_number(t):
                raise DesignParseError(f"non-numeric design cell {t!r} in row {line!r}")
            v = float(t)
            if v != int(v):
                raise DesignParseError(f"non-integer design cell {t!r} in row {line!r}")
            vals.append(int(v))
        if tabular:
            if len(vals) < 2:
                raise DesignParseError(f"tabular row needs a count and allocations: {line!r}")
            rows.append((vals[0], tuple(vals[1:])))
        else:
            rows.append((1, tuple(vals)))
    return Design.from_rows(rows)


def render_design(design: Design, format: str = "tabular") -> str:
    """Serialize a design back to text; inverse of :func:`parse_design`."""
    if format == "tabular":
        header = "numofclusters " + " ".join(f"time{j + 1}" for j in range(design.J))
        lines = [header]
        for mult, alloc in design.rows:
            lines.append(" ".join([str(mult)] + [str(x) for x in alloc]))
        return "\n".join(lines) + "\n"
    if format == "matrix":
        lines = []
        for alloc in design.expanded():
            lines.append(" ".join(str(x) for x in alloc))
        return "\n".join(lines) + "\n"
    raise DesignParseError(f"unknown design format {format!r}")
