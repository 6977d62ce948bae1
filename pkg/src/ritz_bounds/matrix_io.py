"""Reader and writer for the plain-text matrix format.

A file holds a ``rows cols`` header line followed by ``rows`` lines of
``cols`` whitespace-separated decimal numbers. Lines starting with ``#`` are
comments; the comment ``# factor`` marks the matrix as a factor R of the
operator H = R^T R.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ParseError

logger = logging.getLogger("ritz-bounds.io")

FACTOR_MARKER = "factor"


@dataclass(frozen=True)
class MatrixFile:
    """A parsed matrix file."""

    matrix: np.ndarray
    is_factor: bool = False
    path: str = "<string>"


def parse_matrix(text: str, path: str = "<string>") -> MatrixFile:
    """
    Parse matrix text.

    Args:
        text: File contents
        path: Name used in diagnostics

    Returns:
        MatrixFile with the parsed values
    """
    is_factor = False
    shape = None
    rows: list[list[float]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            if line[1:].strip().lower() == FACTOR_MARKER:
                is_factor = True
            continue

        tokens = line.split()
        if shape is None:
            if len(tokens) != 2:
                raise ParseError("header must be 'rows cols'", path, line_no)
            try:
                shape = (int(tokens[0]), int(tokens[1]))
            except ValueError:
                raise ParseError(f"header has non-integer sizes: {line!r}", path, line_no)
            if shape[0] < 1 or shape[1] < 1:
                raise ParseError(f"sizes must be positive, got {shape}", path, line_no)
            continue

        if len(rows) == shape[0]:
            raise ParseError(f"more than {shape[0]} data rows", path, line_no)
        if len(tokens) != shape[1]:
            raise ParseError(f"expected {shape[1]} values, found {len(tokens)}", path, line_no)
        try:
            values = [float(tok) for tok in tokens]
        except ValueError:
            raise ParseError(f"non-numeric entry in {line!r}", path, line_no)
        if not all(np.isfinite(values)):
            raise ParseError("non-finite entry", path, line_no)
        rows.append(values)

    if shape is None:
        raise ParseError("missing 'rows cols' header", path)
    if len(rows) != shape[0]:
        raise ParseError(f"expected {shape[0]} data rows, found {len(rows)}", path)

    return MatrixFile(matrix=np.array(rows, dtype=float), is_factor=is_factor, path=path)


def read_matrix(path: Union[str, Path]) -> MatrixFile:
    """Read and parse a matrix file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ParseError(f"cannot read file: {e}", str(path))
    parsed = parse_matrix(text, str(path))
    logger.debug(
        f"Read {parsed.matrix.shape[0]}x{parsed.matrix.shape[1]} "
        f"{'factor' if parsed.is_factor else 'matrix'} from {path}"
    )
    return parsed


def format_matrix(matrix: np.ndarray, is_factor: bool = False) -> str:
    """Render a matrix in the text format with round-trip precision."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lines = []
    if is_factor:
        lines.append(f"# {FACTOR_MARKER}")
    lines.append(f"{matrix.shape[0]} {matrix.shape[1]}")
    for row in matrix:
        lines.append(" ".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def write_matrix(path: Union[str, Path], matrix: np.ndarray, is_factor: bool = False) -> None:
    """Write a matrix file."""
    Path(path).write_text(format_matrix(matrix, is_factor), encoding="utf-8")
