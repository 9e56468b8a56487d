"""CSV ingestion: a matrix file with one comma-separated row per observation
and a response file with one value per line.  Errors carry 1-based line
numbers so the CLI can point at the offending row."""

from __future__ import annotations

import numpy as np

from .core import ProblemInstance


class ParseError(ValueError):
    def __init__(self, path, line_number, message):
        self.path = str(path)
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


def _data_lines(path, header: bool):
    with open(path, "r", encoding="utf-8") as handle:
        for number, raw in enumerate(handle, start=1):
            if header and number == 1:
                continue
            line = raw.strip()
            if line:
                yield number, line


def read_matrix(path, header: bool = False) -> np.ndarray:
    rows = []
    width = None
    for number, line in _data_lines(path, header):
        fields = [f.strip() for f in line.split(",")]
        try:
            row = [float(f) for f in fields]
        except ValueError:
            raise ParseError(path, number, f"not a number in row: {line!r}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(path, number, f"expected {width} columns, found {len(row)}")
        rows.append(row)
    if not rows:
        raise ParseError(path, 1, "matrix file is empty")
    return np.asarray(rows, dtype=float)


def read_response(path, header: bool = False) -> np.ndarray:
    values = []
    for number, line in _data_lines(path, header):
        try:
            values.append(float(line.split(",")[0]))
        except ValueError:
            raise ParseError(path, number, f"not a number: {line!r}") from None
    if not values:
        raise ParseError(path, 1, "response file is empty")
    return np.asarray(values, dtype=float)


def load_instance(matrix_path, response_path, header: bool = False) -> ProblemInstance:
    phi = read_matrix(matrix_path, header=header)
    y = read_response(response_path, header=header)
    if y.shape[0] != phi.shape[0]:
        raise ParseError(response_path, y.shape[0],
                         f"response has {y.shape[0]} rows but matrix has {phi.shape[0]}")
    return ProblemInstance.from_arrays(phi, y)


def write_matrix(path, matrix) -> None:
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", encoding="utf-8") as handle:
        for row in matrix:
            handle.write(",".join(format(v, ".17g") for v in row) + "\n")


def write_response(path, values) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for v in np.asarray(values, dtype=float):
            handle.write(format(v, ".17g") + "\n")
