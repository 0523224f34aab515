import csv

import numpy as np

from .core import Sample
from .errors import InvalidInputError


def ingest_csv(path, header=False, delimiter=",") -> Sample:
    """Read one observation per row; the column count is the dimension d.

    Row order is preserved since it defines the blocks.  Blank lines are
    skipped.
    """
    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, row in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                col = next(i for i, cell in enumerate(row, start=1) if not _is_float(cell))
                raise InvalidInputError(
                    f"{path}: non-numeric value {row[col - 1]!r} at row {lineno}, column {col}"
                ) from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise InvalidInputError(
                    f"{path}: row {lineno} has {len(values)} columns, expected {width}"
                )
            rows.append(values)
    if not rows:
        raise InvalidInputError(f"{path}: no observations")
    return Sample(np.array(rows, dtype=np.float64))


def _is_float(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True
