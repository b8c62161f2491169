"""Embedding/state text files.

Format: a header line ``m n d``, then ``m`` user rows and ``n`` creator
rows of ``d`` whitespace-separated decimals.  Blank lines and lines
starting with ``#`` are ignored.  Rows are projected onto the sphere on
load.
"""

from pathlib import Path

import numpy as np

from .errors import CountMismatch, FileFormat, ZeroVector
from .sphere import project_rows


def load_embeddings(path):
    """Return ``(users, creators)`` as unit-row arrays."""
    lines = [
        (no, line.split())
        for no, line in enumerate(Path(path).read_text().splitlines(), start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not lines:
        raise FileFormat(f"{path}: empty file")
    no, header = lines[0]
    if len(header) != 3:
        raise FileFormat(f"{path}:{no}: header must be 'm n d'")
    try:
        m, n, d = (int(x) for x in header)
    except ValueError:
        raise FileFormat(f"{path}:{no}: header must hold three integers") from None
    if m < 1 or n < 1 or d < 2:
        raise FileFormat(f"{path}:{no}: need m >= 1, n >= 1, d >= 2")
    body = lines[1:]
    if len(body) != m + n:
        raise CountMismatch(f"{path}: header promises {m + n} rows, found {len(body)}")
    data = np.empty((m + n, d))
    for row, (no, fields) in enumerate(body):
        if len(fields) != d:
            raise FileFormat(f"{path}:{no}: expected {d} numbers, found {len(fields)}")
        try:
            data[row] = [float(x) for x in fields]
        except ValueError:
            raise FileFormat(f"{path}:{no}: not a number") from None
    if not np.all(np.isfinite(data)):
        raise FileFormat(f"{path}: non-finite value")
    try:
        data = project_rows(data)
    except ZeroVector as err:
        no = body[err.index][0]
        raise ZeroVector(f"{path}:{no}: zero row cannot be projected") from None
    return data[:m], data[m:]


def dump_state(state, path):
    """Write ``state`` in the embedding format (round-trips through :func:`load_embeddings`)."""
    with open(path, "w") as fh:
        fh.write(f"{state.m} {state.n} {state.d}\n")
        for X in (state.users, state.creators):
            for row in X:
                fh.write(" ".join(repr(float(x)) for x in row) + "\n")
