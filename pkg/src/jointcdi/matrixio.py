"""Plain-text complex matrices.

A matrix is written as a ``rows cols`` line followed by one line per row of
``re im`` pairs separated by whitespace. Several matrices in one file are
separated by blank lines; lines starting with ``#`` are comments. Floats use
``repr`` so values round-trip exactly and never depend on the locale.
"""

import numpy as np


def format_matrix(M):
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    for row in M:
        lines.append(" ".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in row))
    return "\n".join(lines) + "\n"


def format_matrices(mats):
    return "\n".join(format_matrix(M) for M in mats)


def _parse_block(lines, start):
    header = lines[start].split()
    if len(header) != 2:
        raise ValueError(f"line {start + 1}: expected 'rows cols', got {lines[start]!r}")
    try:
        rows, cols = int(header[0]), int(header[1])
    except ValueError:
        raise ValueError(f"line {start + 1}: non-integer dimensions {lines[start]!r}") from None
    if rows < 1 or cols < 1:
        raise ValueError(f"line {start + 1}: dimensions must be positive")
    if start + 1 + rows > len(lines):
        raise ValueError(f"line {start + 1}: expected {rows} rows, file ends early")
    M = np.empty((rows, cols), dtype=complex)
    for i in range(rows):
        ln = start + 2 + i
        tok = lines[ln - 1].split()
        if len(tok) != 2 * cols:
            raise ValueError(f"line {ln}: expected {2 * cols} numbers, got {len(tok)}")
        try:
            vals = np.array([float(t) for t in tok])
        except ValueError:
            raise ValueError(f"line {ln}: malformed number") from None
        M[i] = vals[0::2] + 1j * vals[1::2]
    return M, start + 1 + rows


def parse_matrices(text):
    lines = ["" if ln.lstrip().startswith("#") else ln for ln in text.splitlines()]
    out = []
    i = 0
    while i < len(lines):
        if not lines[i].strip():
            i += 1
            continue
        M, i = _parse_block(lines, i)
        out.append(M)
    return out


def parse_matrix(text):
    mats = parse_matrices(text)
    if len(mats) != 1:
        raise ValueError(f"expected exactly one matrix, found {len(mats)}")
    return mats[0]


def read_matrix(path):
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read())


def write_matrix(path, M):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_matrix(M))


def export_codebook(codebook):
    """Codebook as text, one block per codeword (vectors become ``dim x 1`` columns)."""
    blocks = []
    for c in codebook.codewords:
        c = np.asarray(c)
        blocks.append(c.reshape(-1, 1) if c.ndim == 1 else c)
    return format_matrices(blocks)
