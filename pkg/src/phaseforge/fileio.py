"""Signal/matrix serialization: CSV and the PFG1 raw binary format.

CSV holds one value per cell; complex values are written as a single
"re+imj" token (Python complex literal without parentheses).  The binary
format is little-endian with a 16-byte header: magic "PFG1", a uint32 field
tag (0 real, 1 complex), uint32 rows, uint32 cols, followed by the values
row-major as float64 (or interleaved re/im float64 pairs).
"""

import struct

import numpy as np

from .errors import FileFormatError
from .measurement import ScalarField

MAGIC = b"PFG1"
_HEADER = struct.Struct("<4sIII")


def _format_value(v, field):
    if field is ScalarField.COMPLEX:
        return f"{v.real:.17g}{v.imag:+.17g}j"
    return f"{float(v):.17g}"


def write_csv(path, array, field=None):
    """Write a vector or matrix as CSV; vectors become a single column."""
    a = np.atleast_2d(np.asarray(array))
    if np.asarray(array).ndim == 1:
        a = a.T
    if field is None:
        field = (ScalarField.COMPLEX if np.iscomplexobj(a)
                 else ScalarField.REAL)
    with open(path, "w", newline="\n") as fh:
        for row in a:
            fh.write(",".join(_format_value(v, field) for v in row))
            fh.write("\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv`; returns a 2-d array.

    Raises FileFormatError (naming the line) on malformed cells or ragged
    rows.
    """
    rows = []
    width = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise FileFormatError(
                    f"expected {width} columns, got {len(cells)}",
                    line=lineno)
            parsed = []
            for cell in cells:
                try:
                    parsed.append(complex(cell))
                except ValueError:
                    raise FileFormatError(
                        f"cannot parse value {cell!r}", line=lineno) from None
            rows.append(parsed)
    if not rows:
        raise FileFormatError("empty file", line=1)
    a = np.array(rows)
    if np.all(a.imag == 0):
        a = a.real
    return a


def write_binary(path, array, field=None):
    a = np.atleast_2d(np.asarray(array))
    if np.asarray(array).ndim == 1:
        a = a.T
    if field is None:
        field = (ScalarField.COMPLEX if np.iscomplexobj(a)
                 else ScalarField.REAL)
    tag = 0 if field is ScalarField.REAL else 1
    data = np.ascontiguousarray(a, dtype=field.dtype)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, tag, a.shape[0], a.shape[1]))
        fh.write(data.astype("<f8" if tag == 0 else "<c16").tobytes())


def read_binary(path):
    """Read a PFG1 file; returns a 2-d array.

    Raises FileFormatError (naming the byte offset) on a bad magic, an
    unknown field tag, or a truncated payload.
    """
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FileFormatError("truncated header", offset=len(raw))
    magic, tag, rows, cols = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise FileFormatError(f"bad magic {magic!r}", offset=0)
    if tag not in (0, 1):
        raise FileFormatError(f"unknown field tag {tag}", offset=4)
    itemsize = 8 if tag == 0 else 16
    expected = rows * cols * itemsize
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise FileFormatError(
            f"payload has {len(payload)} bytes, expected {expected}",
            offset=_HEADER.size + len(payload))
    dtype = "<f8" if tag == 0 else "<c16"
    return np.frombuffer(payload, dtype=dtype).reshape(rows, cols).copy()


def read_array(path):
    """Dispatch on extension: .csv as text, anything else as PFG1 binary."""
    if str(path).endswith(".csv"):
        return read_csv(path)
    return read_binary(path)


def write_array(path, array, field=None):
    if str(path).endswith(".csv"):
        write_csv(path, array, field)
    else:
        write_binary(path, array, field)
