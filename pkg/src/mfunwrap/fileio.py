"""Binary raster, shift and belief files, CSV anneal reports and PGM export.

Formats (all headers are one ASCII line terminated by ``\\n``):

``PUW1 <rows> <cols>``
    rows*cols float64 little-endian values, row-major.
``PUWS1 <rows> <cols>``
    the a-raster (rows x cols-1) then the b-raster (rows-1 x cols), int8.
``PUWB1 <rows> <cols>``
    alpha (rows x cols-1 x 3) then beta (rows-1 x cols x 3), float64 LE.
"""
from __future__ import annotations

import csv
import sys

import numpy as np

from .grid import ShiftField
from .model import BeliefField

RASTER_MAGIC = "PUW1"
SHIFT_MAGIC = "PUWS1"
BELIEF_MAGIC = "PUWB1"
_F64 = np.dtype("<f8")


class FormatError(ValueError):
    """Malformed or unexpected file content."""


def _split_header(data: bytes, path):
    nl = data.find(b"\n")
    if nl < 0 or nl > 64:
        raise FormatError(f"{path}: missing header line")
    try:
        parts = data[:nl].decode("ascii").split(" ")
    except UnicodeDecodeError:
        raise FormatError(f"{path}: header is not ASCII") from None
    if len(parts) != 3:
        raise FormatError(f"{path}: malformed header {data[:nl]!r}")
    magic, rows, cols = parts
    if not (rows.isdigit() and cols.isdigit()):
        raise FormatError(f"{path}: malformed dimensions in header {data[:nl]!r}")
    rows, cols = int(rows), int(cols)
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: empty raster")
    return magic, rows, cols, data[nl + 1:]


def read_magic(path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(64)
    return _split_header(head, path)[0]


def _read(path, expected):
    with open(path, "rb") as fh:
        data = fh.read()
    magic, rows, cols, payload = _split_header(data, path)
    if magic != expected:
        raise FormatError(f"{path}: expected {expected} file, found {magic!r}")
    return rows, cols, payload


def _header(magic, rows, cols):
    return f"{magic} {rows} {cols}\n".encode("ascii")


def write_raster(path, arr) -> None:
    arr = np.asarray(arr, dtype=_F64)
    if arr.ndim != 2:
        raise ValueError("raster must be 2-D")
    with open(path, "wb") as fh:
        fh.write(_header(RASTER_MAGIC, *arr.shape))
        fh.write(np.ascontiguousarray(arr).tobytes())


def read_raster(path) -> np.ndarray:
    rows, cols, payload = _read(path, RASTER_MAGIC)
    if len(payload) != 8 * rows * cols:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {8 * rows * cols}")
    return np.frombuffer(payload, dtype=_F64).reshape(rows, cols).astype(np.float64)


def write_shifts(path, shifts: ShiftField) -> None:
    rows, cols = shifts.shape
    with open(path, "wb") as fh:
        fh.write(_header(SHIFT_MAGIC, rows, cols))
        fh.write(shifts.a.astype(np.int8).tobytes())
        fh.write(shifts.b.astype(np.int8).tobytes())


def read_shifts(path) -> ShiftField:
    rows, cols, payload = _read(path, SHIFT_MAGIC)
    n_a = rows * (cols - 1)
    n_b = (rows - 1) * cols
    if len(payload) != n_a + n_b:
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {n_a + n_b}")
    vals = np.frombuffer(payload, dtype=np.int8)
    if not np.all(np.isin(vals, (-1, 0, 1))):
        raise FormatError(f"{path}: shift values outside {{-1, 0, 1}}")
    return ShiftField(vals[:n_a].reshape(rows, cols - 1), vals[n_a:].reshape(rows - 1, cols))


def write_beliefs(path, beliefs: BeliefField) -> None:
    rows, cols = beliefs.shape
    with open(path, "wb") as fh:
        fh.write(_header(BELIEF_MAGIC, rows, cols))
        fh.write(beliefs.alpha.astype(_F64).tobytes())
        fh.write(beliefs.beta.astype(_F64).tobytes())


def read_beliefs(path) -> BeliefField:
    rows, cols, payload = _read(path, BELIEF_MAGIC)
    n_a = rows * (cols - 1) * 3
    n_b = (rows - 1) * cols * 3
    if len(payload) != 8 * (n_a + n_b):
        raise FormatError(f"{path}: payload is {len(payload)} bytes, expected {8 * (n_a + n_b)}")
    vals = np.frombuffer(payload, dtype=_F64).astype(np.float64)
    beliefs = BeliefField(vals[:n_a].reshape(rows, cols - 1, 3), vals[n_a:].reshape(rows - 1, cols, 3))
    try:
        beliefs.validate()
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return beliefs


REPORT_COLUMNS = ("temperature", "inv_temperature", "sweeps", "F", "curl_violations", "mean_entropy")


def write_report(path, records) -> None:
    """Per-temperature anneal records as CSV (violations and entropy vs 1/T)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in records:
            w.writerow([repr(r.temperature), repr(r.inv_temperature), r.sweeps,
                        repr(r.free_energy), r.curl_violations, repr(r.mean_entropy)])


def read_report(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0]) != REPORT_COLUMNS:
        raise FormatError(f"{path}: unexpected report columns {tuple(rows[0])}")
    out = []
    for r in rows:
        out.append({
            "temperature": float(r["temperature"]),
            "inv_temperature": float(r["inv_temperature"]),
            "sweeps": int(r["sweeps"]),
            "F": float(r["F"]),
            "curl_violations": int(r["curl_violations"]),
            "mean_entropy": float(r["mean_entropy"]),
        })
    return out


def write_pgm(path, arr, stream=sys.stderr) -> tuple[float, float]:
    """8-bit binary PGM (P5) with min-max scaling.

    The scale is reported on ``stream`` as ``pgm scale: min=... max=...``
    and returned.
    """
    arr = np.asarray(arr, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    if hi > lo:
        pix = np.rint((arr - lo) / (hi - lo) * 255.0)
    else:
        pix = np.zeros_like(arr)
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(pix.astype(np.uint8).tobytes())
    if stream is not None:
        print(f"pgm scale: min={lo!r} max={hi!r}", file=stream)
    return lo, hi


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated PGM header")
        tokens.append(data[start:pos])
    if tokens[0] != b"P5" or tokens[3] != b"255":
        raise FormatError(f"{path}: not an 8-bit P5 PGM")
    cols, rows = int(tokens[1]), int(tokens[2])
    payload = data[pos + 1:]
    if len(payload) != rows * cols:
        raise FormatError(f"{path}: PGM payload size mismatch")
    return np.frombuffer(payload, dtype=np.uint8).reshape(rows, cols)
