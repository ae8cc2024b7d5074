"""Matrix and trace file I/O.

Binary matrix format: magic "LRSM1", two 8-byte little-endian unsigned dims,
then row-major 8-byte IEEE-754 doubles (bit-exact round trip). CSV matrix
format: a plain comma-separated numeric grid, no header, 17 significant
digits (value-exact round trip). Trace CSV: one comment line embedding the
resolved configuration, a header row, then one row per iteration.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ParseError
from .numerics import as_matrix
from .solver import RunTrace

__all__ = ["save_matrix", "load_matrix", "save_trace", "TRACE_COLUMNS"]

MAGIC = b"LRSM1"
_HEADER = struct.Struct("<QQ")

TRACE_COLUMNS = ("iter", "phase", "objective", "rel_err_x", "rel_err_s", "d2_z", "D_zs", "secs")


def save_matrix(path: Union[str, Path], m: np.ndarray, fmt: Optional[str] = None) -> None:
    """Write *m* to *path*; fmt is "binary" or "csv" (default: by extension,
    ".csv" selects CSV, anything else binary)."""
    a = as_matrix(m)
    p = Path(path)
    if fmt is None:
        fmt = "csv" if p.suffix.lower() == ".csv" else "binary"
    if fmt == "binary":
        with open(p, "wb") as fh:
            fh.write(MAGIC)
            fh.write(_HEADER.pack(a.shape[0], a.shape[1]))
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())
    elif fmt == "csv":
        with open(p, "w", newline="") as fh:
            for row in a:
                fh.write(",".join(f"{v:.17g}" for v in row))
                fh.write("\n")
    else:
        raise ParseError(f"unknown matrix format {fmt!r}")


def load_matrix(path: Union[str, Path]) -> np.ndarray:
    """Read a matrix written by save_matrix; the format is sniffed from the
    leading bytes. Malformed or truncated files raise ParseError naming the
    byte offset; non-finite values are rejected."""
    p = Path(path)
    raw = p.read_bytes()
    if raw[: len(MAGIC)] == MAGIC:
        return _load_binary(raw, p)
    return _load_csv(raw, p)


def _load_binary(raw: bytes, p: Path) -> np.ndarray:
    offset = len(MAGIC)
    if len(raw) < offset + _HEADER.size:
        raise ParseError(
            f"{p}: truncated header at byte {len(raw)} (need {offset + _HEADER.size} bytes)"
        )
    rows, cols = _HEADER.unpack_from(raw, offset)
    offset += _HEADER.size
    if rows == 0 or cols == 0:
        raise ParseError(f"{p}: zero dimension {rows}x{cols} in header at byte {len(MAGIC)}")
    need = rows * cols * 8
    if len(raw) - offset != need:
        raise ParseError(
            f"{p}: payload of {len(raw) - offset} bytes at byte {offset}, expected {need} "
            f"for a {rows}x{cols} matrix"
        )
    data = np.frombuffer(raw, dtype="<f8", count=rows * cols, offset=offset)
    m = data.reshape(rows, cols).astype(np.float64)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{p}: non-finite values in matrix payload")
    return m


def _load_csv(raw: bytes, p: Path) -> np.ndarray:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{p}: not a matrix file (bad magic, not UTF-8 at byte {exc.start})") from exc
    rows: list[list[float]] = []
    consumed = 0
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped:
            try:
                values = [float(tok) for tok in stripped.split(",")]
            except ValueError as exc:
                raise ParseError(f"{p}: unparseable number on line {lineno} (byte {consumed})") from exc
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise ParseError(
                    f"{p}: ragged row on line {lineno} (byte {consumed}): "
                    f"{len(values)} columns, expected {width}"
                )
            rows.append(values)
        consumed += len(line) + 1
    if not rows:
        raise ParseError(f"{p}: empty matrix file (byte 0)")
    m = np.array(rows, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{p}: non-finite values in matrix")
    return m


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.17g}"


def save_trace(
    path: Union[str, Path],
    trace: RunTrace,
    config_comment: str = "",
    include_timing: bool = False,
) -> None:
    """Write the per-iteration trace CSV.

    The first line is a "#"-prefixed comment embedding the resolved config so
    the file is self-describing. Truth columns are empty when no ground truth
    was supplied. The secs column is written only with include_timing=True;
    by default it is empty so same-seed reruns are byte-identical.
    """
    with open(Path(path), "w", newline="") as fh:
        fh.write(f"# {config_comment}\n")
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for rec in trace:
            fh.write(
                ",".join(
                    (
                        str(rec.iteration),
                        rec.phase,
                        _fmt(rec.objective),
                        _fmt(rec.rel_err_x),
                        _fmt(rec.rel_err_s),
                        _fmt(rec.d2_z),
                        _fmt(rec.d_zs),
                        _fmt(rec.secs) if include_timing else "",
                    )
                )
                + "\n"
            )
