"""Matrix, weight and benchmark-result files.

Matrix files come in two flavours:

* CSV: comma separated, one observation per row, optional single header
  row, decimal-point reals.
* binary: the 5 bytes ``GCOV1``, then ``n`` and ``p`` as little-endian
  uint64, then ``n*p`` little-endian float64 values in row-major order.

Reals are written with 17 significant digits, which round-trips every
binary64 value exactly.
"""

from __future__ import annotations

import csv
import io
import math
import struct
from pathlib import Path
from typing import IO, Iterable, List, Sequence, Union

import numpy as np

from .bench import BenchSummary

MAGIC = b"GCOV1"
RESULTS_HEADER = [
    "method", "n", "p", "repetitions", "kept", "removed",
    "trimmed_mean_s", "band_lo_s", "band_hi_s", "seed",
]

PathLike = Union[str, Path]


class FileFormatError(ValueError):
    """Input file could not be parsed."""


def format_real(x: float) -> str:
    return "%.17g" % x


def _parse_real(text: str, where: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise FileFormatError(f"{where}: not a number: {text.strip()!r}") from None
    if not math.isfinite(value):
        raise FileFormatError(f"{where}: non-finite value {text.strip()!r}")
    return value


def _looks_numeric(fields: Sequence[str]) -> bool:
    try:
        for f in fields:
            float(f)
    except ValueError:
        return False
    return True


def parse_csv_matrix(text: str, source: str = "<csv>") -> np.ndarray:
    rows: List[List[float]] = []
    width = None
    first = True
    for lineno, fields in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not fields or all(not f.strip() for f in fields):
            continue
        if first:
            first = False
            width = len(fields)
            if not _looks_numeric(fields):
                continue  # header row
        if len(fields) != width:
            raise FileFormatError(
                f"{source}:{lineno}: ragged row with {len(fields)} fields, expected {width}"
            )
        rows.append([_parse_real(f, f"{source}:{lineno}") for f in fields])
    if not rows:
        return np.zeros((0, width or 0))
    return np.array(rows, dtype=np.float64)


def read_csv_matrix(path: PathLike) -> np.ndarray:
    return parse_csv_matrix(Path(path).read_text(), str(path))


def write_csv_matrix(dest: Union[PathLike, IO[str]], X, header: Sequence[str] | None = None) -> None:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    lines = []
    if header is not None:
        lines.append(",".join(header))
    lines.extend(",".join(format_real(v) for v in row) for row in X)
    text = "".join(line + "\n" for line in lines)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)


def encode_binary_matrix(X) -> bytes:
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2:
        raise ValueError("binary matrix files hold 2-D data")
    n, p = X.shape
    return MAGIC + struct.pack("<QQ", n, p) + X.astype("<f8").tobytes()


def decode_binary_matrix(blob: bytes, source: str = "<binary>") -> np.ndarray:
    head = len(MAGIC) + 16
    if len(blob) < head or not blob.startswith(MAGIC):
        raise FileFormatError(f"{source}: missing GCOV1 header")
    n, p = struct.unpack_from("<QQ", blob, len(MAGIC))
    expected = head + 8 * n * p
    if len(blob) != expected:
        raise FileFormatError(f"{source}: expected {expected} bytes for {n}x{p}, got {len(blob)}")
    X = np.frombuffer(blob, dtype="<f8", offset=head).astype(np.float64).reshape(n, p)
    if not np.isfinite(X).all():
        raise FileFormatError(f"{source}: non-finite value in matrix")
    return X


def read_matrix(path: PathLike) -> np.ndarray:
    """Read a CSV or binary matrix file; the format is sniffed from the magic bytes."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from None
    if blob.startswith(MAGIC):
        return decode_binary_matrix(blob, str(path))
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError:
        raise FileFormatError(f"{path}: neither GCOV1 binary nor UTF-8 text") from None
    return parse_csv_matrix(text, str(path))


def write_matrix(path: PathLike, X, fmt: str = "csv") -> None:
    if fmt == "binary":
        Path(path).write_bytes(encode_binary_matrix(X))
    elif fmt == "csv":
        write_csv_matrix(path, X)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")


def read_weights(path: PathLike) -> np.ndarray:
    """One-column CSV of nonnegative integer multiplicities (header optional)."""
    M = read_matrix(path)
    if M.ndim != 2 or (M.size and M.shape[1] != 1):
        raise FileFormatError(f"{path}: weights must be a single column")
    w = M[:, 0] if M.size else np.zeros(0)
    if np.any(w != np.round(w)) or np.any(w < 0):
        raise FileFormatError(f"{path}: weights must be nonnegative integers")
    return w.astype(np.int64)


def write_results(dest: Union[PathLike, IO[str]], summaries: Iterable[BenchSummary]) -> int:
    """Write the benchmark CSV; skipped rows are left out. Returns the row count."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    count = 0
    for s in summaries:
        if s.skipped:
            continue
        writer.writerow([
            s.method, s.n, s.p, s.repetitions, s.kept_count, s.removed_count,
            format_real(s.trimmed_mean_s), format_real(s.band_lo_s),
            format_real(s.band_hi_s), s.seed,
        ])
        count += 1
    if hasattr(dest, "write"):
        dest.write(buf.getvalue())
    else:
        Path(dest).write_text(buf.getvalue())
    return count


def read_results(path: PathLike) -> List[BenchSummary]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileFormatError(f"{path}: {exc.strerror}") from None
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise FileFormatError(f"{path}: empty results file")
    if rows[0] != RESULTS_HEADER:
        raise FileFormatError(f"{path}: unexpected header {','.join(rows[0])!r}")
    out = []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(RESULTS_HEADER):
            raise FileFormatError(f"{path}:{lineno}: expected {len(RESULTS_HEADER)} fields")
        try:
            out.append(BenchSummary(
                method=r[0], n=int(r[1]), p=int(r[2]), repetitions=int(r[3]),
                kept_count=int(r[4]), removed_count=int(r[5]),
                trimmed_mean_s=float(r[6]), band_lo_s=float(r[7]),
                band_hi_s=float(r[8]), seed=int(r[9]),
            ))
        except ValueError as exc:
            raise FileFormatError(f"{path}:{lineno}: {exc}") from None
    return out
