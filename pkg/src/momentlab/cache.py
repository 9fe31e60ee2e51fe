"""On-disk caches for eigenvalue tables and exact q-expansions.

Two formats:

  *.lam  -- header (magic, version, weight, n_max, field_degree) followed by
            a little-endian float64 array of normalized eigenvalues
            lambda(1..n_max).

  *.qexp -- same header, then per basis element a record of length-prefixed
            signed big integers (the exact echelon q-expansion coefficients).

Cache root resolution: MOMENTLAB_CACHE_DIR if set, else ~/.cache/momentlab.
Files are written atomically (tmp + rename) so concurrent runs never read a
torn table.
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path

import numpy as np

MAGIC = b"MLAB"
VERSION = 1
_HEADER = struct.Struct("<4sIIQI")  # magic, version, weight, n_max, field_degree


def cache_dir() -> Path:
    root = os.environ.get("MOMENTLAB_CACHE_DIR")
    path = Path(root) if root else Path.home() / ".cache" / "momentlab"
    path.mkdir(parents=True, exist_ok=True)
    return path


def _atomic_write(path: Path, payload: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _pack_header(weight: int, n_max: int, field_degree: int) -> bytes:
    return _HEADER.pack(MAGIC, VERSION, weight, n_max, field_degree)


def _check_header(buf: bytes, path: Path) -> tuple[int, int, int]:
    magic, version, weight, n_max, degree = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    return weight, n_max, degree


def write_lambda_table(
    path: Path, weight: int, field_degree: int, table: np.ndarray
) -> None:
    arr = np.asarray(table, dtype="<f8")
    payload = _pack_header(weight, arr.size, field_degree) + arr.tobytes()
    _atomic_write(path, payload)


def read_lambda_table(path: Path) -> tuple[int, int, np.ndarray]:
    buf = path.read_bytes()
    weight, n_max, degree = _check_header(buf, path)
    arr = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    if arr.size != n_max:
        raise ValueError(f"{path}: truncated table ({arr.size} != {n_max})")
    return weight, degree, arr.copy()


def _encode_int(v: int) -> bytes:
    sign = 1 if v < 0 else 0
    mag = abs(v)
    body = mag.to_bytes((mag.bit_length() + 7) // 8 or 1, "little")
    return struct.pack("<BI", sign, len(body)) + body


def _decode_int(buf: bytes, off: int) -> tuple[int, int]:
    sign, ln = struct.unpack_from("<BI", buf, off)
    off += 5
    mag = int.from_bytes(buf[off : off + ln], "little")
    return (-mag if sign else mag), off + ln


def write_qexp(path: Path, weight: int, rows: list[list[int]]) -> None:
    n_max = len(rows[0]) if rows else 0
    parts = [_pack_header(weight, n_max, len(rows))]
    parts.append(struct.pack("<I", len(rows)))
    for row in rows:
        if len(row) != n_max:
            raise ValueError("ragged q-expansion rows")
        for v in row:
            parts.append(_encode_int(v))
    _atomic_write(path, b"".join(parts))


def write_array_bundle(path: Path, arrays: dict[str, np.ndarray]) -> None:
    """Atomically persist a named collection of float arrays (.npz payload)."""
    import io

    buf = io.BytesIO()
    np.savez(buf, **arrays)
    _atomic_write(path, buf.getvalue())


def read_array_bundle(path: Path) -> dict[str, np.ndarray]:
    with np.load(path) as bundle:
        return {name: bundle[name].copy() for name in bundle.files}


def read_qexp(path: Path) -> tuple[int, list[list[int]]]:
    buf = path.read_bytes()
    weight, n_max, _ = _check_header(buf, path)
    (n_rows,) = struct.unpack_from("<I", buf, _HEADER.size)
    off = _HEADER.size + 4
    rows = []
    for _ in range(n_rows):
        row = []
        for _ in range(n_max):
            v, off = _decode_int(buf, off)
            row.append(v)
        rows.append(row)
    return weight, rows
