"""Flat binary container for numpy arrays plus a JSON metadata header.

Used for model checkpoints, detector models, and window archives. The format
is deliberately simple and fully deterministic (np.savez embeds zip
timestamps, which would break byte-identical re-runs):

    bytes 0..7    magic b"PPGADBIN"
    bytes 8..15   header length H as little-endian uint64
    bytes 16..    H bytes of UTF-8 JSON: {"container_version": 1,
                                          "meta": {...},
                                          "arrays": [{"name", "dtype", "shape"}]}
    then          raw C-order array bytes, concatenated in header order

All dtypes use explicit little-endian byte order. Writing the same meta and
arrays twice produces byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import IngestionError

MAGIC = b"PPGADBIN"
CONTAINER_VERSION = 1


def _canonical_dtype(arr: np.ndarray) -> np.dtype:
    dt = arr.dtype
    if dt.byteorder == ">":
        return dt.newbyteorder("<")
    return dt


def save(path: str | Path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    """Write arrays and metadata to `path`.

    `meta` must be JSON-serializable. Array insertion order is preserved and
    becomes part of the on-disk layout.
    """
    entries = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        dt = _canonical_dtype(arr)
        arr = arr.astype(dt, copy=False)
        entries.append({"name": name, "dtype": dt.str, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = {
        "container_version": CONTAINER_VERSION,
        "meta": meta,
        "arrays": entries,
    }
    header_bytes = json.dumps(
        header, sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(len(header_bytes).to_bytes(8, "little"))
        f.write(header_bytes)
        for blob in blobs:
            f.write(blob)


def load(path: str | Path) -> tuple[dict, dict[str, np.ndarray]]:
    """Read a container written by `save`. Returns (meta, arrays)."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IngestionError(f"cannot read container {path}: {exc}") from exc
    if raw[:8] != MAGIC:
        raise IngestionError(f"{path} is not a ppgad container (bad magic)")
    hlen = int.from_bytes(raw[8:16], "little")
    try:
        header = json.loads(raw[16 : 16 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IngestionError(f"{path}: corrupt container header: {exc}") from exc
    if header.get("container_version") != CONTAINER_VERSION:
        raise IngestionError(
            f"{path}: unsupported container version {header.get('container_version')!r}"
        )
    arrays = {}
    offset = 16 + hlen
    for entry in header["arrays"]:
        dt = np.dtype(entry["dtype"])
        shape = tuple(entry["shape"])
        nbytes = dt.itemsize * int(np.prod(shape, dtype=np.int64))
        blob = raw[offset : offset + nbytes]
        if len(blob) != nbytes:
            raise IngestionError(f"{path}: truncated array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(blob, dtype=dt).reshape(shape).copy()
        offset += nbytes
    return header["meta"], arrays
