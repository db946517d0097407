"""Bit-exact file formats for features, distances, and metadata.

Features  (.ecnf): b"ECNF" | u16 version=1 | u64 n_items | u64 dim  | n*dim  f32
Distances (.ecnd): b"ECND" | u16 version=1 | u64 rows    | u64 cols | rows*cols f32
All integers little-endian, payload row-major IEEE-754 binary32.

Metadata is CSV with header ``index,person_id,camera_id,role`` where role
is ``query`` or ``gallery`` and the index column covers 0..N-1 exactly
once. Feature files with a .csv extension are read as headerless CSV,
one row per item.
"""

from __future__ import annotations

import csv
import os
import struct
from pathlib import Path

import numpy as np

from .core import EvalRecord, EvalRecords, Role, validate_feature_matrix
from .errors import (
    BadMagicError,
    EmptyMatrixError,
    NonFiniteError,
    ShapeMismatchError,
    TruncatedFileError,
    UnknownRoleError,
    UnsupportedVersionError,
)

MAGIC_FEATURES = b"ECNF"
MAGIC_DISTANCES = b"ECND"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sHQQ")


def _write_array(array: np.ndarray, path, magic: bytes) -> None:
    a = np.ascontiguousarray(array, dtype="<f4")
    finite = np.isfinite(a)
    if not finite.all():
        raise NonFiniteError(int(np.flatnonzero(~finite.ravel())[0]), context="payload")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(magic, FORMAT_VERSION, a.shape[0], a.shape[1]))
        f.write(a.tobytes())


def _read_array(path, magic: bytes) -> np.ndarray:
    size = os.path.getsize(path)
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise TruncatedFileError(
                f"{path}: expected at least {_HEADER.size} header bytes, found {len(head)}"
            )
        got_magic, version, rows, cols = _HEADER.unpack(head)
        if got_magic != magic:
            raise BadMagicError(f"{path}: bad magic {got_magic!r}, expected {magic!r}")
        if version != FORMAT_VERSION:
            raise UnsupportedVersionError(
                f"{path}: format version {version}, this reader supports {FORMAT_VERSION}"
            )
        expected = _HEADER.size + rows * cols * 4
        if size != expected:
            raise TruncatedFileError(f"{path}: expected {expected} bytes, found {size}")
        data = np.fromfile(f, dtype="<f4", count=rows * cols)
    return data.reshape(rows, cols)


def write_features(features: np.ndarray, path) -> None:
    validate_feature_matrix(features)
    _write_array(features, path, MAGIC_FEATURES)


def read_features(path) -> np.ndarray:
    """Read a feature matrix; .csv paths take the headerless-CSV fallback."""
    if str(path).endswith(".csv"):
        a = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2).astype(np.float32)
    else:
        a = _read_array(path, MAGIC_FEATURES)
    validate_feature_matrix(a)
    return a


def write_distance(distances: np.ndarray, path) -> None:
    """Write a distance matrix; also used for query x gallery outputs."""
    a = np.asarray(distances)
    if a.ndim != 2:
        raise ShapeMismatchError(f"distance payload must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise EmptyMatrixError(f"distance payload must be at least 1x1, got shape {a.shape}")
    _write_array(a, path, MAGIC_DISTANCES)


def read_distance(path) -> np.ndarray:
    a = _read_array(path, MAGIC_DISTANCES)
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise EmptyMatrixError(f"{path}: distance payload is {a.shape[0]}x{a.shape[1]}")
    finite = np.isfinite(a)
    if not finite.all():
        raise NonFiniteError(int(np.flatnonzero(~finite.ravel())[0]), context="distance matrix")
    return a


_META_COLUMNS = ("index", "person_id", "camera_id", "role")


def read_metadata(path) -> EvalRecords:
    records: list[EvalRecord] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        fields = reader.fieldnames or []
        missing = [c for c in _META_COLUMNS if c not in fields]
        if missing:
            raise ShapeMismatchError(f"{path}: metadata header lacks columns {missing}")
        for line_no, row in enumerate(reader, start=2):
            role_text = (row["role"] or "").strip()
            try:
                role = Role(role_text)
            except ValueError:
                raise UnknownRoleError(role_text) from None
            try:
                records.append(
                    EvalRecord(
                        item_index=int(row["index"]),
                        person_id=int(row["person_id"]),
                        camera_id=int(row["camera_id"]),
                        role=role,
                    )
                )
            except (TypeError, ValueError):
                raise ShapeMismatchError(
                    f"{path}:{line_no}: non-integer index/person_id/camera_id"
                ) from None
    return EvalRecords.from_records(records)


def write_metadata(records: EvalRecords, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(_META_COLUMNS)
        for rec in records.records():
            writer.writerow([rec.item_index, rec.person_id, rec.camera_id, rec.role.value])


def default_paths(prefix) -> tuple[Path, Path]:
    """Feature/metadata paths the synth command derives from one prefix."""
    base = str(prefix)
    return Path(base + ".features.ecnf"), Path(base + ".meta.csv")
