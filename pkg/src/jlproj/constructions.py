"""Sampling and storage of the four random projection families.

Scaling convention: the 1/sqrt(k) factor of the dense families and the
1/sqrt(s) factor of the graph construction are baked into the stored values
at sampling time, so application is a plain matrix-vector product with no
extra multiply.  Dense transforms are stored row-major; the graph
construction is stored column-wise (per-column row lists and signs) because
application iterates input coordinates and scatters whole columns.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .core import (
    AchlioptasSparse,
    ConstructionKind,
    DenseGaussian,
    GraphSparse,
    Rademacher,
    SeedSpec,
    derive_stream,
    sample_without_replacement,
)

# Refuse dense allocations beyond this many entries (8 GiB of float64)
# instead of letting numpy attempt them.
MAX_DENSE_ENTRIES = 1 << 30


class ResourceLimitError(RuntimeError):
    """Requested transform would exceed the addressable-memory budget."""


@dataclass(frozen=True)
class DenseTransform:
    """Materialized k x d transform with pre-scaled float64 entries."""

    k: int
    d: int
    entries: np.ndarray
    kind: ConstructionKind
    seed: SeedSpec | None = None
    scale_applied: bool = True


@dataclass(frozen=True)
class SparseColumnLayout:
    """Graph construction: per-column sorted row indices and signs.

    ``rows[i]`` holds the s strictly increasing row indices of column i and
    ``signs[i]`` the matching +-1 factors.  The stored sign magnitude is 1;
    the 1/sqrt(s) value scale is applied during multiplication (see
    :attr:`scale`), which is arithmetically the pre-scaled column.
    """

    k: int
    d: int
    s: int
    rows: np.ndarray
    signs: np.ndarray
    seed: SeedSpec | None = None

    @property
    def scale(self) -> float:
        return 1.0 / np.sqrt(self.s)


Transform = Union[DenseTransform, SparseColumnLayout]


def sample_rows_without_replacement(k: int, s: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform s-subset of the k rows, sorted ascending (partial Fisher-Yates)."""
    if s < 1:
        raise ValueError(f"need s >= 1, got s={s}")
    if s > k:
        raise ValueError(f"cannot draw {s} distinct rows from {k}")
    return sample_without_replacement(k, s, rng)


def sample_transform(kind: ConstructionKind, k: int, d: int, seed: SeedSpec) -> Transform:
    """Sample a transform of the given family; deterministic in ``seed``.

    Draw order is fixed per family (documented here so fixtures stay
    stable): Gaussian/Rademacher draw the (k, d) entry block in one call;
    AchlioptasSparse draws one (k, d) uniform block and maps
    [0, 1/6) -> +sqrt(3/k), [1/6, 1/3) -> -sqrt(3/k), [1/3, 1) -> 0;
    GraphSparse draws all column row-subsets first, then all signs.
    """
    if k < 1 or d < 1:
        raise ValueError(f"transform shape must be positive, got k={k}, d={d}")
    rng = derive_stream(seed)

    if isinstance(kind, GraphSparse):
        if kind.s > k:
            raise ValueError(f"column sparsity s={kind.s} exceeds k={k}")
        rows = sample_without_replacement(k, kind.s, rng, count=d)
        signs = (2.0 * rng.integers(0, 2, size=(d, kind.s)) - 1.0).astype(np.float64)
        rows.setflags(write=False)
        signs.setflags(write=False)
        return SparseColumnLayout(k=k, d=d, s=kind.s, rows=rows, signs=signs, seed=seed)

    if k * d > MAX_DENSE_ENTRIES:
        raise ResourceLimitError(
            f"dense transform of {k}x{d} entries exceeds the {MAX_DENSE_ENTRIES} entry budget"
        )
    if isinstance(kind, DenseGaussian):
        entries = rng.standard_normal((k, d)) / np.sqrt(k)
    elif isinstance(kind, Rademacher):
        entries = (2.0 * rng.integers(0, 2, size=(k, d)) - 1.0) / np.sqrt(k)
    elif isinstance(kind, AchlioptasSparse):
        u = rng.random((k, d))
        value = np.sqrt(3.0 / k)
        entries = np.where(u < 1.0 / 6.0, value, np.where(u < 1.0 / 3.0, -value, 0.0))
    else:
        raise TypeError(f"unknown construction kind: {kind!r}")
    entries.setflags(write=False)
    return DenseTransform(k=k, d=d, entries=entries, kind=kind, seed=seed)


def nnz(transform: Transform) -> int:
    """Exact count of structurally nonzero stored entries."""
    if isinstance(transform, SparseColumnLayout):
        return transform.s * transform.d
    return int(np.count_nonzero(transform.entries))


# ---------------------------------------------------------------------------
# Binary serialization (little-endian, versioned header; see README)
# ---------------------------------------------------------------------------

_MAGIC = b"JLPX"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIBQQQBQQ")  # magic, version, kind, k, d, s, has_seed, master, stream
_KIND_CODES = {DenseGaussian: 0, Rademacher: 1, AchlioptasSparse: 2, GraphSparse: 3}


def save_transform(transform: Transform, path: str | Path) -> None:
    """Write a transform to ``path`` in the versioned binary format."""
    if isinstance(transform, SparseColumnLayout):
        kind_code, s = _KIND_CODES[GraphSparse], transform.s
    else:
        kind_code, s = _KIND_CODES[type(transform.kind)], 0
    seed = transform.seed
    header = _HEADER.pack(
        _MAGIC,
        _FORMAT_VERSION,
        kind_code,
        transform.k,
        transform.d,
        s,
        0 if seed is None else 1,
        0 if seed is None else seed.master_seed,
        0 if seed is None else seed.stream_id,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        if isinstance(transform, SparseColumnLayout):
            fh.write(transform.rows.astype("<i8").tobytes())
            fh.write(transform.signs.astype("<i1").tobytes())
        else:
            fh.write(transform.entries.astype("<f8").tobytes())


def load_transform(path: str | Path) -> Transform:
    """Read a transform written by :func:`save_transform`."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated transform file")
        magic, version, kind_code, k, d, s, has_seed, master, stream = _HEADER.unpack(raw)
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a transform file (bad magic {magic!r})")
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        seed = SeedSpec(master, stream) if has_seed else None
        if kind_code == _KIND_CODES[GraphSparse]:
            rows = np.frombuffer(fh.read(8 * d * s), dtype="<i8").reshape(d, s).astype(np.int64)
            signs = np.frombuffer(fh.read(d * s), dtype="<i1").reshape(d, s).astype(np.float64)
            rows.setflags(write=False)
            signs.setflags(write=False)
            return SparseColumnLayout(k=k, d=d, s=s, rows=rows, signs=signs, seed=seed)
        kind_types = {code: cls for cls, code in _KIND_CODES.items() if cls is not GraphSparse}
        if kind_code not in kind_types:
            raise ValueError(f"{path}: unknown construction code {kind_code}")
        entries = np.frombuffer(fh.read(8 * k * d), dtype="<f8").reshape(k, d).astype(np.float64)
        entries.setflags(write=False)
        return DenseTransform(k=k, d=d, entries=entries, kind=kind_types[kind_code](), seed=seed)
