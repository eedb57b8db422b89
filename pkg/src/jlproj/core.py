"""Domain types, deterministic random streams, and unit-vector generators.

Randomness contract
-------------------
Every random quantity in this package is a pure function of a ``SeedSpec``,
a ``(master_seed, stream_id)`` pair of 64-bit unsigned integers.  A spec is
turned into a stream by keying the counter-based Philox4x64-10 bit generator
with the 128-bit integer ``stream_id * 2**64 + master_seed``; distinct specs
therefore yield independent streams regardless of the order in which they
are consumed, which is what makes parallel experiment cells reproducible.

Draw conventions (fixed so that golden fixtures stay stable):

* uniforms: ``Generator.random`` (53-bit float64 in [0, 1))
* normals:  ``Generator.standard_normal`` (numpy's ziggurat method)
* bounded integers: ``Generator.integers`` (Lemire rejection sampling)

All floating-point arithmetic is float64 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

_UINT64_MAX = (1 << 64) - 1

# Pool rows per chunk in the batched without-replacement sampler are capped
# so the (chunk, n) scratch array stays around 32 MB even at d = 10^4.
_FY_CHUNK_BYTES = 1 << 25


@dataclass(frozen=True)
class DenseGaussian:
    """Dense transform; entries i.i.d. normal with variance 1/k."""


@dataclass(frozen=True)
class Rademacher:
    """Dense transform; entries +-1/sqrt(k) with equal probability."""


@dataclass(frozen=True)
class AchlioptasSparse:
    """Sparse discrete transform; entries sqrt(3/k) * {+1 w.p. 1/6, 0 w.p. 2/3, -1 w.p. 1/6}."""


@dataclass(frozen=True)
class GraphSparse:
    """Column-sparse transform: each column gets exactly ``s`` rows, values +-1/sqrt(s).

    Rows are drawn uniformly without replacement per column; signs are
    independent fair coin flips.  Requires 1 <= s <= k at sampling time.
    """

    s: int

    def __post_init__(self) -> None:
        if self.s < 1:
            raise ValueError(f"GraphSparse needs s >= 1, got s={self.s}")


ConstructionKind = Union[DenseGaussian, Rademacher, AchlioptasSparse, GraphSparse]


@dataclass(frozen=True)
class SeedSpec:
    """Addresses one deterministic random stream.

    ``master_seed`` identifies the experiment, ``stream_id`` the role within
    it (a transform instance, a vector batch, a verification trial, ...).
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= value <= _UINT64_MAX:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def stream(self, stream_id: int) -> "SeedSpec":
        """Same master seed, different stream."""
        return SeedSpec(self.master_seed, stream_id)


def derive_stream(seed: SeedSpec) -> np.random.Generator:
    """Deterministic generator for a seed spec.

    The Philox key is ``stream_id * 2**64 + master_seed``, so equal specs
    give bit-identical streams and unequal specs give independent ones.
    """
    key = (seed.stream_id << 64) | seed.master_seed
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class InputVector:
    """Unit-norm input vector, stored dense or as sorted sparse pairs.

    Dense storage: ``indices is None`` and ``values`` has length ``dim``.
    Sparse storage: ``indices`` is strictly increasing with values aligned.
    Arrays are treated as immutable once constructed.
    """

    dim: int
    values: np.ndarray
    indices: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {self.dim}")
        if self.indices is None:
            if self.values.shape != (self.dim,):
                raise ValueError(f"dense storage needs {self.dim} values, got {self.values.shape}")
            return
        if self.indices.shape != self.values.shape:
            raise ValueError("sparse indices and values must align")
        if self.indices.size:
            if self.indices[0] < 0 or self.indices[-1] >= self.dim:
                raise ValueError(f"sparse indices must lie in [0, {self.dim})")
            if self.indices.size > 1 and not np.all(np.diff(self.indices) > 0):
                raise ValueError("sparse indices must be strictly increasing")

    @property
    def is_sparse(self) -> bool:
        return self.indices is not None

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def sq_norm(self) -> float:
        return float(self.values @ self.values)

    def to_dense(self) -> np.ndarray:
        if self.indices is None:
            return self.values
        dense = np.zeros(self.dim)
        dense[self.indices] = self.values
        return dense


@dataclass(frozen=True)
class DistortionSample:
    """One squared-norm distortion measurement, delta = |Rx|^2 - 1."""

    delta: float
    transform_instance: int
    vector_id: int


def sample_unit_sphere(d: int, seed: SeedSpec) -> InputVector:
    """Uniform draw from the unit sphere in R^d (normalized standard normals)."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    rng = derive_stream(seed)
    v = rng.standard_normal(d)
    v /= np.linalg.norm(v)
    v.setflags(write=False)
    return InputVector(dim=d, values=v)


def sample_unit_sphere_batch(d: int, count: int, seed: SeedSpec) -> list[InputVector]:
    """``count`` independent sphere vectors from one stream (row-by-row normals)."""
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    rng = derive_stream(seed)
    block = rng.standard_normal((count, d))
    block /= np.linalg.norm(block, axis=1, keepdims=True)
    block.setflags(write=False)
    return [InputVector(dim=d, values=block[i]) for i in range(count)]


def sample_sparse_unit(d: int, t: int, seed: SeedSpec) -> InputVector:
    """Sparse unit vector: t support positions uniform without replacement.

    Nonzero values are i.i.d. standard normal, then normalized to unit norm.
    Positions are drawn first, values second, from the same stream.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    if t < 1 or t > d:
        raise ValueError(f"support size must satisfy 1 <= t <= d, got t={t}, d={d}")
    rng = derive_stream(seed)
    idx = sample_without_replacement(d, t, rng)
    vals = rng.standard_normal(t)
    vals /= np.linalg.norm(vals)
    idx.setflags(write=False)
    vals.setflags(write=False)
    return InputVector(dim=d, values=vals, indices=idx)


def sample_sparse_unit_batch(d: int, t: int, count: int, seed: SeedSpec) -> list[InputVector]:
    """``count`` independent sparse unit vectors from one stream.

    Supports are drawn for the whole batch first, then the (count, t) value
    block; per-vector draws differ from looping :func:`sample_sparse_unit`.
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    if t < 1 or t > d:
        raise ValueError(f"support size must satisfy 1 <= t <= d, got t={t}, d={d}")
    rng = derive_stream(seed)
    idx = sample_without_replacement(d, t, rng, count=count)
    vals = rng.standard_normal((count, t))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    idx.setflags(write=False)
    vals.setflags(write=False)
    return [InputVector(dim=d, values=vals[i], indices=idx[i]) for i in range(count)]


def sample_without_replacement(
    n: int, m: int, rng: np.random.Generator, count: int | None = None
) -> np.ndarray:
    """Sorted uniform m-subsets of range(n) via partial Fisher-Yates.

    Returns shape (m,) when ``count`` is None, else (count, m).  Exactly
    uniform over the C(n, m) subsets.  The full-set case m == n consumes no
    draws.  Memory is bounded by chunking the per-subset pools.
    """
    if m < 0 or m > n:
        raise ValueError(f"subset size must satisfy 0 <= m <= n, got m={m}, n={n}")
    squeeze = count is None
    rows = 1 if squeeze else count
    if m == n:
        out = np.broadcast_to(np.arange(n, dtype=np.int64), (rows, n)).copy()
        return out[0] if squeeze else out

    chunk = max(1, _FY_CHUNK_BYTES // (8 * max(n, 1)))
    pieces = []
    for start in range(0, rows, chunk):
        c = min(chunk, rows - start)
        pool = np.broadcast_to(np.arange(n, dtype=np.int64), (c, n)).copy()
        ar = np.arange(c)
        for j in range(m):
            pick = rng.integers(j, n, size=c)
            chosen = pool[ar, pick].copy()
            pool[ar, pick] = pool[:, j]
            pool[:, j] = chosen
        pieces.append(np.sort(pool[:, :m], axis=1))
    out = pieces[0] if len(pieces) == 1 else np.concatenate(pieces, axis=0)
    return out[0] if squeeze else out
