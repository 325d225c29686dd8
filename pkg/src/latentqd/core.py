"""Shared domain types, named deterministic RNG streams, descriptor geometry.

Vectors (sensory data, descriptors) are plain 1-D float64 numpy arrays.
All random draws anywhere in the package come from named substreams of a
single root seed, so adding a consumer never perturbs another's stream.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

STREAM_VERSION = 1


def as_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking length."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"expected dim {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector contains non-finite values")
    return arr


@dataclass(frozen=True)
class Genotype:
    """Fixed-length real vector with per-gene closed bounds [lo, hi].

    Values may lie outside the bounds transiently (mutation deltas before
    clamping); `clamp_to_bounds` is the normaliser.
    """

    values: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        lo = np.broadcast_to(np.asarray(self.lo, dtype=np.float64), values.shape).copy()
        hi = np.broadcast_to(np.asarray(self.hi, dtype=np.float64), values.shape).copy()
        if values.ndim != 1:
            raise ValueError("genotype values must be a 1-D vector")
        if np.any(lo > hi):
            raise ValueError("genotype bounds must satisfy lo <= hi")
        for name, arr in (("values", values), ("lo", lo), ("hi", hi)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    def in_bounds(self) -> bool:
        return bool(np.all(self.values >= self.lo) and np.all(self.values <= self.hi))

    def with_values(self, values) -> "Genotype":
        return Genotype(np.asarray(values, dtype=np.float64), self.lo, self.hi)


def clamp_to_bounds(g: Genotype) -> Genotype:
    """Clamp every gene into its [lo, hi] interval; in-bounds genes unchanged."""
    return g.with_values(np.clip(g.values, g.lo, g.hi))


def euclidean_distance(a: np.ndarray, b: np.ndarray) -> float:
    """L2 distance between two descriptors of equal dimension."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"descriptor dims differ: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.sum((a - b) ** 2)))


@dataclass
class Individual:
    """An evaluated solution.

    `hand_coded_bd` is the task's 2-D ground-truth descriptor, recorded for
    every individual (metrics use it even when the search runs on latent
    descriptors). `novelty` and `surprise` are caches owned by the container
    and selection code; None means not computed / invalidated.
    """

    genotype: Genotype
    fitness: float
    sensory: np.ndarray
    descriptor: np.ndarray
    hand_coded_bd: np.ndarray
    novelty: float | None = field(default=None, compare=False)
    surprise: float | None = field(default=None, compare=False)


class RngStreams:
    """Single root seed fanned out into independent named substreams.

    The substream key is derived from a stable hash of the stream name, so
    two runs with the same seed produce bit-identical draws per stream, on
    any platform, regardless of which other streams exist.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, name: str) -> np.random.Generator:
        digest = hashlib.sha256(f"v{STREAM_VERSION}:{name}".encode()).digest()
        key = tuple(int.from_bytes(digest[i : i + 4], "little") for i in range(0, 16, 4))
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=key)
        return np.random.Generator(np.random.PCG64(ss))


def random_genotypes(
    rng: np.random.Generator, count: int, length: int, lo, hi
) -> list[Genotype]:
    """Sample `count` genotypes uniformly within the bounds."""
    lo_arr = np.broadcast_to(np.asarray(lo, dtype=np.float64), (length,))
    hi_arr = np.broadcast_to(np.asarray(hi, dtype=np.float64), (length,))
    block = rng.uniform(lo_arr, hi_arr, size=(count, length))
    return [Genotype(block[i], lo_arr, hi_arr) for i in range(count)]
