"""Geometric chains of a finite box in N^d and their length census.

A chain started at ``i`` is the orbit ``i, i*p, i*p^2, ...`` under the
componentwise product with the multiplier vector ``p``.  Chain starts are the
points with at least one coordinate ``j`` (``p_j >= 2``) not divisible by
``p_j``; every lattice point lies on exactly one chain.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AllOnes,
    BoxTooLarge,
    CountOverflow,
    DimensionMismatch,
    NonPositiveEntry,
    NotPairwiseCoprime,
    ValidationError,
)

UINT64_MAX = 2**64 - 1
MAX_ENUMERATION = 10**8


@dataclass(frozen=True)
class MultiplierVector:
    entries: tuple[int, ...]
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def product(self) -> int:
        return math.prod(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __str__(self) -> str:
        return ",".join(map(str, self.entries))


@dataclass(frozen=True)
class BoxSpec:
    sides: tuple[int, ...]

    def __post_init__(self):
        sides = tuple(int(n) for n in self.sides)
        if not sides:
            raise ValidationError("box needs at least one side")
        if any(n < 1 for n in sides):
            raise NonPositiveEntry(f"box sides must be >= 1, got {sides}")
        if math.prod(sides) > UINT64_MAX:
            raise CountOverflow(f"box volume of {sides} does not fit in 64 bits")
        object.__setattr__(self, "sides", sides)

    @property
    def dim(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> int:
        return math.prod(self.sides)

    def __str__(self) -> str:
        return ",".join(map(str, self.sides))


@dataclass(frozen=True)
class Chain:
    start: tuple[int, ...]
    length: int
    multipliers: tuple[int, ...]

    @property
    def sites(self) -> list[tuple[int, ...]]:
        out = []
        x = self.start
        for _ in range(self.length):
            out.append(x)
            x = tuple(a * q for a, q in zip(x, self.multipliers))
        return out

    @property
    def exit_site(self) -> tuple[int, ...]:
        """First point of the orbit that lies outside the box."""
        return tuple(a * q**self.length for a, q in zip(self.start, self.multipliers))


@dataclass
class ChainCensus:
    """Per-length chain counts of a box.

    ``counts[ell] = (count_all, count_free)`` where ``count_all`` counts box
    points whose forward orbit stays in the box for exactly ``ell`` steps and
    ``count_free`` counts the chain starts among them.
    """

    box: BoxSpec
    multipliers: MultiplierVector
    counts: dict[int, tuple[int, int]]

    @property
    def max_length(self) -> int:
        nonzero = [ell for ell, (a, k) in self.counts.items() if a or k]
        return max(nonzero) if nonzero else 0

    def rows(self) -> list[dict]:
        vol = self.box.volume
        out = []
        for ell in range(1, self.max_length + 1):
            a, k = self.counts.get(ell, (0, 0))
            out.append(
                {
                    "ell": ell,
                    "count_all": a,
                    "count_free": k,
                    "density_all": a / vol,
                    "density_free": k / vol,
                }
            )
        return out


def validate_multipliers(raw: Sequence[int], allow_non_coprime: bool = False) -> MultiplierVector:
    entries = tuple(int(q) for q in raw)
    if not entries:
        raise ValidationError("multiplier vector must be nonempty")
    if any(q < 1 for q in entries):
        raise NonPositiveEntry(f"multipliers must be positive integers, got {entries}")
    if math.prod(entries) < 2:
        raise AllOnes(f"multiplier product must be >= 2, got {entries}")
    notes = []
    for a in range(len(entries)):
        for b in range(a + 1, len(entries)):
            g = math.gcd(entries[a], entries[b])
            if g != 1:
                msg = f"gcd(p_{a + 1}, p_{b + 1}) = {g} for {entries}"
                if not allow_non_coprime:
                    raise NotPairwiseCoprime(msg)
                notes.append(msg)
    if notes:
        warnings.warn("non-coprime multipliers accepted: " + "; ".join(notes), stacklevel=2)
    return MultiplierVector(entries, tuple(notes))


def as_box(N) -> BoxSpec:
    return N if isinstance(N, BoxSpec) else BoxSpec(tuple(N))


def as_multipliers(p) -> MultiplierVector:
    return p if isinstance(p, MultiplierVector) else validate_multipliers(p)


def _check_dims(N: BoxSpec, p: MultiplierVector) -> None:
    if N.dim != p.dim:
        raise DimensionMismatch(f"box has dimension {N.dim} but multipliers have {p.dim}")


def _shrunk_volume(N: BoxSpec, p: MultiplierVector, m: int) -> int:
    """Number of box points x with x * p^m still inside the box."""
    return math.prod(n // q**m for n, q in zip(N.sides, p.entries))


def count_all_chains(N, p, ell: int) -> int:
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    if ell < 1:
        raise ValidationError(f"chain length must be >= 1, got {ell}")
    return _shrunk_volume(N, p, ell - 1) - _shrunk_volume(N, p, ell)


def count_free_chains(N, p, ell: int) -> int:
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    if ell < 1:
        raise ValidationError(f"chain length must be >= 1, got {ell}")
    a = [_shrunk_volume(N, p, m) for m in (ell - 1, ell, ell + 1)]
    return a[0] - 2 * a[1] + a[2]


def max_chain_length(N, p) -> int:
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    ell = 0
    while _shrunk_volume(N, p, ell) > 0:
        ell += 1
    return ell


def chain_census(N, p) -> ChainCensus:
    """Closed-form census (integer arithmetic only)."""
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    top = max_chain_length(N, p)
    counts = {ell: (count_all_chains(N, p, ell), count_free_chains(N, p, ell)) for ell in range(1, top + 1)}
    return ChainCensus(N, p, counts)


def asymptotic_chain_density(p, ell: int) -> float:
    """Limit of (number of chains of length ell) / volume, i.e. (P-1)^2 / P^(ell+1)."""
    p = as_multipliers(p)
    if ell < 1:
        raise ValidationError(f"chain length must be >= 1, got {ell}")
    P = p.product
    return math.exp(2 * math.log(P - 1) - (ell + 1) * math.log(P))


def free_ratio_limit(p) -> float:
    """Limit of count_free / count_all for any fixed length: 1 - 1/P."""
    return 1.0 - 1.0 / as_multipliers(p).product


# -- enumeration ------------------------------------------------------------


def _slices(N: BoxSpec, budget: int = 2_000_000) -> Iterator[tuple[int, int]]:
    rest = N.volume // N.sides[0]
    step = max(1, budget // max(rest, 1))
    for lo in range(1, N.sides[0] + 1, step):
        yield lo, min(lo + step - 1, N.sides[0])


def _enumerate_slice(N: BoxSpec, p: MultiplierVector, lo: int, hi: int):
    """Coordinates (d, n), in-box orbit lengths, and start flags for x_1 in [lo, hi]."""
    ranges = [np.arange(lo, hi + 1, dtype=np.int64)] + [
        np.arange(1, n + 1, dtype=np.int64) for n in N.sides[1:]
    ]
    coords = np.stack([g.ravel() for g in np.meshgrid(*ranges, indexing="ij")])
    sides = np.asarray(N.sides, dtype=np.int64)[:, None]
    mult = np.asarray(p.entries, dtype=np.int64)[:, None]

    lengths = np.zeros(coords.shape[1], dtype=np.int64)
    cur = coords.copy()
    alive = np.ones(coords.shape[1], dtype=bool)
    while alive.any():
        lengths += alive
        cur = cur * mult
        alive &= (cur <= sides).all(axis=0)

    active = mult[:, 0] >= 2
    is_start = (coords[active] % mult[active] != 0).any(axis=0)
    return coords, lengths, is_start


def _guard(N: BoxSpec, max_volume: int) -> None:
    if N.volume > max_volume:
        raise BoxTooLarge(f"box volume {N.volume} exceeds enumeration limit {max_volume}")


def enumerate_census(N, p, max_volume: int = MAX_ENUMERATION) -> ChainCensus:
    """Census obtained by walking every orbit in the box (no counting formulas)."""
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    _guard(N, max_volume)
    all_counts: dict[int, int] = {}
    free_counts: dict[int, int] = {}
    for lo, hi in _slices(N):
        _, lengths, is_start = _enumerate_slice(N, p, lo, hi)
        for ell, c in zip(*np.unique(lengths, return_counts=True)):
            all_counts[int(ell)] = all_counts.get(int(ell), 0) + int(c)
        for ell, c in zip(*np.unique(lengths[is_start], return_counts=True)):
            free_counts[int(ell)] = free_counts.get(int(ell), 0) + int(c)
    top = max(all_counts)
    counts = {ell: (all_counts.get(ell, 0), free_counts.get(ell, 0)) for ell in range(1, top + 1)}
    return ChainCensus(N, p, counts)


def decompose_box(N, p, max_volume: int = MAX_ENUMERATION) -> list[Chain]:
    """All chains of the box, ordered lexicographically by start."""
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    _guard(N, max_volume)
    chains = []
    for lo, hi in _slices(N):
        coords, lengths, is_start = _enumerate_slice(N, p, lo, hi)
        starts = coords[:, is_start].T.tolist()
        for start, ell in zip(starts, lengths[is_start].tolist()):
            chains.append(Chain(tuple(start), ell, p.entries))
    return chains
