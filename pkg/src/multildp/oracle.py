"""Independent ground truth for the free-energy formulas.

* brute-force enumeration of every spin assignment on tiny boxes,
* the exact law of the multiple sum at r = 1/2 (a shifted binomial),
* seeded Monte Carlo estimates of free energies and interval probabilities.

The brute-force path evaluates the multiple sum term by term from its
definition and never touches the chain decomposition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numba
import numpy as np
from scipy.special import gammaln, logsumexp

from . import rng
from .errors import InsufficientHits, MissingSite, SupportTooLarge, ValidationError
from .ising import _check_beta, field_from_bias
from .lattice import _check_dims, as_box, as_multipliers, decompose_box

MAX_BRUTE_FORCE_SITES = 22
MAX_EXACT_VOLUME = 10**6
BLOCK = 512


@dataclass(frozen=True)
class ExtendedSupport:
    """Box sites plus their images p*x, in lexicographic order."""

    sites: tuple[tuple[int, ...], ...]
    box_size: int
    box_index: np.ndarray = field(repr=False, compare=False)
    image_index: np.ndarray = field(repr=False, compare=False)

    @property
    def total_size(self) -> int:
        return len(self.sites)


def _box_points(N) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(1, n + 1, dtype=np.int64) for n in N.sides], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def extended_support(N, p) -> ExtendedSupport:
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    box = _box_points(N)
    images = box * np.asarray(p.entries, dtype=np.int64)
    sites, inverse = np.unique(np.concatenate([box, images]), axis=0, return_inverse=True)
    inverse = inverse.ravel()
    vol = len(box)
    return ExtendedSupport(
        tuple(map(tuple, sites.tolist())), vol, inverse[:vol].copy(), inverse[vol:].copy()
    )


def multiple_sum(assignment, p, N) -> int:
    """sum over box sites i of sigma_i * sigma_{p*i}.

    ``assignment`` is either a mapping site -> +-1 or a sequence aligned with
    ``extended_support(N, p).sites``.
    """
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    if not isinstance(assignment, Mapping):
        support = extended_support(N, p)
        values = list(assignment)
        if len(values) != support.total_size:
            raise MissingSite(f"assignment has {len(values)} entries, support has {support.total_size}")
        assignment = dict(zip(support.sites, values))
    total = 0
    for i in map(tuple, _box_points(N).tolist()):
        j = tuple(a * q for a, q in zip(i, p.entries))
        try:
            total += int(assignment[i]) * int(assignment[j])
        except KeyError as exc:
            raise MissingSite(f"no spin for site {exc.args[0]}") from None
    return total


def _enumerated_sums(N, p):
    """Yield (number of +1 spins, support size, S) over all 2^T assignments in chunks; spin k of code c is bit k."""
    support = extended_support(N, p)
    T = support.total_size
    if T > MAX_BRUTE_FORCE_SITES:
        raise SupportTooLarge(f"extended support has {T} sites (limit {MAX_BRUTE_FORCE_SITES})")
    shifts = np.arange(T, dtype=np.int64)
    chunk = 1 << min(T, 16)
    for start in range(0, 1 << T, chunk):
        codes = np.arange(start, start + chunk, dtype=np.int64)
        bits = (codes[:, None] >> shifts) & 1
        spins = (2 * bits - 1).astype(np.int64)
        S = np.zeros(len(codes), dtype=np.int64)
        for a, b in zip(support.box_index, support.image_index):
            S += spins[:, a] * spins[:, b]
        yield bits.sum(axis=1), T, S


def brute_force_mgf_log(N, p, r: float, beta: float) -> float:
    """log E_r exp(beta S) by summing over every spin assignment."""
    field_from_bias(r)
    beta = _check_beta(beta)
    log_r, log_q = math.log(r), math.log1p(-r)
    parts = []
    for n_plus, T, S in _enumerated_sums(N, p):
        parts.append(logsumexp(n_plus * log_r + (T - n_plus) * log_q + beta * S))
    return float(logsumexp(parts))


def enumerated_distribution(N, p, r: float) -> dict[int, float]:
    """Exact law of S by enumeration."""
    field_from_bias(r)
    log_r, log_q = math.log(r), math.log1p(-r)
    acc: dict[int, list] = {}
    for n_plus, T, S in _enumerated_sums(N, p):
        logw = n_plus * log_r + (T - n_plus) * log_q
        for s in np.unique(S):
            acc.setdefault(int(s), []).append(logsumexp(logw[S == s]))
    return {s: math.exp(logsumexp(v)) for s, v in sorted(acc.items())}


def symmetric_log_pmf(volume: int) -> tuple[np.ndarray, np.ndarray]:
    """Support (descending S) and log-probabilities of S at r = 1/2."""
    if volume < 1 or volume > MAX_EXACT_VOLUME:
        raise ValidationError(f"volume must be in [1, {MAX_EXACT_VOLUME}], got {volume}")
    k = np.arange(volume + 1)
    logp = gammaln(volume + 1) - gammaln(k + 1) - gammaln(volume - k + 1) - volume * math.log(2.0)
    return volume - 2 * k, logp


def exact_symmetric_distribution(volume: int) -> dict[int, float]:
    s, logp = symmetric_log_pmf(volume)
    return {int(a): float(b) for a, b in zip(s, np.exp(logp))}


def exact_interval_rate(volume: int, x: float, eps: float) -> float:
    """-(1/volume) log P(|S/volume - x| <= eps) at r = 1/2."""
    s, logp = symmetric_log_pmf(volume)
    hit = np.abs(s - x * volume) <= eps * volume * (1 + 1e-12)
    if not hit.any():
        return math.inf
    return -float(logsumexp(logp[hit])) / volume


# -- Monte Carlo ------------------------------------------------------------------


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    samples: int
    seed: int
    hits: int | None = None

    def record(self) -> dict:
        out = {"mean": self.mean, "stderr": self.stderr, "samples": self.samples, "seed": self.seed}
        if self.hits is not None:
            out["hits"] = self.hits
        return out


@numba.njit(cache=True)
def _accumulate(words_t, a, b, offsets, lengths, hist, totals):
    # words_t[w, s]: packed spin bits of sample s (bit set <=> spin +1)
    ns = words_t.shape[1]
    totals[:] = 0
    sc = np.empty(ns, dtype=np.int64)
    for c in range(offsets.shape[0]):
        sc[:] = 0
        for m in range(offsets[c], offsets[c] + lengths[c]):
            ra = words_t[a[m] >> 6]
            rb = words_t[b[m] >> 6]
            sa = np.uint64(a[m] & 63)
            sb = np.uint64(b[m] & 63)
            for s in range(ns):
                differ = ((ra[s] >> sa) ^ (rb[s] >> sb)) & np.uint64(1)
                sc[s] += 1 - 2 * np.int64(differ)
        ell = lengths[c]
        for s in range(ns):
            hist[c, (sc[s] + ell) // 2] += 1
            totals[s] += sc[s]


class _ChainSampler:
    """Draws full spin configurations on the extended support, sample by sample,
    and tallies each chain's bond sum."""

    def __init__(self, N, p, r: float, seed: int):
        N, p = as_box(N), as_multipliers(p)
        _check_dims(N, p)
        field_from_bias(r)
        self.N, self.p, self.r = N, p, float(r)
        self.seed = int(seed) & rng.MASK64
        support = extended_support(N, p)
        index = {s: k for k, s in enumerate(support.sites)}
        chains = decompose_box(N, p)
        a_idx, b_idx, offsets, lengths = [], [], [], []
        for chain in chains:
            offsets.append(len(a_idx))
            lengths.append(chain.length)
            pts = chain.sites + [chain.exit_site]
            for m in range(chain.length):
                a_idx.append(index[pts[m]])
                b_idx.append(index[pts[m + 1]])
        self.a = np.asarray(a_idx, dtype=np.int64)
        self.b = np.asarray(b_idx, dtype=np.int64)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.n_sites = support.total_size
        self.volume = N.volume
        self._streams = rng.StreamFactory(self.seed)
        self._words = rng.words_needed(self.n_sites, self.r)

    def _packed(self, start: int, stop: int) -> np.ndarray:
        words = self._streams.block(start, stop, self._words)
        if self.r == 0.5:
            return words
        return rng.pack_bits(rng.uniforms(words) < self.r)

    def run(self, samples: int):
        """Per-chain histograms of bond sums and the total S of every sample."""
        hist = np.zeros((len(self.lengths), int(self.lengths.max()) + 1), dtype=np.int64)
        totals = np.empty(samples, dtype=np.int64)
        for start in range(0, samples, BLOCK):
            stop = min(start + BLOCK, samples)
            _accumulate(np.ascontiguousarray(self._packed(start, stop).T), self.a, self.b, self.offsets, self.lengths, hist, totals[start:stop])
        return hist, totals


def sample_sums(N, p, r: float, samples: int, seed: int) -> np.ndarray:
    """Multiple sum S for each sample index."""
    return _ChainSampler(N, p, r, seed).run(samples)[1]


def mc_free_energy(N, p, r: float, beta: float, samples: int, seed: int, estimator: str = "chain") -> McEstimate:
    """Monte Carlo estimate of (1/volume) log E_r exp(beta S).

    ``estimator="global"`` averages exp(beta S) directly; it is only usable when
    beta * sd(S) is O(1), i.e. tiny boxes.  The default ``"chain"`` averages
    exp(beta S_c) separately for each chain c of the same samples and sums the
    logs, which is exact in expectation because the chains are independent.
    """
    beta = _check_beta(beta)
    if samples < 100:
        raise ValidationError(f"need at least 100 samples, got {samples}")
    if estimator not in ("chain", "global"):
        raise ValidationError(f"unknown estimator {estimator!r}")
    sampler = _ChainSampler(N, p, r, seed)
    if beta == 0.0:
        return McEstimate(0.0, 0.0, samples, sampler.seed)
    vol = sampler.volume
    hist, S = sampler.run(samples)

    if estimator == "global":
        y = beta * S
        shift = float(y.max())
        z = np.exp(y - shift)
        m = float(z.mean())
        rel = float(z.std(ddof=1)) / (m * math.sqrt(samples))
        return McEstimate((shift + math.log(m)) / vol, rel / vol, samples, sampler.seed)

    # hist[c, j] counts samples whose chain c has bond sum 2j - length_c
    lengths = sampler.lengths[:, None]
    j = np.arange(hist.shape[1])[None, :]
    z = np.where(j <= lengths, np.exp(beta * (2 * j - lengths) - abs(beta) * lengths), 0.0)
    mean = (hist * z).sum(axis=1) / samples
    second = (hist * z * z).sum(axis=1) / samples
    var = np.maximum(second - mean**2, 0.0) * samples / (samples - 1)
    total = math.fsum(abs(beta) * sampler.lengths + np.log(mean))
    err = math.sqrt(math.fsum(var / (samples * mean**2)))
    return McEstimate(total / vol, err / vol, samples, sampler.seed)


def empirical_rate(N, p, r: float, x: float, eps: float, samples: int, seed: int, min_hits: int = 10) -> McEstimate:
    """-(1/volume) log of the sampled frequency of |S/volume - x| <= eps."""
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    sampler = _ChainSampler(N, p, r, seed)
    vol = sampler.volume
    S = sampler.run(samples)[1]
    hits = int(np.count_nonzero(np.abs(S - x * vol) <= eps * vol * (1 + 1e-12)))
    if hits < min_hits:
        raise InsufficientHits(f"only {hits} of {samples} samples hit the interval", hits)
    freq = hits / samples
    stderr = math.sqrt((1.0 - freq) / (samples * freq)) / vol
    return McEstimate(-math.log(freq) / vol, stderr, samples, sampler.seed, hits)
