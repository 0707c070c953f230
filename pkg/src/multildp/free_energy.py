"""Free-energy evaluators for multiple sums over boxes in N^d.

Each evaluator is a small callable object ``F(beta) -> float`` exposing
``derivative(beta)``; the module-level functions mirror them for one-off use.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import ising
from .errors import InvalidProfile, UnsupportedDimension, ValidationError
from .lattice import (
    MAX_ENUMERATION,
    _check_dims,
    _guard,
    as_box,
    as_multipliers,
    chain_census,
    decompose_box,
)

MOBIUS_DENSITY = 6.0 / math.pi**2
FD_STEP = 1e-5


@dataclass(frozen=True)
class SeriesControl:
    num_terms: int = 100
    report_tail: bool = True

    def __post_init__(self):
        if int(self.num_terms) < 1:
            raise ValidationError(f"num_terms must be >= 1, got {self.num_terms}")


@dataclass(frozen=True)
class WeightProfile:
    values: tuple[float, ...]
    freqs: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        freqs = tuple(float(f) for f in self.freqs)
        if not values or len(values) != len(freqs):
            raise InvalidProfile("values and freqs must be nonempty and of equal length")
        if len(set(values)) != len(values):
            raise InvalidProfile(f"weight values must be distinct, got {values}")
        if any(f < 0 or not math.isfinite(f) for f in freqs):
            raise InvalidProfile(f"frequencies must be nonnegative, got {freqs}")
        if abs(math.fsum(freqs) - 1.0) > 1e-12:
            raise InvalidProfile(f"frequencies must sum to 1, got {math.fsum(freqs)!r}")
        if not all(math.isfinite(v) for v in values):
            raise InvalidProfile("weight values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "freqs", freqs)

    @property
    def spread(self) -> float:
        """sum_k P_k |v_k|, the half-width of the attainable range of averages."""
        return math.fsum(f * abs(v) for v, f in zip(self.values, self.freqs))

    def flipped(self) -> "WeightProfile":
        return WeightProfile(tuple(-v for v in self.values), self.freqs)


# equal split of the +1/-1 mass is an assumption; only the total 6/pi^2 matters for F
MOBIUS_PROFILE = WeightProfile(
    (1.0, -1.0, 0.0), (0.5 * MOBIUS_DENSITY, 0.5 * MOBIUS_DENSITY, 1.0 - MOBIUS_DENSITY)
)


class BoundaryKind(enum.Enum):
    FREE = "free"
    BC1 = "bc1"
    BC2 = "bc2"
    BCP = "bcp"


def log_cosh(x):
    """log cosh x without overflow."""
    ax = np.abs(x)
    return ax - math.log(2.0) + np.log1p(np.exp(-2.0 * ax))


def _log_two_cosh(x):
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def _series_weights(P: int, num_terms: int) -> np.ndarray:
    ell = np.arange(1, num_terms + 1)
    return np.exp(2.0 * math.log(P - 1) - (ell + 1) * math.log(P))


def _geometric_tail(P: int, num_terms: int, amp: float, rate: float) -> float:
    """Bound on sum_{ell > L} w_ell |log1p(amp * rate^ell)|, using |log1p x| <= |x|/(1-|x|)."""
    amp, rate = abs(amp), abs(rate)
    if amp == 0.0 or rate == 0.0:
        return 0.0
    first = amp * rate ** (num_terms + 1)
    if first >= 1.0:
        return math.inf
    q = rate / P
    head = math.exp(2.0 * math.log(P - 1) - math.log(P) + (num_terms + 1) * math.log(q))
    return amp * head / (1.0 - q) / (1.0 - first)


def finite_difference(f: Callable[[float], float], beta: float, step: float = FD_STEP) -> float:
    """Five-point central difference."""
    return (-f(beta + 2 * step) + 8 * f(beta + step) - 8 * f(beta - step) + f(beta - 2 * step)) / (12 * step)


class FreeEnergy:
    """Base evaluator; subclasses override ``value`` and, when known, ``derivative``."""

    name = "free-energy"
    analytic_derivative = False

    def __call__(self, beta: float) -> float:
        return self.value(beta)

    def value(self, beta: float) -> float:
        raise NotImplementedError

    def tail_bound(self, beta: float) -> float:
        return 0.0

    def derivative(self, beta: float) -> float:
        return finite_difference(self.value, beta)


class SymmetricFreeEnergy(FreeEnergy):
    name = "symmetric"
    analytic_derivative = True

    def value(self, beta):
        return float(log_cosh(ising._check_beta(beta)))

    def derivative(self, beta):
        return math.tanh(beta)


class GeneralFreeEnergy(FreeEnergy):
    """Asymptotic free energy for product Bernoulli(r) spins, series truncated at ``ctrl.num_terms``."""

    name = "general"
    analytic_derivative = True

    def __init__(self, r: float, p, ctrl: SeriesControl = SeriesControl()):
        self.field = ising.field_from_bias(r)
        self.p = as_multipliers(p)
        self.ctrl = ctrl
        self._P = self.p.product
        self._ell = np.arange(1, ctrl.num_terms + 1)
        self._w = _series_weights(self._P, ctrl.num_terms)
        self._log_rr = math.log(self.field.r) + math.log1p(-self.field.r)

    def evaluate(self, beta: float) -> tuple[float, float]:
        beta = ising._check_beta(beta)
        if beta == 0.0:
            return 0.0, 0.0
        P = self._P
        spec = ising.spectrum(beta, self.field)
        c = spec.excess
        series = self._w * ising._log1p_guarded(c * spec.ratio**self._ell)
        value = math.fsum(
            [
                (2 * P - 1) / (2 * P) * self._log_rr,
                (P - 1) / P * math.log(spec.overlap_sq),
                spec.log_lambda_plus,
                math.fsum(series),
            ]
        )
        return value, _geometric_tail(P, self.ctrl.num_terms, c, spec.ratio)

    def value(self, beta):
        return self.evaluate(beta)[0]

    def tail_bound(self, beta):
        return self.evaluate(beta)[1]

    def derivative(self, beta):
        beta = ising._check_beta(beta)
        P = self._P
        spec = ising.spectrum(beta, self.field)
        d_log_lp, d_ratio, d_log_ov = ising.spectrum_derivatives(spec)
        c = spec.excess
        dc = -(c + 1.0) * d_log_ov if c > 0.0 else 0.0
        rho = spec.ratio
        ell = self._ell
        rho_l = rho**ell
        rho_lm1 = rho ** (ell - 1)
        terms = (dc * rho_l + c * ell * rho_lm1 * d_ratio) / (1.0 + c * rho_l)
        return math.fsum([(P - 1) / P * d_log_ov, d_log_lp, math.fsum(self._w * terms)])

    def derivative_fd(self, beta):
        return finite_difference(self.value, beta)


class WeightedFreeEnergy(FreeEnergy):
    name = "weighted"
    analytic_derivative = True

    def __init__(self, profile: WeightProfile, r: float = 0.5):
        if r != 0.5:
            raise ValidationError(
                "weighted free energy is only available at r = 1/2: for other r the "
                "per-weight transfer matrices do not commute"
            )
        self.profile = profile
        self._v = np.asarray(profile.values)
        self._f = np.asarray(profile.freqs)

    def value(self, beta):
        beta = ising._check_beta(beta)
        return math.fsum(self._f * _log_two_cosh(beta * self._v)) - math.log(2.0)

    def derivative(self, beta):
        return math.fsum(self._f * self._v * np.tanh(beta * self._v))


class MobiusFreeEnergy(FreeEnergy):
    name = "mobius"
    analytic_derivative = True

    def value(self, beta):
        return MOBIUS_DENSITY * float(log_cosh(ising._check_beta(beta)))

    def derivative(self, beta):
        return MOBIUS_DENSITY * math.tanh(beta)


class BoundaryFreeEnergy(FreeEnergy):
    """Energy functions of the 2-d multiple sum at r = 1/2 under boundary conditions."""

    analytic_derivative = True

    def __init__(self, kind: BoundaryKind | str, p, ctrl: SeriesControl = SeriesControl()):
        self.kind = BoundaryKind(kind) if not isinstance(kind, BoundaryKind) else kind
        self.p = as_multipliers(p)
        if self.kind in (BoundaryKind.BC2, BoundaryKind.BCP) and self.p.dim != 2:
            raise UnsupportedDimension(f"{self.kind.value} energies are only available for d = 2, got d = {self.p.dim}")
        self.ctrl = ctrl
        self.name = self.kind.value
        self._P = self.p.product
        self._ell = np.arange(1, ctrl.num_terms + 1)
        self._w = _series_weights(self._P, ctrl.num_terms)

    def evaluate(self, beta: float) -> tuple[float, float]:
        beta = ising._check_beta(beta)
        base = float(log_cosh(beta))
        if self.kind in (BoundaryKind.FREE, BoundaryKind.BC1):
            return base, 0.0
        P = self._P
        shift = (P - 1) / P * math.log(2.0)
        if self.kind is BoundaryKind.BC2:
            return base - shift, 0.0
        t = math.tanh(beta)
        series = math.fsum(self._w * ising._log1p_guarded(t**self._ell))
        return base - shift + series, _geometric_tail(P, self.ctrl.num_terms, 1.0, t)

    def value(self, beta):
        return self.evaluate(beta)[0]

    def tail_bound(self, beta):
        return self.evaluate(beta)[1]

    def derivative(self, beta):
        t = math.tanh(beta)
        if self.kind is not BoundaryKind.BCP:
            return t
        ell = self._ell
        terms = ell * t ** (ell - 1) * (1.0 - t * t) / (1.0 + t**ell)
        return t + math.fsum(self._w * terms)


# -- functional API -----------------------------------------------------------


def asymptotic_free_energy(r: float, p, beta: float, ctrl: SeriesControl = SeriesControl()) -> tuple[float, float]:
    """Return ``(value, tail_bound)`` of the truncated asymptotic free energy."""
    return GeneralFreeEnergy(r, p, ctrl).evaluate(beta)


def symmetric_free_energy(beta: float) -> float:
    return SymmetricFreeEnergy().value(beta)


def finite_volume_free_energy(N, p, r: float, beta: float, max_volume: int = MAX_ENUMERATION) -> float:
    """(1/volume) log E_r exp(beta S) for a finite box, summed chain by chain."""
    N, p = as_box(N), as_multipliers(p)
    _check_dims(N, p)
    _guard(N, max_volume)
    beta = ising._check_beta(beta)
    ising.field_from_bias(r)
    if beta == 0.0:
        return 0.0
    census = chain_census(N, p)
    total = math.fsum(k * ising.chain_mgf_log(beta, r, ell) for ell, (_, k) in census.counts.items() if k)
    return total / N.volume


def weighted_free_energy(profile: WeightProfile, beta: float, r: float = 0.5) -> float:
    return WeightedFreeEnergy(profile, r).value(beta)


def mobius_free_energy(beta: float) -> float:
    return MobiusFreeEnergy().value(beta)


def boundary_free_energy(kind, p, beta: float, ctrl: SeriesControl = SeriesControl()) -> tuple[float, float]:
    return BoundaryFreeEnergy(kind, p, ctrl).evaluate(beta)


def free_energy_derivative(evaluator, beta: float) -> float:
    """Analytic derivative when the evaluator has one, else a five-point difference."""
    if isinstance(evaluator, FreeEnergy):
        return evaluator.derivative(beta)
    return finite_difference(evaluator, beta)


# -- weight profiles from weight fields -----------------------------------------


def mobius(n: int) -> int:
    if n < 1:
        raise ValueError("mobius is defined for n >= 1")
    result, m, q = 1, n, 2
    while q * q <= m:
        if m % q == 0:
            m //= q
            if m % q == 0:
                return 0
            result = -result
        q += 1
    return -result if m > 1 else result


def chain_position(site: Sequence[int], p) -> int:
    """Index m of ``site`` along its chain, i.e. site = start * p^m."""
    p = as_multipliers(p)
    m = None
    for x, q in zip(site, p.entries):
        if q < 2:
            continue
        k = 0
        while x % q == 0:
            x //= q
            k += 1
        m = k if m is None else min(m, k)
    return m


def mobius_weight(p) -> Callable[[tuple[int, ...]], int]:
    """Weight field equal to mu(m + 1) at chain position m."""
    p = as_multipliers(p)
    return lambda site: mobius(chain_position(site, p) + 1)


def estimate_profile(weight: Callable[[tuple[int, ...]], float], N, p, min_length: int = 1, tolerance: float = 0.01) -> WeightProfile:
    """Empirical weight frequencies over all chain sites of a box.

    Warns when the per-chain frequencies of chains with at least ``min_length``
    sites differ from the pooled frequencies by more than ``tolerance``.
    """
    chains = decompose_box(N, p)
    per_chain = []
    pooled: dict[float, int] = {}
    for chain in chains:
        local: dict[float, int] = {}
        for site in chain.sites:
            v = float(weight(site))
            local[v] = local.get(v, 0) + 1
            pooled[v] = pooled.get(v, 0) + 1
        if chain.length >= min_length:
            per_chain.append((chain.length, local))
    total = sum(pooled.values())
    values = tuple(sorted(pooled))
    freqs = [pooled[v] / total for v in values]
    freqs[-1] = 1.0 - math.fsum(freqs[:-1])
    worst = 0.0
    for length, local in per_chain:
        for v, f in zip(values, freqs):
            worst = max(worst, abs(local.get(v, 0) / length - f))
    if worst > tolerance:
        warnings.warn(
            f"per-chain weight frequencies deviate from the pooled ones by up to {worst:.3g}",
            stacklevel=2,
        )
    return WeightProfile(values, tuple(freqs))
