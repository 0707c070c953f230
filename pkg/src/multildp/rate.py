"""Rate functions as Legendre transforms of convex free energies, plus the
closed-form dimension spectra of weighted and Mobius averages."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonConvergence, OutOfSpectrumDomain, ValidationError
from .free_energy import (
    MOBIUS_DENSITY,
    FreeEnergy,
    SymmetricFreeEnergy,
    WeightedFreeEnergy,
    WeightProfile,
    _log_two_cosh,
)


@dataclass(frozen=True)
class SolverControl:
    bracket_limit: float = 50.0
    tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not self.tol > 0 or not self.bracket_limit > 0:
            raise ValidationError("tol and bracket_limit must be positive")


@dataclass(frozen=True)
class RateValue:
    x: float
    value: float
    eta: float | None
    in_domain: bool
    eta_err: float = 0.0

    @classmethod
    def outside(cls, x: float) -> "RateValue":
        return cls(float(x), math.inf, None, False)

    def record(self) -> dict:
        return {
            "x": self.x,
            "value": self.value if self.in_domain else "inf",
            "eta": self.eta if self.in_domain else "",
            "in_domain": self.in_domain,
        }


def solve_monotone(g: Callable[[float], float], target: float, ctrl: SolverControl = SolverControl()):
    """Root of g(eta) = target for nondecreasing g.

    Returns ``(eta, half_width)`` or ``None`` when target is not strictly inside
    g's range over [-bracket_limit, bracket_limit].
    """
    limit = ctrl.bracket_limit
    if not g(-limit) < target < g(limit):
        return None
    lo, hi = -min(1.0, limit), min(1.0, limit)
    g_lo, g_hi = g(lo), g(hi)
    while g_hi < target:
        lo, g_lo = hi, g_hi
        hi = min(2.0 * hi, limit)
        g_hi = g(hi)
    while g_lo > target:
        hi, g_hi = lo, g_lo
        lo = max(2.0 * lo, -limit)
        g_lo = g(lo)
    for _ in range(ctrl.max_iter):
        if hi - lo <= ctrl.tol:
            return 0.5 * (lo + hi), 0.5 * (hi - lo)
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if g_mid == target:
            return mid, 0.0
        if g_mid < target:
            lo = mid
        else:
            hi = mid
    raise NonConvergence(f"bisection did not reach tol={ctrl.tol} in {ctrl.max_iter} steps", bracket=(lo, hi))


def legendre_rate(F: FreeEnergy, x: float, ctrl: SolverControl = SolverControl()) -> RateValue:
    """sup_beta (beta x - F(beta)) for convex differentiable F, via F'(eta) = x."""
    x = float(x)
    root = solve_monotone(lambda b: F.derivative(b), x, ctrl)
    if root is None:
        return RateValue.outside(x)
    eta, err = root
    return RateValue(x, eta * x - F(eta), eta, True, err)


def binary_entropy(q: float) -> float:
    """H(q) in nats with H(0) = H(1) = 0."""
    if q < 0.0 or q > 1.0:
        raise ValidationError(f"entropy argument outside [0, 1]: {q}")
    out = 0.0
    if 0.0 < q:
        out -= q * math.log(q)
    if q < 1.0:
        out -= (1.0 - q) * math.log1p(-q)
    return out


def symmetric_rate_closed(y: float) -> RateValue:
    y = float(y)
    if not abs(y) < 1.0:
        return RateValue.outside(y)
    eta = math.atanh(y)
    value = eta * y - float(_log_two_cosh(eta)) + math.log(2.0)
    return RateValue(y, value, eta, True)


def symmetric_rate_entropy(y: float) -> float:
    """Equivalent form log 2 - H((1 + y) / 2)."""
    return math.log(2.0) - binary_entropy(0.5 * (1.0 + y))


def symmetric_rate(y: float, ctrl: SolverControl = SolverControl()) -> RateValue:
    return legendre_rate(SymmetricFreeEnergy(), y, ctrl)


def weighted_domain(profile: WeightProfile) -> tuple[float, float]:
    s = profile.spread
    return -s, s


def weighted_rate(profile: WeightProfile, y: float, ctrl: SolverControl = SolverControl()) -> RateValue:
    y = float(y)
    lo, hi = weighted_domain(profile)
    if not lo < y < hi:
        return RateValue.outside(y)
    root = solve_monotone(WeightedFreeEnergy(profile).derivative, y, ctrl)
    if root is None:
        return RateValue.outside(y)
    eta, err = root
    v = np.asarray(profile.values)
    f = np.asarray(profile.freqs)
    ev = eta * v
    value = math.fsum(f * (ev * np.tanh(ev) - _log_two_cosh(ev))) + math.log(2.0)
    return RateValue(y, value, eta, True, err)


def fan_dimension_E(profile: WeightProfile, alpha: float, ctrl: SolverControl = SolverControl()) -> float:
    """Hausdorff dimension of the level set of weighted averages equal to alpha."""
    alpha = float(alpha)
    lo, hi = weighted_domain(profile)
    if not lo < alpha < hi:
        raise OutOfSpectrumDomain(f"alpha={alpha} outside ({lo}, {hi})")
    root = solve_monotone(WeightedFreeEnergy(profile).derivative, alpha, ctrl)
    if root is None:
        raise OutOfSpectrumDomain(f"alpha={alpha} not reachable within the bracket limit")
    lam = root[0]
    v = np.asarray(profile.values)
    f = np.asarray(profile.freqs)
    lv = lam * v
    return math.fsum(f * (_log_two_cosh(lv) - lv * np.tanh(lv))) / math.log(2.0)


def mobius_dimension_F(alpha: float) -> float:
    """Dimension spectrum of Mobius-weighted correlation averages.

    Defined on the closed interval |alpha| <= 6/pi^2; the endpoints are the
    continuous limits.
    """
    alpha = float(alpha)
    if not abs(alpha) <= MOBIUS_DENSITY:
        raise OutOfSpectrumDomain(f"alpha={alpha} outside [-6/pi^2, 6/pi^2]")
    q = min(max(0.5 + math.pi**2 / 12.0 * alpha, 0.0), 1.0)
    return 1.0 - MOBIUS_DENSITY + MOBIUS_DENSITY / math.log(2.0) * binary_entropy(q)
