"""One-dimensional Ising chain with free ends, via its 2x2 transfer matrix.

The transfer matrix is ``[[e^(b+h), e^-b], [e^-b, e^(b-h)]]`` and the free
boundary vector is ``v = (e^(h/2), e^(-h/2))``.  A chain of ``ell`` bonds under
i.i.d. Bernoulli(r) spins (P(+1) = r) has the moment generating factor
``(r(1-r))^((ell+1)/2) * Z(beta, h, ell+1)`` with ``h = log(r/(1-r))/2``.

All spectral quantities are stored in scaled/log form so that evaluation stays
finite for |beta| up to several hundred.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BiasOutOfRange, NonFiniteInput, ValidationError

# beyond this, asinh(q) == sign(q) * (log 2 + log|q|) to double precision
_ASINH_LOG_SWITCH = 20.0


@dataclass(frozen=True)
class BernoulliField:
    r: float
    h: float

    @property
    def norm_sq(self) -> float:
        return 2.0 * math.cosh(self.h)


def field_from_bias(r: float) -> BernoulliField:
    r = float(r)
    if not (0.0 < r < 1.0):
        raise BiasOutOfRange(f"r must lie strictly inside (0, 1), got {r}")
    return BernoulliField(r, 0.5 * (math.log(r) - math.log1p(-r)))


def _as_field(field) -> BernoulliField:
    return field if isinstance(field, BernoulliField) else field_from_bias(field)


def _check_beta(beta: float) -> float:
    beta = float(beta)
    if not math.isfinite(beta):
        raise NonFiniteInput(f"beta must be finite, got {beta}")
    return beta


@dataclass(frozen=True)
class TransferSpectrum:
    """Eigen-data of the transfer matrix at (beta, h).

    ``ratio`` is Lambda_-/Lambda_+ in (-1, 1); ``theta``/``flipped`` encode the
    direction of the top eigenvector, which enters only through ``overlap_sq``.
    """

    beta: float
    h: float
    log_lambda_plus: float
    ratio: float
    overlap_sq: float
    norm_sq: float
    # internals reused by the analytic derivative
    theta: float
    flipped: bool
    dasinh: float

    @property
    def lambda_plus(self) -> float:
        return math.exp(self.log_lambda_plus)

    @property
    def lambda_minus(self) -> float:
        return self.ratio * self.lambda_plus

    @property
    def excess(self) -> float:
        """c = ||v||^2 / |v.e+|^2 - 1 >= 0, the amplitude of the subleading mode."""
        return max(self.norm_sq / self.overlap_sq - 1.0, 0.0)

    def record(self, r: float | None = None) -> dict:
        return {
            "beta": self.beta,
            "r": r,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "overlap_sq": self.overlap_sq,
        }


def spectrum(beta: float, field) -> TransferSpectrum:
    beta = _check_beta(beta)
    fld = _as_field(field)
    h = fld.h
    ch, sh = math.cosh(h), math.sinh(h)

    # a = e^{-2 beta}; s = sqrt(sinh^2 h + a^2).  Work with whichever of a, 1/a is <= 1.
    if beta >= 0.0:
        a = math.exp(-2.0 * beta)
        s = math.hypot(sh, a)
        log_lp = beta + math.log(ch + s)
        ratio = (1.0 - a) * (1.0 + a) / (ch + s) ** 2
    else:
        b = math.exp(2.0 * beta)
        s_hat = math.hypot(sh * b, 1.0)
        log_lp = -beta + math.log(ch * b + s_hat)
        ratio = (b - 1.0) * (b + 1.0) / (ch * b + s_hat) ** 2

    # Top eigenvector w+ is proportional to (1, t) with t = exp(-asinh(q)), q = sinh(h) e^{2 beta}.
    # theta = e^{-|asinh q|} <= 1; when q < 0 we use (1/t, 1) instead so nothing overflows.
    if sh == 0.0:
        abs_asinh, dasinh, flipped = 0.0, 0.0, False
    else:
        log_q = math.log(abs(sh)) + 2.0 * beta
        if log_q > _ASINH_LOG_SWITCH:
            abs_asinh = math.log(2.0) + log_q
            dasinh = 2.0
        else:
            q = abs(sh) * math.exp(2.0 * beta)
            abs_asinh = math.asinh(q)
            dasinh = 2.0 * q / math.hypot(1.0, q)
        flipped = sh < 0.0
    theta = math.exp(-abs_asinh)
    lead, trail = _overlap_weights(h, flipped)
    overlap = (lead + trail * theta) ** 2 / (1.0 + theta * theta)

    return TransferSpectrum(beta, h, log_lp, ratio, overlap, fld.norm_sq, theta, flipped, dasinh)


def _overlap_weights(h: float, flipped: bool) -> tuple[float, float]:
    up, down = math.exp(0.5 * h), math.exp(-0.5 * h)
    return (down, up) if flipped else (up, down)


def spectrum_derivatives(spec: TransferSpectrum) -> tuple[float, float, float]:
    """d/dbeta of (log Lambda_+, Lambda_-/Lambda_+, log overlap_sq)."""
    beta, h = spec.beta, spec.h
    ch, sh = math.cosh(h), math.sinh(h)
    if beta >= 0.0:
        a = math.exp(-2.0 * beta)
        s = math.hypot(sh, a)
        if s == 0.0:
            d_log_lp, d_ratio = 1.0, 0.0
        else:
            d_log_lp = 1.0 - 2.0 * a * a / (s * (ch + s))
            d_ratio = 4.0 * ch * a * a / (s * (ch + s) ** 2)
    else:
        b = math.exp(2.0 * beta)
        s_hat = math.hypot(sh * b, 1.0)
        d_log_lp = 1.0 - 2.0 / (s_hat * (ch * b + s_hat))
        d_ratio = 4.0 * ch * b / (s_hat * (ch * b + s_hat) ** 2)

    theta = spec.theta
    lead, trail = _overlap_weights(h, spec.flipped)
    dlog_dtheta = 2.0 * trail / (lead + trail * theta) - 2.0 * theta / (1.0 + theta * theta)
    d_log_overlap = -theta * spec.dasinh * dlog_dtheta
    return d_log_lp, d_ratio, d_log_overlap


def _log1p_guarded(x):
    return np.log1p(np.maximum(x, np.nextafter(-1.0, 0.0)))


def partition_function_log(beta: float, field, n: int, method: str = "eigen") -> float:
    """log Z(beta, h, n) for an open chain of n spins (n - 1 bonds)."""
    beta = _check_beta(beta)
    fld = _as_field(field)
    n = int(n)
    if n < 2:
        raise ValidationError(f"need at least two spins, got n={n}")
    if method == "eigen":
        spec = spectrum(beta, fld)
        bonds = n - 1
        corr = float(_log1p_guarded(spec.excess * spec.ratio**bonds))
        return math.log(spec.overlap_sq) + bonds * spec.log_lambda_plus + corr
    if method == "matrix":
        return _partition_log_matrix(beta, fld.h, n)
    raise ValidationError(f"unknown method {method!r}")


def _partition_log_matrix(beta: float, h: float, n: int) -> float:
    # T scaled by e^{-(|beta|+|h|)} so every entry is <= 1; renormalize each step.
    shift = abs(beta) + abs(h)
    T = np.array(
        [
            [math.exp(beta + h - shift), math.exp(-beta - shift)],
            [math.exp(-beta - shift), math.exp(beta - h - shift)],
        ]
    )
    v = np.array([math.exp(0.5 * h), math.exp(-0.5 * h)])
    x = v.copy()
    log_scale = 0.0
    for _ in range(n - 1):
        x = T @ x
        m = x.max()
        x /= m
        log_scale += math.log(m)
    return (n - 1) * shift + log_scale + math.log(float(v @ x))


def chain_mgf_log(beta: float, r: float, ell: int) -> float:
    """log E_r exp(beta * sum_{m=1}^{ell} tau_m tau_{m+1}) for i.i.d. Bernoulli(r) spins."""
    beta = _check_beta(beta)
    fld = field_from_bias(r)
    if ell < 1:
        raise ValidationError(f"chain length must be >= 1, got {ell}")
    if beta == 0.0:
        return 0.0
    log_rr = math.log(fld.r) + math.log1p(-fld.r)
    return 0.5 * (ell + 1) * log_rr + partition_function_log(beta, fld, ell + 1)
