"""Analytic kernel: incomplete gamma, the half-line tail/moment pair and the
transform ``phi = S o T^{-1}`` with its derivatives.

For an exponent ``p > 0`` let ``mu_+`` be the probability measure on
``[0, inf)`` with density ``c_p exp(-x**p)``, ``c_p = 1/Gamma(1 + 1/p)``.
Substituting ``y = x**p`` turns every quantity below into a regularized
incomplete gamma value:

    T(u) = mu_+([u, inf))           = Q(1/p, u**p)
    S(u) = int_0^u x**p dmu_+(x)    = P(1 + 1/p, u**p) / p

Infinite arguments are legal and map to the exact limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError

INF = math.inf

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 5000


def _check_p(p: float) -> None:
    if not p > 0 or math.isinf(p):
        raise DomainError(f"exponent p must be a positive finite real, got {p!r}")


def _gamma_series(s: float, x: float) -> float:
    # P(s, x) = x^s e^{-x} / Gamma(s+1) * sum_n x^n / ((s+1)...(s+n))
    term = 1.0
    total = 1.0
    a = s
    for _ in range(_MAX_ITER):
        a += 1.0
        term *= x / a
        total += term
        if term < total * _EPS:
            break
    return total * math.exp(s * math.log(x) - x - math.lgamma(s + 1.0))


def _gamma_cfrac(s: float, x: float) -> float:
    # Q(s, x) by the Legendre continued fraction, modified Lentz evaluation.
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(s * math.log(x) - x - math.lgamma(s))


def _check_gamma_args(s: float, x: float) -> None:
    if not s > 0 or math.isinf(s):
        raise DomainError(f"shape s must be positive and finite, got {s!r}")
    if not x >= 0:
        raise DomainError(f"argument x must be nonnegative, got {x!r}")


def reg_gamma_p(s: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(s, x)``.

    Series for ``x < s + 1``, continued fraction for the complement otherwise.
    """
    _check_gamma_args(s, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return min(1.0, _gamma_series(s, x))
    return max(0.0, 1.0 - _gamma_cfrac(s, x))


def reg_gamma_q(s: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(s, x) = 1 - P(s, x)``.

    Computed directly in the tail so small values keep relative accuracy.
    """
    _check_gamma_args(s, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return max(0.0, 1.0 - _gamma_series(s, x))
    return min(1.0, _gamma_cfrac(s, x))


def c_norm(p: float) -> float:
    """Normalizing constant ``1/Gamma(1 + 1/p)``."""
    _check_p(p)
    return math.exp(-math.lgamma(1.0 + 1.0 / p))


def _pow(u: float, p: float) -> float:
    return INF if math.isinf(u) else u**p


def tail_T(p: float, u: float) -> float:
    """Tail mass ``mu_+([u, inf))``."""
    _check_p(p)
    if not u >= 0:
        raise DomainError(f"u must be nonnegative, got {u!r}")
    return reg_gamma_q(1.0 / p, _pow(u, p))


def partial_moment_S(p: float, u: float) -> float:
    """Partial p-th moment ``int_0^u x**p dmu_+(x)``; ``S(inf) = 1/p``."""
    _check_p(p)
    if not u >= 0:
        raise DomainError(f"u must be nonnegative, got {u!r}")
    if math.isinf(u):
        return 1.0 / p
    return reg_gamma_p(1.0 + 1.0 / p, u**p) / p


def s_identity_residual(p: float, u: float) -> float:
    """Residual of the integration-by-parts form of ``S``.

    ``S(u) = -(c_p/p) u exp(-u**p) + (1 - T(u))/p``; the return value is
    ``S(u)`` minus the right-hand side.
    """
    _check_p(p)
    if not (u > 0 and math.isfinite(u)):
        raise DomainError(f"u must be positive and finite, got {u!r}")
    rhs = -c_norm(p) / p * u * math.exp(-(u**p)) + (1.0 - tail_T(p, u)) / p
    return partial_moment_S(p, u) - rhs


def inv_reg_gamma_q(s: float, v: float) -> float:
    """Solve ``Q(s, y) = v`` for ``y >= 0`` by bracketing then Brent refinement."""
    hi = max(1.0, s)
    while reg_gamma_q(s, hi) >= v:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError(f"cannot bracket Q^-1({s}, {v})")
    return brentq(lambda y: reg_gamma_q(s, y) - v, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def inv_reg_gamma_p(s: float, mass: float) -> float:
    """Solve ``P(s, y) = mass`` for ``y >= 0``."""
    hi = max(1.0, s)
    while reg_gamma_p(s, hi) <= mass:
        hi *= 2.0
        if hi > 1e6:
            raise DomainError(f"cannot bracket P^-1({s}, {mass})")
    return brentq(lambda y: reg_gamma_p(s, y) - mass, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def inv_T(p: float, v: float) -> float:
    """Inverse tail ``F = T^{-1}``; ``F(1) = 0`` and ``F(0+) = inf``."""
    _check_p(p)
    if not 0 <= v <= 1:
        raise DomainError(f"v must lie in (0, 1], got {v!r}")
    if v == 0.0:
        return INF
    if v == 1.0:
        return 0.0
    return inv_reg_gamma_q(1.0 / p, v) ** (1.0 / p)


@dataclass(frozen=True)
class HalfLineMeasure:
    """``mu_+`` on ``[0, inf)`` with density ``c_p exp(-x**p)``."""

    p: float

    def __post_init__(self) -> None:
        _check_p(self.p)

    @property
    def c(self) -> float:
        return c_norm(self.p)

    def density(self, x: float) -> float:
        if x < 0:
            return 0.0
        return self.c * math.exp(-(x**self.p))

    def tail(self, u: float) -> float:
        return tail_T(self.p, u)

    def partial_moment(self, u: float) -> float:
        return partial_moment_S(self.p, u)


@dataclass(frozen=True)
class PhiStack:
    """``phi`` and its derivative stack at one point ``v``.

    ``inv_d2_d1`` and ``inv_d2_d2`` are the first and second derivatives of
    ``1/phi''``; ``f_point`` is ``T^{-1}(v)``.
    """

    value: float
    d1: float
    d2: float
    inv_d2_d1: float
    inv_d2_d2: float
    f_point: float


def _safe_pow(base: float, e: float) -> float:
    if base == 0.0:
        if e > 0:
            return 0.0
        return 1.0 if e == 0 else INF
    return base**e


def phi(p: float, v: float) -> float:
    """``phi(v) = S(T^{-1}(v))`` on ``[0, 1]``; ``phi(0) = 1/p``, ``phi(1) = 0``."""
    _check_p(p)
    if not 0 <= v <= 1:
        raise DomainError(f"v must lie in [0, 1], got {v!r}")
    if v == 0.0:
        return 1.0 / p
    if v == 1.0:
        return 0.0
    y = inv_reg_gamma_q(1.0 / p, v)
    return reg_gamma_p(1.0 + 1.0 / p, y) / p


def phi_stack(p: float, v: float) -> PhiStack:
    """Evaluate ``phi`` and the closed-form derivatives at ``v``.

    With ``F = T^{-1}(v)``::

        phi'         = -F**p
        phi''        = (p/c_p) F**(p-1) exp(F**p)
        (1/phi'')'   = 1 - ((1-p)/p) F**(-p)
        (1/phi'')''  = -((1-p)/c_p) F**(-p-1) exp(F**p)
    """
    _check_p(p)
    if not 0 <= v <= 1:
        raise DomainError(f"v must lie in [0, 1], got {v!r}")
    c = c_norm(p)
    if v == 0.0:
        return PhiStack(1.0 / p, -INF, INF, 1.0, -math.copysign(INF, 1 - p) if p != 1 else 0.0, INF)
    if v == 1.0:
        f = 0.0
        y = 0.0
        value = 0.0
    else:
        y = inv_reg_gamma_q(1.0 / p, v)
        f = y ** (1.0 / p)
        value = reg_gamma_p(1.0 + 1.0 / p, y) / p
    e = math.exp(y)
    d1 = -y
    d2 = p / c * _safe_pow(f, p - 1.0) * e
    inv_d2_d1 = 1.0 - (1.0 - p) / p * _safe_pow(f, -p) if p != 1 else 1.0
    inv_d2_d2 = -(1.0 - p) / c * _safe_pow(f, -p - 1.0) * e if p != 1 else 0.0
    return PhiStack(value, d1, d2, inv_d2_d1, inv_d2_d2, f)
