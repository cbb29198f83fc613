"""One-dimensional symmetric measure families.

Every family is a special case of ``mu_{p,alpha}`` with density
``(alpha c_p / 2) |x|**(alpha-1) exp(-|x|**(alpha p))``:

    nu_p      = mu_{p, 1}
    weibull   = mu_{1, alpha}
    gamma(q)  = mu_{1/q, q}

Under ``mu_{p,alpha}`` the variable ``|X|**(alpha p)`` is Gamma(1/p, 1), which
gives the interval mass, its inverse, the moments and the sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from .core_fns import INF, c_norm, inv_reg_gamma_p, inv_reg_gamma_q, reg_gamma_p, reg_gamma_q
from .errors import DomainError

NU_P = "nu_p"
MU_P_ALPHA = "mu_p_alpha"
WEIBULL = "weibull"
GAMMA_SYM = "gamma"
FAMILIES = (NU_P, MU_P_ALPHA, WEIBULL, GAMMA_SYM)

_REQUIRED = {
    NU_P: ("p",),
    MU_P_ALPHA: ("p", "alpha"),
    WEIBULL: ("alpha",),
    GAMMA_SYM: ("q",),
}


@dataclass(frozen=True)
class MeasureSpec:
    family: str
    p: Optional[float] = None
    alpha: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        for name in ("p", "alpha", "q"):
            value = getattr(self, name)
            needed = name in _REQUIRED[self.family]
            if needed and value is None:
                raise DomainError(f"{self.family} requires parameter {name!r}")
            if not needed and value is not None:
                raise DomainError(f"{self.family} takes no parameter {name!r}")
            if value is not None:
                if not (value > 0 and math.isfinite(value)):
                    raise DomainError(f"{name} must be positive and finite, got {value!r}")
                object.__setattr__(self, name, float(value))

    @classmethod
    def nu(cls, p: float) -> "MeasureSpec":
        return cls(NU_P, p=p)

    @classmethod
    def mu(cls, p: float, alpha: float) -> "MeasureSpec":
        return cls(MU_P_ALPHA, p=p, alpha=alpha)

    @classmethod
    def weibull(cls, alpha: float) -> "MeasureSpec":
        return cls(WEIBULL, alpha=alpha)

    @classmethod
    def gamma(cls, q: float) -> "MeasureSpec":
        return cls(GAMMA_SYM, q=q)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MeasureSpec":
        data = dict(data)
        family = data.pop("family", None)
        unknown = set(data) - {"p", "alpha", "q"}
        if unknown:
            raise DomainError(f"unexpected measure keys {sorted(unknown)}")
        return cls(family, **{k: float(v) for k, v in data.items()})

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family}
        for name in _REQUIRED[self.family]:
            out[name] = getattr(self, name)
        return out

    def label(self) -> str:
        params = ",".join(f"{k}={getattr(self, k):g}" for k in _REQUIRED[self.family])
        return f"{self.family}({params})"

    @property
    def reduced(self) -> tuple[float, float]:
        """``(p, alpha)`` of the equivalent ``mu_{p,alpha}``."""
        if self.family == NU_P:
            return self.p, 1.0
        if self.family == MU_P_ALPHA:
            return self.p, self.alpha
        if self.family == WEIBULL:
            return 1.0, self.alpha
        return 1.0 / self.q, self.q

    @property
    def s_supported(self) -> bool:
        """True when the S-inequality for all ideals is a theorem for this measure."""
        if self.family in (NU_P, MU_P_ALPHA):
            return self.p <= 1.0
        if self.family == WEIBULL:
            return True
        return self.q >= 1.0

    # -- density and interval mass -------------------------------------------

    def density(self, x: float) -> float:
        """Lebesgue density; ``inf`` at 0 when the density has an integrable pole."""
        ax = abs(x)
        if self.family == WEIBULL:
            a = self.alpha
            if ax == 0.0:
                return INF if a < 1 else (0.5 if a == 1 else 0.0)
            return 0.5 * a * ax ** (a - 1.0) * math.exp(-(ax**a))
        if self.family == GAMMA_SYM:
            q = self.q
            if ax == 0.0:
                return INF if q < 1 else (0.5 if q == 1 else 0.0)
            return math.exp((q - 1.0) * math.log(ax) - ax - math.lgamma(q)) / 2.0
        p, a = self.reduced
        c = c_norm(p)
        if ax == 0.0:
            return INF if a < 1 else (0.5 * c if a == 1 else 0.0)
        return 0.5 * a * c * ax ** (a - 1.0) * math.exp(-(ax ** (a * p)))

    def interval_mass(self, x: float) -> float:
        """``Psi(x) = mu([-x, x])``."""
        if not x >= 0:
            raise DomainError(f"x must be nonnegative, got {x!r}")
        if math.isinf(x):
            return 1.0
        if self.family == WEIBULL:
            return -math.expm1(-(x**self.alpha))
        if self.family == GAMMA_SYM:
            return reg_gamma_p(self.q, x)
        p, a = self.reduced
        return reg_gamma_p(1.0 / p, x ** (a * p))

    def interval_tail(self, x: float) -> float:
        """``1 - Psi(x)`` without cancellation."""
        if not x >= 0:
            raise DomainError(f"x must be nonnegative, got {x!r}")
        if math.isinf(x):
            return 0.0
        if self.family == WEIBULL:
            return math.exp(-(x**self.alpha))
        p, a = self.reduced
        return reg_gamma_q(1.0 / p, x ** (a * p))

    def interval_mass_inv(self, mass: float) -> float:
        """Half-width ``w`` with ``Psi(w) = mass``."""
        if not 0 <= mass < 1:
            raise DomainError(f"mass must lie in [0, 1), got {mass!r}")
        if mass == 0.0:
            return 0.0
        if self.family == WEIBULL:
            return (-math.log1p(-mass)) ** (1.0 / self.alpha)
        p, a = self.reduced
        y = inv_reg_gamma_q(1.0 / p, 1.0 - mass) if mass > 0.5 else inv_reg_gamma_p(1.0 / p, mass)
        return y ** (1.0 / (a * p))

    # -- moments and sampling -------------------------------------------------

    def abs_moment(self, r: float) -> float:
        """``E|X|**r`` in closed form."""
        if not r > 0:
            raise DomainError(f"moment order must be positive, got {r!r}")
        if self.family == WEIBULL:
            return _gamma_checked(1.0 + r / self.alpha)
        if self.family == GAMMA_SYM:
            return _gamma_ratio(self.q + r, self.q)
        p, a = self.reduced
        return _gamma_ratio((r / a + 1.0) / p, 1.0 / p)

    def sample(self, count: int, seed: int | np.random.Generator) -> np.ndarray:
        """``count`` i.i.d. draws; ``|X|**(alpha p)`` is drawn as a Gamma(1/p) variate."""
        if count < 1:
            raise DomainError(f"count must be >= 1, got {count!r}")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        p, a = self.reduced
        z = rng.gamma(1.0 / p, 1.0, size=count)
        sign = rng.integers(0, 2, size=count) * 2 - 1
        return sign * z ** (1.0 / (a * p))


def _gamma_checked(x: float) -> float:
    try:
        return math.gamma(x)
    except OverflowError as exc:
        raise OverflowError(f"Gamma({x}) exceeds double range") from exc


def _gamma_ratio(a: float, b: float) -> float:
    log = math.lgamma(a) - math.lgamma(b)
    if log > 709.0:
        raise OverflowError(f"Gamma({a})/Gamma({b}) exceeds double range")
    return math.exp(log)
