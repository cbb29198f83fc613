"""Sharp moment comparison for unconditional norms under product measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .errors import DomainError, UnsupportedAssertion
from .measures import MeasureSpec

LS_NORM = "ls"
WEIGHTED_MAX = "weighted_max"
COORDINATE = "coordinate"


@dataclass(frozen=True)
class UnconditionalNorm:
    kind: str
    s: float = 2.0
    weights: tuple[float, ...] = ()
    index: int = 0

    def __post_init__(self) -> None:
        if self.kind == LS_NORM and not self.s >= 1:
            raise DomainError(f"l_s norm needs s >= 1, got {self.s}")
        if self.kind == WEIGHTED_MAX and any(not w > 0 for w in self.weights):
            raise DomainError("weights must be positive")
        if self.kind not in (LS_NORM, WEIGHTED_MAX, COORDINATE):
            raise DomainError(f"unknown norm kind {self.kind!r}")

    @classmethod
    def ls(cls, s: float) -> "UnconditionalNorm":
        return cls(LS_NORM, s=float(s))

    @classmethod
    def weighted_max(cls, weights: Sequence[float]) -> "UnconditionalNorm":
        return cls(WEIGHTED_MAX, weights=tuple(float(w) for w in weights))

    @classmethod
    def coordinate(cls, j: int = 0) -> "UnconditionalNorm":
        return cls(COORDINATE, index=j)

    def label(self) -> str:
        if self.kind == LS_NORM:
            return f"l{self.s:g}"
        if self.kind == WEIGHTED_MAX:
            return "wmax(" + ",".join(f"{w:g}" for w in self.weights) + ")"
        return f"coord{self.index}"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Norm of each row of ``x``."""
        x = np.abs(np.atleast_2d(x))
        if self.kind == COORDINATE:
            return x[:, self.index]
        if self.kind == WEIGHTED_MAX:
            w = np.asarray(self.weights)
            if len(w) != x.shape[1]:
                raise DomainError(f"{len(w)} weights for dimension {x.shape[1]}")
            return np.max(x * w, axis=1)
        if math.isinf(self.s):
            return np.max(x, axis=1)
        return np.sum(x**self.s, axis=1) ** (1.0 / self.s)


def optimal_constant(m: MeasureSpec, p: float, q: float) -> float:
    """``C_{p,q} = (E|X|**p)**(1/p) / (E|X|**q)**(1/q)``."""
    if not (p >= q > 0):
        raise DomainError(f"need p >= q > 0, got p={p}, q={q}")
    if p == q:
        return 1.0
    return math.exp(
        (math.log(m.abs_moment(p)) / p) - (math.log(m.abs_moment(q)) / q)
    )


MAX_REL_SE = 0.25


def mc_resolvable(m: MeasureSpec, r: float, N: int, max_rel_se: float = MAX_REL_SE) -> bool:
    """Whether ``N`` draws pin down ``E|X|**r`` to ``max_rel_se`` relative error.

    Uses the closed-form relative variance ``E|X|**(2r) / (E|X|**r)**2 - 1``.
    Beyond this the sample variance is itself unreliable (very heavy tails of
    ``|X|**r``) and a k-sigma test is not meaningful.
    """
    try:
        relvar = math.exp(math.log(m.abs_moment(2 * r)) - 2 * math.log(m.abs_moment(r))) - 1.0
    except OverflowError:
        return False
    return relvar / N <= max_rel_se**2


def _draw(m: MeasureSpec, n: int, N: int, seed: int) -> np.ndarray:
    return m.sample(N * n, seed).reshape(N, n)


def _moment_from_norms(v: np.ndarray, r: float) -> tuple[float, float]:
    # delta method: sd((mean v^r)^{1/r}) ~ (1/r) M^{1/r - 1} sd(mean v^r)
    vr = v**r
    mean = float(np.mean(vr))
    se = float(np.std(vr, ddof=1)) / math.sqrt(len(vr))
    est = mean ** (1.0 / r)
    return est, est / (r * mean) * se


def norm_moment(
    m: MeasureSpec, n: int, norm: UnconditionalNorm, r: float, N: int = 100_000, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo ``(E||X||**r)**(1/r)`` and its delta-method standard error."""
    if not r > 0:
        raise DomainError("r must be positive")
    if N < 1000:
        raise DomainError("N must be at least 1000")
    return _moment_from_norms(norm(_draw(m, n, N, seed)), r)


@dataclass
class ComparisonReport:
    measure: MeasureSpec
    n: int
    norm: str
    p: float
    q: float
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    constant: float
    ratio: float
    ratio_se: float
    sharp_checked: bool
    passed: bool
    resolved: bool = True
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def stderr(self) -> float:
        return math.hypot(self.lhs_se, self.rhs_se)

    def row(self) -> dict[str, Any]:
        return {
            "family": self.measure.family,
            "params": self.measure.label(),
            "norm": self.norm,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "constant": self.constant,
            "slack": self.slack,
            "stderr": self.stderr,
            "resolved": self.resolved,
        }


def verify_comparison(
    m: MeasureSpec,
    n: int,
    norm: UnconditionalNorm,
    p: float,
    q: float,
    N: int = 100_000,
    seed: int = 0,
    mode: str = "assert",
    nsigma: float = 4.0,
) -> ComparisonReport:
    """Check ``||X||_{L^p} <= C_{p,q} ||X||_{L^q}`` by Monte Carlo.

    Both moments use the same draws. For the coordinate norm the ratio of the
    two sides must also match ``C_{p,q}`` (the constant is attained there).
    ``resolved`` is False when the tails are too heavy for ``N`` draws (see
    :func:`mc_resolvable`); such reports carry no verdict.
    """
    if mode == "assert" and not m.s_supported:
        raise UnsupportedAssertion(f"{UnsupportedAssertion.code}: {m.label()} not covered")
    C = optimal_constant(m, p, q)
    v = norm(_draw(m, n, N, seed))
    lp, lp_se = _moment_from_norms(v, p)
    lq, lq_se = _moment_from_norms(v, q)
    rhs, rhs_se = C * lq, C * lq_se
    ratio = lp / lq
    ratio_se = ratio * math.hypot(lp_se / lp, lq_se / lq)
    ok = lp <= rhs + nsigma * math.hypot(lp_se, rhs_se)
    sharp = norm.kind == COORDINATE
    if sharp:
        ok = ok and abs(ratio - C) <= nsigma * ratio_se
    resolved = mc_resolvable(m, p, N) and mc_resolvable(m, q, N)
    return ComparisonReport(
        m, n, norm.label(), p, q, lp, lp_se, rhs, rhs_se, C, ratio, ratio_se, sharp, ok, resolved
    )
