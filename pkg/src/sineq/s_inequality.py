"""S-inequality verification: bounds, sweeps, the dilation-derivative
criterion in the plane, the one-dimensional functional inequality on
nondecreasing step functions, and the power-transport check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from .core_fns import INF, inv_T, partial_moment_S, phi, tail_T
from .errors import DomainError, UnsupportedAssertion
from .ideals import (
    BoxUnionIdeal,
    Ideal,
    LqBallIdeal,
    StepIdeal2D,
    dilate,
    measure,
    measure_step2d,
    tilde_transform,
)
from .measures import MeasureSpec

DEFAULT_T_GRID = (1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0)
TOL_EXACT = 1e-8
TOL_QUADRATURE = 1e-6

ASSERT = "assert"
EXPLORE = "explore"


def s_bound(m: MeasureSpec, mass: float, t: float) -> float:
    """Mass of the dilated strip: ``Psi(t * Psi^{-1}(mass))``."""
    if not 0 < mass < 1:
        raise DomainError(f"mass must lie in (0, 1), got {mass!r}")
    if not t > 0:
        raise DomainError(f"t must be positive, got {t!r}")
    if t == 1.0:
        return mass
    return m.interval_mass(t * m.interval_mass_inv(mass))


# --------------------------------------------------------------------------
# verification reports
# --------------------------------------------------------------------------


@dataclass
class VerificationReport:
    measure: MeasureSpec
    ideal: dict[str, Any]
    mode: str
    tol: float
    records: list[dict[str, float]] = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def min_margin(self) -> float:
        return min((r["margin"] for r in self.records), default=INF)

    @property
    def passed(self) -> bool:
        return self.min_margin >= -self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "measure": self.measure.to_dict(),
            "ideal": self.ideal,
            "mode": self.mode,
            "tolerance": self.tol,
            "seed": self.seed,
            "records": self.records,
            "min_margin": self.min_margin,
            "pass": self.passed,
        }


def check_mode(m: MeasureSpec, mode: str) -> None:
    if mode not in (ASSERT, EXPLORE):
        raise DomainError(f"mode must be 'assert' or 'explore', got {mode!r}")
    if mode == ASSERT and not m.s_supported:
        raise UnsupportedAssertion(
            f"{UnsupportedAssertion.code}: {m.label()} is outside the range where the S-inequality is known"
        )


def verify_ideal(
    m: MeasureSpec,
    K: Ideal,
    t_grid: Iterable[float] = DEFAULT_T_GRID,
    tol: Optional[float] = None,
    mode: str = ASSERT,
    seed: Optional[int] = None,
) -> VerificationReport:
    """Compare ``m^n(tK)`` with the strip bound at every ``t`` of the grid."""
    check_mode(m, mode)
    t_grid = [float(t) for t in t_grid]
    if mode == ASSERT and any(t < 1 for t in t_grid):
        raise DomainError("t < 1 is only allowed in explore mode")
    if tol is None:
        tol = TOL_QUADRATURE if isinstance(K, LqBallIdeal) else TOL_EXACT
    report = VerificationReport(m, K.to_dict(), mode, tol, seed=seed)
    mass = measure(K, m)
    width = K.strip_width()
    for t in t_grid:
        lhs = measure(dilate(K, t), m)
        if width is not None:
            # K is its own comparison strip
            rhs = m.interval_mass(t * width)
        elif mass <= 0.0 or mass >= 1.0:
            rhs = mass
        else:
            rhs = s_bound(m, mass, t)
        report.records.append({"t": t, "lhs": lhs, "rhs": rhs, "margin": lhs - rhs})
    return report


# --------------------------------------------------------------------------
# the p-moment functional and the derivative at t = 1
# --------------------------------------------------------------------------


def mp_step2d(p: float, K: StepIdeal2D) -> float:
    """``M_p(K) = int_K (|x|**p + |y|**p) d nu_p^2`` in closed form."""
    total = 1.0 / p
    prev_T, prev_S = 1.0, 0.0
    for _, hi, h in K.segments():
        cur_T, cur_S = tail_T(p, hi), partial_moment_S(p, hi)
        total -= tail_T(p, h) * (cur_S - prev_S)
        total += partial_moment_S(p, h) * (prev_T - cur_T)
        prev_T, prev_S = cur_T, cur_S
    return total


def mp_strip(p: float, w: float) -> float:
    """``M_p`` of the strip ``{|x| <= w}``: ``1/p + S(w) - T(w)/p``."""
    return 1.0 / p + partial_moment_S(p, w) - tail_T(p, w) / p


def derivative_at_one(p: float, K: StepIdeal2D) -> float:
    """``d/dt nu_p^2(tK)`` at ``t = 1``, equal to ``2 nu_p^2(K) - p M_p(K)``."""
    return 2.0 * measure_step2d(K, MeasureSpec.nu(p)) - p * mp_step2d(p, K)


def mass_identity_residual(p: float, K: StepIdeal2D) -> float:
    """``1 - nu_p^2(K)`` minus ``int T(f) dmu_+``."""
    integral = 0.0
    prev = 1.0
    for _, hi, h in K.segments():
        cur = tail_T(p, hi)
        integral += (prev - cur) * tail_T(p, h)
        prev = cur
    return (1.0 - measure_step2d(K, MeasureSpec.nu(p))) - integral


# --------------------------------------------------------------------------
# nondecreasing step functions on the half-line
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneStep:
    """``g = 0`` on ``[0, a_1)`` and ``g = g_i`` on ``[a_i, a_{i+1})``."""

    jumps: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        a = tuple(float(x) for x in self.jumps)
        g = tuple(float(x) for x in self.values)
        if len(a) != len(g):
            raise DomainError("jumps and values must have equal length")
        if any(x < 0 for x in a) or any(y <= x for x, y in zip(a, a[1:])):
            raise DomainError("jumps must be nonnegative and strictly increasing")
        if any(not 0 <= v <= 1 for v in g) or any(y < x for x, y in zip(g, g[1:])):
            raise DomainError("values must be nondecreasing in [0, 1]")
        object.__setattr__(self, "jumps", a)
        object.__setattr__(self, "values", g)

    @classmethod
    def indicator(cls, a: float) -> "MonotoneStep":
        """``1_[a, inf)``; ``a = inf`` gives the zero function."""
        if math.isinf(a):
            return cls((), ())
        return cls((a,), (1.0,))

    def __call__(self, x: float) -> float:
        i = int(np.searchsorted(self.jumps, x, side="right"))
        return 0.0 if i == 0 else self.values[i - 1]

    def on_grid(self, grid: Sequence[float]) -> list[float]:
        """Values on ``[grid[j], grid[j+1])`` for a grid refining the jumps."""
        return [self(x) for x in grid]


def _segment_masses(p: float, grid: Sequence[float]) -> tuple[list[float], list[float]]:
    # mu_+ mass and p-th moment of [grid[j], grid[j+1]), grid[0] = 0, last cell to inf
    edges = list(grid) + [INF]
    T = [tail_T(p, x) for x in edges]
    S = [partial_moment_S(p, x) for x in edges]
    mass = [T[j] - T[j + 1] for j in range(len(grid))]
    mom = [S[j + 1] - S[j] for j in range(len(grid))]
    return mass, mom


def _grid(*gs: MonotoneStep) -> list[float]:
    return sorted({0.0}.union(*(g.jumps for g in gs)))


def _psi_phi(p: float, mass: Sequence[float], vals: Sequence[float]) -> float:
    mean = math.fsum(w * v for w, v in zip(mass, vals))
    mean = min(max(mean, 0.0), 1.0)
    return math.fsum(w * phi(p, v) for w, v in zip(mass, vals)) - phi(p, mean)


def psi_phi(p: float, g: MonotoneStep) -> float:
    """``int phi(g) dmu_+ - phi(int g dmu_+)``."""
    grid = _grid(g)
    mass, _ = _segment_masses(p, grid)
    return _psi_phi(p, mass, g.on_grid(grid))


def lemma1_gap(p: float, g: MonotoneStep) -> float:
    """Left side minus right side of

        int phi(g) dmu_+ - phi(int g dmu_+) <= int g(x) (x**p - 1/p) dmu_+(x),

    evaluated exactly on the step structure of ``g``. Nonpositive for ``p <= 1``.
    """
    grid = _grid(g)
    mass, mom = _segment_masses(p, grid)
    vals = g.on_grid(grid)
    lhs = _psi_phi(p, mass, vals)
    rhs = math.fsum(v * (s - w / p) for v, w, s in zip(vals, mass, mom))
    return lhs - rhs


def convexity_probe(
    p: float, g1: MonotoneStep, g2: MonotoneStep, lambdas: Iterable[float] = np.linspace(0, 1, 11)
) -> float:
    """Largest ``Psi_phi(l g1 + (1-l) g2) - l Psi_phi(g1) - (1-l) Psi_phi(g2)`` over ``lambdas``."""
    grid = _grid(g1, g2)
    mass, _ = _segment_masses(p, grid)
    v1, v2 = g1.on_grid(grid), g2.on_grid(grid)
    f1, f2 = _psi_phi(p, mass, v1), _psi_phi(p, mass, v2)
    worst = -INF
    for lam in lambdas:
        lam = float(lam)
        if lam == 1.0:
            mix, chord = v1, f1
        elif lam == 0.0:
            mix, chord = v2, f2
        else:
            mix = [b + lam * (a - b) for a, b in zip(v1, v2)]
            chord = f2 + lam * (f1 - f2)
        worst = max(worst, _psi_phi(p, mass, mix) - chord)
    return worst


# --------------------------------------------------------------------------
# power transport
# --------------------------------------------------------------------------


def transport_check(p: float, alpha: float, K: Ideal, t: float) -> float:
    """``|nu_p^n(tK) - mu_{p,alpha}^n(t**(1/alpha) K~)|`` with ``K~`` the pulled-back ideal."""
    lhs = measure(dilate(K, t), MeasureSpec.nu(p))
    rhs = measure(dilate(tilde_transform(K, alpha), t ** (1.0 / alpha)), MeasureSpec.mu(p, alpha))
    return abs(lhs - rhs)


# --------------------------------------------------------------------------
# random test objects
# --------------------------------------------------------------------------


def _quantiles(m: MeasureSpec, rng: np.random.Generator, count: int) -> list[float]:
    return [m.interval_mass_inv(float(u)) for u in rng.uniform(0.01, 0.99, size=count)]


def random_step_ideal(
    m: MeasureSpec, rng: np.random.Generator, max_breaks: int = 8, strip_prob: float = 0.1
) -> StepIdeal2D:
    """Random step ideal drawn from the measure's own quantiles."""
    if rng.random() < strip_prob:
        return StepIdeal2D.strip(_quantiles(m, rng, 1)[0])
    k = int(rng.integers(1, max_breaks + 1))
    xs = sorted(set(_quantiles(m, rng, k)))
    hs = sorted(_quantiles(m, rng, len(xs) + 1), reverse=True)
    if rng.random() < 0.3:
        hs[0] = INF
    if rng.random() < 0.3:
        hs[-1] = 0.0
    return StepIdeal2D(tuple(xs), tuple(hs))


def random_box_union(
    m: MeasureSpec, dim: int, rng: np.random.Generator, max_boxes: int = 6, inf_prob: float = 0.1
) -> BoxUnionIdeal:
    nbox = int(rng.integers(1, max_boxes + 1))
    corners = []
    for _ in range(nbox):
        c = [INF if rng.random() < inf_prob else x for x in _quantiles(m, rng, dim)]
        corners.append(tuple(c))
    return BoxUnionIdeal(dim, tuple(corners))


def random_monotone_step(p: float, rng: np.random.Generator, max_jumps: int = 8) -> MonotoneStep:
    r = int(rng.integers(1, max_jumps + 1))
    jumps = sorted({inv_T(p, float(u)) for u in rng.uniform(0.01, 0.99, size=r)})
    if rng.random() < 0.2:
        jumps[0] = 0.0
        jumps = sorted(set(jumps))
    vals = sorted(rng.uniform(0.0, 1.0, size=len(jumps)))
    if rng.random() < 0.3:
        vals[-1] = 1.0
    return MonotoneStep(tuple(jumps), tuple(float(v) for v in vals))
