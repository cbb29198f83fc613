"""Ideals (coordinate-symmetric down-closed sets) and their measure calculus.

Three representations are provided:

* :class:`StepIdeal2D` -- ``{(x, y): |y| <= f(|x|)}`` for a nonincreasing,
  right-continuous step function ``f``.
* :class:`BoxUnionIdeal` -- a finite union of symmetric boxes
  ``prod_j [-a_j, a_j]`` in ``R^n``.
* :class:`LqBallIdeal` -- ``{x: sum |x_j|**s <= r**s}``.

Lengths may be ``inf``; ``t * inf = inf`` and ``Psi(inf) = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np
from scipy import integrate

from .errors import DimensionLimit, DomainError
from .measures import MeasureSpec

INF = math.inf
MAX_BOX_DIM = 6


def _as_length(v: Any) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return INF
        raise DomainError(f"not a length: {v!r}")
    v = float(v)
    if math.isnan(v) or v < 0:
        raise DomainError(f"lengths must be nonnegative, got {v!r}")
    return v


def _json_length(v: float) -> Union[float, str]:
    return "inf" if math.isinf(v) else v


def _scale(v: float, t: float) -> float:
    return INF if math.isinf(v) else v * t


def _power(v: float, e: float) -> float:
    return INF if math.isinf(v) else v**e


# --------------------------------------------------------------------------
# 2-D step ideals
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class StepIdeal2D:
    """Ideal generated by a nonincreasing step boundary.

    ``heights[i]`` applies on ``[breakpoints[i-1], breakpoints[i])`` with
    ``breakpoints[-1] = 0``; the last height applies on ``[breakpoints[-1], inf)``.
    So ``len(heights) == len(breakpoints) + 1``.
    """

    breakpoints: tuple[float, ...]
    heights: tuple[float, ...]

    def __post_init__(self) -> None:
        xs = tuple(float(x) for x in self.breakpoints)
        hs = tuple(_as_length(h) for h in self.heights)
        if len(hs) != len(xs) + 1:
            raise DomainError("need exactly one more height than breakpoints")
        if any(not (x > 0 and math.isfinite(x)) for x in xs):
            raise DomainError("breakpoints must be positive and finite")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(b > a for a, b in zip(hs, hs[1:])):
            raise DomainError("heights must be nonincreasing")
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "heights", hs)

    @classmethod
    def strip(cls, width: float) -> "StepIdeal2D":
        """``{|x| <= width}``."""
        return cls((width,), (INF, 0.0))

    @classmethod
    def square(cls, side: float) -> "StepIdeal2D":
        """``[-side, side]**2``."""
        return cls((side,), (side, 0.0))

    @classmethod
    def from_boundary(cls, xs: Sequence[float], fs: Sequence[float]) -> "StepIdeal2D":
        """Step discretization of a sampled nonincreasing boundary.

        ``fs[i]`` is used on ``[xs[i-1], xs[i])``, i.e. the boundary is sampled
        at the right end of each cell, giving an inner approximation; the value
        past ``xs[-1]`` is 0.
        """
        hs = list(fs) + [0.0]
        return cls(tuple(xs), tuple(hs)).merged()

    def merged(self) -> "StepIdeal2D":
        """Drop breakpoints separating equal heights (same set)."""
        xs, hs = [], [self.heights[0]]
        for x, h in zip(self.breakpoints, self.heights[1:]):
            if h == hs[-1]:
                continue
            xs.append(x)
            hs.append(h)
        return StepIdeal2D(tuple(xs), tuple(hs))

    def segments(self) -> list[tuple[float, float, float]]:
        """``(lo, hi, height)`` for every segment of ``[0, inf)``."""
        edges = (0.0,) + self.breakpoints + (INF,)
        return [(edges[i], edges[i + 1], h) for i, h in enumerate(self.heights)]

    def strip_width(self) -> float | None:
        """Width ``w`` if this is the strip ``{|x| <= w}`` (or ``{|y| <= w}``)."""
        m = self.merged()
        if len(m.heights) == 2 and math.isinf(m.heights[0]) and m.heights[1] == 0.0:
            return m.breakpoints[0]
        if len(m.heights) == 1 and 0.0 < m.heights[0] < INF:
            return m.heights[0]
        return None

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        ax, ay = np.abs(pts[:, 0]), np.abs(pts[:, 1])
        idx = np.searchsorted(np.asarray(self.breakpoints), ax, side="right")
        return ay <= np.asarray(self.heights)[idx]

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "step2d",
            "breakpoints": list(self.breakpoints),
            "heights": [_json_length(h) for h in self.heights],
        }

    @property
    def dim(self) -> int:
        return 2


def measure_step2d(K: StepIdeal2D, m: MeasureSpec) -> float:
    """``(m x m)(K) = sum_i (Psi(x_i) - Psi(x_{i-1})) Psi(h_i)``."""
    total = 0.0
    prev = 0.0
    for _, hi, h in K.segments():
        cur = m.interval_mass(hi)
        total += (cur - prev) * m.interval_mass(h)
        prev = cur
    return total


# --------------------------------------------------------------------------
# unions of symmetric boxes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoxUnionIdeal:
    """Union of the boxes ``prod_j [-c_j, c_j]`` over the stored corners ``c``."""

    dim: int
    corners: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError("dim must be >= 1")
        cs = tuple(tuple(_as_length(v) for v in c) for c in self.corners)
        if any(len(c) != self.dim for c in cs):
            raise DomainError(f"every corner must have {self.dim} coordinates")
        object.__setattr__(self, "corners", cs)

    @classmethod
    def box(cls, corner: Sequence[float]) -> "BoxUnionIdeal":
        return cls(len(corner), (tuple(corner),))

    @classmethod
    def strip(cls, dim: int, width: float) -> "BoxUnionIdeal":
        return cls(dim, ((width,) + (INF,) * (dim - 1),))

    def pruned(self) -> "BoxUnionIdeal":
        """Remove corners dominated by another corner (same set)."""
        uniq = sorted(set(self.corners), reverse=True)
        keep: list[tuple[float, ...]] = []
        for c in uniq:
            if any(c != k and all(a <= b for a, b in zip(c, k)) for k in uniq):
                continue
            keep.append(c)
        return BoxUnionIdeal(self.dim, tuple(sorted(keep)))

    def is_empty(self) -> bool:
        return not any(all(v > 0 for v in c) for c in self.corners)

    def strip_width(self) -> float | None:
        """Width if the union is a single slab ``{|x_j| <= w}`` along one axis."""
        pr = self.pruned()
        if len(pr.corners) != 1:
            return None
        finite = [v for v in pr.corners[0] if not math.isinf(v)]
        if len(finite) == 1 and finite[0] > 0:
            return finite[0]
        return None

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.abs(np.atleast_2d(pts))
        inside = np.zeros(len(pts), dtype=bool)
        for c in self.corners:
            inside |= np.all(pts <= np.asarray(c), axis=1)
        return inside

    def to_dict(self) -> dict[str, Any]:
        return {
            "type": "boxes",
            "dim": self.dim,
            "corners": [[_json_length(v) for v in c] for c in self.corners],
        }


def measure_boxes(K: BoxUnionIdeal, m: MeasureSpec) -> float:
    """Exact product mass by grid disjointification.

    Each axis is cut at every corner coordinate; a grid cell lies in the union
    iff its upper corner is dominated by some box corner.
    """
    if K.dim > MAX_BOX_DIM:
        raise DimensionLimit(f"exact box calculus supports dim <= {MAX_BOX_DIM}, got {K.dim}")
    if not K.corners:
        return 0.0
    K = K.pruned()
    grids = [sorted({0.0} | {c[j] for c in K.corners}) for j in range(K.dim)]
    weights = []
    for g in grids:
        psi = [m.interval_mass(v) for v in g]
        weights.append(np.diff(psi))
    inside = np.zeros(tuple(len(g) - 1 for g in grids), dtype=bool)
    for c in K.corners:
        inside[tuple(slice(0, grids[j].index(c[j])) for j in range(K.dim))] = True
    cell = weights[0]
    for w in weights[1:]:
        cell = np.multiply.outer(cell, w)
    return float(np.sum(cell[inside]))


def section(K: BoxUnionIdeal, level: float) -> BoxUnionIdeal:
    """``K_level = {y in R^{n-1}: (y, level) in K}``."""
    if K.dim < 2:
        raise DomainError("section needs dim >= 2")
    lv = abs(level)
    return BoxUnionIdeal(K.dim - 1, tuple(c[:-1] for c in K.corners if c[-1] >= lv))


def _density_mass(m: MeasureSpec, lo: float, hi: float) -> float:
    # m({lo < |x| <= hi}) by quadrature of the density
    if hi <= lo:
        return 0.0
    val, _ = integrate.quad(m.density, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return 2.0 * val


def fubini_measure(K: BoxUnionIdeal, m: MeasureSpec) -> float:
    """``m^n(K) = int m^{n-1}(K_x) dm(x)`` with the integral done by quadrature.

    Sections are piecewise constant in ``|x|``, so each piece reduces to a
    quadrature of the density; no incomplete gamma evaluation is involved.
    """
    if not K.corners:
        return 0.0
    last = [c[-1] for c in K.corners]
    if K.dim == 1:
        top = max(last)
        return _density_mass(m, 0.0, top)
    levels = sorted({0.0} | set(last))
    total = 0.0
    for lo, hi in zip(levels, levels[1:]):
        inner = fubini_measure(section(K, hi), m)
        if inner > 0.0:
            total += inner * _density_mass(m, lo, hi)
    return total


# --------------------------------------------------------------------------
# l_s balls
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LqBallIdeal:
    """``{x in R^dim: sum |x_j|**s <= r**s}``; ``s = inf`` is the cube."""

    dim: int
    s: float
    r: float

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError("dim must be >= 1")
        if not self.s > 0:
            raise DomainError("s must be positive")
        if not (self.r > 0 and math.isfinite(self.r)):
            raise DomainError("r must be positive and finite")

    def section_radius(self, level: float) -> float:
        a = abs(level)
        if a > self.r:
            return -1.0
        if math.isinf(self.s):
            return self.r
        return max(self.r**self.s - a**self.s, 0.0) ** (1.0 / self.s)

    def strip_width(self) -> float | None:
        return self.r if self.dim == 1 else None

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.abs(np.atleast_2d(pts))
        if math.isinf(self.s):
            return np.max(pts, axis=1) <= self.r
        return np.sum((pts / self.r) ** self.s, axis=1) <= 1.0

    def to_dict(self) -> dict[str, Any]:
        return {"type": "lq_ball", "dim": self.dim, "s": _json_length(self.s), "r": self.r}


def _mass_integral(fn, m: MeasureSpec, upper: float, epsabs: float) -> float:
    # int_{-upper}^{upper} fn(|x|) dm(x) in the mass coordinate u = Psi(x)
    top = m.interval_mass(upper)
    if top == 0.0:
        return 0.0
    val, _ = integrate.quad(
        lambda u: fn(m.interval_mass_inv(u)), 0.0, top, epsabs=epsabs, epsrel=1e-12, limit=200
    )
    return val


def measure_lqball(K: LqBallIdeal, m: MeasureSpec) -> float:
    """Mass of an l_s ball by (nested) quadrature over sections."""
    if K.dim > 3:
        raise DimensionLimit("l_s ball quadrature supports dim <= 3")
    if K.dim == 1:
        return m.interval_mass(K.r)
    if math.isinf(K.s):
        return m.interval_mass(K.r) ** K.dim
    if K.dim == 2:
        return _mass_integral(lambda x: m.interval_mass(K.section_radius(x)), m, K.r, 1e-12)
    return _mass_integral(
        lambda x: measure_lqball(LqBallIdeal(2, K.s, K.section_radius(x)), m)
        if K.section_radius(x) > 0
        else 0.0,
        m,
        K.r,
        1e-10,
    )


# --------------------------------------------------------------------------
# generic operations
# --------------------------------------------------------------------------

Ideal = Union[StepIdeal2D, BoxUnionIdeal, LqBallIdeal]


def ideal_dim(K: Ideal) -> int:
    return K.dim


def dilate(K: Ideal, t: float) -> Ideal:
    """The set ``tK``."""
    if not t > 0:
        raise DomainError(f"dilation factor must be positive, got {t!r}")
    if isinstance(K, StepIdeal2D):
        return StepIdeal2D(tuple(x * t for x in K.breakpoints), tuple(_scale(h, t) for h in K.heights))
    if isinstance(K, BoxUnionIdeal):
        return BoxUnionIdeal(K.dim, tuple(tuple(_scale(v, t) for v in c) for c in K.corners))
    if isinstance(K, LqBallIdeal):
        return LqBallIdeal(K.dim, K.s, K.r * t)
    raise TypeError(f"not an ideal: {K!r}")


def tilde_transform(K: Ideal, alpha: float) -> Ideal:
    """Pull back through ``y -> y**alpha`` coordinatewise: every length ``c -> c**(1/alpha)``."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    e = 1.0 / alpha
    if isinstance(K, StepIdeal2D):
        return StepIdeal2D(tuple(x**e for x in K.breakpoints), tuple(_power(h, e) for h in K.heights))
    if isinstance(K, BoxUnionIdeal):
        return BoxUnionIdeal(K.dim, tuple(tuple(_power(v, e) for v in c) for c in K.corners))
    raise TypeError(f"tilde_transform supports step2d and boxes, got {type(K).__name__}")


def measure(K: Ideal, m: MeasureSpec) -> float:
    """Product-measure mass by the calculus appropriate to the representation."""
    if isinstance(K, StepIdeal2D):
        return measure_step2d(K, m)
    if isinstance(K, BoxUnionIdeal):
        return measure_boxes(K, m)
    if isinstance(K, LqBallIdeal):
        return measure_lqball(K, m)
    raise TypeError(f"not an ideal: {K!r}")


def mc_measure(
    K: Ideal, m: MeasureSpec, n: int | None = None, N: int = 100_000, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo estimate of ``m^n(K)`` and its binomial standard error."""
    n = K.dim if n is None else n
    if n != K.dim:
        raise DomainError(f"ideal has dim {K.dim}, sampler asked for {n}")
    if isinstance(K, BoxUnionIdeal) and K.is_empty():
        return 0.0, 0.0
    pts = m.sample(N * n, seed).reshape(N, n)
    frac = float(np.mean(K.contains(pts)))
    return frac, math.sqrt(frac * (1.0 - frac) / N)


def ideal_from_dict(data: dict[str, Any]) -> Ideal:
    kind = data.get("type")
    if kind == "step2d":
        return StepIdeal2D(tuple(data["breakpoints"]), tuple(data["heights"]))
    if kind == "boxes":
        return BoxUnionIdeal(int(data["dim"]), tuple(tuple(c) for c in data["corners"]))
    if kind == "lq_ball":
        return LqBallIdeal(int(data["dim"]), _as_length(data["s"]), float(data["r"]))
    raise DomainError(f"unknown ideal type {kind!r}")
