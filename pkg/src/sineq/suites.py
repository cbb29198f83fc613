"""Named verification suites. Each check returns a :class:`CheckResult`.

Tolerances are module constants so the pytest acceptance module and the
``suite`` command share them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .core_fns import phi_stack
from .extremal_search import GAP_TOL, SearchConfig, search_min_dilation
from .ideals import BoxUnionIdeal, StepIdeal2D, dilate, fubini_measure, mc_measure, measure_boxes, measure_step2d
from .measures import MeasureSpec
from .moments import UnconditionalNorm, optimal_constant, verify_comparison
from .s_inequality import (
    convexity_probe,
    derivative_at_one,
    lemma1_gap,
    MonotoneStep,
    mp_step2d,
    mp_strip,
    random_box_union,
    random_monotone_step,
    random_step_ideal,
    s_bound,
    transport_check,
    verify_ideal,
)

SUPPORTED_P = (0.25, 0.5, 0.75, 1.0)
SWEEP_FAMILIES = (
    [MeasureSpec.nu(p) for p in SUPPORTED_P]
    + [MeasureSpec.weibull(a) for a in (0.5, 1.0, 2.0, 4.0)]
    + [MeasureSpec.gamma(q) for q in (1.0, 2.0, 5.0)]
)
SEARCH_FAMILIES = (MeasureSpec.nu(0.5), MeasureSpec.nu(1.0), MeasureSpec.weibull(2.0), MeasureSpec.gamma(2.0))
SWEEP_T = (1.0, 1.25, 2.0, 4.0)

TOL_FIXTURE = 1e-9
TOL_SIGN = 1e-9
TOL_LEMMA1 = 1e-10
TOL_CONVEX = 1e-10
TOL_FD_REL = 1e-5
TOL_MP = 1e-10
TOL_SWEEP = 1e-8
TOL_TRANSPORT = 1e-9
TOL_FUBINI = 1e-7
TOL_C21 = 1e-12
NSIGMA = 4.0


@dataclass
class CheckResult:
    name: str
    passed: bool
    metrics: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.metrics.items())
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {shown}"

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "pass": self.passed, "metrics": self.metrics}


def _fmt(v: Any) -> str:
    return f"{v:.3g}" if isinstance(v, float) else str(v)


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng([seed, tag])


# 1 -------------------------------------------------------------------------


def check_closed_form(seed: int = 0) -> CheckResult:
    m = MeasureSpec.nu(1.0)
    L = math.log(2.0)
    sq = StepIdeal2D.square(L)
    w = m.interval_mass_inv(0.25)
    got = {
        "square_mass": measure_step2d(sq, m),
        "strip_width": w,
        "square_t2": measure_step2d(dilate(sq, 2.0), m),
        "bound_t2": s_bound(m, 0.25, 2.0),
    }
    want = {"square_mass": 0.25, "strip_width": -math.log(0.75), "square_t2": 0.5625, "bound_t2": 0.4375}
    err = max(abs(got[k] - want[k]) for k in want)
    return CheckResult("closed_form_fixture", err <= TOL_FIXTURE, {"max_err": err, **got})


# 2 -------------------------------------------------------------------------


def check_lemma2_signs(seed: int = 0, npts: int = 1000) -> CheckResult:
    vs = np.linspace(0.001, 0.999, npts)
    min_d2 = math.inf
    max_inv = -math.inf
    for p in SUPPORTED_P:
        for v in vs:
            st = phi_stack(p, float(v))
            min_d2 = min(min_d2, st.d2)
            max_inv = max(max_inv, st.inv_d2_d2)
    flip = min(phi_stack(1.5, float(v)).inv_d2_d2 for v in vs)
    ok = min_d2 > 0 and max_inv <= TOL_SIGN and flip > 0
    return CheckResult(
        "lemma2_signs",
        ok,
        {"min_phi2": min_d2, "max_inv_phi2_dd": max_inv, "p1.5_min_inv_phi2_dd": flip},
    )


# 3 -------------------------------------------------------------------------


def check_lemma1(seed: int = 0, count: int = 1000) -> CheckResult:
    worst = -math.inf
    worst_ind = 0.0
    for i, p in enumerate(SUPPORTED_P):
        rng = _rng(seed, 300 + i)
        for _ in range(count):
            worst = max(worst, lemma1_gap(p, random_monotone_step(p, rng)))
        for a in [0.0, math.inf] + list(rng.exponential(2.0, size=50)):
            worst_ind = max(worst_ind, abs(lemma1_gap(p, MonotoneStep.indicator(float(a)))))
    ok = worst <= TOL_LEMMA1 and worst_ind <= TOL_LEMMA1
    return CheckResult("lemma1_gap", ok, {"max_gap": worst, "max_abs_indicator_gap": worst_ind})


# 4 -------------------------------------------------------------------------


def check_convexity(seed: int = 0, count: int = 500) -> CheckResult:
    worst = -math.inf
    for i, p in enumerate(SUPPORTED_P):
        rng = _rng(seed, 400 + i)
        for _ in range(count):
            g1, g2 = random_monotone_step(p, rng), random_monotone_step(p, rng)
            lam = float(rng.uniform())
            worst = max(worst, convexity_probe(p, g1, g2, [lam]))
    return CheckResult("convexity_psi_phi", worst <= TOL_CONVEX, {"max_violation": worst})


# 5 -------------------------------------------------------------------------


def check_derivative(seed: int = 0, count: int = 100, h: float = 1e-4) -> CheckResult:
    worst_rel = 0.0
    worst_mp = -math.inf
    rng = _rng(seed, 500)
    for j in range(count):
        p = SUPPORTED_P[j % len(SUPPORTED_P)]
        nu = MeasureSpec.nu(p)
        K = random_step_ideal(nu, rng)
        d = derivative_at_one(p, K)
        fd = (measure_step2d(dilate(K, 1 + h), nu) - measure_step2d(dilate(K, 1 - h), nu)) / (2 * h)
        worst_rel = max(worst_rel, abs(d - fd) / max(abs(fd), 1e-300))
        mass = measure_step2d(K, nu)
        if 0 < mass < 1:
            w = nu.interval_mass_inv(mass)
            worst_mp = max(worst_mp, mp_step2d(p, K) - mp_strip(p, w))
    ok = worst_rel <= TOL_FD_REL and worst_mp <= TOL_MP
    return CheckResult("derivative_criterion", ok, {"max_rel_fd_err": worst_rel, "max_mp_minus_strip": worst_mp})


# 6 -------------------------------------------------------------------------


def check_sweep(seed: int = 0, n_step: int = 200, n_box: int = 50) -> CheckResult:
    worst = math.inf
    fails = 0
    total = 0
    for i, m in enumerate(SWEEP_FAMILIES):
        rng = _rng(seed, 600 + i)
        ideals: list = [random_step_ideal(m, rng) for _ in range(n_step)]
        ideals += [random_box_union(m, 3 + (j % 2), rng) for j in range(n_box)]
        for K in ideals:
            rep = verify_ideal(m, K, SWEEP_T, tol=TOL_SWEEP)
            worst = min(worst, rep.min_margin)
            fails += not rep.passed
            total += 1
    return CheckResult("s_inequality_sweep", fails == 0, {"ideals": total, "failures": fails, "min_margin": worst})


# 7 -------------------------------------------------------------------------


def check_transport(seed: int = 0, count: int = 100) -> CheckResult:
    rng = _rng(seed, 700)
    worst = 0.0
    cases = {"weibull": 0, "gamma": 0, "general": 0}
    for j in range(count):
        kind = ("weibull", "gamma", "general")[j % 3]
        if kind == "weibull":
            p, alpha = 1.0, float(rng.choice([0.5, 1.0, 2.0, 4.0]))
        elif kind == "gamma":
            q = float(rng.choice([1.0, 2.0, 5.0]))
            p, alpha = 1.0 / q, q
        else:
            p, alpha = float(rng.choice(SUPPORTED_P)), float(rng.uniform(0.3, 3.0))
        cases[kind] += 1
        nu = MeasureSpec.nu(p)
        K = random_step_ideal(nu, rng) if j % 2 == 0 else random_box_union(nu, 3, rng)
        t = float(rng.uniform(1.0, 4.0))
        worst = max(worst, transport_check(p, alpha, K, t))
    return CheckResult("transport_consistency", worst <= TOL_TRANSPORT, {"max_residual": worst, **cases})


# 8 -------------------------------------------------------------------------

MOMENT_NORMS = (UnconditionalNorm.coordinate(0), UnconditionalNorm.ls(1), UnconditionalNorm.ls(2), UnconditionalNorm.ls(math.inf))
MOMENT_PQ = ((2.0, 1.0), (4.0, 2.0), (3.0, 1.5))


def check_moments(seed: int = 0, N: int = 100_000) -> CheckResult:
    c21 = optimal_constant(MeasureSpec.nu(1.0), 2.0, 1.0)
    c_err = abs(c21 - math.sqrt(2.0))
    fails = resolved = unresolved = 0
    min_slack = math.inf
    sharp_z = 0.0
    k = 0
    for m in SWEEP_FAMILIES:
        for p, q in MOMENT_PQ:
            for n in (2, 3):
                for norm in MOMENT_NORMS:
                    k += 1
                    rep = verify_comparison(m, n, norm, p, q, N=N, seed=seed * 100_003 + k, nsigma=NSIGMA)
                    if not rep.resolved:
                        unresolved += 1
                        continue
                    resolved += 1
                    fails += not rep.passed
                    min_slack = min(min_slack, rep.slack / rep.stderr if rep.stderr > 0 else math.inf)
                    if rep.sharp_checked:
                        sharp_z = max(sharp_z, abs(rep.ratio - rep.constant) / rep.ratio_se)
    ok = fails == 0 and c_err <= TOL_C21
    return CheckResult(
        "moment_comparison",
        ok,
        {
            "C21_nu1_err": c_err,
            "resolved": resolved,
            "unresolved": unresolved,
            "failures": fails,
            "max_sharp_z": sharp_z,
            "min_slack_sigma": min_slack,
        },
    )


# 9 -------------------------------------------------------------------------


def check_oracles(seed: int = 0, count: int = 50, N: int = 100_000, n_box: int = 20) -> CheckResult:
    worst_z = 0.0
    mc_fail = 0
    worst_fub = 0.0
    for i, m in enumerate(SWEEP_FAMILIES):
        rng = _rng(seed, 900 + i)
        for j in range(count):
            K = random_step_ideal(m, rng)
            exact = measure_step2d(K, m)
            est, se = mc_measure(K, m, N=N, seed=int(rng.integers(2**62)))
            z = abs(est - exact) / se if se > 0 else (0.0 if est == exact else math.inf)
            worst_z = max(worst_z, z)
            mc_fail += z > NSIGMA
        for j in range(n_box):
            K = random_box_union(m, 2 + (j % 3), rng)
            worst_fub = max(worst_fub, abs(measure_boxes(K, m) - fubini_measure(K, m)))
    ok = mc_fail == 0 and worst_fub <= TOL_FUBINI
    return CheckResult(
        "oracle_agreement", ok, {"max_mc_z": worst_z, "mc_failures": mc_fail, "max_fubini_err": worst_fub}
    )


# 10 ------------------------------------------------------------------------

SEARCH_MASSES = (0.1, 0.25, 0.5, 0.9)
SEARCH_T = (1.25, 2.0, 4.0)
SEARCH_K = (2, 5, 8)


def check_search(seed: int = 0, restarts: int = 20, budget: int = 400) -> CheckResult:
    worst = math.inf
    runs = 0
    for m in SEARCH_FAMILIES:
        for mass in SEARCH_MASSES:
            for t in SEARCH_T:
                for k in SEARCH_K:
                    cfg = SearchConfig(m, mass, t, k=k, restarts=restarts, budget=budget, seed=seed)
                    worst = min(worst, search_min_dilation(cfg).gap)
                    runs += 1
    return CheckResult("extremal_search", worst >= -GAP_TOL, {"searches": runs, "min_gap": worst})


CRITERIA: dict[str, Callable[..., CheckResult]] = {
    "closed_form_fixture": check_closed_form,
    "lemma2_signs": check_lemma2_signs,
    "lemma1_gap": check_lemma1,
    "convexity_psi_phi": check_convexity,
    "derivative_criterion": check_derivative,
    "s_inequality_sweep": check_sweep,
    "transport_consistency": check_transport,
    "moment_comparison": check_moments,
    "oracle_agreement": check_oracles,
    "extremal_search": check_search,
}

SUITES: dict[str, tuple[str, ...]] = {
    "core": (
        "closed_form_fixture",
        "derivative_criterion",
        "s_inequality_sweep",
        "transport_consistency",
        "oracle_agreement",
    ),
    "lemmas": ("lemma2_signs", "lemma1_gap", "convexity_psi_phi"),
    "moments": ("moment_comparison",),
    "search": ("extremal_search",),
}


def run_suite(name: str, seed: int = 0) -> list[CheckResult]:
    if name not in SUITES:
        raise KeyError(name)
    return [CRITERIA[c](seed=seed) for c in SUITES[name]]
