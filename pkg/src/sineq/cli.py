"""Command-line front end.

Exit codes: 0 success, 1 a check failed beyond tolerance, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import io as sio
from .core_fns import phi_stack
from .errors import DimensionLimit, DomainError, Infeasible, UnsupportedAssertion
from .extremal_search import GAP_TOL, SearchConfig, search_min_dilation
from .ideals import ideal_from_dict
from .measures import MeasureSpec
from .moments import UnconditionalNorm, verify_comparison
from .s_inequality import (
    ASSERT,
    EXPLORE,
    check_mode,
    lemma1_gap,
    random_monotone_step,
    s_bound,
    verify_ideal,
)
from .suites import SUITES, CRITERIA, TOL_LEMMA1

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
THREADS_ENV = "SINEQ_THREADS"

VERIFY_COLUMNS = ("family", "params", "ideal_id", "t", "lhs", "rhs", "margin")
BOUNDS_COLUMNS = ("family", "params", "mass", "t", "bound")
MOMENT_COLUMNS = ("family", "params", "norm", "n", "p", "q", "lhs", "rhs", "constant", "slack", "stderr", "resolved")
TRACE_COLUMNS = ("restart", "iteration", "objective", "mass_residual", "accepted")
PHI_COLUMNS = ("p", "v", "value", "d1", "d2", "inv_d2_d1", "inv_d2_d2", "f_point")
LEMMA1_COLUMNS = ("p", "index", "jumps", "values", "gap")


def parse_grid(text: str) -> list[float]:
    """``"1:4:0.25"`` (inclusive range) or ``"1,1.5,2"``."""
    text = text.strip()
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise DomainError(f"bad range {text!r}; expected start:stop:step")
        start, stop, step = parts
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 12) for i in range(n + 1)]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise DomainError(f"bad list {text!r}") from exc


def parse_norm(text: str) -> UnconditionalNorm:
    kind, _, arg = text.partition(":")
    if kind == "ls":
        return UnconditionalNorm.ls(math.inf if arg in ("inf", "") else float(arg))
    if kind == "coordinate":
        return UnconditionalNorm.coordinate(int(arg or 0))
    if kind == "wmax":
        return UnconditionalNorm.weighted_max([float(w) for w in arg.split(",")])
    raise DomainError(f"unknown norm {text!r}; use ls:S, coordinate:J or wmax:W1,W2,...")


def resolve_threads(flag: int) -> int:
    env = os.environ.get(THREADS_ENV)
    n = int(env) if env else flag
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def _write_timing(out: Path, started: float, extra: dict[str, Any] | None = None) -> None:
    info = {
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "wall_clock_s": time.perf_counter() - started,
    }
    info.update(extra or {})
    sio.write_text(out.with_name(out.name + ".timing.json"), sio.dumps(info))


def _measure_arg(value: str) -> tuple[MeasureSpec, str]:
    data, text = sio.load_json_arg(value)
    return MeasureSpec.from_dict(data), text


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    m, mtext = _measure_arg(args.measure)
    idata, itext = sio.load_json_arg(args.ideal)
    K = ideal_from_dict(idata)
    if args.dim is not None and args.dim != K.dim:
        raise DomainError(f"--dim {args.dim} does not match ideal dimension {K.dim}")
    t_grid = parse_grid(args.t)
    report = verify_ideal(m, K, t_grid, tol=args.tol, mode=args.mode, seed=args.seed)
    manifest = sio.make_manifest(
        "verify",
        {"measure": m.to_dict(), "ideal": K.to_dict(), "t": t_grid, "mode": args.mode, "tol": report.tol},
        args.seed,
        {"measure": mtext, "ideal": itext},
    )
    ideal_id = sio.digest(json.dumps(K.to_dict(), sort_keys=True))[:12]
    rows = [{"family": m.family, "params": m.label(), "ideal_id": ideal_id, **r} for r in report.records]
    out = Path(args.out)
    sio.write_text(out, sio.dumps({"manifest": manifest, "report": report.to_dict()}))
    sio.write_text(out.with_suffix(".csv"), sio.csv_text(VERIFY_COLUMNS, rows, manifest))
    _write_timing(out, started)
    status = "PASS" if report.passed else "FAIL"
    print(f"{status} {m.label()} min_margin={report.min_margin:.3e} tol={report.tol:g} mode={args.mode}")
    if args.mode == EXPLORE:
        return EXIT_OK
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_suite(args: argparse.Namespace) -> int:
    if args.name not in SUITES:
        raise DomainError(f"unknown suite {args.name!r}; choose from {sorted(SUITES)}")
    out_dir = Path(args.out)
    started = time.perf_counter()
    results, timings = [], {}
    for name in SUITES[args.name]:
        t0 = time.perf_counter()
        res = CRITERIA[name](seed=args.seed)
        timings[name] = time.perf_counter() - t0
        print(res.line())
        results.append(res)
    manifest = sio.make_manifest("suite", {"name": args.name}, args.seed, {})
    summary = {
        "manifest": manifest,
        "checks": [r.to_dict() for r in results],
        "pass": all(r.passed for r in results),
    }
    out = out_dir / f"suite_{args.name}.json"
    sio.write_text(out, sio.dumps(summary))
    _write_timing(out, started, {"checks_s": timings})
    return EXIT_OK if summary["pass"] else EXIT_FAIL


def cmd_bounds(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    m, mtext = _measure_arg(args.measure)
    masses = parse_grid(args.mass)
    ts = parse_grid(args.t)
    if any(not 0 < x < 1 for x in masses):
        raise DomainError("masses must lie in (0, 1)")
    if any(t < 1 for t in ts):
        raise DomainError("t must be >= 1")
    rows = [
        {"family": m.family, "params": m.label(), "mass": x, "t": t, "bound": s_bound(m, x, t)}
        for x in masses
        for t in ts
    ]
    manifest = sio.make_manifest("bounds", {"measure": m.to_dict(), "mass": masses, "t": ts}, None, {"measure": mtext})
    out = Path(args.out)
    sio.write_text(out, sio.csv_text(BOUNDS_COLUMNS, rows, manifest))
    _write_timing(out, started)
    print(f"wrote {len(rows)} bounds to {out}")
    return EXIT_OK


def cmd_lemma1(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    mode = ASSERT if args.p <= 1 else EXPLORE
    rng = np.random.default_rng(args.seed)
    rows = []
    for i in range(args.count):
        g = random_monotone_step(args.p, rng)
        rows.append(
            {
                "p": args.p,
                "index": i,
                "jumps": " ".join(sio.fmt_float(a) for a in g.jumps),
                "values": " ".join(sio.fmt_float(v) for v in g.values),
                "gap": lemma1_gap(args.p, g),
            }
        )
    worst = max(r["gap"] for r in rows)
    manifest = sio.make_manifest("lemma1", {"p": args.p, "count": args.count, "mode": mode}, args.seed, {})
    out = Path(args.out)
    sio.write_text(out, sio.csv_text(LEMMA1_COLUMNS, rows, manifest))
    _write_timing(out, started)
    ok = worst <= TOL_LEMMA1
    print(f"{'PASS' if ok else 'FAIL'} p={args.p:g} max_gap={worst:.3e} mode={mode}")
    return EXIT_OK if ok or mode == EXPLORE else EXIT_FAIL


def cmd_phi(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    vs = parse_grid(args.v) if args.v else list(np.linspace(0.001, 0.999, args.grid))
    rows = []
    for v in vs:
        st = phi_stack(args.p, float(v))
        rows.append({"p": args.p, "v": float(v), **st.__dict__})
    manifest = sio.make_manifest("phi", {"p": args.p, "v": [float(v) for v in vs]}, None, {})
    out = Path(args.out)
    sio.write_text(out, sio.csv_text(PHI_COLUMNS, rows, manifest))
    _write_timing(out, started)
    worst = max(r["inv_d2_d2"] for r in rows)
    print(f"p={args.p:g} min phi''={min(r['d2'] for r in rows):.3e} max (1/phi'')''={worst:.3e}")
    return EXIT_OK


def cmd_moments(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    m, mtext = _measure_arg(args.measure)
    norm = parse_norm(args.norm)
    rep = verify_comparison(m, args.n, norm, args.p, args.q, N=args.N, seed=args.seed, mode=args.mode)
    manifest = sio.make_manifest(
        "moments",
        {"measure": m.to_dict(), "norm": norm.label(), "n": args.n, "p": args.p, "q": args.q, "N": args.N, "mode": args.mode},
        args.seed,
        {"measure": mtext},
    )
    out = Path(args.out)
    sio.write_text(out, sio.csv_text(MOMENT_COLUMNS, [rep.row()], manifest))
    _write_timing(out, started)
    verdict = "UNRESOLVED" if not rep.resolved else ("PASS" if rep.passed else "FAIL")
    print(f"{verdict} lhs={rep.lhs:.6g} rhs={rep.rhs:.6g} C={rep.constant:.6g} stderr={rep.stderr:.3g}")
    if args.mode == EXPLORE or not rep.resolved:
        return EXIT_OK
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_search(args: argparse.Namespace) -> int:
    started = time.perf_counter()
    m, mtext = _measure_arg(args.measure)
    check_mode(m, args.mode)
    cfg = SearchConfig(
        m, args.mass, args.t, k=args.k, budget=args.budget, restarts=args.restarts, seed=args.seed, mode=args.mode
    )
    res = search_min_dilation(cfg, workers=resolve_threads(args.threads))
    params = {k: v for k, v in cfg.__dict__.items() if k != "measure"}
    params["measure"] = m.to_dict()
    manifest = sio.make_manifest("search", params, args.seed, {"measure": mtext})
    out = Path(args.out)
    sio.write_text(out, sio.dumps({"manifest": manifest, "result": res.to_dict()}))
    trace = [{"restart": res.best_restart, **row} for row in res.trace]
    sio.write_text(out.with_suffix(".trace.csv"), sio.csv_text(TRACE_COLUMNS, trace, manifest))
    _write_timing(out, started)
    ok = res.gap >= -GAP_TOL
    print(f"{'PASS' if ok else 'FAIL'} objective={res.objective:.12g} strip={res.strip_objective:.12g} gap={res.gap:.3e} status={res.status}")
    if args.mode == EXPLORE:
        return EXIT_OK
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sineq", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, seed: bool = True) -> None:
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--threads", type=int, default=1, help=f"worker count, 0 = auto (env {THREADS_ENV} overrides)")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="check the S-inequality bound for one ideal")
    p.add_argument("--measure", required=True, help="measure JSON (inline or file)")
    p.add_argument("--ideal", required=True, help="ideal JSON (inline or file)")
    p.add_argument("--t", default="1,1.1,1.25,1.5,2,3,4,8", help='"start:stop:step" or comma list')
    p.add_argument("--dim", type=int)
    p.add_argument("--mode", choices=(ASSERT, EXPLORE), default=ASSERT)
    p.add_argument("--tol", type=float)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("suite", help="run a named verification suite")
    p.add_argument("name", help="|".join(SUITES))
    common(p)
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("bounds", help="tabulate strip bounds Psi(t Psi^-1(mass))")
    p.add_argument("--measure", required=True)
    p.add_argument("--mass", required=True)
    p.add_argument("--t", required=True)
    common(p, seed=False)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("lemma1", help="functional inequality on random step functions")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--count", type=int, default=1000)
    common(p)
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("phi", help="tabulate phi and its derivative stack")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--v", help="explicit v values instead of a uniform grid")
    common(p, seed=False)
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("moments", help="moment comparison for an unconditional norm")
    p.add_argument("--measure", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--norm", default="ls:2", help="ls:S | coordinate:J | wmax:W1,W2,...")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--N", type=int, default=100_000)
    p.add_argument("--mode", choices=(ASSERT, EXPLORE), default=ASSERT)
    common(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("search", help="search for step ideals beating the strip")
    p.add_argument("--measure", required=True)
    p.add_argument("--mass", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--mode", choices=(ASSERT, EXPLORE), default=ASSERT)
    common(p)
    p.set_defaults(func=cmd_search)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except (UnsupportedAssertion, Infeasible) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, DimensionLimit, KeyError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
