"""Command line entry point: ``cee-rmab simulate | bounds | thresholds | validate``."""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import mpmath

from .baselines import RECONSTRUCTED, baseline_thresholds
from .bounds import bound_curve, bound_constants, corollary_constants, required_step_length
from .concentration import default_suite
from .errors import CeeError, ExportError, ValidationFailure
from .harness import bootstrap_regret_ci, estimate_regret, export, run_many
from .scenario import POLICY_NAMES, load_scenario

OUTDIR_ENV = "CEE_RMAB_OUTDIR"
log = logging.getLogger("cee_rmab")


def _out_dir(arg) -> Path:
    return Path(arg or os.environ.get(OUTDIR_ENV) or "results")


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 10)
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, int) and abs(v) >= 10 ** 15:
        return mpmath.nstr(mpmath.mpf(v), 10)
    return str(v)


def _table(rows, out):
    width = max((len(str(k)) for k, _ in rows), default=0)
    for k, v in rows:
        out.write(f"{str(k):<{width}}  {_fmt(v)}\n")


def _policies(arg: str) -> list:
    if arg == "all":
        return list(POLICY_NAMES)
    names = [p.strip() for p in arg.split(",") if p.strip()]
    bad = [p for p in names if p not in POLICY_NAMES]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown policy {bad or arg!r}; choose from {POLICY_NAMES} or 'all'")
    return names


def cmd_simulate(args, out):
    cfg = load_scenario(args.scenario).with_overrides(
        horizon=args.horizon, runs=args.runs, seed=args.seed, k=args.k)
    for w in cfg.warnings:
        log.warning(w)
    out_dir = _out_dir(args.out)
    traces = []
    for name in args.policy:
        log.info("simulating %s: %d runs x %d slots", name, cfg.runs, cfg.horizon)
        results = run_many(cfg.with_overrides(policy=name), name, workers=args.workers, record_steps=False)
        trace = estimate_regret(cfg, results)
        traces.append(trace)
        last = trace.n.size - 1
        if last >= 0:
            line = (f"{trace.label}: n={int(trace.n[last])} regret={trace.regret[last]:.6g} "
                    f"regret/ln n={trace.regret_over_ln_n[last]:.6g} variance={trace.reward_variance[last]:.6g}")
            if cfg.runs > 1 and trace.n[last] >= 2:
                lo, hi = bootstrap_regret_ci(trace, last, seed=cfg.seed)
                line += f" 95% CI(regret/ln n)=[{lo:.6g}, {hi:.6g}]"
            out.write(line + "\n")
    if any(p in ("rca", "rucb") for p in args.policy):
        out.write(f"note: RCA and RUCB are {RECONSTRUCTED}s\n")
    for path in export(traces, out_dir, plots=not args.no_plots):
        out.write(f"wrote {path}\n")


def cmd_bounds(args, out):
    cfg = load_scenario(args.scenario)
    if args.k is not None:
        cfg = cfg.with_overrides(k=args.k)
    truth = cfg.truth()
    out.write(f"required constant B (K=1): {required_step_length(truth, 1):.6f}\n")
    if truth.k > 1:
        out.write(f"required constant B (K={truth.k}): {required_step_length(truth):.6f}\n")
    out.write(f"C_P: {cfg.c_p:.12g}\n")
    out.write("\n# constants (scenario schedule)\n")
    _table(bound_constants(truth).as_rows(), out)
    out.write("\n# constants (constant schedule at the required B)\n")
    _table(corollary_constants(truth).as_rows(), out)
    out.write("\n")
    points = [p for p in cfg.sample_points if p >= 2]
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("n", "theorem_bound", "corollary_bound"))
    for n, th, co in bound_curve(truth, points):
        w.writerow((n, mpmath.nstr(th, 12), mpmath.nstr(co, 12)))


def cmd_thresholds(args, out):
    cfg = load_scenario(args.scenario)
    k = cfg.k if args.k is None else args.k
    L = cfg.policy_spec("rucb").params["L"]
    t = baseline_thresholds(cfg.arms, k, L)
    out.write(f"CEE required constant B: {required_step_length(cfg.truth(), k):.6f}\n")
    _table(t.as_rows(), out)


def cmd_validate(args, out):
    cfg = load_scenario(args.scenario)
    reports = default_suite(cfg.arms, seed=args.seed, replications=args.replications)
    rows = [r.row() for r in reports]
    out_dir = _out_dir(args.out)
    path = out_dir / "validation.csv"
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc}") from exc
    for r in reports:
        tag = "PASS" if r.passed else "FAIL"
        extra = " (extrapolated)" if r.extrapolated else ""
        out.write(f"{tag} {r.check:<26} {r.label:<40} empirical={r.empirical:.5g} "
                  f"bound={r.bound:.5g} sigma={r.mc_sigma:.2g}{extra}\n")
    out.write(f"wrote {path}\n")
    failed = [r for r in reports if not r.passed]
    if failed:
        raise ValidationFailure(f"{len(failed)} of {len(reports)} checks failed")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cee-rmab", description="Restless multi-armed bandit toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run seeded multi-run experiments and export CSV/SVG")
    s.add_argument("--scenario", default="S", help="scenario TOML file, or 'S' for the bundled one")
    s.add_argument("--policy", type=_policies, default=["cee"], help="cee, rca, rucb, all or a comma list")
    s.add_argument("--horizon", type=int)
    s.add_argument("--runs", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--k", type=int, help="override the number of arms played per slot")
    s.add_argument("--out", help=f"output directory (default ${OUTDIR_ENV} or ./results)")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--no-plots", action="store_true")
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bounds", help="print bound constants and the regret bound curve")
    b.add_argument("--scenario", default="S")
    b.add_argument("--k", type=int)
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("thresholds", help="print CEE/RCA/RUCB parameter thresholds")
    t.add_argument("--scenario", default="S")
    t.add_argument("--k", type=int)
    t.set_defaults(func=cmd_thresholds)

    v = sub.add_parser("validate", help="run the concentration-inequality suite")
    v.add_argument("--scenario", default="S")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--replications", type=int, default=100_000)
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args, sys.stdout)
    except CeeError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
