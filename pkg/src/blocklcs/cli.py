"""Command-line experiment runner.

Subcommands: generate, verify, drift, ladder, scan, calibrate-domain,
report.  Shared flags (--l --n --seed --reps --epsilon --c2 --c
--engine --out --cap ...) override the optional key=value config file,
which overrides built-in defaults.  Every command first writes a
manifest into the output directory, then its data files (CSV/JSON),
then finalizes the manifest; all writes are atomic.  Exit status is 0
iff every requested check passed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import calibrate_c, linear_fit, make_domain, min_prob_over_D, ratio_check, variance_scan
from .analysis import admissible_triples
from .blocks import ModelParams, TzrStats, build_string, compute_tzr, joint_prob_tzr
from .errors import BlockLcsError, TooLarge
from .ladder import build_ladder, martingale_diagnostics, repair_ladder, slope_event_check
from .modify import drift_exact, drift_sampled
from .runio import RunConfig, finish_manifest, start_manifest, write_csv, write_json
from .seeding import child_seed
from .verify import CHECKS

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="key = value config file")
    common.add_argument("--l", type=int, default=None, help="block scale parameter")
    common.add_argument("--n", type=int, default=None, help="string length")
    common.add_argument("--seed", type=int, default=None, help="64-bit master seed")
    common.add_argument("--reps", type=int, default=None, help="number of replicates")
    common.add_argument("--epsilon", type=float, default=None, help="drift threshold")
    common.add_argument("--c2", type=float, default=None,
                        help="slope-window scale (default 80/epsilon^2)")
    common.add_argument("--c", type=float, default=None, help="domain half-width scale")
    common.add_argument("--engine", default=None,
                        choices=("reference", "bitparallel", "none"))
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--cap", type=int, default=None,
                        help="exact-drift enumeration cap")
    common.add_argument("--drift-k", type=int, default=None,
                        help="draws per sampled drift estimate")

    parser = argparse.ArgumentParser(
        prog="blocklcs",
        description="Block-string LCS fluctuation lab",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("generate", parents=[common],
                   help="write replicate strings and their (t, z, r) stats")
    p_verify = sub.add_parser("verify", parents=[common],
                              help="run a named verification suite")
    p_verify.add_argument("--which", required=True, choices=sorted(CHECKS))
    sub.add_parser("drift", parents=[common],
                   help="drift estimates over fresh replicate pairs")
    p_ladder = sub.add_parser("ladder", parents=[common],
                              help="build one ladder and its diagnostics")
    p_ladder.add_argument("--t", type=int, default=None,
                          help="block count (default: round(n/l))")
    p_ladder.add_argument("--r", type=int, default=0, help="rest length")
    p_scan = sub.add_parser("scan", parents=[common],
                            help="variance scan over an n-grid")
    p_scan.add_argument("--ns", default="1024,2048,4096,8192",
                        help="comma-separated n values")
    p_cal = sub.add_parser("calibrate-domain", parents=[common],
                           help="smallest c with target (T, Z) coverage")
    p_cal.add_argument("--target", type=float, default=0.9)
    sub.add_parser("report", parents=[common],
                   help="collate manifests and verify reports in --out")
    return parser


_CONFIG_KEYS = ("l", "n", "seed", "reps", "epsilon", "c2", "c", "engine",
                "out", "cap", "drift_k")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS}
    return RunConfig.from_sources(args.config, overrides)


def _require_lcs_engine(cfg: RunConfig) -> str:
    if cfg.engine == "none":
        raise ValueError("this command needs an LCS engine; use --engine "
                         "reference or bitparallel")
    return cfg.engine


def cmd_generate(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    man = start_manifest("generate", cfg, {"master": cfg.seed}, out)
    params = ModelParams(cfg.l, cfg.n)
    outputs = [man.path(out).name]
    rows = []
    for rep in range(cfg.reps):
        for which in ("x", "y"):
            s = build_string(params, child_seed(cfg.seed, "generate", rep, which))
            name = f"{which}_{rep:04d}.txt"
            (out / name).write_text(s.to_string() + "\n")
            outputs.append(name)
            stats = compute_tzr(s)
            rows.append((rep, which, stats.t, stats.z, stats.r))
    if cfg.reps > 0:
        write_csv(out / "tzr.csv", ["replicate", "which", "t", "z", "r"], rows)
        outputs.append("tzr.csv")
    finish_manifest(man, out, outputs)
    return 0


def cmd_verify(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    man = start_manifest(f"verify-{args.which}", cfg, {"master": cfg.seed}, out)
    report = CHECKS[args.which](child_seed(cfg.seed, "verify", args.which), args.reps)
    name = f"verify_{args.which}.json"
    write_json(out / name, report)
    finish_manifest(man, out, [man.path(out).name, name])
    status = "PASS" if report["passed"] else "FAIL"
    print(f"{status} {args.which} ({len(report['cases'])} cases)")
    return 0 if report["passed"] else 1


def cmd_drift(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    engine = _require_lcs_engine(cfg)
    man = start_manifest("drift", cfg, {"master": cfg.seed}, out)
    params = ModelParams(cfg.l, cfg.n)
    rows = []
    means = []
    for rep in range(cfg.reps):
        x = build_string(params, child_seed(cfg.seed, "drift", rep, "x"))
        y = build_string(params, child_seed(cfg.seed, "drift", rep, "y"))
        counts = x.counts()
        if counts.n1 == 0 or counts.n3 == 0:
            rows.append((rep, counts.n1, counts.n3, float("nan"), float("nan"), False))
            continue
        try:
            est = drift_exact(x, y.to_array(), engine=engine, cap=cfg.cap)
        except TooLarge:
            est = drift_sampled(x, y.to_array(), cfg.drift_k,
                                child_seed(cfg.seed, "drift", rep, "mc"), engine=engine)
        rows.append((rep, counts.n1, counts.n3, est.mean, est.stderr, est.exact))
        means.append(est.mean)
    write_csv(out / "drift.csv",
              ["replicate", "n1", "n3", "mean", "stderr", "exact"], rows)
    summary = {
        "replicates": cfg.reps,
        "valid": len(means),
        "epsilon": cfg.epsilon,
        "fraction_ge_epsilon": (
            sum(1 for m in means if m >= cfg.epsilon) / len(means) if means else None
        ),
    }
    write_json(out / "drift_summary.json", summary)
    finish_manifest(man, out, [man.path(out).name, "drift.csv", "drift_summary.json"])
    return 0


def cmd_ladder(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    engine = _require_lcs_engine(cfg)
    man = start_manifest("ladder", cfg, {"master": cfg.seed}, out)
    params = ModelParams(cfg.l, cfg.n)
    t = args.t if args.t is not None else round(cfg.n / cfg.l)
    r = args.r
    domain = make_domain(params, cfg.c)
    y = build_string(params, child_seed(cfg.seed, "ladder", "y"))
    ladder = build_ladder(params, t, r, y.to_array(), domain,
                          child_seed(cfg.seed, "ladder", t, r), engine=engine)
    write_csv(out / "ladder.csv", ["t", "r", "z", "lcs", "parity"],
              [(ladder.t, rung.r, rung.z, rung.lcs, rung.parity)
               for rung in ladder.rungs])

    slope = slope_event_check(ladder, cfg.epsilon, cfg.resolved_c2)
    even = ladder.parity_class("even")
    drifts = [
        drift_sampled(rung.string, y.to_array(), cfg.drift_k,
                      child_seed(cfg.seed, "ladder", "drift", i), engine=engine)
        for i, rung in enumerate(even[:-1])
    ]
    repaired = repair_ladder(ladder, drifts, cfg.epsilon)
    diags = martingale_diagnostics(repaired, cfg.epsilon, cfg.resolved_c2, cfg.n)
    write_json(out / "ladder.json", {
        "params": {"l": cfg.l, "n": cfg.n},
        "t": ladder.t,
        "r": ladder.r,
        "seed": cfg.seed,
        "termination": ladder.termination,
        "z_values": ladder.z_values,
        "slope_event": {
            "epsilon": slope.epsilon,
            "c2": slope.c2,
            "holds": slope.holds,
            "violating_pair": slope.violating_pair,
        },
        "drift_means": [d.mean for d in drifts],
        "repaired": repaired,
        "diagnostics": {
            "e_values": diags.e_values,
            "martingale_residuals": diags.martingale_residuals,
            "azuma_bound": diags.azuma_bound,
            "azuma_bound_lipschitz2": diags.azuma_bound_lipschitz2,
            "tau": diags.tau,
        },
        "traces": [tr.to_json_dict() for tr in ladder.traces],
    })
    finish_manifest(man, out, [man.path(out).name, "ladder.csv", "ladder.json"])
    return 0


def cmd_scan(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    man = start_manifest("scan", cfg, {"master": cfg.seed}, out)
    ns = [int(v) for v in args.ns.split(",") if v.strip()]
    if not ns:
        raise ValueError("--ns must list at least one n")
    table = variance_scan(cfg.l, ns, cfg.reps, cfg.seed, engine=cfg.engine)
    write_csv(out / "scan.csv",
              ["n", "replicates", "mean_l", "var_l", "ci_low", "ci_high", "var_z"],
              [(r.n, r.replicates, r.mean_l, r.var_l, r.ci_low, r.ci_high, r.var_z)
               for r in table.rows])
    fits = {}
    xs = [r.n for r in table.rows]
    if cfg.engine != "none":
        slope, intercept, r2 = linear_fit(xs, [r.var_l for r in table.rows])
        fits["L"] = {"slope": slope, "intercept": intercept, "r2": r2}
    else:
        fits["L"] = None
    slope, intercept, r2 = linear_fit(xs, [r.var_z for r in table.rows])
    fits["Z"] = {"slope": slope, "intercept": intercept, "r2": r2}
    # shared scan-summary schema
    fits.update({"fit_slope": slope, "r2": r2, "min_nP": None, "K_hat": None,
                 "coverage": None})
    write_json(out / "fit.json", fits)
    finish_manifest(man, out, [man.path(out).name, "scan.csv", "fit.json"])
    return 0


def cmd_calibrate(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    man = start_manifest("calibrate-domain", cfg, {"master": cfg.seed}, out)
    params = ModelParams(cfg.l, cfg.n)
    reps = cfg.reps
    c = calibrate_c(params, args.target, reps, child_seed(cfg.seed, "calibrate"))
    domain = make_domain(params, c)
    fresh_seed = child_seed(cfg.seed, "calibrate", "fresh")
    inside = 0
    for i in range(reps):
        stats = compute_tzr(build_string(params, child_seed(fresh_seed, "tz", i)))
        inside += domain.contains(stats.t, stats.z)
    coverage = inside / reps

    # exact scan over the calibrated domain: one row per admissible triple
    import math

    rows = []
    for t, z, r, counts in admissible_triples(params, domain):
        n_p = params.n * math.exp(joint_prob_tzr(params, TzrStats(t, z, r)))
        rows.append((t, z, r, counts.n1, counts.n2, counts.n3, n_p))
    write_csv(out / "domain.csv", ["t", "z", "r", "n1", "n2", "n3", "n_p"], rows)
    min_np, arg = min_prob_over_D(params, domain)
    k_hat = ratio_check(params, domain)

    result = {
        "c": c,
        "target": args.target,
        "replicates": reps,
        "coverage": coverage,
        "min_nP": min_np,
        "argmin": {"t": arg.t, "z": arg.z, "r": arg.r},
        "K_hat": k_hat,
        "fit_slope": None,
        "r2": None,
        "domain": {"t_lo": domain.t_lo, "t_hi": domain.t_hi,
                   "z_lo": domain.z_lo, "z_hi": domain.z_hi},
    }
    write_json(out / "calibrate.json", result)
    finish_manifest(man, out,
                    [man.path(out).name, "calibrate.json", "domain.csv"])
    print(f"c={c} coverage_fresh={coverage:.4f} min_nP={min_np:.4g} K_hat={k_hat:.4g}")
    return 0


def cmd_report(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    man = start_manifest("report", cfg, {"master": cfg.seed}, out)
    import json

    runs = []
    all_passed = True
    for path in sorted(out.glob("manifest_*.json")):
        if path.name == "manifest_report.json":
            continue
        data = json.loads(path.read_text())
        runs.append({"command": data["command"], "outputs": data["outputs"],
                     "finished": data["finished"] is not None})
    checks = []
    for path in sorted(out.glob("verify_*.json")):
        data = json.loads(path.read_text())
        checks.append({"check": data["check"], "passed": data["passed"]})
        all_passed = all_passed and data["passed"]
    report = {"runs": runs, "checks": checks, "all_checks_passed": all_passed}
    write_json(out / "report.json", report)
    finish_manifest(man, out, [man.path(out).name, "report.json"])
    for c in checks:
        print(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}")
    print(f"{len(runs)} runs, {len(checks)} checks")
    return 0


_COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "drift": cmd_drift,
    "ladder": cmd_ladder,
    "scan": cmd_scan,
    "calibrate-domain": cmd_calibrate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return _COMMANDS[args.command](cfg, args)
    except (BlockLcsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
