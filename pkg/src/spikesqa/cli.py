"""Command-line entry point.

Every subcommand reads its parameters from built-in defaults, then an optional
JSON config file (``--config``), then command-line flags, later sources
winning. Config keys are the long flag names with dashes replaced by
underscores (``sweeps_per_gamma``, ``target_rate``, ...). Results are written
under ``--out``; each file embeds the code version and full parameter set.
``--threads`` only changes how trials are scheduled, never the output.

Exit codes: 0 success, 1 an oracle check failed, 2 configuration error,
3 a sweep-budget estimate hit its cap.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from .annealing import MAX_SWEEPS_CAP, NotConvergedError, SqaRunConfig, estimate_tau_s, run_sqa_trial
from .io import loglog_svg, read_csv, write_json, write_table
from .lattice import WorldlineLattice
from .oracle import default_gamma_grid, gap_scan
from .problem import SpikeProblem
from .sa import (
    SaRunConfig,
    calibrate_sweeps_per_beta,
    exact_success_probability,
    geometric_beta_schedule,
    sa_success_curve,
)
from .scaling import fit_power_law, run_scaling_experiment

log = logging.getLogger("spikesqa")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NOT_CONVERGED = 0, 1, 2, 3

_SQA_DEFAULTS = {
    "beta": 32.0,
    "L": None,
    "slices_per_qubit": None,
    "gamma_0": 1.0,
    "ratio": 0.7,
    "gamma_min": 1e-12,
    "worldline": False,
    "criterion": "frozen",
    "spikeless": False,
    "max_sweeps": MAX_SWEEPS_CAP,
    "freeze_tol": 1e-12,
}

DEFAULTS = {
    "sqa": {**_SQA_DEFAULTS, "n": 16, "sweeps_per_gamma": 1, "stream": 0,
            "checkpoint": None, "resume": None},
    "tau": {**_SQA_DEFAULTS, "n": 16, "trials": 20, "target_rate": 0.5},
    "scaling": {**_SQA_DEFAULTS, "n": [16, 32, 64, 128], "trials": 20, "target_rate": 0.5,
                "fast": False, "plot": True},
    "sa": {"n": [16, 24, 32, 40], "beta_0": 0.1, "beta_ratio": 1.3, "beta_final": 32.0,
           "sweeps_per_beta": 1, "trials": 100, "spikeless": False,
           "calibrate_n": None, "calibrate_rate": None},
    "gap": {"n": [64, 128, 256, 512, 1024, 2048, 4096], "grid_points": 64,
            "refine_rounds": 3, "spikeless": False},
    "oracle-check": {},
    "fit": {"input": None, "x": "n", "y": "tau_s"},
}
GLOBAL_DEFAULTS = {"seed": 0, "out": ".", "format": "csv", "threads": 1}
KNOWN_KEYS = set(GLOBAL_DEFAULTS).union(*DEFAULTS.values())
FAST_MAX_N = 64


class ConfigError(ValueError):
    pass


def _int_list(text):
    try:
        return [int(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _add_global(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON file of key-value parameters")
    p.add_argument("--seed", type=_u64, default=d, help="master seed (u64)")
    p.add_argument("--out", default=d, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default=d)
    p.add_argument("--threads", type=int, default=d)
    p.add_argument("-v", "--verbose", action="store_true", default=d)


def _add_sqa(p):
    S = argparse.SUPPRESS
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--L", type=int, default=S, help="Trotter number (overrides --slices-per-qubit)")
    p.add_argument("--slices-per-qubit", type=float, default=S, help="L = round(c * n); default c = beta")
    p.add_argument("--gamma-0", type=float, default=S)
    p.add_argument("--ratio", type=float, default=S)
    p.add_argument("--gamma-min", type=float, default=S)
    p.add_argument("--worldline", action="store_true", default=S)
    p.add_argument("--criterion", choices=("frozen", "slice"), default=S)
    p.add_argument("--spikeless", action="store_true", default=S)
    p.add_argument("--max-sweeps", type=int, default=S)
    p.add_argument("--freeze-tol", type=float, default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="spikesqa", description=__doc__.splitlines()[0])
    _add_global(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sqa", help="one annealing run")
    _add_global(p, suppress=True)
    _add_sqa(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--sweeps-per-gamma", "--sweeps", type=int, default=S, dest="sweeps_per_gamma")
    p.add_argument("--stream", type=int, default=S, help="trial stream id")
    p.add_argument("--checkpoint", default=S, help="write the final lattice snapshot here")
    p.add_argument("--resume", default=S, help="start from this lattice snapshot")

    p = sub.add_parser("tau", help="sweep-budget estimate for one size")
    _add_global(p, suppress=True)
    _add_sqa(p)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--target-rate", type=float, default=S)

    p = sub.add_parser("scaling", help="sweep budget versus n and the fitted exponent")
    _add_global(p, suppress=True)
    _add_sqa(p)
    p.add_argument("--n", type=_int_list, default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--target-rate", type=float, default=S)
    p.add_argument("--fast", action="store_true", default=S, help=f"drop sizes above {FAST_MAX_N}")
    p.add_argument("--no-plot", action="store_false", dest="plot", default=S)

    p = sub.add_parser("sa", help="classical annealing baseline")
    _add_global(p, suppress=True)
    p.add_argument("--n", type=_int_list, default=S)
    p.add_argument("--beta-0", type=float, default=S)
    p.add_argument("--beta-ratio", type=float, default=S)
    p.add_argument("--beta-final", type=float, default=S)
    p.add_argument("--sweeps-per-beta", type=int, default=S)
    p.add_argument("--trials", type=int, default=S, help="simulated trials per n; 0 reports exact values only")
    p.add_argument("--spikeless", action="store_true", default=S)
    p.add_argument("--calibrate-n", type=int, default=S,
                   help="choose sweeps per beta so this size reaches --calibrate-rate exactly")
    p.add_argument("--calibrate-rate", type=float, default=S)

    p = sub.add_parser("gap", help="minimum spectral gap versus n")
    _add_global(p, suppress=True)
    p.add_argument("--n", type=_int_list, default=S)
    p.add_argument("--grid-points", type=int, default=S)
    p.add_argument("--refine-rounds", type=int, default=S)
    p.add_argument("--spikeless", action="store_true", default=S)

    p = sub.add_parser("oracle-check", help="fast equivalence checks against exact references")
    _add_global(p, suppress=True)

    p = sub.add_parser("fit", help="power-law refit of a CSV")
    _add_global(p, suppress=True)
    p.add_argument("--input", default=S, help="CSV file (lines starting with # are skipped)")
    p.add_argument("--x", default=S)
    p.add_argument("--y", default=S)
    return parser


def resolve_params(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags for ``args.command``."""
    cmd = args.command
    params = {**GLOBAL_DEFAULTS, **DEFAULTS[cmd]}
    given = {k: v for k, v in vars(args).items() if v is not None and k not in ("command", "config")}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            doc = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {config_path}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(doc) - KNOWN_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        params.update({k: v for k, v in doc.items() if k in params})
    params.update({k: v for k, v in given.items() if k in params or k == "verbose"})
    if isinstance(params.get("n"), int) and isinstance(DEFAULTS[cmd].get("n"), list):
        params["n"] = [params["n"]]
    if params["format"] not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {params['format']!r}")
    if int(params["threads"]) < 1:
        raise ConfigError("threads must be at least 1")
    return params


def _recorded(params: dict) -> dict:
    """Parameters written into result files (scheduling-only keys left out)."""
    return {k: v for k, v in params.items() if k not in ("threads", "out", "verbose", "format")}


def _problem(n, params):
    return SpikeProblem.spikeless(n) if params.get("spikeless") else SpikeProblem(n)


def _sqa_config(params, n, **extra) -> SqaRunConfig:
    return SqaRunConfig(
        n=n,
        beta=float(params["beta"]),
        L=params["L"],
        slices_per_qubit=params["slices_per_qubit"],
        gamma_0=float(params["gamma_0"]),
        ratio=float(params["ratio"]),
        gamma_min=float(params["gamma_min"]),
        use_worldline=bool(params["worldline"]),
        criterion=params["criterion"],
        seed=int(params["seed"]),
        max_sweeps=int(params["max_sweeps"]),
        freeze_tol=float(params["freeze_tol"]),
        **extra,
    )


def cmd_sqa(params, out: Path) -> int:
    n = int(params["n"])
    problem = _problem(n, params)
    cfg = _sqa_config(params, n, sweeps_per_gamma=int(params["sweeps_per_gamma"]))
    initial = WorldlineLattice.load(params["resume"]) if params["resume"] else None
    result, lattice = run_sqa_trial(problem, cfg, int(params["stream"]), initial, return_lattice=True)
    if params["checkpoint"]:
        lattice.save(params["checkpoint"])
    w = result.final_lattice_weight_profile
    header = ["n", "L", "stream_id", "sweeps_per_gamma", "sweeps_total", "success",
              "min_weight", "max_weight", "weight_profile"]
    row = [n, cfg.trotter_number, result.stream_id, cfg.sweeps_per_gamma, result.sweeps_total,
           result.success, min(w), max(w), " ".join(map(str, w))]
    write_table(out / "sqa", params["format"], header, [row], _recorded(params))
    log.info("success=%s weights in [%d, %d]", result.success, min(w), max(w))
    return EXIT_OK


def cmd_tau(params, out: Path) -> int:
    n = int(params["n"])
    cfg = _sqa_config(params, n)
    trials, target = int(params["trials"]), float(params["target_rate"])
    code = EXIT_OK
    try:
        est = estimate_tau_s(_problem(n, params), cfg, trials, target, threads=int(params["threads"]))
        history, summary = est.history, {
            "tau_s": est.tau_s, "success_rate": est.success_rate,
            "ci_halfwidth": est.ci_halfwidth, "converged": True,
        }
    except NotConvergedError as exc:
        history = exc.history
        summary = {"tau_s": None, "cap": exc.cap, "converged": False}
        code = EXIT_NOT_CONVERGED
    rows = [[s, k, trials, k / trials] for s, k in sorted(history)]
    rec = _recorded(params)
    write_table(out / "tau", params["format"], ["sweeps_per_gamma", "successes", "trials", "rate"], rows, rec)
    write_json(out / "tau_summary.json", {**summary, "n": n, "L": cfg.trotter_number}, rec)
    return code


def cmd_scaling(params, out: Path) -> int:
    n_list = sorted(int(n) for n in params["n"])
    if params["fast"]:
        n_list = [n for n in n_list if n <= FAST_MAX_N]
    template = _sqa_config(params, n_list[0] if n_list else 4)
    factory = SpikeProblem.spikeless if params["spikeless"] else SpikeProblem

    def progress(p):
        log.info("n=%d L=%d tau_s=%d rate=%.2f converged=%s", p.n, p.L, p.tau_s, p.success_rate, p.converged)

    result = run_scaling_experiment(
        n_list, template, int(params["trials"]), float(params["target_rate"]),
        threads=int(params["threads"]), problem_factory=factory,
        problem_label="spikeless" if params["spikeless"] else "spike", progress=progress,
    )
    rec = _recorded(params)
    header = ["n", "L", "tau_s", "ci_halfwidth", "trials", "target_rate"]
    rows = [[p.n, p.L, p.tau_s, p.ci_halfwidth, p.trials, p.target_rate] for p in result.points]
    write_table(out / "scaling", params["format"], header, rows, rec)
    trial_header = ["n", "sweeps_per_gamma", "stream_id", "success", "min_weight", "max_weight"]
    trial_rows = sorted(
        ([r[k] for k in trial_header] for r in result.records), key=lambda r: (r[0], r[1], r[2])
    )
    write_table(out / "scaling_trials", params["format"], trial_header, trial_rows, rec)
    write_json(out / "summary.json", result.summary(), rec)
    if params["plot"]:
        good = [p for p in result.points if p.converged]
        if good:
            svg = loglog_svg([p.n for p in good], [p.tau_s for p in good],
                             result.exponent_z, result.intercept, params=rec)
            (out / "scaling.svg").write_text(svg)
    log.info("z=%.3f r2=%.3f", result.exponent_z, result.r_squared)
    if any(not p.converged for p in result.points):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_sa(params, out: Path) -> int:
    betas = geometric_beta_schedule(float(params["beta_0"]), float(params["beta_ratio"]),
                                    float(params["beta_final"]))
    template = SaRunConfig(n=4, beta_schedule=betas, sweeps_per_beta=int(params["sweeps_per_beta"]),
                           seed=int(params["seed"]))
    factory = SpikeProblem.spikeless if params["spikeless"] else SpikeProblem
    rec = _recorded(params)
    if (params["calibrate_n"] is None) != (params["calibrate_rate"] is None):
        raise ConfigError("calibrate_n and calibrate_rate must be given together")
    if params["calibrate_n"] is not None:
        budget = calibrate_sweeps_per_beta(factory(int(params["calibrate_n"])), template,
                                           float(params["calibrate_rate"]))
        template = dataclasses.replace(template, sweeps_per_beta=budget)
        rec["calibrated_sweeps_per_beta"] = budget
        log.info("calibrated sweeps_per_beta=%d", budget)
    n_list = sorted(int(n) for n in params["n"])
    trials = int(params["trials"])
    if trials < 0:
        raise ConfigError("trials must be non-negative")
    exact = [exact_success_probability(factory(n), template.for_size(n)) for n in n_list]
    if trials:
        points = sa_success_curve(n_list, template, trials, factory, int(params["threads"]))
        sim = [[p.successes, p.trials, p.rate, p.ci_low, p.ci_high] for p in points]
    else:
        sim = [[None] * 5 for _ in n_list]
    rows = [[n, template.sweeps_per_beta, *s, e] for n, s, e in zip(n_list, sim, exact)]
    header = ["n", "sweeps_per_beta", "successes", "trials", "rate", "ci_low", "ci_high", "exact_probability"]
    write_table(out / "sa", params["format"], header, rows, rec)
    return EXIT_OK


def cmd_gap(params, out: Path) -> int:
    n_list = sorted(int(n) for n in params["n"])
    grid = default_gamma_grid(int(params["grid_points"]))
    rows, per_n = [], []
    for n in n_list:
        scan = gap_scan(_problem(n, params), grid, int(params["refine_rounds"]))
        rows.extend([n, g, d] for g, d in zip(scan.gamma_grid, scan.gaps))
        per_n.append({"n": n, "g_min": scan.g_min, "gamma_at_min": scan.gamma_at_min})
    rec = _recorded(params)
    write_table(out / "gap", params["format"], ["n", "gamma", "gap"], rows, rec)
    summary = {"per_n": per_n}
    if len(per_n) >= 3:
        slope, intercept, r2 = fit_power_law([(d["n"], d["g_min"]) for d in per_n])
        summary.update(slope=slope, intercept=intercept, r_squared=r2)
    write_json(out / "gap_summary.json", summary, rec)
    for d in per_n:
        log.info("n=%d g_min=%.6g at gamma=%.6g", d["n"], d["g_min"], d["gamma_at_min"])
    return EXIT_OK


def cmd_oracle_check(params, out: Path) -> int:
    from .checks import run_oracle_checks

    checks = run_oracle_checks(int(params["seed"]))
    write_json(out / "oracle_check.json", {"checks": checks, "all_passed": all(c["passed"] for c in checks)},
               _recorded(params))
    for c in checks:
        log.info("%s %s", "PASS" if c["passed"] else "FAIL", c["name"])
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_CHECK_FAILED


def cmd_fit(params, out: Path) -> int:
    if not params["input"]:
        raise ConfigError("fit needs --input")
    try:
        rows = read_csv(params["input"])
    except OSError as exc:
        raise ConfigError(f"cannot read {params['input']}: {exc}") from None
    try:
        pts = [(float(r[params["x"]]), float(r[params["y"]])) for r in rows]
    except KeyError as exc:
        raise ConfigError(f"column {exc} not found in {params['input']}") from None
    slope, intercept, r2 = fit_power_law(pts)
    write_json(out / "fit.json", {"slope": slope, "intercept": intercept, "r_squared": r2,
                                  "points": pts}, _recorded(params))
    log.info("slope=%.4f r2=%.4f", slope, r2)
    return EXIT_OK


COMMANDS = {
    "sqa": cmd_sqa,
    "tau": cmd_tau,
    "scaling": cmd_scaling,
    "sa": cmd_sa,
    "gap": cmd_gap,
    "oracle-check": cmd_oracle_check,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        params = resolve_params(args)
    except ConfigError as exc:
        print(f"spikesqa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if params.get("verbose") else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    try:
        return COMMANDS[args.command](params, out)
    except (ConfigError, ValueError, TypeError) as exc:
        print(f"spikesqa: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
