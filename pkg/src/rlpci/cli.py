"""Command-line front end: ``rlpci fit | ci | sim <experiment>``.

Every run writes its outputs plus a ``manifest.json`` (flags, seed,
version, wall time and SHA-256 digests of each output file) into
``--output-dir``.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .model import DataError, RngStream, read_csv, standardize
from .parallel import THREADS_ENV, default_threads
from .sim import ScenarioError

log = logging.getLogger("rlpci")

EXIT_DATA = 3
EXIT_SCENARIO = 4
EXIT_NUMERICAL = 5


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_csv(path: Path, rows, fieldnames) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(row.get(k, "")) for k in fieldnames})
    return path


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        f = float(o)
        return f if math.isfinite(f) else str(f)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    return o


def write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(outdir: Path, args, argv, outputs: list[Path], started: float, seed) -> Path:
    flags = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "subcommand": " ".join(x for x in (args.command, getattr(args, "experiment", None)) if x),
        "argv": list(argv),
        "flags": flags,
        "master_seed": seed,
        "version": __version__,
        "wall_time_seconds": round(time.time() - started, 3),
        "outputs": {p.name: sha256(p) for p in outputs},
    }
    return write_json(outdir / "manifest.json", manifest)


def _lambda_arg(s: str):
    if s == "cv":
        return s
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'cv' or a non-negative number") from None
    if v < 0:
        raise argparse.ArgumentTypeError("lambda must be non-negative")
    return v


def _sigma2_arg(s: str):
    if s == "estimate":
        return s
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'estimate' or a positive number") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("sigma2 must be positive")
    return v


def _level_arg(s: str) -> float:
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError("level must lie in (0, 1)")
    return v


# ----------------------------------------------------------------------- fit / ci


def _fit_common(args):
    from .selection import select_lambda
    from .solver import LambdaGrid, fit_lasso_path

    data = read_csv(args.data, args.response)
    sd = standardize(data)
    grid = LambdaGrid.for_design(sd, args.nlambda, args.lambda_min_ratio)
    cv = None
    if args.__dict__.get("lam") == "cv" or args.__dict__.get("sigma2", None) == "estimate":
        _, cv, _ = select_lambda(sd, args.cv_folds, RngStream(args.cv_seed), args.nlambda, args.lambda_min_ratio)
    if args.lam == "cv":
        path = fit_lasso_path(sd, grid.values[: cv.index_cv + 1], tol=args.tol, max_iter=args.max_iter)
    else:
        lams = np.concatenate([grid.values[grid.values > args.lam], [args.lam]])
        path = fit_lasso_path(sd, lams, tol=args.tol, max_iter=args.max_iter)
    return data, sd, grid, cv, path


def cmd_fit(args, outdir: Path) -> list[Path]:
    data, sd, grid, cv, path = _fit_common(args)
    beta = path.coef
    slopes, intercept = sd.to_raw(beta)
    out = {
        "lambda": path.lam,
        "lambda_max": grid.lambda_max,
        "intercept": intercept,
        "coefficients": [
            {"variable": nm, "standardized": b, "raw": r, "selected": bool(b != 0)}
            for nm, b, r in zip(sd.names, beta, slopes)
        ],
        "kkt_max_violation": float(path.kkt_max_violation[-1]),
        "kkt_max_violation_path": path.kkt_max_violation,
        "sweeps": int(path.sweeps.sum()),
        "cv": None if cv is None else cv.to_dict(),
    }
    return [write_json(outdir / "fit.json", out)]


CI_FIELDS = ["variable", "lasso_estimate", "beta_tilde", "lower", "upper", "selected", "n_tilde"]


def cmd_ci(args, outdir: Path) -> list[Path]:
    from .model import destandardize_interval

    if args.method == "ridge":
        iv = _ridge_ci(args)
        sd = iv[1]
        iv = iv[0]
    else:
        from .posterior import rlp_intervals
        from .selection import estimate_sigma2

        data, sd, grid, cv, path = _fit_common(args)
        if args.sigma2 == "estimate":
            if args.lam == "cv" or args.reestimate_sigma2:
                s2 = estimate_sigma2(sd, path).sigma2_hat
            else:
                from .solver import fit_lasso_path

                at_cv = fit_lasso_path(sd, grid.values[: cv.index_cv + 1])
                s2 = estimate_sigma2(sd, at_cv).sigma2_hat
        else:
            s2 = args.sigma2
        iv = rlp_intervals(sd, path, s2, args.level)
    if args.scale == "raw":
        iv = destandardize_interval(iv, sd)
    rows = []
    for j, nm in enumerate(sd.names):
        rows.append(
            {
                "variable": nm,
                "lasso_estimate": iv.estimate[j],
                "beta_tilde": "" if iv.beta_tilde is None else iv.beta_tilde[j],
                "lower": iv.lower[j],
                "upper": iv.upper[j],
                "selected": "" if iv.selected is None else bool(iv.selected[j]),
                "n_tilde": "" if iv.n_tilde is None else iv.n_tilde[j],
            }
        )
    return [write_csv(outdir / "intervals.csv", rows, CI_FIELDS)]


def _ridge_ci(args):
    from .ridge import ridge_cross_validate, ridge_posterior_intervals, ridge_sigma2
    from .selection import make_folds

    data = read_csv(args.data, args.response)
    sd = standardize(data)
    if args.lam == "cv":
        folds = make_folds(sd.n, args.cv_folds, RngStream(args.cv_seed))
        grid = np.exp(np.linspace(np.log(1e-3), np.log(10.0), 40))
        lam, _ = ridge_cross_validate(sd, grid, folds)
    else:
        lam = args.lam
    s2 = ridge_sigma2(sd, lam) if args.sigma2 == "estimate" else args.sigma2
    return ridge_posterior_intervals(sd, lam, s2, args.level), sd


# ----------------------------------------------------------------------- sim


def _scenario(args, **defaults):
    from .sim import ScenarioSpec

    base = dict(defaults)
    if args.config:
        try:
            base.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scenario config {args.config}: {exc}") from None
    flags = {
        "n": args.n,
        "p": args.p,
        "beta_law": args.scenario,
        "rho": args.rho,
        "design": args.design,
        "snr": args.snr,
        "sigma2": args.sigma2,
        "reps": args.reps,
        "seed": args.seed,
        "cv_folds": args.cv_folds,
        "nlambda": args.nlambda,
        "lambda_min_ratio": args.lambda_min_ratio,
    }
    base.update({k: v for k, v in flags.items() if v is not None})
    try:
        return ScenarioSpec.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


class ConfigError(ValueError):
    pass


def sim_coverage(args, outdir):
    from .sim import run_coverage_experiment

    spec = _scenario(args)
    opts = {"B": args.B}
    if args.ridge_lambda is not None:
        opts["ridge_lambda"] = args.ridge_lambda
    rep = run_coverage_experiment(spec, args.method, args.level, args.threads, args.nbins, **opts)
    fields = ["rep", "variable", "beta", "lower", "upper", "covered", "selected"]
    summary = rep.summary()
    summary["scenario"] = spec.to_dict()
    return spec.seed, [
        write_csv(outdir / "coverage_rows.csv", rep.rows(), fields),
        write_csv(
            outdir / "coverage_bins.csv",
            summary["bins"],
            ["bin", "abs_beta_min", "abs_beta_max", "variables", "count", "coverage", "se", "median_width"],
        ),
        write_json(outdir / "coverage_summary.json", summary),
    ]


def sim_heatmap(args, outdir):
    from .sim import run_lambda_heatmap

    spec = _scenario(args)
    hm = run_lambda_heatmap(spec, args.level, args.count, args.heatmap_ratio, args.threads, args.nbins)
    fields = ["bin", "abs_beta_min", "abs_beta_max", "lambda_ratio", "coverage", "relative_coverage"]
    summary = {
        "lambda_ratio": hm.lambda_ratio,
        "average_relative_coverage": hm.average_relative,
        "balance_lambda_ratio": float(hm.lambda_ratio[hm.balance_index]),
        "lambda_cv_ratio": hm.lambda_cv_summary(),
        "failures": list(hm.failures),
        "scenario": spec.to_dict(),
    }
    return spec.seed, [
        write_csv(outdir / "heatmap.csv", hm.rows(), fields),
        write_json(outdir / "heatmap_summary.json", summary),
    ]


def sim_corr_pair(args, outdir):
    from .sim import run_corr_pair_experiment

    rows = run_corr_pair_experiment(args.level, args.reps or 1000, args.seed or 1, args.threads)
    fields = ["rep", "method", "variable", "lower", "upper", "midpoint", "width", "covered", "selected"]
    return args.seed or 1, [write_csv(outdir / "corr_pair.csv", rows, fields)]


def sim_ridge_compare(args, outdir):
    from .sim import run_ridge_compare

    ps = tuple(int(x) for x in args.ps.split(","))
    res = run_ridge_compare(
        ps, args.n or 200, args.ridge_lambda or 0.4, args.sigma2 or 100.0, args.tau2,
        args.reps or 1000, args.B, args.level, args.seed or 1, args.threads,
    )
    summary, bins = [], []
    for p, d in res.items():
        for m, rep in d.items():
            summary.append({"p": p, "method": m, "average_coverage": rep.average_coverage, "mc_se": rep.mc_se,
                            "rep_se": rep.rep_se, "reps": len(rep.reps), "failures": len(rep.failures)})
            for b in rep.bins():
                bins.append({"p": p, "method": m, **b})
    return args.seed or 1, [
        write_csv(outdir / "ridge_compare.csv", summary, list(summary[0])),
        write_csv(outdir / "ridge_compare_bins.csv", bins, list(bins[0])),
    ]


def sim_bootstrap_bias(args, outdir):
    from .sim import COMPONENTS, run_bootstrap_bias

    res = run_bootstrap_bias(args.reps or 1000, args.B, args.seed or 1, args.threads)
    rows = res.pop("rows")
    long = [
        {"rep": r["rep"], "kind": r["kind"], "component": c, "value": r[c]} for r in rows for c in COMPONENTS
    ]
    res["mean_abs"] = {
        kind: {c: float(np.mean([abs(r[c]) for r in rows if r["kind"] == kind])) for c in COMPONENTS}
        for kind in ("original", "bootstrap_mean")
    } if rows else {}
    return args.seed or 1, [
        write_csv(outdir / "bootstrap_bias.csv", long, ["rep", "kind", "component", "value"]),
        write_json(outdir / "bootstrap_bias_summary.json", res),
    ]


def sim_stability(args, outdir):
    from .resampling import stability_selection
    from .sim import stability_spec

    spec = stability_spec(args.reps or 1000, args.seed or 1, args.n or 50, args.p or 500)
    st = stability_selection(spec, spec.reps, args.B, RngStream(spec.seed), args.threads)
    beta = spec.true_beta()
    rows = [
        {"variable": j + 1, "beta": beta[j], "A_bar": st.A_bar[j], "A_star_bar": st.A_star_bar[j]}
        for j in range(spec.p)
    ]
    return spec.seed, [write_csv(outdir / "stability.csv", rows, ["variable", "beta", "A_bar", "A_star_bar"])]


def sim_exact_conjugate(args, outdir):
    from .sim import exact_conjugate_coverage

    theta = np.linspace(-args.theta_max, args.theta_max, args.points)
    res = exact_conjugate_coverage(theta, args.tau2, args.sigma2 or 1.0, args.level)
    rows = [{"theta": t, "coverage": c} for t, c in zip(res["theta"], res["coverage"])]
    summary = {"average_coverage": res["average_coverage"], "quad_error": res["quad_error"], "level": args.level,
               "tau2": args.tau2, "sigma2": args.sigma2 or 1.0}
    return None, [
        write_csv(outdir / "exact_conjugate.csv", rows, ["theta", "coverage"]),
        write_json(outdir / "exact_conjugate_summary.json", summary),
    ]


SIM_COMMANDS = {
    "coverage": sim_coverage,
    "heatmap": sim_heatmap,
    "corr-pair": sim_corr_pair,
    "ridge-compare": sim_ridge_compare,
    "bootstrap-bias": sim_bootstrap_bias,
    "stability": sim_stability,
    "exact-conjugate": sim_exact_conjugate,
}


# ----------------------------------------------------------------------- parser


def _add_fit_flags(sp):
    sp.add_argument("--data", required=True, help="CSV file with a header row")
    sp.add_argument("--response", default="y", help="name of the response column (default: y)")
    sp.add_argument("--lambda", dest="lam", type=_lambda_arg, default="cv", help="'cv' or a penalty value")
    sp.add_argument("--nlambda", type=int, default=100)
    sp.add_argument("--lambda-min-ratio", type=float, default=0.05)
    sp.add_argument("--tol", type=float, default=1e-7)
    sp.add_argument("--max-iter", type=int, default=100_000)
    sp.add_argument("--cv-folds", type=int, default=10)
    sp.add_argument("--cv-seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rlpci", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--output-dir", default=".", help="directory for outputs and manifest.json")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fp = sub.add_parser("fit", help="lasso fit with KKT diagnostics (JSON)")
    _add_fit_flags(fp)

    cp = sub.add_parser("ci", help="per-variable intervals (CSV)")
    _add_fit_flags(cp)
    cp.add_argument("--method", choices=("rlp", "ridge"), default="rlp")
    cp.add_argument("--level", type=_level_arg, default=0.8)
    cp.add_argument("--sigma2", type=_sigma2_arg, default="estimate")
    cp.add_argument("--reestimate-sigma2", action="store_true",
                    help="with a fixed --lambda, estimate sigma^2 at that lambda instead of at lambda_cv")
    cp.add_argument("--scale", choices=("standardized", "raw"), default="standardized")

    sp = sub.add_parser("sim", help="simulation experiments")
    ssub = sp.add_subparsers(dest="experiment", required=True)
    for name in SIM_COMMANDS:
        e = ssub.add_parser(name)
        e.add_argument("--reps", type=int)
        e.add_argument("--seed", type=int)
        e.add_argument("--threads", type=int, default=None,
                       help=f"worker threads (default: ${THREADS_ENV} or 1)")
        e.add_argument("--level", type=_level_arg, default=0.8)
        e.add_argument("--n", type=int)
        e.add_argument("--p", type=int)
        e.add_argument("--sigma2", type=float)
        if name in ("coverage", "heatmap"):
            e.add_argument("--scenario", help="coefficient law: laplace, t3, normal, uniform, beta01, sparse1-3")
            e.add_argument("--config", help="JSON scenario file; explicit flags override it")
            e.add_argument("--rho", type=float)
            e.add_argument("--design", choices=("ar1", "banded", "pair"))
            e.add_argument("--snr", type=float)
            e.add_argument("--cv-folds", type=int)
            e.add_argument("--nlambda", type=int)
            e.add_argument("--lambda-min-ratio", type=float)
            e.add_argument("--nbins", type=int, default=10)
        if name == "coverage":
            e.add_argument("--method", choices=("rlp", "ridge_posterior", "bootstrap", "ridge_bootstrap"), default="rlp")
            e.add_argument("--B", type=int, default=200, help="bootstrap draws for bootstrap methods")
            e.add_argument("--ridge-lambda", type=float)
        if name == "heatmap":
            e.add_argument("--count", type=int, default=25)
            e.add_argument("--heatmap-ratio", type=float, default=0.05)
        if name == "ridge-compare":
            e.add_argument("--ps", default="20,100,200")
            e.add_argument("--ridge-lambda", type=float)
            e.add_argument("--tau2", type=float, default=1.25)
            e.add_argument("--B", type=int, default=200)
        if name == "bootstrap-bias":
            e.add_argument("--B", type=int, default=1000)
        if name == "stability":
            e.add_argument("--B", type=int, default=1000)
        if name == "exact-conjugate":
            e.add_argument("--tau2", type=float, default=1.0)
            e.add_argument("--theta-max", type=float, default=4.0)
            e.add_argument("--points", type=int, default=161)
    return parser


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    outdir = Path(args.output_dir)
    started = time.time()
    if getattr(args, "threads", None) is None and args.command == "sim":
        args.threads = default_threads()
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "fit":
            seed, outputs = args.cv_seed, cmd_fit(args, outdir)
        elif args.command == "ci":
            seed, outputs = args.cv_seed, cmd_ci(args, outdir)
        else:
            seed, outputs = SIM_COMMANDS[args.experiment](args, outdir)
    except (OSError, DataError) as exc:
        print(f"rlpci: input error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, ScenarioError) as exc:
        print(f"rlpci: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"rlpci: computation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_manifest(outdir, args, argv, outputs, started, seed)
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
