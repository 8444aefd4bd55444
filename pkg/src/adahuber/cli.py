"""Command-line front end: fit, fit-l1, fit-truncated, tune, simulate and
diagnose subcommands over headed CSV files.

Exit codes: 0 = success/converged, 2 = solver did not converge, 1 = error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .core import Dataset, HuberParams, predict
from .irls import SolverConfig, fit_huber
from .lamm import fit_l1_huber
from .simlab import (
    GENERATOR_ID,
    kurtosis,
    mae,
    resolve_threads,
    run_neff_experiment,
    run_phase_transition,
    run_table1,
)
from .truncated import default_truncation_params, fit_truncated, predict_truncated
from .tuning import (
    TuningGrid,
    cross_validate,
    default_params,
    effective_sample_size,
    estimate_sigma_crude,
    lepski_select,
)
from . import dataio

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which collides with the
    # "not converged" exit code; force usage errors onto the error status
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _floats(text: str):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _ints(text: str):
    return tuple(int(v) for v in text.split(",") if v.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adahuber",
                     description="Adaptive Huber regression toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p):
        p.add_argument("--input", required=True, help="input CSV path")
        p.add_argument("--response", required=True,
                       help="name of the response column")
        p.add_argument("--delimiter", default=",")
        p.add_argument("--intercept", action="store_true",
                       help="fit an unpenalized intercept")
        p.add_argument("--out", default=None,
                       help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
        p.add_argument("--seed", type=int, default=0)

    def add_solver(p):
        p.add_argument("--tau", type=float, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None)

    p_fit = sub.add_parser("fit", help="unpenalized adaptive Huber regression")
    add_io(p_fit)
    add_solver(p_fit)

    p_l1 = sub.add_parser("fit-l1", help="l1-regularized adaptive Huber regression")
    add_io(p_l1)
    add_solver(p_l1)

    p_tr = sub.add_parser("fit-truncated",
                          help="l1 fit with clamped covariates")
    add_io(p_tr)
    add_solver(p_tr)
    p_tr.add_argument("--varpi", type=float, default=None,
                      help="covariate clamp level")
    p_tr.add_argument("--s-guess", type=int, default=None,
                      help="sparsity guess for the default parameter rules")

    p_tune = sub.add_parser("tune", help="select tau/lambda from data")
    add_io(p_tune)
    p_tune.add_argument("--method", choices=("cv", "lepski"), default="cv")
    p_tune.add_argument("--grid", type=_floats, default=(0.5, 1.0, 1.5),
                        help="comma-separated constants for both c_tau and c_lambda")
    p_tune.add_argument("--folds", type=int, default=3)
    p_tune.add_argument("--high-dim", action="store_true",
                        help="tune the l1-penalized estimator")
    p_tune.add_argument("--lepski-K", type=float, default=3.0)
    p_tune.add_argument("--lepski-a", type=float, default=1.5)

    p_sim = sub.add_parser("simulate", help="run a Monte Carlo experiment")
    p_sim.add_argument("--experiment", choices=("table1", "phase", "neff"),
                       required=True)
    p_sim.add_argument("--reps", type=int, default=None)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--n", type=int, default=None)
    p_sim.add_argument("--d", type=int, default=None)
    p_sim.add_argument("--df-grid", type=_floats, default=None)
    p_sim.add_argument("--n-grid", type=_ints, default=None)
    p_sim.add_argument("--d-grid", type=_ints, default=None)
    p_sim.add_argument("--high-dim", action="store_true")
    p_sim.add_argument("--threads", type=int, default=None,
                       help="worker count (also ADAHUBER_THREADS)")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    p_diag = sub.add_parser("diagnose",
                            help="per-column kurtosis heavy-tail report")
    p_diag.add_argument("--input", required=True)
    p_diag.add_argument("--response", required=False, default=None)
    p_diag.add_argument("--delimiter", default=",")
    p_diag.add_argument("--out", default=None)
    p_diag.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    return parser


def _load(args) -> Dataset:
    data = dataio.load_csv(args.input, args.response, args.delimiter)
    if getattr(args, "intercept", False):
        fresh = Dataset(data.x, data.y, intercept=True)
        object.__setattr__(fresh, "column_names",
                           getattr(data, "column_names", None))
        return fresh
    return data


def _solver_config(args, base: SolverConfig | None = None) -> SolverConfig | None:
    if args.tol is None and args.max_iter is None:
        return base
    base = base or SolverConfig()
    return SolverConfig(
        tol=args.tol if args.tol is not None else base.tol,
        max_iter=args.max_iter if args.max_iter is not None else base.max_iter,
        phi0=base.phi0,
        gamma_u=base.gamma_u,
    )


def _coef_records(data: Dataset, beta) -> list:
    names = list(getattr(data, "column_names", None)
                 or [f"x{j + 1}" for j in range(data.d)])
    if data.intercept:
        names.append("(intercept)")
    return [{"key": f"coef.{name}", "value": float(b)}
            for name, b in zip(names, beta)]


def _emit_fit(args, data: Dataset, fit, params: HuberParams,
              in_sample_mae: float, tuned: bool) -> int:
    records = _coef_records(data, fit.beta)
    records += [
        {"key": "tau", "value": params.tau},
        {"key": "lambda", "value": params.lam},
        {"key": "varpi", "value": params.varpi if params.varpi is not None else ""},
        {"key": "params_from_data", "value": bool(tuned)},
        {"key": "converged", "value": bool(fit.converged)},
        {"key": "iterations", "value": int(fit.iterations)},
        {"key": "objective", "value": float(fit.objective)},
        {"key": "grad_norm", "value": float(fit.grad_norm)},
        {"key": "mae_in_sample", "value": in_sample_mae},
        {"key": "n", "value": data.n},
        {"key": "d", "value": data.d},
        {"key": "seed", "value": args.seed},
        {"key": "version", "value": __version__},
    ]
    out = args.out if args.out else sys.stdout
    dataio.write_records(records, ("key", "value"), out, fmt=args.format)
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED

def cmd_fit(args) -> int:
    data = _load(args)
    cfg = _solver_config(args)
    tuned = args.tau is None
    if tuned:
        sigma = estimate_sigma_crude(data.y)
        tau = default_params(sigma, data.n, math.log(data.n)).tau
    else:
        tau = args.tau
    fit = fit_huber(data, tau, cfg)
    score = mae(data.y, predict(fit.beta, data.x, data.intercept))
    return _emit_fit(args, data, fit, HuberParams(tau=tau), score, tuned)


def cmd_fit_l1(args) -> int:
    data = _load(args)
    cfg = _solver_config(args)
    tuned = args.tau is None or args.lam is None
    sigma = estimate_sigma_crude(data.y) if tuned else None
    n_eff = effective_sample_size(data.n, data.d, high_dim=True)
    defaults = (default_params(sigma, n_eff, math.log(data.n))
                if tuned else None)
    params = HuberParams(
        tau=args.tau if args.tau is not None else defaults.tau,
        lam=args.lam if args.lam is not None else defaults.lam,
    )
    fit = fit_l1_huber(data, params, cfg)
    score = mae(data.y, predict(fit.beta, data.x, data.intercept))
    return _emit_fit(args, data, fit, params, score, tuned)


def cmd_fit_truncated(args) -> int:
    data = _load(args)
    cfg = _solver_config(args)
    tuned = args.tau is None or args.lam is None or args.varpi is None
    # the scaling rules divide by log d; clamp univariate designs to d = 2
    defaults = (default_truncation_params(data.n, max(data.d, 2), args.s_guess)
                if tuned else None)
    params = HuberParams(
        tau=args.tau if args.tau is not None else defaults.tau,
        lam=args.lam if args.lam is not None else defaults.lam,
        varpi=args.varpi if args.varpi is not None else defaults.varpi,
    )
    fit = fit_truncated(data, params, cfg)
    score = mae(data.y,
                predict_truncated(fit.beta, data.x, params.varpi, data.intercept))
    return _emit_fit(args, data, fit, params, score, tuned)


def cmd_tune(args) -> int:
    data = _load(args)
    out = args.out if args.out else sys.stdout
    if args.method == "cv":
        grid = TuningGrid(tuple(args.grid), tuple(args.grid), folds=args.folds)
        c_tau, c_lambda, fit, table = cross_validate(
            data, grid, high_dim=args.high_dim, seed=args.seed)
        forced = len(args.grid) == 1
        records = [
            {"cell": i, "c_tau": row["c_tau"], "c_lambda": row["c_lambda"],
             "mean_mae": row["mean_mae"], "failed": row["failed"],
             "selected": (row["c_tau"] == c_tau and row["c_lambda"] == c_lambda),
             "forced": forced}
            for i, row in enumerate(table)
        ]
        dataio.write_records(
            records,
            ("cell", "c_tau", "c_lambda", "mean_mae", "failed", "selected",
             "forced"),
            out, fmt=args.format)
        return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED
    fit, j_hat, diag = lepski_select(data, K=args.lepski_K, a=args.lepski_a)
    m = len(diag["sigmas"])
    records = [
        {"j": j, "sigma": diag["sigmas"][j], "tau": diag["taus"][j],
         "threshold": diag["thresholds"][j],
         "max_distance_to_later": (float(np.max(diag["distances"][j, j + 1:]))
                                   if j + 1 < m else 0.0),
         "selected": j == j_hat, "fallback": diag["fallback"]}
        for j in range(m)
    ]
    dataio.write_records(
        records,
        ("j", "sigma", "tau", "threshold", "max_distance_to_later",
         "selected", "fallback"),
        out, fmt=args.format)
    return EXIT_OK if fit.converged else EXIT_NOT_CONVERGED


def cmd_simulate(args) -> int:
    threads = resolve_threads(args.threads)
    if args.experiment == "table1":
        report = run_table1(
            reps=args.reps if args.reps is not None else 100,
            n=args.n if args.n is not None else 100,
            d=args.d if args.d is not None else 5,
            seed=args.seed, threads=threads)
        dataio.write_report(report, args.out, fmt=args.format)
        return EXIT_OK
    if args.experiment == "phase":
        rows = run_phase_transition(
            df_grid=args.df_grid or (1.5, 3.0),
            n=args.n if args.n is not None else 500,
            d=args.d if args.d is not None else 5,
            reps=args.reps if args.reps is not None else 200,
            high_dim=args.high_dim, seed=args.seed, threads=threads)
        columns = ("df", "delta", "n", "d", "mean_neg_log_error",
                   "mean_l2_error", "std_l2_error", "failed")
        dataio.write_records(rows, columns, args.out, fmt=args.format)
        _write_meta(args, {"experiment": "phase"})
        return EXIT_OK
    rows = run_neff_experiment(
        d_grid=args.d_grid or (100, 500),
        n_grid=args.n_grid or (200, 400, 800),
        reps=args.reps if args.reps is not None else 100,
        seed=args.seed, threads=threads)
    columns = ("d", "n", "n_eff", "mean_l2_error", "std_l2_error", "failed")
    dataio.write_records(rows, columns, args.out, fmt=args.format)
    _write_meta(args, {"experiment": "neff"})
    return EXIT_OK


def _write_meta(args, extra: dict) -> None:
    meta = {
        "seed": args.seed,
        "generator": GENERATOR_ID,
        "version": __version__,
    }
    meta.update(extra)
    with open(str(args.out) + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


# population kurtosis of a t distribution with five degrees of freedom;
# columns beyond it are flagged as severely heavy-tailed
T5_KURTOSIS = 9.0


def cmd_diagnose(args) -> int:
    header_response = args.response or ""
    # reuse the CSV loader by treating the first column as the response when
    # none is named, then diagnose every column uniformly
    with open(args.input, encoding="utf-8") as fh:
        first = fh.readline()
    columns = [c.strip() for c in first.split(args.delimiter) if c.strip()]
    if not columns:
        raise dataio.CsvFormatError(f"{args.input}: empty header")
    response = header_response or columns[0]
    data = dataio.load_csv(args.input, response, args.delimiter)
    names = [response] + list(getattr(data, "column_names", []))
    series = [data.y] + [data.x[:, j] for j in range(data.d)]

    records = []
    for name, values in zip(names, series):
        try:
            k = kurtosis(values)
            records.append({
                "column": name, "kurtosis": k, "degenerate": False,
                "heavy": k > 3.0, "severe": k > T5_KURTOSIS,
            })
        except Exception:
            records.append({
                "column": name, "kurtosis": "", "degenerate": True,
                "heavy": False, "severe": False,
            })
    out = args.out if args.out else sys.stdout
    dataio.write_records(
        records, ("column", "kurtosis", "degenerate", "heavy", "severe"),
        out, fmt=args.format)
    return EXIT_OK


_COMMANDS = {
    "fit": cmd_fit,
    "fit-l1": cmd_fit_l1,
    "fit-truncated": cmd_fit_truncated,
    "tune": cmd_tune,
    "simulate": cmd_simulate,
    "diagnose": cmd_diagnose,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SystemExit:
        raise
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"adahuber: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
