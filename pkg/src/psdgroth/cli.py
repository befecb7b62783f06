"""Command-line entry point: ``psdgroth {gen,solve,round,analyze}``.

The JSON report goes to stdout and a short human summary to stderr.

Exit codes: 0 all checks passed; 1 bad input or I/O; 2 PSD certification
failed; 3 solver did not converge; 4 a verification check failed.
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.special import gamma as gamma_fn

from . import matrix as mx
from .en_analysis import (
    arcsin_minus_linear,
    en_kernel,
    en_monte_carlo,
    positive_type_expand,
    ratio_curve,
    v_n,
)
from .errors import DegenerateInstance, FormatError, InvalidInput, NumericalError, TooLarge
from .report import AnalysisReport
from .rounding import best_of_rounds, expected_ratio_estimate, hardness_reduction_check, round_rank_n
from .sdp_solver import GramSolution, SolverConfig, solve_sdp_relaxation
from .special_functions import c_m, c_m_quadrature, gamma_n

log = logging.getLogger("psdgroth")

EXIT_OK, EXIT_INPUT, EXIT_PSD, EXIT_NOCONV, EXIT_CHECK = 0, 1, 2, 3, 4
CURVE_CAP = 1 - 1e-6


class Parser(argparse.ArgumentParser):
    # keep exit code 2 free for PSD certification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class Exit(Exception):
    def __init__(self, code: int, report: AnalysisReport = None):
        super().__init__(code)
        self.code = code
        self.report = report


def _default_seed() -> int:
    raw = os.environ.get("GROTH_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"GROTH_SEED must be an integer, got {raw!r}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (default: $GROTH_SEED or 0)")
    g.add_argument("--threads", type=int, default=1, help="worker cap; results do not depend on it")
    g.add_argument("--tol-psd", type=float, default=mx.DEFAULT_TOL_PSD)
    g.add_argument("--tol-coef", type=float, default=1e-8, help="allowed negativity of expansion coefficients")
    g.add_argument("--tol-sigma", type=float, default=4.0, help="standard errors allowed in statistical checks")
    g.add_argument("--tol-margin", type=float, default=1e-8, help="relative slack for the reduction check")
    g.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from the report")
    g.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--k", type=int, default=None, help="embedding rank (default min(m, ceil(sqrt(2m))+1))")
    g.add_argument("--tol", type=float, default=1e-10, help="relative improvement per sweep to stop")
    g.add_argument("--max-sweeps", type=int, default=10000)
    g.add_argument("--restarts", type=int, default=5)
    g.add_argument("--skip-psd-check", action="store_true")
    g.add_argument("--format", choices=["matrix-market", "dense-csv"], default=None)


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = Parser(prog="psdgroth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("gen", parents=[common], help="write a test matrix in Matrix Market format")
    p.add_argument("--kind", choices=["laplacian", "gram", "ones", "identity"], required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, default=None, help="rank of a gram instance (default m)")
    p.add_argument("--edges", type=Path, default=None, help="edge list 'i j w' (default: unit cycle)")
    p.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")

    p = sub.add_parser("solve", parents=[common], help="solve the vector relaxation")
    p.add_argument("matrix", type=Path)
    _solver_flags(p)
    p.add_argument("--dump-gram", type=Path, default=None, help="write the unit vectors as CSV")

    p = sub.add_parser("round", parents=[common], help="round to rank n and estimate the ratio")
    p.add_argument("matrix", type=Path)
    _solver_flags(p)
    p.add_argument("--gram", type=Path, default=None, help="vectors CSV from 'solve --dump-gram'")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, default=10, help="roundings for the best-of-R solution")
    p.add_argument("--mc", type=int, default=10000, help="roundings for the mean ratio")

    p = sub.add_parser("analyze", parents=[common], help="verify constants and kernel properties")
    p.add_argument("sub", choices=["gamma", "cm", "en", "vn", "postype", "reduction"])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--m", type=int, default=5)
    p.add_argument("--m-max", type=int, default=50)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--mc", type=int, default=100000, help="Monte Carlo samples per cross-check point")
    p.add_argument("--degree", type=int, default=30)
    p.add_argument("--kernel", choices=["arcsin", "en"], default="arcsin")
    p.add_argument("--trials", type=int, default=1, help="random instances for 'reduction'")
    p.add_argument("--csv", type=Path, default=None, help="curve output for 'en'")
    return parser


# --- helpers -------------------------------------------------------------

def _config(args, *names) -> dict:
    keys = ("seed", "tol_psd", "tol_coef", "tol_sigma", "tol_margin") + names
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def _load(args, report: AnalysisReport) -> mx.PsdMatrix:
    with report.phase("load"):
        A = mx.load_matrix(args.matrix, args.format)
    report.inputs = {"path": str(args.matrix), "m": A.m, "digest": A.digest()}
    if args.skip_psd_check:
        report.results["psd"] = None
        return A
    with report.phase("psd"):
        psd = mx.validate_psd(A, args.tol_psd)
    report.results["psd"] = psd.as_dict()
    report.checks["psd"] = psd.passed
    if not psd.passed:
        raise Exit(EXIT_PSD, report)
    return mx.PsdMatrix(A.entries, psd_tol=args.tol_psd)


def _solve(args, A: mx.PsdMatrix, report: AnalysisReport) -> GramSolution:
    cfg = SolverConfig(args.k, args.tol, args.max_sweeps, args.restarts, args.seed, args.threads)
    report.config["solver"] = cfg.as_dict(A.m)
    with report.phase("solve"):
        G = solve_sdp_relaxation(A, cfg, check_psd=False)
    report.results.update(
        {
            "objective": G.objective,
            "k": G.k,
            "sweeps": G.iterations,
            "best_restart": G.restart,
            "restarts": cfg.restarts,
            "converged": G.converged,
        }
    )
    report.checks["converged"] = G.converged
    return G


# --- commands ------------------------------------------------------------

def cmd_gen(args) -> AnalysisReport:
    report = AnalysisReport("gen", config=_config(args, "kind", "m", "r"))
    if args.kind == "ones":
        A = mx.ones(args.m)
    elif args.kind == "identity":
        A = mx.identity(args.m)
    elif args.kind == "gram":
        A = mx.random_gram(args.m, args.r or args.m, args.seed)
    else:
        G = mx.load_edge_list(args.edges, args.m) if args.edges else mx.cycle_graph(args.m)
        report.config["edges"] = str(args.edges) if args.edges else "cycle"
        A = mx.laplacian(G)
    report.results = {"m": A.m, "digest": A.digest(), "out": str(args.out) if args.out else None}
    if args.out:
        mx.save_matrix(A, args.out, "matrix-market")
    else:
        sys.stdout.write(mx.matrix_market_text(A))
        report.results["stdout"] = True
    return report


def cmd_solve(args) -> AnalysisReport:
    report = AnalysisReport("solve", config=_config(args))
    A = _load(args, report)
    G = _solve(args, A, report)
    if args.dump_gram:
        np.savetxt(args.dump_gram, G.vectors, delimiter=",", fmt="%.17g")
        report.results["gram_path"] = str(args.dump_gram)
    if not G.converged:
        raise Exit(EXIT_NOCONV, report)
    return report


def cmd_round(args) -> AnalysisReport:
    report = AnalysisReport("round", config=_config(args, "n", "trials", "mc"))
    if args.n < 1:
        raise InvalidInput("--n must be >= 1")
    A = _load(args, report)
    if args.gram:
        vecs = np.loadtxt(args.gram, delimiter=",", dtype=float, ndmin=2)
        G = GramSolution.from_vectors(A, vecs)
        report.inputs["gram"] = str(args.gram)
        report.results["objective"] = G.objective
    else:
        G = _solve(args, A, report)
        if not G.converged:
            raise Exit(EXIT_NOCONV, report)
    g = gamma_n(args.n)
    with report.phase("round"):
        best = best_of_rounds(A, G, args.n, args.trials, args.seed)
    res = report.results
    res.update({"n": args.n, "gamma_n": g, "best_objective": best.objective,
                "best_margin": best.objective - g * G.objective})
    try:
        with report.phase("monte_carlo"):
            mean, stderr = expected_ratio_estimate(A, G, args.n, args.mc, args.seed, args.threads)
    except DegenerateInstance as exc:
        res.update({"ratio": None, "note": str(exc)})
        return report
    bound = g - args.tol_sigma * stderr
    res.update({"best_ratio": best.objective / G.objective, "mean_ratio": mean,
                "stderr": stderr, "ratio_bound": bound})
    report.checks["mean_ratio_bound"] = mean >= bound
    if not report.checks["mean_ratio_bound"]:
        raise Exit(EXIT_CHECK, report)
    return report


def _analyze_gamma(args, report):
    rows = []
    ok = True
    for n in range(1, args.n_max + 1):
        g = gamma_n(n)
        row = {"n": n, "gamma": g}
        if n <= 30:
            direct = 2 / n * (gamma_fn((n + 1) / 2) / gamma_fn(n / 2)) ** 2
            row["direct_rel_err"] = abs(g - direct) / direct
            ok &= row["direct_rel_err"] <= 1e-13
        rows.append(row)
    report.results["table"] = rows
    report.checks["log_gamma_matches_direct"] = bool(ok)
    report.checks["increasing_below_one"] = all(
        a["gamma"] < b["gamma"] < 1 for a, b in zip(rows, rows[1:])
    ) and rows[0]["gamma"] < 1


def _analyze_cm(args, report):
    rows = []
    worst = 0.0
    for m in range(2, args.m_max + 1):
        closed, quad = c_m(m), c_m_quadrature(m)
        worst = max(worst, abs(closed - quad))
        rows.append({"m": m, "c_m": closed, "quadrature": quad})
    report.results.update({"table": rows, "max_abs_diff": worst})
    report.checks["closed_form_matches_quadrature"] = worst <= 1e-9


def _analyze_en(args, report):
    n = args.n
    ts = np.linspace(-CURVE_CAP, CURVE_CAP, args.grid) if args.grid > 1 else np.array([0.0])
    with report.phase("curve"):
        curve = ratio_curve(n, ts)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("t,E_n,ratio\n")
            for p in curve:
                fh.write(f"{p.t!r},{p.en_value!r},{p.ratio!r}\n")
        report.results["csv"] = str(args.csv)
    report.results["bounded"] = all(abs(p.en_value) <= 1 + 1e-9 for p in curve)
    report.checks["bounded"] = report.results["bounded"]
    # Monte Carlo cross-check at five evenly spaced curve points
    picks = sorted(set(np.linspace(0, len(curve) - 1, 7).round().astype(int)[1:-1])) or [0]
    checks = []
    with report.phase("monte_carlo"):
        for j in picks:
            p = curve[j]
            est, se = en_monte_carlo(n, p.t, args.mc, args.seed + j)
            ok = abs(est - p.en_value) <= args.tol_sigma * se + 1e-12
            checks.append({"t": p.t, "integral": p.en_value, "monte_carlo": est, "stderr": se, "ok": ok})
    report.results["cross_check"] = checks
    report.results["points"] = len(curve)
    report.checks["monte_carlo_agreement"] = all(c["ok"] for c in checks)


def _analyze_vn(args, report):
    with report.phase("minimize"):
        r = v_n(args.n)
    report.results.update({"n": r.n, "value": r.value, "minimizer": r.minimizer,
                           "second_minimum": r.second_minimum, "second_minimizer": r.second_minimizer})


def _analyze_postype(args, report):
    m = args.m
    if args.kernel == "arcsin":
        f = arcsin_minus_linear(m)
        report.config["kernel"] = f"arcsin(t) - t/gamma({m})"
    else:
        f = en_kernel(args.n)
        report.config["kernel"] = f"E_{args.n}(t)"
    with report.phase("expand"):
        exp = positive_type_expand(f, m, args.degree)
    coeffs = exp.coefficients
    report.results.update({"m": m, "alpha": (m - 3) / 2, "coefficients": coeffs,
                           "min_coefficient": exp.min_coefficient, "residual": exp.residual})
    report.checks["nonnegative_coefficients"] = exp.is_positive_type(args.tol_coef)
    if args.kernel == "arcsin" and args.degree >= 1:
        report.checks["degree_one_vanishes"] = abs(float(coeffs[1])) <= args.tol_coef


def _analyze_reduction(args, report):
    rows = []
    for trial in range(args.trials):
        seed = args.seed + trial
        A = mx.random_gram(args.m, args.m, seed)
        G = solve_sdp_relaxation(A, SolverConfig(seed=seed), check_psd=False)
        S = round_rank_n(G, args.n, seed)
        rep = hardness_reduction_check(A, S, args.tol_margin)
        rows.append(dict(rep.as_dict(), seed=seed))
    report.results.update({"n": args.n, "m": args.m, "instances": rows,
                           "min_margin": min(r["margin"] for r in rows),
                           "min_eig": min(r["min_eig"] for r in rows)})
    report.checks["reduction_inequality"] = all(r["passed"] for r in rows)


ANALYZERS = {
    "gamma": (_analyze_gamma, ("n_max",)),
    "cm": (_analyze_cm, ("m_max",)),
    "en": (_analyze_en, ("n", "grid", "mc")),
    "vn": (_analyze_vn, ("n",)),
    "postype": (_analyze_postype, ("m", "degree", "kernel", "n")),
    "reduction": (_analyze_reduction, ("n", "m", "trials")),
}


def cmd_analyze(args) -> AnalysisReport:
    func, names = ANALYZERS[args.sub]
    report = AnalysisReport(f"analyze {args.sub}", config=_config(args, *names))
    func(args, report)
    if not report.passed:
        raise Exit(EXIT_CHECK, report)
    return report


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "round": cmd_round, "analyze": cmd_analyze}


def _summary(report: AnalysisReport) -> str:
    keys = ("objective", "best_objective", "mean_ratio", "stderr", "value", "minimizer",
            "min_coefficient", "min_margin", "max_abs_diff", "digest")
    parts = [f"{k}={report.results[k]:.10g}" if isinstance(report.results[k], float)
             else f"{k}={report.results[k]}" for k in keys if k in report.results]
    status = "ok" if report.passed else "FAILED " + ",".join(k for k, v in report.checks.items() if not v)
    return f"[{report.command}] {status} " + " ".join(parts)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.seed is None:
        args.seed = _default_seed()
    if args.seed < 0:
        print("psdgroth: error: --seed must be non-negative", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK
    try:
        report = COMMANDS[args.command](args)
    except Exit as exc:
        code, report = exc.code, exc.report
    except (InvalidInput, FormatError, TooLarge, NumericalError, OSError) as exc:
        print(f"psdgroth: error: {exc}", file=sys.stderr)
        return EXIT_CHECK if isinstance(exc, NumericalError) else EXIT_INPUT
    if report is not None:
        if not (args.command == "gen" and args.out is None):
            print(report.to_json(timings=not args.no_timings))
        print(_summary(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
