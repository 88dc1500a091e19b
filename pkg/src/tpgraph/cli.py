"""Command-line interface: estimate, select, synth, and bench subcommands.

All matrix outputs are headerless CSV printed with 17 significant digits so
they round-trip exactly; edge lists use 1-based indices under an
``i,j,weight`` header. Every run writes a ``manifest.json`` echoing the
fully resolved configuration.

Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 numerical
failure, 4 partial benchmark failure.
"""

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .admm import THRESHOLD_NEG, THRESHOLD_TWO_SIDED, SolverConfig
from .bench import BenchSpec, monte_carlo
from .estimator import EstimatorSpec, estimate, mode_for_outer
from .exceptions import DataError, NumericalError
from .linalg import sample_covariance, standardize, sym_eigendecompose
from .selection import RANGE_REAL, RANGE_SYNTHETIC, bic, select_lambda
from .synthetic import GRAPH_KINDS, make_ground_truth, sample_gaussian

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_PARTIAL = 4

FLOAT_FMT = "%.17g"


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; this tool reserves 2 for
    input errors, so remap usage problems to exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _nonneg_float(text):
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {text}")
    return value


def _probability(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must be in [0, 1], got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _node_count(text):
    value = int(text)
    if value < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 nodes, got {text}")
    return value


def read_samples(path):
    """Load an observation matrix from CSV, with optional header row.

    Returns ``(data, names)`` where ``names`` is the header's cell list
    when the first row is non-numeric, else ``None``. Blank lines are
    skipped; ragged or non-numeric content raises :class:`DataError`
    naming the offending line and cell.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            raw = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), 1) if row]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not raw:
        raise DataError(f"{path}: no data rows")

    def numeric(row):
        try:
            [float(cell) for cell in row]
            return True
        except ValueError:
            return False

    names = None
    if not numeric(raw[0][1]):
        names = [cell.strip() for cell in raw[0][1]]
        raw = raw[1:]
        if not raw:
            raise DataError(f"{path}: header but no data rows")

    width = len(raw[0][1])
    if names is not None and len(names) != width:
        raise DataError(
            f"{path}: header has {len(names)} cells but data rows have {width}"
        )
    data = np.empty((len(raw), width))
    for r, (lineno, row) in enumerate(raw):
        if len(row) != width:
            raise DataError(f"{path}: line {lineno}: expected {width} cells, got {len(row)}")
        for c, cell in enumerate(row):
            try:
                data[r, c] = float(cell)
            except ValueError:
                raise DataError(
                    f"{path}: line {lineno}, column {c + 1}: not numeric: {cell.strip()!r}"
                ) from None
    if not np.all(np.isfinite(data)):
        r, c = np.argwhere(~np.isfinite(data))[0]
        raise DataError(f"{path}: line {raw[r][0]}, column {c + 1}: non-finite value")
    return data, names


def write_matrix(path, a):
    np.savetxt(path, np.atleast_2d(a), delimiter=",", fmt=FLOAT_FMT)


def read_matrix(path):
    return np.loadtxt(path, delimiter=",", ndmin=2)


def write_edges(path, edges, weights):
    """Edge list CSV with 1-based indices, ascending (i, j)."""
    with open(path, "w", newline="") as fh:
        fh.write("i,j,weight\n")
        for i, j in edges:
            fh.write(f"{i + 1},{j + 1},{format(weights[i, j], '.17g')}\n")


def _write_summary(outdir, fields):
    with open(outdir / "summary.txt", "w") as fh:
        for key, value in fields.items():
            fh.write(f"{key}: {value}\n")
    with open(outdir / "summary.json", "w") as fh:
        json.dump(fields, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(outdir, subcommand, configuration, paths, diagnostics=None):
    doc = {
        "tool": "tpgraph",
        "version": __version__,
        "subcommand": subcommand,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "configuration": configuration,
        "paths": paths,
    }
    if diagnostics:
        doc["diagnostics"] = diagnostics
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _outdir(args):
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _solver_config(args, lam):
    return SolverConfig(
        lambda0=lam,
        rho0=args.rho0,
        mu=args.mu,
        tau_abs=args.tau_abs,
        tau_rel=args.tau_rel,
        epsilon=args.epsilon,
        k_outer_max=args.outer,
        k_inner_max=args.max_inner,
    )


def _estimator_spec(args, lam):
    return EstimatorSpec(
        lam=lam, mode=mode_for_outer(args.outer), solver=_solver_config(args, lam)
    )


def _load_input(args):
    x, names = read_samples(args.input)
    if args.standardize:
        x = standardize(x)
    return x, names


def _write_model_outputs(outdir, est):
    write_matrix(outdir / "omega.csv", est.omega_hat)
    write_matrix(outdir / "weights.csv", est.w_hat)
    write_matrix(outdir / "laplacian.csv", est.laplacian_hat)
    write_edges(outdir / "edges.csv", est.edges, est.w_hat)


def cmd_estimate(args):
    x, names = _load_input(args)
    n, p = x.shape
    sigma = sample_covariance(x)
    spec = _estimator_spec(args, args.lam)
    est = estimate(sigma, spec)
    outdir = _outdir(args)
    _write_model_outputs(outdir, est)
    fields = {
        "p": p,
        "n": n,
        "lambda": args.lam,
        "mode": spec.mode,
        "standardized": bool(args.standardize),
        "edge_count": len(est.edges),
        "bic": bic(sigma, est.omega_hat, len(est.edges), n),
        "converged": all(d.converged for d in est.diagnostics),
        "inner_iterations": [d.inner_iterations for d in est.diagnostics],
        "objective_per_outer": [d.objective for d in est.diagnostics],
        "final_primal_residual": est.diagnostics[-1].d_primal,
        "final_dual_residual": est.diagnostics[-1].d_dual,
    }
    if names:
        fields["variables"] = names
    _write_summary(outdir, fields)
    _write_manifest(
        outdir,
        "estimate",
        {
            "solver": asdict(spec.solver),
            "mode": spec.mode,
            "standardize": bool(args.standardize),
        },
        {"input": str(args.input), "output_dir": str(outdir)},
    )
    print(f"estimated {len(est.edges)} edges over {p} nodes -> {outdir}")
    return EXIT_OK


def cmd_select(args):
    x, names = _load_input(args)
    n, p = x.shape
    spec = _estimator_spec(args, 1.0)
    report = select_lambda(
        x, spec, range_mode=args.grid, count=args.grid_size, threads=args.threads
    )
    outdir = _outdir(args)
    with open(outdir / "selection.csv", "w", newline="") as fh:
        fh.write("lambda,bic,edge_count,converged\n")
        for rec in report.records:
            fh.write(
                f"{format(rec.lam, '.17g')},{format(rec.bic, '.17g')},"
                f"{rec.edge_count},{int(rec.converged)}\n"
            )
    _write_model_outputs(outdir, report.estimate)
    best = next(r for r in report.records if r.lam == report.lambda_star)
    fields = {
        "p": p,
        "n": n,
        "grid": args.grid,
        "grid_size": args.grid_size,
        "lambda_sm": report.grid.lambda_sm,
        "lambda_star": report.lambda_star,
        "bic_star": best.bic,
        "edge_count": best.edge_count,
        "standardized": bool(args.standardize),
    }
    if names:
        fields["variables"] = names
    _write_summary(outdir, fields)
    _write_manifest(
        outdir,
        "select",
        {
            "solver": asdict(spec.solver),
            "mode": spec.mode,
            "grid": args.grid,
            "grid_size": args.grid_size,
            "standardize": bool(args.standardize),
            "threads": args.threads,
        },
        {"input": str(args.input), "output_dir": str(outdir)},
    )
    print(
        f"selected lambda {report.lambda_star:.6g} "
        f"({best.edge_count} edges, BIC {best.bic:.6g}) -> {outdir}"
    )
    return EXIT_OK


def cmd_synth(args):
    rng = np.random.default_rng(args.seed)
    model = make_ground_truth(args.graph, args.p, args.p_er, args.kappa, rng)
    x = sample_gaussian(model.sampler_factor, args.n, rng)
    outdir = _outdir(args)
    write_matrix(outdir / "samples.csv", x)
    write_matrix(outdir / "truth_omega.csv", model.omega0)
    write_edges(outdir / "truth_edges.csv", model.edges0, -model.omega0)
    eigenvalues, _ = sym_eigendecompose(model.omega_true)
    _write_manifest(
        outdir,
        "synth",
        {
            "graph": args.graph,
            "p": args.p,
            "n": args.n,
            "kappa": args.kappa,
            "p_er": args.p_er,
            "seed": args.seed,
        },
        {"output_dir": str(outdir)},
        diagnostics={
            "edge_count": len(model.edges0),
            "min_eigenvalue_shifted": float(eigenvalues[0]),
        },
    )
    print(f"synthesized {args.n}x{args.p} samples, {len(model.edges0)} true edges -> {outdir}")
    return EXIT_OK


def _parse_bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise DataError(f"cannot parse boolean from {text!r}")


def _parse_mode(text):
    from .estimator import MODE_ADAPTIVE, MODE_LASSO

    value = text.strip().lower()
    if value in ("cl", "lasso", MODE_LASSO):
        return MODE_LASSO
    if value in ("cal", "adaptive", MODE_ADAPTIVE):
        return MODE_ADAPTIVE
    raise DataError(f"unknown estimator mode {text!r}")


def parse_bench_file(path):
    """Flat key=value benchmark spec file; '#' starts a comment."""
    fields = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}: line {lineno}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key in ("p", "n", "runs", "seed", "grid_size"):
                fields[key] = int(value)
            elif key in ("kappa", "p_er"):
                fields[key] = float(value)
            elif key == "lambda":
                fields["lambdas"] = (float(value),)
            elif key == "lambdas":
                fields["lambdas"] = tuple(float(v) for v in value.split(","))
            elif key == "mode":
                fields["mode"] = _parse_mode(value)
            elif key in ("select", "validate"):
                fields[key] = _parse_bool(value)
            elif key in ("graph", "threshold", "scale_mode"):
                fields[key] = value
            else:
                raise DataError(f"{path}: line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise DataError(f"{path}: line {lineno}: {exc}") from exc
    return fields


def _bench_spec(args):
    if args.spec:
        fields = parse_bench_file(args.spec)
        if "graph" not in fields:
            raise DataError(f"{args.spec}: missing required key 'graph'")
    else:
        if not args.graph:
            raise DataError("either --spec or --graph is required")
        fields = {
            "graph": args.graph,
            "p": args.p,
            "n": args.n,
            "kappa": args.kappa,
            "p_er": args.p_er,
            "runs": args.runs,
            "seed": args.seed,
            "mode": _parse_mode(args.mode),
            "grid_size": args.grid_size,
            "select": args.select,
            "threshold": args.threshold,
            "validate": args.validate,
        }
        if args.lam is not None:
            fields["lambdas"] = (args.lam,)
    try:
        return BenchSpec(**fields)
    except (TypeError, ValueError) as exc:
        raise DataError(f"invalid benchmark spec: {exc}") from exc


def cmd_bench(args):
    spec = _bench_spec(args)
    report = monte_carlo(spec, threads=args.threads)
    outdir = _outdir(args)
    (outdir / "bench.csv").write_text(report.csv_text())
    (outdir / "summary.txt").write_text(report.summary_text())
    _write_manifest(
        outdir,
        "bench",
        {**asdict(spec), "threads": args.threads},
        {"output_dir": str(outdir), "spec_file": str(args.spec) if args.spec else None},
    )
    succeeded = spec.runs - len(report.failures)
    print(report.summary_text(), end="")
    if succeeded < 0.9 * spec.runs:
        print(
            f"error: only {succeeded}/{spec.runs} runs succeeded", file=sys.stderr
        )
        return EXIT_PARTIAL
    return EXIT_OK


def _add_solver_flags(parser):
    parser.add_argument("--rho0", type=_positive_float, default=2.0,
                        help="initial ADMM penalty (default 2)")
    parser.add_argument("--mu", type=_positive_float, default=10.0,
                        help="residual-imbalance factor for penalty adaptation (default 10)")
    parser.add_argument("--tau-abs", type=_positive_float, default=1e-4, dest="tau_abs",
                        help="absolute convergence tolerance (default 1e-4)")
    parser.add_argument("--tau-rel", type=_positive_float, default=1e-4, dest="tau_rel",
                        help="relative convergence tolerance (default 1e-4)")
    parser.add_argument("--epsilon", type=_positive_float, default=1e-5,
                        help="log-sum penalty offset (default 1e-5)")
    parser.add_argument("--outer", type=_positive_int, default=2,
                        help="outer reweighting iterations; 1 = plain constrained lasso (default 2)")
    parser.add_argument("--max-inner", type=_positive_int, default=500, dest="max_inner",
                        help="inner ADMM iteration cap (default 500)")


def build_parser():
    parser = _Parser(prog="tpgraph", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"tpgraph {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_est = sub.add_parser("estimate", help="fit a graph at a fixed lambda")
    p_est.add_argument("--input", required=True, help="samples CSV (rows = observations)")
    p_est.add_argument("--output-dir", required=True, dest="output_dir")
    p_est.add_argument("--lambda", type=_positive_float, required=True, dest="lam",
                       help="regularization scalar")
    p_est.add_argument("--standardize", action="store_true",
                       help="center and scale columns to unit variance first")
    _add_solver_flags(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_sel = sub.add_parser("select", help="pick lambda over a BIC grid, then fit")
    p_sel.add_argument("--input", required=True)
    p_sel.add_argument("--output-dir", required=True, dest="output_dir")
    p_sel.add_argument("--grid", choices=[RANGE_SYNTHETIC, RANGE_REAL],
                       default=RANGE_SYNTHETIC, help="grid range regime")
    p_sel.add_argument("--grid-size", type=_positive_int, default=10, dest="grid_size")
    p_sel.add_argument("--standardize", action="store_true")
    p_sel.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    _add_solver_flags(p_sel)
    p_sel.set_defaults(func=cmd_select)

    p_syn = sub.add_parser("synth", help="generate a synthetic benchmark data set")
    p_syn.add_argument("--graph", choices=list(GRAPH_KINDS), required=True)
    p_syn.add_argument("--p", type=_node_count, required=True, help="number of nodes")
    p_syn.add_argument("--n", type=_positive_int, required=True, help="number of samples")
    p_syn.add_argument("--kappa", type=_nonneg_float, default=0.0,
                       help="diagonal shift of the true Laplacian (default 0)")
    p_syn.add_argument("--p-er", type=_probability, default=0.03, dest="p_er",
                       help="edge probability for er graphs (default 0.03)")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--output-dir", required=True, dest="output_dir")
    p_syn.set_defaults(func=cmd_synth)

    p_ben = sub.add_parser("bench", help="Monte-Carlo benchmark over synthetic models")
    p_ben.add_argument("--spec", help="flat key=value benchmark spec file")
    p_ben.add_argument("--graph", choices=list(GRAPH_KINDS))
    p_ben.add_argument("--p", type=_node_count, default=100)
    p_ben.add_argument("--n", type=_positive_int, default=400)
    p_ben.add_argument("--kappa", type=_nonneg_float, default=0.0)
    p_ben.add_argument("--p-er", type=_probability, default=0.03, dest="p_er")
    p_ben.add_argument("--runs", type=_positive_int, default=1)
    p_ben.add_argument("--seed", type=int, default=0)
    p_ben.add_argument("--mode", default="cal", help="cl or cal (default cal)")
    p_ben.add_argument("--lambda", type=_positive_float, default=None, dest="lam",
                       help="fixed lambda; omit to sweep an auto-derived grid")
    p_ben.add_argument("--grid-size", type=_positive_int, default=10, dest="grid_size")
    p_ben.add_argument("--select", action="store_true",
                       help="BIC-select lambda per run instead of sweeping")
    p_ben.add_argument("--threshold", choices=[THRESHOLD_NEG, THRESHOLD_TWO_SIDED],
                       default=THRESHOLD_NEG,
                       help="V-update variant; two-sided drops the sign constraint")
    p_ben.add_argument("--validate", action="store_true",
                       help="audit structural invariants on every estimate")
    p_ben.add_argument("--threads", type=_positive_int, default=os.cpu_count() or 1)
    p_ben.add_argument("--output-dir", required=True, dest="output_dir")
    p_ben.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"tpgraph: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"tpgraph: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"tpgraph: invalid value: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
