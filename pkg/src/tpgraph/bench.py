"""Monte-Carlo benchmark harness over the synthetic generators.

Each run derives its own generator seed (``master seed + run index``),
samples a fresh ground truth and data set, fits the estimator per grid
value (or via per-run BIC selection), and scores edge recovery and weight
error. Aggregation reports a population mean and standard deviation per
grid value and metric, collected in run order so results are identical
regardless of worker count.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .admm import THRESHOLD_NEG, THRESHOLD_TWO_SIDED, SolverConfig
from .estimator import MODE_ADAPTIVE, MODE_LASSO, EstimatorSpec, estimate
from .exceptions import NumericalError
from .linalg import sample_covariance
from .metrics import FIXED_ONE, LEAST_SQUARES, MetricsReport, f1_score, frob_error
from .selection import RANGE_SYNTHETIC, find_lambda_sm, lambda_grid, select_lambda
from .synthetic import GRAPH_KINDS, make_ground_truth, sample_gaussian

SELECTED = "selected"

# Slack allowed when checking that the log-sum objective does not increase
# across outer reweighting iterations.
DESCENT_SLACK = 1e-6


@dataclass(frozen=True)
class BenchSpec:
    """One benchmark configuration: model, sample size, runs, estimator."""

    graph: str
    p: int
    n: int
    kappa: float = 0.0
    p_er: float = 0.03
    runs: int = 1
    seed: int = 0
    mode: str = MODE_ADAPTIVE
    lambdas: tuple | None = None
    grid_size: int = 10
    select: bool = False
    scale_mode: str = FIXED_ONE
    threshold: str = THRESHOLD_NEG
    validate: bool = False

    def __post_init__(self):
        if self.graph not in GRAPH_KINDS:
            raise ValueError(f"unknown graph kind {self.graph!r}")
        if self.p < 2:
            raise ValueError(f"need p >= 2, got {self.p}")
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.runs < 1:
            raise ValueError(f"need runs >= 1, got {self.runs}")
        if not 0.0 <= self.p_er <= 1.0:
            raise ValueError(f"p_er must be in [0, 1], got {self.p_er}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        if self.mode not in (MODE_LASSO, MODE_ADAPTIVE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.scale_mode not in (FIXED_ONE, LEAST_SQUARES):
            raise ValueError(f"unknown scale mode {self.scale_mode!r}")
        if self.threshold not in (THRESHOLD_NEG, THRESHOLD_TWO_SIDED):
            raise ValueError(f"unknown threshold variant {self.threshold!r}")
        if self.lambdas is not None:
            lams = tuple(float(v) for v in self.lambdas)
            if not lams or any(v <= 0 for v in lams):
                raise ValueError("lambdas must be a nonempty list of positive values")
            object.__setattr__(self, "lambdas", lams)


@dataclass
class AggregateRecord:
    """Mean/std of one metric at one grid value over successful runs."""

    lam: float | None
    metric: str
    mean: float
    std: float
    runs: int


@dataclass
class BenchReport:
    """Aggregated benchmark output plus per-run bookkeeping."""

    spec: BenchSpec
    lambdas: tuple | None
    records: list
    failures: list
    run_seconds: list
    violations: list = field(default_factory=list)

    def mean_of(self, metric, lam=None):
        for rec in self.records:
            if rec.metric == metric and (rec.lam == lam or (lam is None and rec.lam is None)):
                return rec.mean
        raise KeyError(f"no record for metric {metric!r} at lambda {lam!r}")

    def curve(self, metric):
        """Grid values and their means for one metric, in grid order."""
        pairs = [(r.lam, r.mean) for r in self.records if r.metric == metric and r.lam is not None]
        return pairs

    def best_mean(self, metric, maximize=True):
        """(lambda, mean) attaining the best mean of ``metric`` over the grid."""
        pairs = self.curve(metric)
        if not pairs:
            raise KeyError(f"no grid records for metric {metric!r}")
        pick = max if maximize else min
        return pick(pairs, key=lambda t: t[1])

    def csv_text(self):
        """Deterministic aggregate table: lambda, metric, mean, std, runs."""
        lines = ["lambda,metric,mean,std,runs"]
        for rec in self.records:
            lam = SELECTED if rec.lam is None else format(rec.lam, ".17g")
            lines.append(
                f"{lam},{rec.metric},{format(rec.mean, '.17g')},"
                f"{format(rec.std, '.17g')},{rec.runs}"
            )
        return "\n".join(lines) + "\n"

    def summary_text(self):
        """Human-readable recap; includes wall-clock, so not reproducible."""
        s = self.spec
        lines = [
            f"benchmark: graph={s.graph} p={s.p} n={s.n} kappa={s.kappa} "
            f"p_er={s.p_er} runs={s.runs} seed={s.seed}",
            f"estimator: mode={s.mode} threshold={s.threshold} "
            f"{'BIC-selected lambda' if s.select else 'lambda grid sweep'}",
        ]
        if self.lambdas:
            lines.append("lambdas: " + ", ".join(format(v, ".6g") for v in self.lambdas))
        for rec in self.records:
            lam = SELECTED if rec.lam is None else format(rec.lam, ".6g")
            lines.append(
                f"  lambda={lam:>12} {rec.metric:>12}: "
                f"{rec.mean:.4f} +/- {rec.std:.4f} ({rec.runs} runs)"
            )
        ok = len(self.run_seconds)
        if ok:
            lines.append(
                f"runs succeeded: {ok}/{s.runs}, "
                f"mean time per run: {np.mean(self.run_seconds):.2f} s"
            )
        for idx, msg in self.failures:
            lines.append(f"  run {idx} failed: {msg}")
        if self.spec.validate:
            lines.append(f"structural violations: {len(self.violations)}")
        return "\n".join(lines) + "\n"


def masked_offdiag(est):
    """Off-diagonal precision estimate restricted to the certified support.

    Magnitudes come from ``omega_hat``; the sparsity pattern from the
    consensus variable's exact zeros.
    """
    m = np.where(est.v != 0, est.omega_hat, 0.0)
    np.fill_diagonal(m, 0.0)
    return m


def _offdiag(a):
    out = np.array(a, dtype=float, copy=True)
    np.fill_diagonal(out, 0.0)
    return out


def check_estimate(est, constrained=True, label=""):
    """Structural invariant audit of a finished estimate.

    Returns a list of violation descriptions (empty when clean): consensus
    off-diagonal signs, weight nonnegativity and support, Laplacian row
    sums, positive definiteness of the precision estimate, and descent of
    the log-sum objective across outer iterations.
    """
    violations = []
    v_off = _offdiag(est.v)
    if constrained and np.any(v_off > 0):
        violations.append(f"{label}: positive off-diagonal in consensus variable")
    if np.any(est.w_hat < 0):
        violations.append(f"{label}: negative weight")
    if np.any(np.diag(est.w_hat) != 0):
        violations.append(f"{label}: nonzero weight diagonal")
    support = {(i, j) for i, j in zip(*np.nonzero(np.triu(est.w_hat, k=1)))}
    if not support <= est.edges.edges:
        violations.append(f"{label}: weight support not within edge set")
    row_sums = est.laplacian_hat.sum(axis=1)
    if np.max(np.abs(row_sums)) > 1e-12 * max(1.0, float(np.max(np.abs(est.laplacian_hat)))):
        violations.append(f"{label}: Laplacian row sums exceed tolerance")
    try:
        np.linalg.cholesky(est.omega_hat)
    except np.linalg.LinAlgError:
        violations.append(f"{label}: precision estimate not positive definite")
    objectives = [d.objective for d in est.diagnostics]
    for prev, curr in zip(objectives, objectives[1:]):
        if curr > prev + DESCENT_SLACK:
            violations.append(
                f"{label}: objective increased across outer iterations "
                f"({prev:.8g} -> {curr:.8g})"
            )
    return violations


def iterate_monitor(violations, constrained=True, label=""):
    """Solver callback that audits every iterate.

    Checks the consensus variable's off-diagonal signs (exactly, under the
    default constraint) and positive definiteness of each precision
    iterate via a Cholesky factorization, appending findings to
    ``violations``.
    """

    def monitor(state):
        if constrained and np.any(_offdiag(state.v) > 0):
            violations.append(f"{label}: iterate with positive consensus off-diagonal")
        try:
            np.linalg.cholesky(state.omega)
        except np.linalg.LinAlgError:
            violations.append(f"{label}: iterate not positive definite")

    return monitor


def _estimator_spec(spec, lam):
    k_outer = 1 if spec.mode == MODE_LASSO else 2
    return EstimatorSpec(
        lam=float(lam),
        mode=spec.mode,
        solver=SolverConfig(
            lambda0=float(lam), k_outer_max=k_outer, threshold=spec.threshold
        ),
    )


def derive_grid(spec):
    """Auto-derive the lambda grid from a pilot instance (run 0's seed)."""
    rng = np.random.default_rng(spec.seed)
    model = make_ground_truth(spec.graph, spec.p, spec.p_er, spec.kappa, rng)
    x = sample_gaussian(model.sampler_factor, spec.n, rng)
    sigma = sample_covariance(x)
    lam_sm = find_lambda_sm(sigma, _estimator_spec(spec, 1.0))
    return tuple(lambda_grid(lam_sm, RANGE_SYNTHETIC, spec.grid_size).values)


def _score(est, model, scale_mode):
    f1, precision, recall = f1_score(est.edges, model.edges0)
    err, c = frob_error(masked_offdiag(est), _offdiag(model.omega0), scale_mode)
    return MetricsReport(f1=f1, precision=precision, recall=recall, frob_error=err, scale_c=c)


def monte_carlo(spec, threads=1):
    """Execute a benchmark specification and aggregate its metrics.

    Runs are independent given their derived seeds and may execute on a
    thread pool; per-run failures are recorded and excluded from the
    aggregates rather than aborting the benchmark.
    """
    lambdas = None
    if not spec.select:
        lambdas = spec.lambdas if spec.lambdas is not None else derive_grid(spec)

    constrained = spec.threshold == THRESHOLD_NEG

    def run_one(r):
        started = time.perf_counter()
        violations = []
        label = f"run {r}"
        callback = iterate_monitor(violations, constrained, label) if spec.validate else None
        try:
            rng = np.random.default_rng(spec.seed + r)
            model = make_ground_truth(spec.graph, spec.p, spec.p_er, spec.kappa, rng)
            x = sample_gaussian(model.sampler_factor, spec.n, rng)
            if spec.select:
                report = select_lambda(
                    x, _estimator_spec(spec, 1.0), RANGE_SYNTHETIC, spec.grid_size
                )
                est = report.estimate
                if spec.validate:
                    violations.extend(check_estimate(est, constrained, label))
                scores = {None: (_score(est, model, spec.scale_mode), report.lambda_star)}
            else:
                sigma = sample_covariance(x)
                scores = {}
                for lam in lambdas:
                    est = estimate(sigma, _estimator_spec(spec, lam), callback=callback)
                    if spec.validate:
                        violations.extend(
                            check_estimate(est, constrained, f"{label} lambda {lam:.6g}")
                        )
                    scores[lam] = (_score(est, model, spec.scale_mode), None)
        except NumericalError as exc:
            return ("fail", r, str(exc), violations, time.perf_counter() - started)
        return ("ok", r, scores, violations, time.perf_counter() - started)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(run_one, range(spec.runs)))
    else:
        outcomes = [run_one(r) for r in range(spec.runs)]

    failures = []
    run_seconds = []
    violations = []
    per_run = []
    for status, r, payload, viols, elapsed in outcomes:
        violations.extend(viols)
        if status == "fail":
            failures.append((r, payload))
        else:
            per_run.append(payload)
            run_seconds.append(elapsed)

    records = []
    ok = len(per_run)
    metric_fields = ["f1", "precision", "recall", "frob_error"]
    if spec.scale_mode == LEAST_SQUARES:
        metric_fields.append("scale_c")
    keys = [None] if spec.select else list(lambdas)
    for lam in keys:
        if ok:
            reports = [scores[lam][0] for scores in per_run]
            for name in metric_fields:
                values = np.array([getattr(rep, name) for rep in reports])
                records.append(
                    AggregateRecord(lam, name, float(values.mean()), float(values.std()), ok)
                )
            if spec.select:
                stars = np.array([scores[lam][1] for scores in per_run])
                records.append(
                    AggregateRecord(lam, "lambda_star", float(stars.mean()), float(stars.std()), ok)
                )
        else:
            for name in metric_fields:
                records.append(AggregateRecord(lam, name, float("nan"), float("nan"), 0))

    return BenchReport(
        spec=spec,
        lambdas=lambdas,
        records=records,
        failures=failures,
        run_seconds=run_seconds,
        violations=violations,
    )
