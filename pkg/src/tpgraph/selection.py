"""BIC-driven choice of the regularization scalar over a log-spaced grid.

The grid endpoints come from a data-driven heuristic: find the smallest
lambda that produces an edge-free model (by doubling then bisecting), then
span two decades below it for synthetic-style data, or the narrower
``[lambda_sm/160, lambda_sm/4]`` band for real data.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimator import estimate
from .exceptions import NumericalError
from .linalg import sample_covariance

RANGE_SYNTHETIC = "synthetic"
RANGE_REAL = "real"

# Bisection stops once the bracket's relative width drops below this.
BRACKET_WIDTH = 0.05
# Doubling search gives up past this multiple of the covariance scale.
SEARCH_CEILING = 1e6
# Downward search for an already-edge-free start stops at scale * 2**-30.
FLOOR_HALVINGS = 30


@dataclass(frozen=True)
class LambdaGrid:
    """Ascending log-spaced candidate values derived from ``lambda_sm``."""

    values: tuple
    lambda_sm: float
    range_mode: str


@dataclass
class LambdaRecord:
    """One grid evaluation: value, BIC, edge count, solver convergence."""

    lam: float
    bic: float
    edge_count: int
    converged: bool


@dataclass
class SelectionReport:
    """Grid sweep outcome: per-value records and the BIC-minimizing choice."""

    records: list
    lambda_star: float
    estimate: object
    grid: LambdaGrid = field(default=None)


def bic(sigma, omega_hat, edge_count, n):
    """Bayesian information criterion for a fitted precision matrix.

    ``tr(sigma @ omega_hat) - logdet(omega_hat) + (log(n)/n) * edge_count``.

    Raises
    ------
    NumericalError
        If ``omega_hat`` is not positive definite.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    omega_hat = np.asarray(omega_hat, dtype=float)
    sign, logdet = np.linalg.slogdet(omega_hat)
    if sign <= 0:
        raise NumericalError("omega_hat is not positive definite; BIC undefined")
    fit = float(np.sum(np.asarray(sigma) * omega_hat) - logdet)
    return fit + np.log(n) / n * edge_count


def find_lambda_sm(sigma, spec):
    """Smallest regularization value that yields an edge-free estimate.

    Starts from the largest off-diagonal magnitude of ``sigma``, doubles
    until the estimate has no edges, then bisects the bracket down to 5%
    relative width and returns its edge-free end. If even the starting
    value is edge-free, the search walks downward instead; when no edged
    model exists at all (e.g. diagonal covariance) the lower search floor
    is returned, which is still edge-free.

    Raises
    ------
    NumericalError
        If no edge-free model is found below ``1e6`` times the covariance
        scale.
    """
    sigma = np.asarray(sigma, dtype=float)
    off = sigma.copy()
    np.fill_diagonal(off, 0.0)
    scale = float(np.max(np.abs(off)))
    if scale == 0.0:
        scale = max(float(np.max(np.diag(sigma))), 1.0)

    def edge_free(lam):
        return len(estimate(sigma, spec.with_lambda(lam)).edges) == 0

    lam = scale
    if not edge_free(lam):
        lo = lam
        while True:
            lam *= 2.0
            if lam > SEARCH_CEILING * scale:
                raise NumericalError(
                    f"no edge-free model found up to lambda {lam:.3e}"
                )
            if edge_free(lam):
                break
            lo = lam
        hi = lam
    else:
        hi = lam
        floor = scale * 2.0 ** -FLOOR_HALVINGS
        lo = None
        while lam / 2.0 >= floor:
            lam /= 2.0
            if not edge_free(lam):
                lo = lam
                break
            hi = lam
        if lo is None:
            return hi

    while (hi - lo) > BRACKET_WIDTH * hi:
        mid = (lo + hi) / 2.0
        if edge_free(mid):
            hi = mid
        else:
            lo = mid
    return hi


def lambda_grid(lambda_sm, range_mode, count=10):
    """Log-spaced grid under ``lambda_sm`` for the given data regime.

    Synthetic mode spans ``[lambda_sm/100, lambda_sm]``; real mode spans
    ``[lambda_sm/160, lambda_sm/4]``. Endpoints are included exactly.
    """
    if lambda_sm <= 0:
        raise ValueError(f"lambda_sm must be positive, got {lambda_sm}")
    if range_mode == RANGE_SYNTHETIC:
        lo, hi = lambda_sm / 100.0, lambda_sm
    elif range_mode == RANGE_REAL:
        hi = lambda_sm / 4.0
        lo = hi / 40.0
    else:
        raise ValueError(f"unknown range mode {range_mode!r}")
    return LambdaGrid(
        values=tuple(np.geomspace(lo, hi, count).tolist()),
        lambda_sm=float(lambda_sm),
        range_mode=range_mode,
    )


def select_lambda(x, spec, range_mode=RANGE_SYNTHETIC, count=10, threads=1):
    """End-to-end selection: covariance, grid construction, BIC argmin.

    Grid points are independent and evaluated on a thread pool when
    ``threads > 1``; records are assembled in ascending lambda order and
    ties in BIC resolve to the smallest lambda.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    sigma = sample_covariance(x)
    lambda_sm = find_lambda_sm(sigma, spec)
    grid = lambda_grid(lambda_sm, range_mode, count)

    def fit(lam):
        return estimate(sigma, spec.with_lambda(lam))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            estimates = list(pool.map(fit, grid.values))
    else:
        estimates = [fit(lam) for lam in grid.values]

    records = []
    best = None
    for lam, est in zip(grid.values, estimates):
        rec = LambdaRecord(
            lam=float(lam),
            bic=bic(sigma, est.omega_hat, len(est.edges), n),
            edge_count=len(est.edges),
            converged=all(d.converged for d in est.diagnostics),
        )
        records.append(rec)
        if best is None or rec.bic < best[0].bic:
            best = (rec, est)
    return SelectionReport(
        records=records, lambda_star=best[0].lam, estimate=best[1], grid=grid
    )
