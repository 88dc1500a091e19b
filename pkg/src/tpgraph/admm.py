"""ADMM inner loop for sign-constrained penalized inverse-covariance fits.

Minimizes ``tr(sigma @ omega) - logdet(omega) + sum_{i != j} lam[i,j] *
|omega[i,j]|`` over positive-definite ``omega`` whose off-diagonal entries
are constrained non-positive. The splitting alternates a closed-form
eigendecomposition update for ``omega``, an elementwise thresholding update
for the consensus variable ``v``, and a scaled dual update, with the penalty
parameter adapted from the primal/dual residual balance.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError, NumericalError
from .linalg import sym_eigendecompose

THRESHOLD_NEG = "neg"
THRESHOLD_TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class SolverConfig:
    """Tuning constants for the inner ADMM loop and outer reweighting.

    ``lambda0`` is the single regularization scalar; everything else
    defaults to the standard working values. ``threshold`` selects the
    V-update proximal map: ``"neg"`` keeps the non-positive off-diagonal
    constraint, ``"two-sided"`` drops it (plain soft thresholding), which
    exists purely as an ablation for benchmarking the constraint's value.
    """

    lambda0: float
    rho0: float = 2.0
    mu: float = 10.0
    tau_abs: float = 1e-4
    tau_rel: float = 1e-4
    epsilon: float = 1e-5
    k_outer_max: int = 2
    k_inner_max: int = 500
    threshold: str = THRESHOLD_NEG

    def __post_init__(self):
        for name in ("lambda0", "rho0", "mu", "tau_abs", "tau_rel", "epsilon"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.k_outer_max < 1:
            raise ValueError(f"k_outer_max must be >= 1, got {self.k_outer_max}")
        if self.k_inner_max < 1:
            raise ValueError(f"k_inner_max must be >= 1, got {self.k_inner_max}")
        if self.threshold not in (THRESHOLD_NEG, THRESHOLD_TWO_SIDED):
            raise ValueError(f"unknown threshold variant {self.threshold!r}")


@dataclass
class AdmmState:
    """One solver iterate: primal pair (omega, v), scaled dual u, penalty rho."""

    omega: np.ndarray
    v: np.ndarray
    u: np.ndarray
    rho: float


@dataclass
class InnerResult:
    """Terminal state of one inner solve."""

    omega: np.ndarray
    v: np.ndarray
    iterations: int
    converged: bool
    d_primal: float
    d_dual: float


def s_neg(a, beta):
    """Soft-threshold negative values of ``a`` by ``beta``; zero the rest.

    Computes ``max(0, 1 - beta/|a|) * min(a, 0)`` elementwise, with the
    value at ``a = 0`` defined as 0. Accepts scalars or arrays (``beta``
    broadcasts against ``a``).
    """
    a = np.asarray(a, dtype=float)
    absa = np.abs(a)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        shrink = np.where(absa > 0.0, np.maximum(0.0, 1.0 - beta / absa), 0.0)
    return shrink * np.minimum(a, 0.0)


def soft_threshold(a, beta):
    """Plain two-sided soft thresholding, ``sign(a) * max(0, |a| - beta)``."""
    a = np.asarray(a, dtype=float)
    return np.sign(a) * np.maximum(0.0, np.abs(a) - beta)


def uniform_weights(p, lambda0):
    """Constant penalty matrix with ``lambda0`` off the diagonal, 0 on it."""
    lam = np.full((p, p), float(lambda0))
    np.fill_diagonal(lam, 0.0)
    return lam


def omega_update(sigma, v, u, rho):
    """Closed-form positive-definite update of the smooth block.

    Eigendecomposes ``sigma - rho * (v + u)`` and maps each eigenvalue d to
    ``(-d + sqrt(d^2 + 4 rho)) / (2 rho)``, which solves the stationarity
    condition ``sigma - omega^-1 + rho*(omega - v - u) = 0``. The result is
    positive definite for any rho > 0.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    w, q = sym_eigendecompose(sigma - rho * (v + u))
    d = (-w + np.sqrt(w * w + 4.0 * rho)) / (2.0 * rho)
    omega = (q * d) @ q.T
    return (omega + omega.T) / 2.0


def v_update(omega, u, weights, rho, threshold=THRESHOLD_NEG):
    """Proximal update of the consensus variable.

    Diagonal entries copy ``omega - u``; off-diagonal entries are
    thresholded by ``weights / rho``, with :func:`s_neg` under the default
    sign constraint or :func:`soft_threshold` for the unconstrained ablation.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    a = omega - u
    prox = s_neg if threshold == THRESHOLD_NEG else soft_threshold
    v = prox(a, np.asarray(weights) / rho)
    np.fill_diagonal(v, np.diag(a))
    return (v + v.T) / 2.0


def u_update(u, v, omega):
    """Scaled dual ascent step, ``u + (v - omega)``."""
    return u + (v - omega)


def check_convergence(omega, v, v_prev, u, rho, tau_abs, tau_rel, p):
    """Residual-based stopping test.

    Returns ``(converged, d_primal, d_dual)`` where the primal residual is
    ``||omega - v||_F``, the dual residual ``rho * ||v - v_prev||_F``, and
    the tolerances are ``p*tau_abs + tau_rel*max(||omega||_F, ||v||_F)``
    and ``p*tau_abs + tau_rel*||u||_F / rho`` respectively.
    """
    d_primal = float(np.linalg.norm(omega - v))
    d_dual = float(rho * np.linalg.norm(v - v_prev))
    tau_pri = p * tau_abs + tau_rel * max(np.linalg.norm(omega), np.linalg.norm(v))
    tau_dual = p * tau_abs + tau_rel * np.linalg.norm(u) / rho
    return bool(d_primal <= tau_pri and d_dual <= tau_dual), d_primal, d_dual


def adapt_rho(rho, d_primal, d_dual, mu, u):
    """Rebalance the penalty when one residual dominates the other by ``mu``.

    Doubling rho halves the scaled dual and vice versa, keeping the
    unscaled dual variable consistent. Returns ``(rho, u)`` unchanged when
    the residuals are within a factor ``mu`` of each other.
    """
    if d_primal > mu * d_dual:
        return 2.0 * rho, u / 2.0
    if d_dual > mu * d_primal:
        return rho / 2.0, 2.0 * u
    return rho, u


def solve_inner(sigma, weights, cfg, callback=None):
    """Run the ADMM loop to convergence or the iteration cap.

    Parameters
    ----------
    sigma : ndarray, shape (p, p)
        Sample covariance; every diagonal entry must be strictly positive
        (the initial iterate is ``diag(sigma)^-1``).
    weights : ndarray, shape (p, p)
        Symmetric nonnegative per-entry penalties; the diagonal is ignored.
    cfg : SolverConfig
    callback : callable, optional
        Called with an :class:`AdmmState` after each iteration's updates,
        before the penalty adaptation. Intended for iterate inspection.

    Returns
    -------
    InnerResult
        Hitting ``k_inner_max`` without convergence is not an error; the
        last iterate is returned with ``converged=False``.

    Raises
    ------
    DataError
        If ``sigma`` has a non-positive diagonal entry.
    NumericalError
        If an iterate stops being finite; the message reports the
        iteration index.
    """
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    diag = np.diag(sigma)
    if np.any(diag <= 0):
        bad = int(np.argmax(diag <= 0))
        raise DataError(
            f"covariance diagonal entry {bad} is {diag[bad]:.3e}; "
            "cannot initialize from diag(sigma)^-1"
        )

    omega = np.diag(1.0 / diag)
    v = np.zeros((p, p))
    u = np.zeros((p, p))
    rho = cfg.rho0
    converged = False
    d_primal = d_dual = float("inf")
    iterations = 0

    for k in range(cfg.k_inner_max):
        try:
            omega = omega_update(sigma, v, u, rho)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"solver diverged at iteration {k + 1}: {exc}") from exc
        v_prev = v
        v = v_update(omega, u, weights, rho, cfg.threshold)
        u = u_update(u, v, omega)
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(v)) and np.all(np.isfinite(u))):
            raise NumericalError(f"solver diverged at iteration {k + 1}: non-finite iterate")
        converged, d_primal, d_dual = check_convergence(
            omega, v, v_prev, u, rho, cfg.tau_abs, cfg.tau_rel, p
        )
        iterations = k + 1
        if callback is not None:
            callback(AdmmState(omega, v, u, rho))
        if converged:
            break
        rho, u = adapt_rho(rho, d_primal, d_dual, cfg.mu, u)

    return InnerResult(omega, v, iterations, converged, d_primal, d_dual)
