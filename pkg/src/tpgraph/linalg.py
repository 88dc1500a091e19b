"""Dense symmetric-matrix primitives.

Sample covariance and standardization of observation matrices, symmetric
eigendecomposition, and the pseudo-inverse square-root factor used both by
the solver and by the Gaussian sampler. All functions are pure and safe to
call concurrently.
"""

import numpy as np

from .exceptions import DataError, NumericalError

# Eigenvalues at or below RANK_TOL * max(eigenvalue) are treated as zero
# when forming pseudo-inverses; a shifted Laplacian with exact zero modes
# lands around 1e-15 numerically.
RANK_TOL = 1e-9


def _as_matrix(a, name="matrix"):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DataError(f"{name} must be 2-dimensional, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError(f"{name} contains non-finite entries")
    return a


def _as_square(a, name="matrix"):
    a = _as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DataError(f"{name} must be square, got shape {a.shape}")
    return a


def sample_covariance(x):
    """Sample covariance of an observation matrix, with divisor n.

    Parameters
    ----------
    x : ndarray, shape (n, p)
        Rows are observations, columns are variables. Requires n >= 2.

    Returns
    -------
    sigma : ndarray, shape (p, p)
        (1/n) Xc^T Xc with column means removed; exactly symmetric.
    """
    x = _as_matrix(x, "sample matrix")
    n = x.shape[0]
    if n < 2:
        raise DataError(f"need at least 2 observations, got {n}")
    xc = x - x.mean(axis=0)
    sigma = xc.T @ xc / n
    return (sigma + sigma.T) / 2.0


def standardize(x):
    """Center each column and scale it to unit variance (divisor n).

    Raises
    ------
    DataError
        If any column has zero variance; the message names the first
        offending column index.
    """
    x = _as_matrix(x, "sample matrix")
    if x.shape[0] < 2:
        raise DataError(f"need at least 2 observations, got {x.shape[0]}")
    xc = x - x.mean(axis=0)
    var = np.mean(xc * xc, axis=0)
    degenerate = np.flatnonzero(var == 0.0)
    if degenerate.size:
        raise DataError(f"column {degenerate[0]} has zero variance")
    return xc / np.sqrt(var)


def sym_eigendecompose(a):
    """Eigendecomposition of a symmetric matrix.

    The input is symmetrized as (A + A^T)/2 before the decomposition,
    which removes the asymmetry that accumulates over solver iterations.

    Returns
    -------
    eigenvalues : ndarray, shape (p,)
        In ascending order.
    eigenvectors : ndarray, shape (p, p)
        Orthogonal; column ``i`` pairs with ``eigenvalues[i]``.
    """
    a = _as_square(a)
    s = (a + a.T) / 2.0
    return np.linalg.eigh(s)


def pinv_sqrt_factor(a, tol=RANK_TOL):
    """Symmetric factor ``phi`` with ``phi @ phi.T`` = pseudo-inverse of ``a``.

    Eigenvalues below ``tol * max(eigenvalue)`` are treated as exact zeros
    and excluded from the inversion, so rank-deficient PSD matrices (e.g.
    combinatorial Laplacians) are handled without blow-up.

    Raises
    ------
    NumericalError
        If ``a`` has an eigenvalue below ``-tol * max(eigenvalue)``,
        i.e. it is not positive semi-definite within tolerance.
    """
    w, q = sym_eigendecompose(a)
    scale = max(w[-1], 0.0)
    if w[0] < -tol * scale:
        raise NumericalError(
            f"matrix is not positive semi-definite: min eigenvalue {w[0]:.3e}"
        )
    keep = w > tol * scale
    d = np.zeros_like(w)
    d[keep] = 1.0 / np.sqrt(w[keep])
    phi = (q * d) @ q.T
    return (phi + phi.T) / 2.0
