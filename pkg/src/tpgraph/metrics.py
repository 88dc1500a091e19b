"""Edge-recovery and weight-error metrics against a known truth."""

from dataclasses import dataclass

import numpy as np

FIXED_ONE = "fixed-one"
LEAST_SQUARES = "least-squares"


@dataclass
class MetricsReport:
    """Per-run evaluation record."""

    f1: float
    precision: float
    recall: float
    frob_error: float
    scale_c: float = 1.0


def f1_score(est, truth):
    """Edge-detection F1 with its precision/recall components.

    Precision is defined as 0 for an empty estimate, and F1 as 0 when
    precision + recall is 0.
    """
    if est.p != truth.p:
        raise ValueError(f"edge sets disagree on p: {est.p} vs {truth.p}")
    inter = len(est.edges & truth.edges)
    precision = inter / len(est) if len(est) else 0.0
    recall = inter / len(truth) if len(truth) else 0.0
    total = precision + recall
    f1 = 2.0 * precision * recall / total if total > 0 else 0.0
    return f1, precision, recall


def frob_error(omega_hat_off, omega0_off, scale_mode=FIXED_ONE):
    """Normalized Frobenius error of the off-diagonal precision estimate.

    Returns ``(||c*A - B||_F / ||B||_F, c)`` for estimate ``A`` against
    truth ``B``, with ``c = 1`` or the least-squares scale
    ``<A, B> / ||A||^2`` (0 for an all-zero estimate).

    Raises
    ------
    ValueError
        If the truth is all zero (the metric is undefined).
    """
    a = np.asarray(omega_hat_off, dtype=float)
    b = np.asarray(omega0_off, dtype=float)
    norm_b = np.linalg.norm(b)
    if norm_b == 0:
        raise ValueError("true off-diagonal is all zero; error norm undefined")
    if scale_mode == FIXED_ONE:
        c = 1.0
    elif scale_mode == LEAST_SQUARES:
        denom = float(np.sum(a * a))
        c = float(np.sum(a * b)) / denom if denom > 0 else 0.0
    else:
        raise ValueError(f"unknown scale mode {scale_mode!r}")
    return float(np.linalg.norm(c * a - b) / norm_b), c
