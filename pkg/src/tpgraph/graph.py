"""Turning solver output into a graph.

The consensus variable's exact zeros define the edge set; edge weights come
from the (negated, clipped) off-diagonal of the precision estimate; the
combinatorial Laplacian is assembled as degree matrix minus weights.
Node indices are 0-based throughout the library (file outputs are 1-based).
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError


@dataclass(frozen=True)
class EdgeSet:
    """Undirected simple edges over ``p`` nodes, stored as (i, j) with i < j."""

    p: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"need at least one node, got p={self.p}")
        object.__setattr__(self, "edges", frozenset(map(tuple, self.edges)))
        for i, j in self.edges:
            if not (0 <= i < j < self.p):
                raise ValueError(f"edge ({i}, {j}) invalid for p={self.p}")

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(sorted(self.edges))

    def __contains__(self, pair):
        i, j = pair
        return (min(i, j), max(i, j)) in self.edges


@dataclass
class GraphEstimate:
    """Full output of one estimation: precision, weights, Laplacian, edges.

    ``diagnostics`` holds one record per outer reweighting iteration (see
    :class:`tpgraph.estimator.OuterDiagnostics`).
    """

    omega_hat: np.ndarray
    v: np.ndarray
    w_hat: np.ndarray
    laplacian_hat: np.ndarray
    edges: EdgeSet
    diagnostics: list = field(default_factory=list)


def extract_edges(v):
    """Edge set from the exact off-diagonal sparsity pattern of ``v``.

    Thresholding produces exact zeros, so the test is ``v[i, j] != 0``
    with no magnitude tolerance.
    """
    v = np.asarray(v)
    p = v.shape[0]
    i_idx, j_idx = np.nonzero(np.triu(v, k=1))
    return EdgeSet(p, frozenset(zip(i_idx.tolist(), j_idx.tolist())))


def build_weights(omega_hat, edges):
    """Nonnegative weight matrix ``max(0, -omega_hat)`` masked to ``edges``.

    The sparsity pattern is certified by the consensus variable, while
    ``omega_hat`` carries the magnitudes; entries off the edge set are
    exactly zero, as is the diagonal.
    """
    omega_hat = np.asarray(omega_hat, dtype=float)
    w = np.zeros_like(omega_hat)
    for i, j in edges:
        wij = max(0.0, -omega_hat[i, j])
        w[i, j] = wij
        w[j, i] = wij
    return w


def build_laplacian(w):
    """Combinatorial Laplacian ``D - W`` of a nonnegative weight matrix."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise DataError("weight matrix has negative entries")
    return np.diag(w.sum(axis=1)) - w


def from_solution(omega_hat, v, diagnostics=None):
    """Assemble a :class:`GraphEstimate` from final solver iterates."""
    edges = extract_edges(v)
    w_hat = build_weights(omega_hat, edges)
    return GraphEstimate(
        omega_hat=omega_hat,
        v=v,
        w_hat=w_hat,
        laplacian_hat=build_laplacian(w_hat),
        edges=edges,
        diagnostics=list(diagnostics) if diagnostics else [],
    )
