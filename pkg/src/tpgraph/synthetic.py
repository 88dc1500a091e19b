"""Ground-truth graph models and Gaussian sampling for benchmarks.

Generators produce a combinatorial Laplacian precision matrix with edge
weights drawn uniformly from [0.1, 0.3] (stored negated off-diagonal), an
optional diagonal shift ``kappa`` to make it positive definite, and the
pseudo-inverse square-root factor through which zero-mean Gaussian samples
are drawn.

Randomness comes from a caller-supplied ``numpy.random.Generator``
(``default_rng``, PCG64 with ziggurat normals), so a fixed seed reproduces
runs bit-for-bit across platforms. Draw order is fixed: pair inclusion
flags in row-major upper-triangle order, isolated-node repairs by
ascending node index, edge weights in sorted edge order, then samples.
"""

from dataclasses import dataclass

import numpy as np

from .graph import EdgeSet
from .linalg import pinv_sqrt_factor

WEIGHT_LOW = -0.3
WEIGHT_HIGH = -0.1

GRAPH_CHAIN = "chain"
GRAPH_ER = "er"
GRAPH_ER2 = "er2"
GRAPH_KINDS = (GRAPH_CHAIN, GRAPH_ER, GRAPH_ER2)


@dataclass
class GroundTruthModel:
    """A sampled truth: Laplacian precision, shift, edges, sampler factor."""

    omega0: np.ndarray
    kappa: float
    edges0: EdgeSet
    sampler_factor: np.ndarray

    @property
    def omega_true(self):
        """Shifted precision ``omega0 + kappa * I`` actually sampled from."""
        return self.omega0 + self.kappa * np.eye(self.omega0.shape[0])


def chain_graph(p):
    """Path graph: node i connected to i+1."""
    if p < 2:
        raise ValueError(f"chain graph needs p >= 2, got {p}")
    return EdgeSet(p, frozenset((i, i + 1) for i in range(p - 1)))


def er_graph(p, p_er, rng):
    """Erdos-Renyi graph with isolated nodes repaired to degree >= 1.

    Each of the p(p-1)/2 pairs is included independently with probability
    ``p_er``; afterwards every degree-zero node (ascending index) gains one
    edge to a uniformly chosen other node, so the result has minimum
    degree 1.
    """
    if p < 2:
        raise ValueError(f"graph needs p >= 2, got {p}")
    if not 0.0 <= p_er <= 1.0:
        raise ValueError(f"edge probability must be in [0, 1], got {p_er}")
    i_idx, j_idx = np.triu_indices(p, k=1)
    mask = rng.random(i_idx.size) < p_er
    edges = set(zip(i_idx[mask].tolist(), j_idx[mask].tolist()))
    degree = np.zeros(p, dtype=int)
    for i, j in edges:
        degree[i] += 1
        degree[j] += 1
    for node in range(p):
        if degree[node] == 0:
            other = int(rng.integers(p - 1))
            if other >= node:
                other += 1
            edge = (min(node, other), max(node, other))
            if edge not in edges:
                edges.add(edge)
                degree[edge[0]] += 1
                degree[edge[1]] += 1
    return EdgeSet(p, frozenset(edges))


def two_component_er(p, p_er, rng):
    """Two independent Erdos-Renyi blocks with no cross-block edges.

    Blocks have sizes ``p // 2`` and ``p - p // 2``; isolated-node repair
    happens within each block, never across.
    """
    half = p // 2
    first = er_graph(half, p_er, rng)
    second = er_graph(p - half, p_er, rng)
    shifted = frozenset((i + half, j + half) for i, j in second.edges)
    return EdgeSet(p, first.edges | shifted)


def laplacian_precision(edges, rng):
    """Combinatorial Laplacian with uniform [-0.3, -0.1] edge entries.

    Off-diagonal entries on edges are drawn uniformly, mirrored, and the
    diagonal set to the negated row sums, so rows sum to zero.
    """
    p = edges.p
    omega = np.zeros((p, p))
    ordered = sorted(edges.edges)
    values = rng.uniform(WEIGHT_LOW, WEIGHT_HIGH, size=len(ordered))
    for (i, j), val in zip(ordered, values):
        omega[i, j] = val
        omega[j, i] = val
    np.fill_diagonal(omega, -omega.sum(axis=1))
    return omega


def shift_and_factor(omega0, kappa):
    """Shift the Laplacian by ``kappa * I`` and factor its pseudo-inverse.

    Returns ``(omega_true, phi)`` with ``phi @ phi.T`` equal to the
    pseudo-inverse of ``omega0 + kappa * I``.
    """
    if kappa < 0:
        raise ValueError(f"kappa must be nonnegative, got {kappa}")
    omega0 = np.asarray(omega0, dtype=float)
    omega_true = omega0 + kappa * np.eye(omega0.shape[0])
    return omega_true, pinv_sqrt_factor(omega_true)


def sample_gaussian(phi, n, rng):
    """Draw ``n`` rows of ``phi @ w`` with standard-normal ``w``."""
    if n < 1:
        raise ValueError(f"need n >= 1 samples, got {n}")
    phi = np.asarray(phi, dtype=float)
    w = rng.standard_normal((n, phi.shape[1]))
    return w @ phi.T


def make_ground_truth(kind, p, p_er, kappa, rng):
    """Generate a full ground-truth model of the requested graph kind."""
    if kind == GRAPH_CHAIN:
        edges = chain_graph(p)
    elif kind == GRAPH_ER:
        edges = er_graph(p, p_er, rng)
    elif kind == GRAPH_ER2:
        edges = two_component_er(p, p_er, rng)
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    omega0 = laplacian_precision(edges, rng)
    _, phi = shift_and_factor(omega0, kappa)
    return GroundTruthModel(omega0=omega0, kappa=kappa, edges0=edges, sampler_factor=phi)
