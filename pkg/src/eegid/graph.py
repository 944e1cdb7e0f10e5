"""Per-node graph features of a weighted connectivity graph.

Node degree, eigenvector centrality (power iteration), betweenness
centrality (Brandes accumulation over weighted shortest paths) and the
weighted clustering coefficient.  Edge weights must be non-negative;
correlation matrices are mapped through |rho| before graph use.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .connectivity import ConnectivityMatrix
from .errors import NoConvergence, ZeroGraph

GRAPH_METRICS = ("ND", "EC", "BC", "CC")

# relative tolerance for treating two accumulated path distances as equal
_PATH_TOL = 1e-12
_EC_TOL = 1e-10
_EC_MAX_ITER = 10000


@dataclass(frozen=True)
class WeightedGraph:
    """Undirected weighted graph as a symmetric non-negative matrix."""

    weights: np.ndarray
    node_labels: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("weights must be a square matrix")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be symmetric")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        w = w.copy()
        np.fill_diagonal(w, 0.0)
        object.__setattr__(self, "weights", w)
        if self.node_labels and len(self.node_labels) != w.shape[0]:
            raise ValueError("node_labels length must match node count")

    @property
    def n(self):
        return self.weights.shape[0]


def from_connectivity(cm: ConnectivityMatrix) -> WeightedGraph:
    """Connectivity matrix as a graph; COR entries pass through abs()."""
    w = np.abs(cm.values) if cm.metric == "COR" else cm.values
    return WeightedGraph(weights=w)


@dataclass(frozen=True)
class NodeScoreVector:
    metric: str
    scores: np.ndarray


def node_degree(g: WeightedGraph) -> NodeScoreVector:
    """Weighted degree: sum of incident edge weights per node."""
    return NodeScoreVector(metric="ND", scores=g.weights.sum(axis=1))


def eigenvector_centrality(g: WeightedGraph) -> NodeScoreVector:
    """Dominant eigenvector of the weight matrix by power iteration.

    Starts from the normalized all-ones vector (deterministic tie-break on
    degenerate spectra), converges when successive iterates differ by less
    than 1e-10 in max-norm.  The returned vector is unit-norm with
    non-negative entries (Perron-Frobenius).
    """
    w = g.weights
    if not np.any(w > 0):
        raise ZeroGraph("all edge weights are zero")
    # shift by the largest weighted degree: eigenvectors are unchanged but
    # the Perron eigenvalue becomes strictly dominant, so the iteration also
    # converges on bipartite graphs (whose spectrum is symmetric about zero)
    shift = w.sum(axis=1).max()
    v = np.ones(g.n) / np.sqrt(g.n)
    for _ in range(_EC_MAX_ITER):
        nxt = w @ v + shift * v
        norm = np.linalg.norm(nxt)
        if norm == 0.0:
            # start vector in the null space; nudge with the degree vector
            nxt = w.sum(axis=1)
            norm = np.linalg.norm(nxt)
        nxt /= norm
        if np.max(np.abs(nxt - v)) < _EC_TOL:
            v = nxt
            break
        v = nxt
    else:
        raise NoConvergence(
            f"power iteration did not converge in {_EC_MAX_ITER} iterations"
        )
    if v.sum() < 0:
        v = -v
    # tiny negative round-off is clipped; the Perron vector is non-negative
    v = np.clip(v, 0.0, None)
    v /= np.linalg.norm(v)
    return NodeScoreVector(metric="EC", scores=v)


def betweenness_centrality(g: WeightedGraph) -> NodeScoreVector:
    """Brandes betweenness over shortest paths with distance 1/weight.

    Zero-weight edges are treated as absent.  Path-length ties are counted
    with relative tolerance 1e-12; sigma counts stay exact integers.
    Unordered pairs are counted once (undirected halving).
    """
    w = g.weights
    n = g.n
    neighbors = [np.flatnonzero(w[u] > 0) for u in range(n)]
    dist_matrix = np.where(w > 0, 1.0 / np.where(w > 0, w, 1.0), np.inf)
    scores = np.zeros(n)
    for s in range(n):
        dist = np.full(n, np.inf)
        sigma = np.zeros(n)
        preds = [[] for _ in range(n)]
        dist[s] = 0.0
        sigma[s] = 1.0
        order = []
        done = np.zeros(n, dtype=bool)
        heap = [(0.0, s)]
        while heap:
            d_u, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            order.append(u)
            for v in neighbors[u]:
                if done[v]:
                    continue
                alt = d_u + dist_matrix[u, v]
                tol = _PATH_TOL * max(1.0, abs(dist[v]) if np.isfinite(dist[v]) else 0.0)
                if alt < dist[v] - tol:
                    dist[v] = alt
                    sigma[v] = sigma[u]
                    preds[v] = [u]
                    heapq.heappush(heap, (alt, v))
                elif abs(alt - dist[v]) <= tol:
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        delta = np.zeros(n)
        for u in reversed(order):
            for p in preds[u]:
                delta[p] += sigma[p] / sigma[u] * (1.0 + delta[u])
            if u != s:
                scores[u] += delta[u]
    return NodeScoreVector(metric="BC", scores=scores / 2.0)


def clustering_coefficient(g: WeightedGraph) -> NodeScoreVector:
    """Weighted clustering via geometric-mean triangle intensities.

    Weights are normalized by the global maximum; the per-node sum of cube
    roots of triangle weight products is scaled by 1/(d_u (d_u - 1)) with
    d_u the weighted degree.  Nodes with negligible d_u (d_u - 1) score 0.
    """
    w = g.weights
    w_max = w.max()
    if w_max <= 0:
        raise ZeroGraph("all edge weights are zero")
    w_hat = np.cbrt(w / w_max)
    triangle_sum = np.diagonal(w_hat @ w_hat @ w_hat).copy()
    degrees = w.sum(axis=1)
    denom = degrees * (degrees - 1.0)
    scores = np.where(np.abs(denom) < 1e-12, 0.0,
                      triangle_sum / np.where(np.abs(denom) < 1e-12, 1.0, denom))
    return NodeScoreVector(metric="CC", scores=scores)


_METRIC_FUNCS = {
    "ND": node_degree,
    "EC": eigenvector_centrality,
    "BC": betweenness_centrality,
    "CC": clustering_coefficient,
}


def node_scores(g: WeightedGraph, metric: str) -> NodeScoreVector:
    try:
        func = _METRIC_FUNCS[metric]
    except KeyError:
        raise ValueError(
            f"unknown graph metric {metric!r}; expected one of {GRAPH_METRICS}"
        ) from None
    return func(g)
