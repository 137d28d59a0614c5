"""Communication graphs, Metropolis weights and spectral connectivity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .manifolds.base import InvalidInput

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on nodes ``0..n-1``."""

    n: int
    edges: frozenset

    def __post_init__(self):
        if self.n < 1:
            raise InvalidInput(f"graph needs at least one node, got n={self.n}")
        for i, j in self.edges:
            if i == j:
                raise InvalidInput(f"self-loop at node {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise InvalidInput(f"edge ({i}, {j}) outside 0..{self.n - 1}")

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        return cls(int(n), frozenset(tuple(sorted((int(i), int(j)))) for i, j in edges))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            a[i, j] = a[j, i] = True
        return a

    def is_connected(self) -> bool:
        adj = self.adjacency()
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adj[i] & ~seen):
                seen[j] = True
                stack.append(j)
        return bool(seen.all())


def ring_knn_graph(n: int, k: int) -> Graph:
    """Circulant graph joining each node to its ``k/2`` neighbours on either side."""
    if k <= 0 or k % 2 or k >= n:
        raise InvalidInput(f"k must be even with 0 < k < n, got n={n}, k={k}")
    edges = {tuple(sorted((i, (i + s) % n))) for i in range(n) for s in range(1, k // 2 + 1)}
    return Graph(n, frozenset(edges))


def complete_graph(n: int) -> Graph:
    return Graph(n, frozenset((i, j) for i in range(n) for j in range(i + 1, n)))


def random_connected_graph(n: int, rng, p: float = 0.3) -> Graph:
    """Random spanning tree plus Erdős–Rényi extra edges; always connected."""
    order = rng.permutation(n)
    edges = set()
    for idx in range(1, n):
        parent = order[rng.integers(idx)]
        edges.add(tuple(sorted((int(order[idx]), int(parent)))))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((i, j))
    return Graph(n, frozenset(edges))


def metropolis_weights(g: Graph) -> np.ndarray:
    """``w_ij = 1/(1 + max(deg_i, deg_j))`` on edges; the diagonal takes the remainder."""
    if not g.is_connected():
        raise InvalidInput("Metropolis weights need a connected graph")
    deg = g.degrees()
    w = np.zeros((g.n, g.n))
    for i, j in g.edges:
        w[i, j] = w[j, i] = 1.0 / (1.0 + max(deg[i], deg[j]))
    w[np.diag_indices(g.n)] = 1.0 - w.sum(axis=1)
    return w


def sigma2(w) -> float:
    """Second largest singular value of a symmetric doubly stochastic matrix.

    Computed as the spectral norm of ``W - J/n``.
    """
    w = np.asarray(w, dtype=float)
    n = w.shape[0]
    eig = np.linalg.eigvalsh(w - np.full((n, n), 1.0 / n))
    return float(min(1.0, max(abs(eig[0]), abs(eig[-1]))))


def validate_doubly_stochastic(w, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Return ``w`` as a float array, or raise naming the first violated property."""
    w = np.array(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidInput(f"weight matrix must be square, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidInput("weight matrix has non-finite entries")
    if np.abs(w - w.T).max() > tol:
        raise InvalidInput("asymmetry: weight matrix is not symmetric")
    if w.min() < 0:
        raise InvalidInput("negativity: weight matrix has negative entries")
    if np.abs(w.sum(axis=1) - 1.0).max() > tol:
        raise InvalidInput("row sum: rows do not sum to 1")
    if np.abs(w.sum(axis=0) - 1.0).max() > tol:
        raise InvalidInput("column sum: columns do not sum to 1")
    if w.shape[0] > 1 and sigma2(w) >= 1.0 - 1e-12:
        raise InvalidInput("σ₂ = 1 (disconnected): weight matrix does not mix")
    return w


def graph_from_spec(spec: dict) -> Graph:
    """Build a graph from ``{type: ring_knn, n, k}``, ``{type: complete, n}`` or ``{n, edges}``."""
    if not isinstance(spec, dict):
        raise InvalidInput(f"graph spec must be a mapping, got {type(spec).__name__}")
    kind = spec.get("type", "edges" if "edges" in spec else None)
    try:
        if kind == "ring_knn":
            return ring_knn_graph(int(spec["n"]), int(spec["k"]))
        if kind == "complete":
            return complete_graph(int(spec["n"]))
        if kind == "edges":
            return Graph.from_edges(spec["n"], spec["edges"])
    except KeyError as exc:
        raise InvalidInput(f"graph spec is missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"bad graph spec: {exc}") from None
    raise InvalidInput(f"unknown graph type {kind!r}")
