"""Finite weighted graphs with a vertex measure, and the classical graph Laplacian.

A graph is G = (V, E, mu, w): a finite vertex set carrying a positive measure
mu and symmetric positive edge weights w.  Vertex functions are plain 1-d
numpy arrays indexed like the vertices.  The (measure-normalized) Laplacian is

    (-Delta u)(x) = (1/mu(x)) * sum_{y ~ x} w_xy (u(x) - u(y)),

which is self-adjoint in the mu-weighted inner product.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGraph, LengthMismatch

__all__ = [
    "Graph",
    "Violation",
    "validate",
    "integrate",
    "mu_inner",
    "laplacian_apply",
    "laplacian_matrix",
    "random_connected_graph",
    "graph_from_json",
    "graph_to_json",
]


@dataclass(frozen=True)
class Violation:
    """One failed invariant, naming the offending vertices or edges."""

    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


@dataclass(frozen=True)
class Graph:
    """Connected finite weighted graph with positive vertex measure.

    Attributes
    ----------
    mu : (n,) positive vertex measure.
    weights : (n, n) symmetric matrix of edge weights; 0 means "no edge",
        the diagonal is 0 (no self-loops).
    labels : optional per-vertex identifiers, defaults to "v0", "v1", ...
    """

    mu: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "weights", w)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"v{i}" for i in range(len(mu))))
        mu.setflags(write=False)
        w.setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.mu)

    @property
    def degrees(self) -> np.ndarray:
        """Weighted degree deg_w(x) = sum_y w_xy."""
        return self.weights.sum(axis=1)

    def volume(self) -> float:
        """Total measure of the vertex set."""
        return math.fsum(self.mu)

    def require_valid(self) -> "Graph":
        report = validate(self)
        if report:
            raise InvalidGraph(report)
        return self


def _check_length(graph: Graph, f: np.ndarray, name: str = "f") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != (graph.n,):
        raise LengthMismatch(
            f"{name} has shape {f.shape}, expected ({graph.n},)"
        )
    return f


def validate(graph: Graph) -> list[Violation]:
    """Check all structural invariants; an empty report means the graph is valid."""
    report: list[Violation] = []
    mu, w, n = graph.mu, graph.weights, graph.n
    if n < 2:
        report.append(Violation("TooFewVertices", f"n={n}, need at least 2"))
        return report
    if w.shape != (n, n):
        report.append(Violation("BadShape", f"weights shape {w.shape} != ({n},{n})"))
        return report

    bad_mu = np.flatnonzero(~(mu > 0))
    for i in bad_mu:
        report.append(Violation("NonPositiveMeasure", f"mu({graph.labels[i]}) = {mu[i]}"))

    asym = np.argwhere(~np.isclose(w, w.T, rtol=0.0, atol=0.0))
    for i, j in asym:
        if i < j:
            report.append(
                Violation(
                    "AsymmetricWeight",
                    f"w({graph.labels[i]},{graph.labels[j]}) = {w[i, j]} != {w[j, i]}",
                )
            )

    for i in np.flatnonzero(np.diag(w) != 0):
        report.append(Violation("SelfLoop", f"w({graph.labels[i]},{graph.labels[i]}) != 0"))

    neg = np.argwhere(w < 0)
    for i, j in neg:
        if i < j:
            report.append(
                Violation(
                    "NonPositiveWeight",
                    f"w({graph.labels[i]},{graph.labels[j]}) = {w[i, j]}",
                )
            )

    if not _connected(w):
        report.append(Violation("Disconnected", "graph has more than one component"))
    return report


def _connected(w: np.ndarray) -> bool:
    """Breadth-first reachability from vertex 0 over positive-weight edges."""
    n = w.shape[0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        x = queue.popleft()
        for y in np.flatnonzero(w[x] > 0):
            if not seen[y]:
                seen[y] = True
                queue.append(y)
    return bool(seen.all())


def integrate(graph: Graph, f: np.ndarray) -> float:
    """Integral over the vertex set: sum_x f(x) mu(x), compensated summation."""
    f = _check_length(graph, f)
    return math.fsum(f * graph.mu)


def mu_inner(graph: Graph, f: np.ndarray, g: np.ndarray) -> float:
    """mu-weighted inner product <f, g>_mu = sum_x f(x) g(x) mu(x)."""
    f = _check_length(graph, f)
    g = _check_length(graph, g, "g")
    return math.fsum(f * g * graph.mu)


def laplacian_apply(graph: Graph, u: np.ndarray) -> np.ndarray:
    """Apply -Delta: (1/mu(x)) sum_y w_xy (u(x) - u(y))."""
    u = _check_length(graph, u, "u")
    return (graph.degrees * u - graph.weights @ u) / graph.mu


def laplacian_matrix(graph: Graph) -> np.ndarray:
    """Dense matrix A with A @ u == laplacian_apply(graph, u)."""
    a = -graph.weights / graph.mu[:, None]
    np.fill_diagonal(a, graph.degrees / graph.mu)
    return a


def random_connected_graph(
    rng: np.random.Generator,
    n: int,
    weight_range: tuple[float, float] = (0.2, 5.0),
    mu_range: tuple[float, float] = (0.2, 5.0),
    extra_edge_prob: float = 0.4,
) -> Graph:
    """Random connected graph: uniform random spanning tree plus extra edges."""
    mu = rng.uniform(*mu_range, size=n)
    w = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = order[k], order[rng.integers(0, k)]
        w[i, j] = w[j, i] = rng.uniform(*weight_range)
    for i in range(n):
        for j in range(i + 1, n):
            if w[i, j] == 0 and rng.random() < extra_edge_prob:
                w[i, j] = w[j, i] = rng.uniform(*weight_range)
    return Graph(mu=mu, weights=w).require_valid()


def graph_from_json(text: str) -> Graph:
    """Parse the graph interchange format.

    Expected shape::

        {"vertices": [{"id": str, "mu": float}, ...],
         "edges": [{"u": str, "v": str, "w": float}, ...]}

    Duplicate edges and self-loops are rejected.
    """
    data = json.loads(text)
    try:
        vertices = data["vertices"]
        edges = data["edges"]
    except (TypeError, KeyError) as exc:
        raise ValueError("graph JSON must contain 'vertices' and 'edges'") from exc

    labels = [str(v["id"]) for v in vertices]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate vertex ids")
    index = {lab: i for i, lab in enumerate(labels)}
    mu = np.array([float(v["mu"]) for v in vertices])

    n = len(labels)
    w = np.zeros((n, n))
    for e in edges:
        try:
            i, j = index[str(e["u"])], index[str(e["v"])]
        except KeyError as exc:
            raise ValueError(f"edge references unknown vertex {exc}") from exc
        if i == j:
            raise ValueError(f"self-loop at vertex {labels[i]}")
        if w[i, j] != 0:
            raise ValueError(f"duplicate edge {labels[i]}-{labels[j]}")
        w[i, j] = w[j, i] = float(e["w"])

    graph = Graph(mu=mu, weights=w, labels=tuple(labels))
    report = validate(graph)
    if report:
        raise InvalidGraph(report)
    return graph


def graph_to_json(graph: Graph) -> str:
    """Serialize to the same interchange format accepted by graph_from_json."""
    vertices = [
        {"id": lab, "mu": float(m)} for lab, m in zip(graph.labels, graph.mu)
    ]
    edges = [
        {"u": graph.labels[i], "v": graph.labels[j], "w": float(graph.weights[i, j])}
        for i in range(graph.n)
        for j in range(i + 1, graph.n)
        if graph.weights[i, j] > 0
    ]
    return json.dumps({"vertices": vertices, "edges": edges}, indent=2)
