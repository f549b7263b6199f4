"""Seeded graph generators: sensor networks, community graphs, BA graphs, fixtures."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any

import numpy as np
from scipy.sparse import csgraph, coo_matrix
from scipy.spatial import cKDTree

from .graph import Graph

log = logging.getLogger(__name__)

FAMILIES = ("sensor", "community", "barabasi-albert", "path", "grid", "complete")


@dataclass(frozen=True)
class GeneratorSpec:
    """Declarative description of a generated graph; ``seed`` fixes the output."""

    family: str
    n: int
    seed: int = 0
    k_max: int = 6
    n_communities: int = 16
    m_attach: int = 2
    p_in: float = 0.3
    p_out: float = 0.005
    rows: int | None = None
    cols: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown graph family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "grid":
            if self.rows is None or self.cols is None:
                raise ValueError("grid family needs rows and cols")
            if self.rows * self.cols != self.n:
                raise ValueError("grid rows*cols must equal n")
        if self.n < 2:
            raise ValueError("n must be at least 2")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> "GeneratorSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown generator field(s): {sorted(unknown)}")
        return cls(**obj)


def generate(spec: GeneratorSpec) -> Graph:
    if spec.family == "sensor":
        return sensor_graph(spec.n, spec.k_max, spec.seed)
    if spec.family == "community":
        return community_graph(spec.n, spec.n_communities, spec.seed, spec.p_in, spec.p_out)
    if spec.family == "barabasi-albert":
        return barabasi_albert(spec.n, spec.m_attach, spec.seed)
    if spec.family == "path":
        return path_graph(spec.n)
    if spec.family == "grid":
        return grid_graph(spec.rows, spec.cols)
    return complete_graph(spec.n)


def sensor_points(n: int, seed: int) -> np.ndarray:
    """The ``n`` node positions a sensor graph with this seed is built on."""
    return np.random.default_rng(seed).random((n, 2))


def sensor_graph(n: int, k_max: int = 6, seed: int = 0) -> Graph:
    """Random geometric k-nearest-neighbour graph in the unit square.

    Each node links to its ``k_max`` nearest points; an edge exists when either
    endpoint lists the other. Weights are Euclidean distances. Disconnected
    results are bridged by repeatedly adding the shortest edge between two
    components.
    """
    if n < k_max + 1:
        raise ValueError("sensor graph needs n >= k_max + 1")
    pts = sensor_points(n, seed)
    tree = cKDTree(pts)
    _, nbr = tree.query(pts, k=k_max + 1)
    pairs = set()
    for i in range(n):
        for j in nbr[i, 1:]:
            j = int(j)
            if j != i:
                pairs.add((min(i, j), max(i, j)))
    edges = {p: float(np.linalg.norm(pts[p[0]] - pts[p[1]])) for p in sorted(pairs)}
    _bridge_components(n, edges, lambda comp: _nearest_cross_pair(pts, comp))
    return Graph(n, [(a, b, w) for (a, b), w in sorted(edges.items())])


def community_graph(
    n: int,
    n_communities: int = 16,
    seed: int = 0,
    p_in: float = 0.3,
    p_out: float = 0.005,
) -> Graph:
    """Planted-partition graph with unit weights.

    Nodes are split into ``n_communities`` contiguous blocks whose sizes differ
    by at most one; see :func:`community_labels`.
    """
    if n < 2 * n_communities:
        raise ValueError("community graph needs n >= 2 * n_communities")
    rng = np.random.default_rng(seed)
    labels = community_labels(n, n_communities)
    prob = np.where(labels[:, None] == labels[None, :], p_in, p_out)
    draw = rng.random((n, n)) < prob
    a, b = np.nonzero(np.triu(draw, k=1))
    edges = {(int(i), int(j)): 1.0 for i, j in zip(a, b)}
    _bridge_components(n, edges, lambda comp: _first_cross_pair(comp))
    return Graph(n, [(i, j, w) for (i, j), w in sorted(edges.items())])


def community_labels(n: int, n_communities: int) -> np.ndarray:
    labels = np.empty(n, dtype=np.int64)
    for c, block in enumerate(np.array_split(np.arange(n), n_communities)):
        labels[block] = c
    return labels


def barabasi_albert(n: int, m_attach: int = 2, seed: int = 0) -> Graph:
    """Preferential attachment grown from a clique on the first ``m_attach`` nodes."""
    if not n > m_attach >= 1:
        raise ValueError("need n > m_attach >= 1")
    rng = np.random.default_rng(seed)
    edges = [(i, j, 1.0) for i in range(m_attach) for j in range(i + 1, m_attach)]
    # one entry per edge endpoint, so uniform draws are degree-proportional
    ends = [i for i, j, _ in edges] + [j for i, j, _ in edges]
    for t in range(m_attach, n):
        if not ends:
            targets = set(range(m_attach))
        else:
            targets = set()
            while len(targets) < m_attach:
                targets.add(ends[int(rng.integers(len(ends)))])
        for v in sorted(targets):
            edges.append((v, t, 1.0))
            ends.extend((v, t))
    return Graph(n, edges)


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1, 1.0) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return Graph(n, [(i, (i + 1) % n, 1.0) for i in range(n)])


def grid_graph(rows: int, cols: int) -> Graph:
    """4-connected lattice; node ``r*cols + c`` sits at row ``r``, column ``c``."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return Graph(rows * cols, edges)


def complete_graph(n: int) -> Graph:
    return Graph(n, [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)])


def _components(n: int, edges: dict) -> np.ndarray:
    if edges:
        a, b = np.array(list(edges)).T
        adj = coo_matrix((np.ones(len(a)), (a, b)), shape=(n, n))
    else:
        adj = coo_matrix((n, n))
    _, labels = csgraph.connected_components(adj, directed=False)
    return labels


def _bridge_components(n: int, edges: dict, best_pair) -> None:
    """Add bridging edges in place until the edge set is connected.

    ``best_pair(labels)`` returns ``(u, v, w)``, the lightest candidate edge
    joining two different components.
    """
    labels = _components(n, edges)
    while labels.max() > 0:
        u, v, w = best_pair(labels)
        edges[(min(u, v), max(u, v))] = w
        log.info("connectivity repair: added edge (%d, %d) weight %.6g", u, v, w)
        labels = _components(n, edges)


def _nearest_cross_pair(pts: np.ndarray, labels: np.ndarray) -> tuple[int, int, float]:
    best = (np.inf, -1, -1)
    for c in np.unique(labels):
        inside = np.flatnonzero(labels == c)
        outside = np.flatnonzero(labels != c)
        d, j = cKDTree(pts[outside]).query(pts[inside], k=1)
        k = int(np.argmin(d))
        u, v = int(inside[k]), int(outside[j[k]])
        cand = (float(d[k]), min(u, v), max(u, v))
        best = min(best, cand)
    w, u, v = best
    return u, v, w


def _first_cross_pair(labels: np.ndarray) -> tuple[int, int, float]:
    # all candidates weigh 1; the lexicographically first cross pair starts at node 0
    v = int(np.flatnonzero(labels != labels[0])[0])
    return 0, v, 1.0
