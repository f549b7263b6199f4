"""Undirected weighted graphs, Laplacians and geodesic distances.

Edge weights are path *lengths*: a heavier edge means two nodes are farther
apart, and the geodesic distance between two nodes is the smallest sum of
weights along a connecting path. Node indices are 0-based everywhere.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

# Beyond this size the dense all-pairs matrix is not built; use distances_from.
DENSE_DISTANCE_LIMIT = 5000


class DisconnectedGraphError(ValueError):
    """Raised when an operation needs a connected graph and did not get one."""


class Graph:
    """Simple undirected graph with positive edge weights.

    Parameters
    ----------
    n : int
        Number of nodes, labelled ``0..n-1``.
    edges : iterable of (u, v, w)
        One entry per undirected edge. Order of ``u`` and ``v`` is irrelevant.
    require_connected : bool
        Reject disconnected input. Induced subgraphs pass ``False``.

    Instances are treated as immutable; ``edges`` is stored canonically as an
    ``(E, 3)`` array sorted by ``(u, v)`` with ``u < v``.
    """

    def __init__(self, n: int, edges: Iterable[Sequence[float]], require_connected: bool = True):
        n = int(n)
        if n < 1:
            raise ValueError("graph needs at least one node")
        arr = np.asarray(list(edges), dtype=float).reshape(-1, 3)
        u = arr[:, 0].astype(np.int64)
        v = arr[:, 1].astype(np.int64)
        w = arr[:, 2]
        if np.any(u != arr[:, 0]) or np.any(v != arr[:, 1]):
            raise ValueError("node indices must be integers")
        if arr.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ValueError(f"node index out of range for n={n}")
        if np.any(u == v):
            raise ValueError(f"self-loop at node {int(u[u == v][0])}")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("edge weights must be finite and positive")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        dup = (np.diff(lo) == 0) & (np.diff(hi) == 0)
        if np.any(dup):
            i = int(np.flatnonzero(dup)[0])
            raise ValueError(f"duplicate edge ({lo[i]}, {hi[i]})")

        self.n = n
        self.edges = np.column_stack([lo, hi, w]) if len(w) else np.empty((0, 3))
        self.edges.flags.writeable = False
        self._w = sparse.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([lo, hi]), np.concatenate([hi, lo]))),
            shape=(n, n),
        ).tocsr()
        n_comp = csgraph.connected_components(self._w, directed=False, return_labels=False)
        self.connected = n_comp == 1
        if require_connected and not self.connected:
            raise DisconnectedGraphError(f"graph has {n_comp} connected components")

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, n_edges={self.n_edges})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def weight_matrix(self) -> sparse.csr_matrix:
        """Sparse symmetric adjacency ``W``."""
        return self._w

    def adjacency(self) -> np.ndarray:
        """Dense symmetric adjacency ``W``."""
        return self._w.toarray()

    def weight(self, u: int, v: int) -> float:
        return float(self._w[u, v])

    def degrees(self) -> np.ndarray:
        """Weighted degrees ``D(u,u) = sum_v W(u,v)``."""
        return np.asarray(self._w.sum(axis=1)).ravel()

    def neighbor_counts(self) -> np.ndarray:
        return np.diff(self._w.indptr)

    @property
    def mean_edge_weight(self) -> float:
        if not self.n_edges:
            raise ValueError("graph has no edges")
        return float(self.edges[:, 2].mean())


def laplacian(g: Graph) -> np.ndarray:
    """Combinatorial Laplacian ``L = D - W`` as a dense array."""
    W = g.adjacency()
    return np.diag(W.sum(axis=1)) - W


def volume(g: Graph, subset: Iterable[int] | None = None) -> float:
    """Sum of weighted degrees over ``subset`` (whole graph when omitted)."""
    deg = g.degrees()
    if subset is None:
        return float(deg.sum())
    idx = _as_index(subset, g.n)
    return float(deg[idx].sum())


def geodesic_distances(g: Graph) -> np.ndarray:
    """All-pairs shortest path lengths, summing edge weights along paths.

    Returns a dense, exactly symmetric ``n x n`` array; entry ``(u, v)`` is
    the Dijkstra distance accumulated from ``min(u, v)``. Raises
    :class:`DisconnectedGraphError` naming an unreachable pair.
    """
    if g.n > DENSE_DISTANCE_LIMIT:
        raise ValueError(
            f"n={g.n} exceeds the dense limit {DENSE_DISTANCE_LIMIT}; use distances_from()"
        )
    dist = distances_from(g, range(g.n))
    # Sums along a path depend on the direction of accumulation in the last
    # ulp; keep the value computed from the lower-indexed endpoint so the
    # matrix is exactly symmetric.
    upper = np.triu(dist)
    return upper + np.triu(dist, 1).T


def distances_from(g: Graph, sources: Iterable[int]) -> np.ndarray:
    """Shortest path lengths from each node in ``sources`` to every node."""
    src = _as_index(sources, g.n)
    dist = csgraph.dijkstra(g.weight_matrix, directed=False, indices=src)
    dist = np.atleast_2d(dist)
    if not np.all(np.isfinite(dist)):
        i, j = np.argwhere(~np.isfinite(dist))[0]
        raise DisconnectedGraphError(f"node {int(src[i])} cannot reach node {int(j)}")
    return dist


def open_ball(gamma: np.ndarray, v: int, rho: float) -> np.ndarray:
    """Nodes strictly closer than ``rho`` to ``v``; always contains ``v``."""
    if rho <= 0:
        raise ValueError("radius must be positive")
    return np.flatnonzero(gamma[v] < rho)


def annulus(gamma: np.ndarray, v: int, rho: float, theta: float) -> np.ndarray:
    """Nodes ``u`` with ``rho - theta <= gamma(v, u) < rho + theta``."""
    if theta <= 0:
        raise ValueError("annulus width must be positive")
    row = gamma[v]
    return np.flatnonzero((row >= rho - theta) & (row < rho + theta))


def induced_subgraph(g: Graph, nodes: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``nodes`` keeping edges with both endpoints inside.

    Returns the subgraph (relabelled ``0..k-1`` in ascending order of the
    original labels) and the array mapping new labels back to old ones.
    Check ``.connected`` on the result; connectivity is not enforced.
    """
    keep = np.unique(_as_index(nodes, g.n))
    if keep.size == 0:
        raise ValueError("induced subgraph needs a non-empty node set")
    relabel = np.full(g.n, -1, dtype=np.int64)
    relabel[keep] = np.arange(keep.size)
    e = g.edges
    if len(e):
        a, b = e[:, 0].astype(np.int64), e[:, 1].astype(np.int64)
        inside = (relabel[a] >= 0) & (relabel[b] >= 0)
        sub_edges = np.column_stack([relabel[a[inside]], relabel[b[inside]], e[inside, 2]])
    else:
        sub_edges = np.empty((0, 3))
    return Graph(keep.size, sub_edges, require_connected=False), keep


def boundary_weight(g: Graph, S: Iterable[int], v: int) -> float:
    """Total weight ``w_S(v)`` of edges joining ``v`` to members of ``S``."""
    idx = _as_index(S, g.n)
    if idx.size == 0:
        return 0.0
    row = g.weight_matrix.getrow(int(v)).toarray().ravel()
    return float(row[idx].sum())


def boundary_weights(g: Graph, S: Iterable[int]) -> np.ndarray:
    """``w_S(v)`` for every node ``v`` at once."""
    ind = np.zeros(g.n)
    ind[_as_index(S, g.n)] = 1.0
    return np.asarray(g.weight_matrix @ ind).ravel()


def cut_weight(g: Graph, S: Iterable[int]) -> float:
    """Total weight of edges with exactly one endpoint in ``S``."""
    ind = np.zeros(g.n, dtype=bool)
    ind[_as_index(S, g.n)] = True
    e = g.edges
    a, b = e[:, 0].astype(np.int64), e[:, 1].astype(np.int64)
    return float(e[ind[a] != ind[b], 2].sum())


# -- CSV edge lists ---------------------------------------------------------

def graph_to_csv(g: Graph) -> str:
    """Serialize as ``u,v,w`` CSV (0-based, ``u < v``, LF line endings)."""
    buf = io.StringIO()
    buf.write("u,v,w\n")
    for a, b, w in g.edges:
        buf.write(f"{int(a)},{int(b)},{float(w)!r}\n")
    return buf.getvalue()


def write_graph_csv(g: Graph, path: str | Path) -> None:
    Path(path).write_bytes(graph_to_csv(g).encode("utf-8"))


def read_graph_csv(path: str | Path, n: int | None = None) -> Graph:
    """Load a ``u,v,w`` edge list. ``n`` defaults to ``max index + 1``."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_graph_csv(text, n=n)


def parse_graph_csv(text: str, n: int | None = None) -> Graph:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["u", "v", "w"]:
        raise ValueError("graph CSV must start with header 'u,v,w'")
    edges = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
        try:
            a, b, w = int(row[0]), int(row[1]), float(row[2])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        edges.append((a, b, w))
    if n is None:
        n = 1 + max((max(a, b) for a, b, _ in edges), default=0)
    return Graph(n, edges)


def _as_index(nodes: Iterable[int], n: int) -> np.ndarray:
    idx = np.asarray(list(nodes) if not isinstance(nodes, np.ndarray) else nodes, dtype=np.int64)
    idx = idx.ravel()
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"node index out of range for n={n}")
    return idx
