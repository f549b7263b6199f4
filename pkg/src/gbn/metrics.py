"""Vertex-domain quality metrics and uniqueness diagnostics for sampling sets."""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Graph, boundary_weights, induced_subgraph, laplacian
from .pattern import SamplingPattern


class DisconnectedCellWarning(UserWarning):
    """A partition cell does not induce a connected subgraph."""


@dataclass(frozen=True)
class PairCorrelation:
    rho_grid: np.ndarray
    values: np.ndarray
    theta: float

    def to_csv(self) -> str:
        lines = ["rho,R"] + [f"{float(r)!r},{float(v)!r}" for r, v in zip(self.rho_grid, self.values)]
        return "\n".join(lines) + "\n"


def _counts_below(dist: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """``out[v, j]`` = number of entries in row ``v`` of ``dist`` strictly below ``edges[j]``."""
    n_rows = dist.shape[0]
    n_e = len(edges)
    # position p means dist < edges[j] exactly for j >= p
    pos = np.searchsorted(edges, dist, side="right")
    flat = (pos + (n_e + 1) * np.arange(n_rows)[:, None]).ravel()
    hist = np.bincount(flat, minlength=n_rows * (n_e + 1)).reshape(n_rows, n_e + 1)
    return np.cumsum(hist, axis=1)[:, :n_e]


def pair_correlation(
    gamma: np.ndarray,
    patterns: Sequence[SamplingPattern],
    theta: float | None = None,
    *,
    graph: Graph | None = None,
) -> PairCorrelation:
    """Ensemble pair correlation ``R(rho)`` over annuli of half-width ``theta``.

    For each radius the mean number of sampling nodes in the annulus around a
    sampling node is divided by the same mean taken around every node. The
    annulus around a node includes the node itself whenever ``rho <= theta``.
    ``theta`` defaults to the mean edge weight of ``graph``. Radii run from
    ``theta`` to ``max(gamma)`` in steps of ``theta / 2``; radii whose
    denominator vanishes for any pattern are dropped.
    """
    patterns = list(patterns)
    if not patterns:
        raise ValueError("pair correlation needs at least one pattern")
    if theta is None:
        if graph is None:
            raise ValueError("pass theta or the graph to derive it from")
        theta = graph.mean_edge_weight
    if theta <= 0:
        raise ValueError("theta must be positive")
    n = gamma.shape[0]
    top = float(gamma.max())
    n_steps = int(math.floor((top - theta) / (theta / 2) + 1e-9)) + 1 if top >= theta else 1
    grid = theta + (theta / 2) * np.arange(n_steps)
    lo, hi = grid - theta, grid + theta
    edges = np.unique(np.concatenate([lo, hi]))
    i_lo = np.searchsorted(edges, lo)
    i_hi = np.searchsorted(edges, hi)

    ratios = np.empty((len(patterns), len(grid)))
    defined = np.ones(len(grid), dtype=bool)
    for r, p in enumerate(patterns):
        if p.n != n:
            raise ValueError("pattern size does not match distance matrix")
        if p.m == 0:
            raise ValueError("pair correlation of an empty pattern is undefined")
        below = _counts_below(gamma[:, p.indices], edges)
        ring = below[:, i_hi] - below[:, i_lo]
        num = ring[p.indices].mean(axis=0)
        den = ring.mean(axis=0)
        ok = den > 0
        defined &= ok
        ratios[r] = np.where(ok, num / np.where(ok, den, 1.0), np.nan)
    return PairCorrelation(grid[defined], ratios[:, defined].mean(axis=0), float(theta))


def expected_ball_size(gamma: np.ndarray, r: float) -> float:
    """Average over nodes of the closed-ball size ``|{u : gamma(v,u) <= r}|``."""
    return float(np.count_nonzero(gamma <= r)) / gamma.shape[0]


def principal_wavelength(gamma: np.ndarray, d: float) -> float:
    """Smallest distance ``r`` whose average closed ball holds at least ``1/d`` nodes."""
    if not 0 < d <= 1:
        raise ValueError("density must lie in (0, 1]")
    n = gamma.shape[0]
    need = n / d
    if need > n * n * (1 + 1e-12):
        raise ValueError(f"wavelength undefined: 1/d = {1 / d:.6g} exceeds n = {n}")
    target = max(1, math.ceil(need - 1e-9 * need))
    flat = np.sort(gamma, axis=None)
    return float(flat[min(target, flat.size) - 1])


def uniqueness_constant_ks(g: Graph, S: Iterable[int]) -> float:
    """``K_S``: the smallest total edge weight from a non-sampled node into ``S``."""
    idx = np.unique(np.asarray(list(S), dtype=np.int64))
    if idx.size == 0 or idx.size >= g.n:
        raise ValueError("K_S needs a proper non-empty subset")
    w = boundary_weights(g, idx)
    mask = np.ones(g.n, dtype=bool)
    mask[idx] = False
    return float(w[mask].min())


@dataclass(frozen=True)
class Partition:
    cells: tuple[tuple[int, ...], ...]
    seeds: tuple[int, ...]
    radius: float = 0.0

    def to_json(self) -> str:
        return json.dumps({"cells": [list(c) for c in self.cells], "seeds": list(self.seeds)})


def partition_from_pattern(
    gamma: np.ndarray,
    pattern: SamplingPattern,
    degrees: np.ndarray | None = None,
) -> Partition:
    """Geodesic Voronoi cells around the sampling nodes.

    Nodes with a unique nearest sampling node join that cell. Equidistant
    nodes are then placed in ascending node order, each into the candidate
    cell of smallest current volume (sum of ``degrees``; node count when
    ``degrees`` is omitted), ties going to the lowest seed. This is a greedy
    stand-in for the exact volume-balancing assignment.
    """
    if pattern.m == 0:
        raise ValueError("partition needs a non-empty pattern")
    n = gamma.shape[0]
    deg = np.ones(n) if degrees is None else np.asarray(degrees, dtype=float)
    seeds = pattern.indices
    D = gamma[:, seeds]
    dmin = D.min(axis=1)
    near = D == dmin[:, None]
    owner = np.full(n, -1, dtype=np.int64)
    unique = near.sum(axis=1) == 1
    owner[unique] = np.argmax(near[unique], axis=1)
    owner[seeds] = np.arange(len(seeds))  # a seed is always in its own cell
    vol = np.bincount(owner[owner >= 0], weights=deg[owner >= 0], minlength=len(seeds))
    for v in np.flatnonzero(owner < 0):
        cand = np.flatnonzero(near[v])
        j = int(cand[np.argmin(vol[cand])])
        owner[v] = j
        vol[j] += deg[v]
    cells = tuple(tuple(np.flatnonzero(owner == j).tolist()) for j in range(len(seeds)))
    radius = float(D[np.arange(n), owner].max())
    return Partition(cells, tuple(seeds.tolist()), radius)


def partition_volumes(g: Graph, p: Partition) -> np.ndarray:
    deg = g.degrees()
    return np.array([deg[list(c)].sum() for c in p.cells])


def validate_partition(p: Partition, n: int) -> None:
    seen = np.zeros(n, dtype=np.int64)
    for c in p.cells:
        seen[list(c)] += 1
    if np.any(seen != 1):
        raise ValueError("partition cells must be disjoint and cover every node")
    for c, s in zip(p.cells, p.seeds):
        if s not in c:
            raise ValueError(f"seed {s} is not inside its cell")


def lambda_partition(g: Graph, p: Partition) -> float:
    """``Lambda_P``: smallest first-nonzero eigenvalue over induced cell Laplacians.

    Returns 0 and emits :class:`DisconnectedCellWarning` if some cell is a
    single node or induces a disconnected subgraph.
    """
    validate_partition(p, g.n)
    best = math.inf
    for cell in p.cells:
        sub, _ = induced_subgraph(g, cell)
        if sub.n == 1 or not sub.connected:
            what = "a single node" if sub.n == 1 else "disconnected"
            warnings.warn(f"cell starting at node {cell[0]} is {what}; Lambda_P = 0",
                          DisconnectedCellWarning, stacklevel=2)
            return 0.0
        mu = np.linalg.eigvalsh(laplacian(sub))
        best = min(best, float(mu[1]))
    return best
