"""Sampling-set constructors.

``white_noise`` draws a uniform random subset, ``vac`` runs void-and-cluster
on geodesic distances, and ``greedy_sigma_min`` / ``greedy_spectral_proxy``
are the spectral greedy baselines (worst-case singular value and cutoff
frequency proxy, respectively).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .metrics import principal_wavelength
from .pattern import SamplingPattern
from .spectral import SpectralBasis

# Scores within this relative distance of the best are treated as tied.
TIE_RTOL = 1e-10


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _first_best(scores: np.ndarray) -> int:
    """Index of the maximum, resolving near-ties to the lowest index."""
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_RTOL * max(1.0, abs(top)))[0])


def white_noise(n: int, m: int, seed=None) -> SamplingPattern:
    """Uniformly random ``m``-subset of the ``n`` nodes."""
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    pick = _rng(seed).choice(n, size=m, replace=False)
    return SamplingPattern.from_support(n, pick.tolist())


@dataclass(frozen=True)
class VacParams:
    """Void-and-cluster settings. ``None`` fields are filled by :func:`resolve_vac_params`."""

    m: int
    sigma: float | None = None
    tau: float | None = None
    num_iter: int | None = None
    seed: int | None = 0


def default_sigma(gamma: np.ndarray, m: int) -> float:
    """Kernel width ``lambda_b^2 / ln 10`` so the kernel is 0.1 at the principal wavelength."""
    n = gamma.shape[0]
    lam = principal_wavelength(gamma, m / n) if m >= 1 else 0.0
    if lam <= 0:
        lam = float(gamma.mean())
    return lam ** 2 / math.log(10)


def resolve_vac_params(gamma: np.ndarray, params: VacParams) -> VacParams:
    n = gamma.shape[0]
    if not 1 <= params.m <= n:
        raise ValueError(f"VAC needs 1 <= m <= n, got m={params.m}")
    sigma = default_sigma(gamma, params.m) if params.sigma is None else float(params.sigma)
    tau = 2.0 * n if params.tau is None else float(params.tau)
    num_iter = n if params.num_iter is None else int(params.num_iter)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if tau <= n:
        raise ValueError("tau must exceed the node count")
    if num_iter < 1:
        raise ValueError("num_iter must be at least 1")
    return VacParams(params.m, sigma, tau, num_iter, params.seed)


@dataclass
class VacResult:
    pattern: SamplingPattern
    initial: SamplingPattern
    iterations: int
    converged: bool
    params: VacParams
    checkpoints: list[tuple[int, SamplingPattern]] = field(default_factory=list)


def vac_run(
    gamma: np.ndarray,
    params: VacParams,
    initial: SamplingPattern | None = None,
    record_every: int | None = None,
) -> VacResult:
    """Void-and-cluster with full bookkeeping.

    Each iteration scores sampling nodes by their kernel mass over the other
    sampling nodes (crowding) and non-sampling nodes by their kernel mass
    toward the sampling set minus ``tau`` (always negative). The 1 at the
    most crowded node moves to the least covered node. The loop stops after
    ``num_iter`` swaps, or as soon as a swap exactly undoes the previous one,
    in which case the pattern is back where it was two swaps earlier.
    Scores within ``TIE_RTOL`` of the extreme count as tied and the lowest
    node index wins.

    ``record_every`` stores the pattern after every that-many iterations
    (iteration 0 included) in ``checkpoints``.
    """
    p = resolve_vac_params(gamma, params)
    n = gamma.shape[0]
    K = np.exp(-(gamma ** 2) / p.sigma)
    if initial is None:
        initial = white_noise(n, p.m, p.seed)
    elif initial.n != n or initial.m != p.m:
        raise ValueError("initial pattern does not match n and m")
    s = initial.s.astype(bool)
    prev_min, prev_max = -1, -1
    checkpoints = [(0, initial)] if record_every else []
    converged = False
    it = 0
    for it in range(1, p.num_iter + 1):
        # kernel mass toward the current support, recomputed from scratch so
        # that exact ties (common with unit weights) stay exact
        mass = K[:, s].sum(axis=1)
        c = np.where(s, mass, mass - p.tau)
        imax = _first_best(c)
        imin = _first_best(-c)
        s[imax] = False
        s[imin] = True
        if record_every and it % record_every == 0:
            checkpoints.append((it, SamplingPattern.from_vector(s.astype(np.int8))))
        if imax == prev_min and imin == prev_max:
            converged = True
            break
        prev_min, prev_max = imin, imax
    final = SamplingPattern.from_vector(s.astype(np.int8))
    if record_every and (not checkpoints or checkpoints[-1][0] != it):
        checkpoints.append((it, final))
    return VacResult(final, initial, it, converged, p, checkpoints)


def vac(gamma: np.ndarray, params: VacParams, initial: SamplingPattern | None = None) -> SamplingPattern:
    """Blue-noise sampling pattern from void-and-cluster; see :func:`vac_run`."""
    return vac_run(gamma, params, initial).pattern


def _min_singular_batch(A: np.ndarray, cand_rows: np.ndarray) -> np.ndarray:
    """Smallest singular value of ``[A; r]`` for every row ``r`` of ``cand_rows``."""
    r = A.shape[0] + 1
    k = A.shape[1]
    if r <= k:
        # r x r Gram of the stacked rows
        G = np.empty((len(cand_rows), r, r))
        G[:, :-1, :-1] = A @ A.T
        cross = cand_rows @ A.T
        G[:, :-1, -1] = cross
        G[:, -1, :-1] = cross
        G[:, -1, -1] = np.einsum("ij,ij->i", cand_rows, cand_rows)
    else:
        G = (A.T @ A)[None] + cand_rows[:, :, None] * cand_rows[:, None, :]
    lam = np.linalg.eigvalsh(G)[:, 0]
    return np.sqrt(np.clip(lam, 0.0, None))


def greedy_sigma_min(basis: SpectralBasis, k: int, m: int) -> SamplingPattern:
    """Greedily add the node that maximizes the smallest singular value of ``U_k(S, :)``."""
    n = basis.n
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}]")
    if not 1 <= m <= n:
        raise ValueError(f"m must be in [1, {n}]")
    return SamplingPattern.from_support(n, greedy_sigma_min_order(basis, k, m))


def greedy_sigma_min_order(basis: SpectralBasis, k: int, m: int) -> list[int]:
    """Selection order of :func:`greedy_sigma_min`; each prefix is the greedy set of that size."""
    Uk = np.ascontiguousarray(basis.Uk(k))
    chosen: list[int] = []
    free = np.ones(basis.n, dtype=bool)
    for _ in range(m):
        cand = np.flatnonzero(free)
        scores = _min_singular_batch(Uk[chosen], Uk[cand])
        v = int(cand[_first_best(scores)])
        chosen.append(v)
        free[v] = False
    return chosen


def greedy_spectral_proxy(L: np.ndarray, m: int, q: int = 2) -> SamplingPattern:
    """Greedy cutoff-proxy sampler.

    Each step takes the eigenvector of the smallest eigenvalue of ``L^(2q)``
    restricted to the unsampled nodes and adds the unsampled node where that
    eigenvector has the largest magnitude.
    """
    n = np.asarray(L).shape[0]
    if not 0 <= m <= n:
        raise ValueError(f"need 0 <= m <= n, got m={m}, n={n}")
    return SamplingPattern.from_support(n, greedy_spectral_proxy_order(L, m, q))


def greedy_spectral_proxy_order(L: np.ndarray, m: int, q: int = 2) -> list[int]:
    if q < 1:
        raise ValueError("q must be a positive integer")
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    L2q = np.linalg.matrix_power(L, 2 * q)
    chosen: list[int] = []
    free = np.ones(n, dtype=bool)
    for _ in range(m):
        rest = np.flatnonzero(free)
        if rest.size == 1:
            v = int(rest[0])
        else:
            _, vec = linalg.eigh(L2q[np.ix_(rest, rest)], subset_by_index=[0, 0])
            v = int(rest[_first_best(np.abs(vec[:, 0]))])
        chosen.append(v)
        free[v] = False
    return chosen
