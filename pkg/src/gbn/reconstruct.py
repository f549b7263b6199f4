"""Sampling, noise injection and least-squares bandlimited reconstruction."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .spectral import SpectralBasis

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class ReconstructionReport:
    mse: float
    relative_error: float
    sigma_min: float
    rank_deficient: bool


def _support(S: Iterable[int], n: int) -> np.ndarray:
    idx = np.asarray(getattr(S, "indices", S), dtype=np.int64).ravel()
    idx = np.sort(idx)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise IndexError(f"sample index out of range for n={n}")
    return idx


def sample_signal(x: np.ndarray, S: Iterable[int]) -> np.ndarray:
    """Values of ``x`` on ``S`` in ascending node order."""
    x = np.asarray(x, dtype=float)
    return x[_support(S, len(x))]


def add_noise(y: np.ndarray, snr_db: float, seed=None) -> np.ndarray:
    """Add white Gaussian noise at ``snr_db`` relative to the mean sample power."""
    y = np.asarray(y, dtype=float)
    power = float(np.mean(y ** 2)) if y.size else 0.0
    if power == 0:
        raise ValueError("SNR is undefined for an all-zero sample vector")
    if math.isinf(snr_db) and snr_db > 0:
        return y.copy()
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sd = math.sqrt(power * 10.0 ** (-snr_db / 10.0))
    return y + rng.normal(0.0, sd, size=y.shape)


def mse(x: np.ndarray, x_rec: np.ndarray) -> float:
    """``||x_rec - x||^2 / n``."""
    x = np.asarray(x, dtype=float)
    x_rec = np.asarray(x_rec, dtype=float)
    if x.shape != x_rec.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {x_rec.shape}")
    return float(np.sum((x_rec - x) ** 2) / x.size)


def reconstruct_ls(
    basis: SpectralBasis,
    k: int,
    S: Iterable[int],
    y: np.ndarray,
    x_true: np.ndarray | None = None,
) -> tuple[np.ndarray, ReconstructionReport]:
    """Least-squares fit in ``span(U_k)``: ``x_rec = U_k (M U_k)^+ y``.

    The pseudo-inverse drops singular values below ``1e-10 * sigma_max``.
    ``sigma_min`` is the k-th singular value of ``M U_k`` (0 when fewer than
    ``k`` samples are given). Error fields are NaN unless ``x_true`` is given.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    idx = _support(S, basis.n)
    if idx.size == 0:
        raise ValueError("need at least one sample")
    y = np.asarray(y, dtype=float)
    if y.shape != (idx.size,):
        raise ValueError(f"expected {idx.size} samples, got {y.shape}")
    Uk = basis.Uk(k)
    A = Uk[idx]
    U_, sv, Vt = np.linalg.svd(A, full_matrices=False)
    cutoff = RANK_RTOL * sv[0] if sv.size else 0.0
    keep = sv > cutoff
    coef = Vt[keep].T @ ((U_[:, keep].T @ y) / sv[keep])
    x_rec = Uk @ coef
    sigma_min = float(sv[k - 1]) if idx.size >= k else 0.0
    rank_deficient = bool(sigma_min <= cutoff)
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=float)
        err = mse(x_true, x_rec)
        norm = float(np.linalg.norm(x_true))
        rel = float(np.linalg.norm(x_rec - x_true) / norm) if norm > 0 else math.inf
    else:
        err, rel = math.nan, math.nan
    return x_rec, ReconstructionReport(err, rel, sigma_min, rank_deficient)
