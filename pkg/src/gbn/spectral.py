"""Laplacian spectra, graph Fourier transform, signal models and spectral metrics.

Index convention
----------------
Formulas count eigenpairs from 1; arrays count from 0.

==========================  ======================
formula                     array
==========================  ======================
``mu_1 = 0``                ``basis.mu[0]``
``mu_l``, ``U_l``           ``mu[l-1]``, ``U[:, l-1]``
``U_k`` (first k columns)   ``U[:, :k]``
power spectrum ``p(l)``     ``p[l-2]`` for ``l = 2..N``
==========================  ======================
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg

from .pattern import SamplingPattern


@dataclass(frozen=True)
class SpectralBasis:
    """Ascending Laplacian eigenvalues ``mu`` and orthonormal eigenvectors ``U``."""

    mu: np.ndarray
    U: np.ndarray

    @property
    def n(self) -> int:
        return len(self.mu)

    def Uk(self, k: int) -> np.ndarray:
        return self.U[:, :k]


def eigendecompose(L: np.ndarray) -> SpectralBasis:
    """Full symmetric eigendecomposition with a fixed sign convention.

    Each eigenvector is flipped so that its first entry of non-negligible
    magnitude is positive, which makes GFT coefficients reproducible.
    """
    L = np.asarray(L, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise ValueError("Laplacian must be square")
    if not np.allclose(L, L.T, rtol=0, atol=1e-12 * max(1.0, np.abs(L).max())):
        raise ValueError("Laplacian must be symmetric")
    mu, U = np.linalg.eigh(L)
    tol = 1e-12
    for j in range(U.shape[1]):
        col = U[:, j]
        first = np.flatnonzero(np.abs(col) > tol)[0]
        if col[first] < 0:
            U[:, j] = -col
    mu.flags.writeable = False
    U.flags.writeable = False
    return SpectralBasis(mu, U)


def gft(basis: SpectralBasis, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != basis.n:
        raise ValueError(f"signal length {x.shape[0]} does not match graph size {basis.n}")
    return basis.U.T @ x


def igft(basis: SpectralBasis, xhat: np.ndarray) -> np.ndarray:
    xhat = np.asarray(xhat, dtype=float)
    if xhat.shape[0] != basis.n:
        raise ValueError(f"spectrum length {xhat.shape[0]} does not match graph size {basis.n}")
    return basis.U @ xhat


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def signal_sm1(basis: SpectralBasis, k: int, seed=None, mean: float = 1.0, sd: float = 0.5) -> np.ndarray:
    """Bandlimited signal ``U_k c`` with ``c ~ N(mean, sd^2)``."""
    if not 1 <= k <= basis.n:
        raise ValueError(f"bandwidth k must be in [1, {basis.n}]")
    c = _rng(seed).normal(mean, sd, size=k)
    return basis.Uk(k) @ c


def sm2_modulation(mu: np.ndarray, ref_index: int = 50) -> np.ndarray:
    """Spectral envelope: 1 up to ``mu_ref``, then ``exp(-4 (mu - mu_ref))``.

    ``ref_index`` is the 1-based rank of the reference eigenvalue.
    """
    mu = np.asarray(mu, dtype=float)
    if not 1 <= ref_index <= len(mu):
        raise ValueError(f"ref_index must be in [1, {len(mu)}]")
    mu_ref = mu[ref_index - 1]
    return np.where(mu <= mu_ref, 1.0, np.exp(-4.0 * (mu - mu_ref)))


def signal_sm2(basis: SpectralBasis, ref_index: int = 50, seed=None,
               mean: float = 1.0, sd: float = 0.5) -> np.ndarray:
    """Signal with ``N(mean, sd^2)`` coefficients shaped by :func:`sm2_modulation`."""
    h = sm2_modulation(basis.mu, ref_index)
    c = _rng(seed).normal(mean, sd, size=basis.n)
    return igft(basis, h * c)


def _pattern_vector(s) -> np.ndarray:
    return s.s if isinstance(s, SamplingPattern) else np.asarray(s, dtype=float)


def _check_connected(basis: SpectralBasis) -> None:
    if basis.n > 1 and basis.mu[1] <= 1e-10 * max(1.0, basis.mu[-1]):
        raise ValueError("second Laplacian eigenvalue is zero; graph must be connected")


def redness(basis: SpectralBasis, s) -> float:
    """Low-frequency energy ``(1/m) sum_{l>=2} shat(l)^2 / mu_l`` of a pattern."""
    vec = _pattern_vector(s)
    m = vec.sum()
    if m <= 0:
        raise ValueError("redness of an empty pattern is undefined")
    _check_connected(basis)
    shat = gft(basis, vec)
    return float(np.sum(shat[1:] ** 2 / basis.mu[1:]) / m)


def power_spectrum(basis: SpectralBasis, patterns: Sequence) -> np.ndarray:
    """Averaged normalized periodogram ``p(l)`` for ``l = 2..N``.

    Entry ``p[i]`` pairs with ``basis.mu[i + 1]``.
    """
    patterns = list(patterns)
    if not patterns:
        raise ValueError("power spectrum needs at least one pattern")
    X = np.column_stack([_pattern_vector(p) for p in patterns])
    if X.shape[0] != basis.n:
        raise ValueError("pattern size does not match graph")
    Xhat = basis.U.T @ X
    energy = np.sum(Xhat ** 2, axis=0)
    if np.any(energy == 0):
        raise ValueError("all-zero pattern has no spectrum")
    return basis.n * np.mean(Xhat[1:] ** 2 / energy, axis=1)


def _complement(n: int, S: Iterable[int]) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[np.asarray(list(S), dtype=np.int64)] = False
    return np.flatnonzero(mask)


def cutoff_proxy(L: np.ndarray, S: Iterable[int], q: int = 1) -> float:
    """Spectral proxy ``Omega_q(S)``: smallest eigenvalue of ``(L^2q)`` on ``S^c``, to the ``1/2q``."""
    if q < 1:
        raise ValueError("q must be a positive integer")
    L = np.asarray(L, dtype=float)
    Sc = _complement(L.shape[0], S)
    if Sc.size == 0:
        raise ValueError("cutoff proxy is undefined when S covers every node")
    L2q = np.linalg.matrix_power(L, 2 * q)
    sigma = linalg.eigh(L2q[np.ix_(Sc, Sc)], eigvals_only=True, subset_by_index=[0, 0])[0]
    return float(max(sigma, 0.0) ** (1.0 / (2 * q)))


def lambda_set(L: np.ndarray, S: Iterable[int]) -> float:
    """Largest ``Lambda`` with ``||x|| <= ||Lx|| / Lambda`` for all ``x`` supported on ``S``.

    This is the smallest singular value of the column block ``L[:, S]``.
    """
    idx = np.asarray(list(S), dtype=np.int64)
    if idx.size == 0:
        raise ValueError("Lambda constant needs a non-empty node set")
    sv = np.linalg.svd(np.asarray(L, dtype=float)[:, idx], compute_uv=False)
    return float(sv[-1])


def spectrum_to_csv(basis: SpectralBasis, p: np.ndarray) -> str:
    """CSV ``ell,mu,p`` with 1-based ``ell`` running from 2 to N."""
    lines = ["ell,mu,p"]
    for i, val in enumerate(p):
        ell = i + 2
        lines.append(f"{ell},{float(basis.mu[ell - 1])!r},{float(val)!r}")
    return "\n".join(lines) + "\n"


def signal_to_csv(x: np.ndarray) -> str:
    lines = ["node,value"] + [f"{i},{float(v)!r}" for i, v in enumerate(x)]
    return "\n".join(lines) + "\n"


def parse_signal_csv(text: str) -> np.ndarray:
    rows = [r for r in text.splitlines() if r.strip()]
    if not rows or rows[0].replace(" ", "") != "node,value":
        raise ValueError("signal CSV must start with header 'node,value'")
    pairs = [r.split(",") for r in rows[1:]]
    x = np.zeros(len(pairs))
    for a, b in pairs:
        i = int(a)
        if not 0 <= i < len(pairs):
            raise ValueError(f"node index {i} out of range")
        x[i] = float(b)
    return x
