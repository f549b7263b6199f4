import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbn.generators import path_graph, sensor_graph
from gbn.graph import geodesic_distances, laplacian
from gbn.pattern import SamplingPattern
from gbn.samplers import (VacParams, default_sigma, greedy_sigma_min, greedy_sigma_min_order,
                          greedy_spectral_proxy, greedy_spectral_proxy_order, resolve_vac_params, vac,
                          vac_run, white_noise)
from gbn.spectral import cutoff_proxy, eigendecompose
from helpers import connected_graphs, random_connected_graph


def _lowest_extreme(values, rtol=1e-10):
    top = max(values)
    return min(i for i, v in enumerate(values) if v >= top - rtol * max(1.0, abs(top)))


def vac_oracle(gamma, support, sigma, tau, num_iter):
    """Plain transcription of the void-and-cluster loop, recomputing c each step.

    Near-ties go to the lowest node index.
    """
    n = len(gamma)
    K = np.exp(-gamma ** 2 / sigma)
    s = np.zeros(n, dtype=bool)
    s[list(support)] = True
    prev = None
    for it in range(1, num_iter + 1):
        c = np.empty(n)
        for i in range(n):
            total = sum(K[i, j] for j in range(n) if s[j])
            c[i] = total if s[i] else total - tau
        a, b = _lowest_extreme(list(c)), _lowest_extreme([-v for v in c])
        s[a], s[b] = False, True
        if prev == (b, a):
            return sorted(np.flatnonzero(s).tolist()), it
        prev = (a, b)
    return sorted(np.flatnonzero(s).tolist()), num_iter


class TestWhiteNoise:
    def test_extremes(self):
        assert white_noise(10, 0, 1).m == 0
        assert white_noise(10, 10, 1).support == tuple(range(10))

    def test_too_many(self):
        with pytest.raises(ValueError):
            white_noise(5, 6)

    def test_selection_frequency(self):
        rng = np.random.default_rng(0)
        counts = np.zeros(2000)
        for _ in range(1000):
            counts[white_noise(2000, 200, rng).indices] += 1
        freq = counts / 1000
        dev = np.abs(freq - 0.1)
        # each frequency has sd 0.0095, so +-0.03 is a 3.2 sd band: a handful of
        # the 2000 nodes are expected outside it, none beyond 5.3 sd
        assert np.mean(dev <= 0.03) >= 0.99
        assert dev.max() <= 0.05
        assert abs(freq.mean() - 0.1) < 1e-12

    def test_deterministic(self):
        assert white_noise(100, 10, 42) == white_noise(100, 10, 42)


class TestVac:
    def test_p5_endpoints(self):
        gamma = geodesic_distances(path_graph(5))
        res = vac_run(gamma, VacParams(2, sigma=1.0, tau=10.0), initial=SamplingPattern(5, (0, 1)))
        assert res.pattern.support == (0, 4)
        assert res.converged

    def test_single_sample_moves_to_global_argmin(self):
        gamma = geodesic_distances(path_graph(5))
        res = vac_run(gamma, VacParams(1, sigma=1.0, tau=10.0), initial=SamplingPattern(5, (2,)))
        # from the centre every endpoint is equally far; the first move goes to node 0
        assert res.pattern.support == (0,)
        assert res.converged
        expected, iters = vac_oracle(gamma, [2], 1.0, 10.0, 5)
        assert list(res.pattern.support) == expected and res.iterations == iters

    @pytest.mark.parametrize("bad", [dict(m=0), dict(m=3, sigma=0.0), dict(m=3, sigma=-1.0),
                                     dict(m=3, tau=5.0), dict(m=3, num_iter=0), dict(m=11)])
    def test_invalid_params(self, bad):
        gamma = geodesic_distances(path_graph(10))
        with pytest.raises(ValueError):
            vac(gamma, VacParams(**bad))

    def test_defaults(self):
        gamma = geodesic_distances(sensor_graph(200, 6, seed=1))
        p = resolve_vac_params(gamma, VacParams(20))
        assert p.tau == 400 and p.num_iter == 200
        assert p.sigma == pytest.approx(default_sigma(gamma, 20))

    def test_sigma_fallback_when_wavelength_is_zero(self):
        gamma = geodesic_distances(path_graph(6))
        # d = 1 gives a zero wavelength
        assert default_sigma(gamma, 6) == pytest.approx(gamma.mean() ** 2 / math.log(10))

    @given(connected_graphs(min_n=4, max_n=10), st.integers(0, 2 ** 31), st.data())
    def test_matches_oracle(self, g, seed, data):
        gamma = geodesic_distances(g)
        m = data.draw(st.integers(1, g.n - 1))
        init = white_noise(g.n, m, seed)
        sigma = float(np.mean(gamma)) ** 2
        res = vac_run(gamma, VacParams(m, sigma=sigma, tau=2.0 * g.n), initial=init)
        expected, iters = vac_oracle(gamma, init.support, sigma, 2.0 * g.n, g.n)
        assert list(res.pattern.support) == expected
        assert res.iterations == iters

    def test_count_conserved_at_every_checkpoint(self):
        gamma = geodesic_distances(sensor_graph(200, 6, seed=3))
        res = vac_run(gamma, VacParams(20, seed=1, num_iter=200), record_every=5)
        assert all(p.m == 20 for _, p in res.checkpoints)
        assert res.checkpoints[0][1] == res.initial
        assert res.checkpoints[-1][1] == res.pattern

    def test_deterministic(self):
        gamma = geodesic_distances(sensor_graph(150, 6, seed=3))
        assert vac(gamma, VacParams(15, seed=9)) == vac(gamma, VacParams(15, seed=9))

    def test_spreads_samples(self):
        """Minimum pairwise distance among samples does not shrink in >= 90% of runs."""
        wins = 0
        for run in range(50):
            g = sensor_graph(200, 6, seed=1000 + run)
            gamma = geodesic_distances(g)
            res = vac_run(gamma, VacParams(20, seed=run))

            def spread(p):
                sub = gamma[np.ix_(p.indices, p.indices)]
                return sub[np.triu_indices(p.m, 1)].min()

            wins += spread(res.pattern) >= spread(res.initial)
        assert wins >= 45


def _sigma_min(U, rows):
    return np.linalg.svd(U[list(rows)], compute_uv=False)[-1]


class TestGreedySigmaMin:
    def test_constant_eigenvector_ties_to_node_zero(self):
        basis = eigendecompose(laplacian(sensor_graph(30, 6, seed=2)))
        assert greedy_sigma_min(basis, 1, 1).support == (0,)

    def test_prefix_consistency(self):
        basis = eigendecompose(laplacian(sensor_graph(80, 6, seed=2)))
        order = greedy_sigma_min_order(basis, 10, 25)
        for m in (1, 5, 10, 25):
            assert greedy_sigma_min(basis, 10, m).support == tuple(sorted(order[:m]))

    def test_well_posed_when_m_at_least_k(self):
        basis = eigendecompose(laplacian(sensor_graph(120, 6, seed=5)))
        for k in (5, 10, 20):
            S = greedy_sigma_min(basis, k, k)
            assert _sigma_min(basis.Uk(k), S.support) > 1e-6

    def test_against_exhaustive_search(self, capsys):
        rng = np.random.default_rng(11)
        matches = 0
        for _ in range(50):
            g = random_connected_graph(20, rng, extra=0.2)
            U = eigendecompose(laplacian(g)).Uk(3)
            best = max(_sigma_min(U, c) for c in itertools.combinations(range(20), 3))
            got = _sigma_min(U, greedy_sigma_min(eigendecompose(laplacian(g)), 3, 3).support)
            assert got >= 0.7 * best
            matches += got >= best * (1 - 1e-9)
        with capsys.disabled():
            print(f"\ngreedy sigma_min matched the exhaustive optimum on {matches}/50 graphs")

    def test_bad_arguments(self):
        basis = eigendecompose(laplacian(path_graph(5)))
        with pytest.raises(ValueError):
            greedy_sigma_min(basis, 0, 2)
        with pytest.raises(ValueError):
            greedy_sigma_min(basis, 2, 6)


class TestGreedySpectralProxy:
    def test_full_set(self):
        L = laplacian(sensor_graph(25, 6, seed=1))
        assert greedy_spectral_proxy(L, 25).support == tuple(range(25))

    def test_p3_first_pick(self):
        # smallest eigenvalue of L^2 on all nodes is 0 with a constant eigenvector;
        # all magnitudes tie and the lowest index wins
        L = laplacian(path_graph(3))
        assert greedy_spectral_proxy_order(L, 1, q=1) == [0]

    def test_p3_second_pick_by_hand(self):
        # with S = {0}: L^2 on {1, 2} is [[6, -3], [-3, 2]]; the eigenvector of the
        # smallest eigenvalue 4 - sqrt(13) has its larger entry at node 2
        L = laplacian(path_graph(3))
        lam, vec = np.linalg.eigh(np.array([[6.0, -3.0], [-3.0, 2.0]]))
        assert lam[0] == pytest.approx(4 - math.sqrt(13))
        assert abs(vec[1, 0]) > abs(vec[0, 0])
        assert greedy_spectral_proxy_order(L, 2, q=1) == [0, 2]

    def test_too_many(self):
        with pytest.raises(ValueError):
            greedy_spectral_proxy(laplacian(path_graph(3)), 4)
        with pytest.raises(ValueError):
            greedy_spectral_proxy(laplacian(path_graph(3)), 2, q=0)

    def test_higher_order_raises_its_own_proxy(self):
        ok = 0
        for t in range(10):
            L = laplacian(sensor_graph(150, 6, seed=100 + t))
            vals = [cutoff_proxy(L, greedy_spectral_proxy(L, 20, q).indices, q) for q in (1, 2, 3)]
            ok += all(b >= a for a, b in zip(vals, vals[1:]))
        assert ok >= 7

    def test_returns_distinct_nodes(self):
        L = laplacian(sensor_graph(60, 6, seed=4))
        order = greedy_spectral_proxy_order(L, 30)
        assert len(set(order)) == 30
