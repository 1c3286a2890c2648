"""Kernel values, Gram assembly, Kendall/Mallows baselines, PSD checks."""

import itertools

import numpy as np
import pytest

from rankkernels.isotonic import feature_map, mean_feature_map
from rankkernels.kernels import (
    GramMatrix,
    compute_feature_maps,
    cross_gram_baseline,
    discordant_pairs,
    gram_baseline,
    gram_from_feature_maps,
    gram_submodular,
    k_c,
    k_s,
    kendall_tau,
    load_gram_binary,
    load_gram_csv,
    mallows,
    psd_check,
    save_gram_binary,
    save_gram_csv,
)
from rankkernels.rankings import OrderedPartition, coherent_extensions, from_permutation
from rankkernels.submodular import CutFunction, InformationGraph


def P(n, *blocks):
    return OrderedPartition(n, tuple(frozenset(b) for b in blocks))


def random_cut(rng, n):
    w = rng.random((n, n))
    w = np.triu(w, k=1)
    return CutFunction(InformationGraph(n, w + w.T, 1.0))


def complete_cut(n):
    w = np.ones((n, n)) - np.eye(n)
    return CutFunction(InformationGraph(n, w, 1.0))


def _random_full(rng, n):
    return from_permutation([int(j) for j in rng.permutation(n)])


def _random_exhaustive(rng, n):
    perm = [int(j) for j in rng.permutation(n)]
    blocks, pos = [], 0
    while pos < n:
        take = int(rng.integers(1, n - pos + 1))
        blocks.append(frozenset(perm[pos:pos + take]))
        pos += take
    return OrderedPartition(n, tuple(blocks))


class TestKs:
    def test_self_product_nonnegative(self):
        rng = np.random.default_rng(0)
        cut = random_cut(rng, 6)
        phi = feature_map(cut, _random_full(rng, 6))
        assert k_s(phi, phi) >= 0.0

    def test_reversal_on_complete_graph(self):
        cut = complete_cut(7)
        a = from_permutation(list(range(7)))
        a_rev = from_permutation(list(range(7))[::-1])
        phi, phi_rev = feature_map(cut, a), feature_map(cut, a_rev)
        assert k_s(phi, phi_rev) == pytest.approx(-k_s(phi, phi), abs=1e-9)
        # every per-dimension product is non-positive for a reversal
        assert (phi * phi_rev <= 0).all()

    def test_zero_map(self):
        assert k_s(np.zeros(4), np.ones(4)) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            k_s(np.zeros(3), np.zeros(4))

    def test_cauchy_schwarz(self):
        rng = np.random.default_rng(1)
        cut = random_cut(rng, 6)
        maps = [feature_map(cut, _random_full(rng, 6)) for _ in range(20)]
        for phi, psi in itertools.combinations(maps, 2):
            assert k_s(phi, psi) ** 2 <= k_s(phi, phi) * k_s(psi, psi) + 1e-9


class TestKc:
    def test_exhaustive_reduces_to_ks(self):
        rng = np.random.default_rng(2)
        cut = random_cut(rng, 5)
        a, b = _random_full(rng, 5), _random_full(rng, 5)
        assert k_c(cut, a, b) == k_s(feature_map(cut, a), feature_map(cut, b))

    def test_exact_equals_double_sum(self):
        rng = np.random.default_rng(3)
        cut = random_cut(rng, 4)
        a, b = P(4, {0}, {1}), P(4, {2}, {3})
        exts_a, exts_b = coherent_extensions(a), coherent_extensions(b)
        double = np.mean(
            [
                k_s(feature_map(cut, x), feature_map(cut, y))
                for x in exts_a
                for y in exts_b
            ]
        )
        assert k_c(cut, a, b) == pytest.approx(double, abs=1e-12)

    def test_sampled_deterministic_and_convergent(self):
        rng = np.random.default_rng(4)
        cut = random_cut(rng, 5)
        a, b = P(5, {0}, {1}), P(5, {2}, {4})
        exact = k_c(cut, a, b, "exact")
        s = 4000
        s1 = k_c(cut, a, b, "sampled", s, seed=11)
        s2 = k_c(cut, a, b, "sampled", s, seed=11)
        assert s1 == s2
        stderr = _kc_stderr(cut, a, b, s)
        assert abs(s1 - exact) <= 4 * stderr


def _kc_stderr(cut, a, b, s):
    """Standard error of the sampled convolution kernel, from the exact
    extension statistics: the estimate is <x_bar, y_bar> with independent
    means of s draws each, so its variance is
    (mu_b' C_a mu_b + mu_a' C_b mu_a) / s + tr(C_a C_b) / s^2."""
    maps_a = np.array([feature_map(cut, e) for e in coherent_extensions(a)])
    maps_b = np.array([feature_map(cut, e) for e in coherent_extensions(b)])
    mean_a, mean_b = maps_a.mean(axis=0), maps_b.mean(axis=0)
    cov_a = np.cov(maps_a.T, bias=True) if maps_a.shape[0] > 1 else np.zeros((a.n, a.n))
    cov_b = np.cov(maps_b.T, bias=True) if maps_b.shape[0] > 1 else np.zeros((b.n, b.n))
    variance = (
        float(mean_b @ cov_a @ mean_b + mean_a @ cov_b @ mean_a) / s
        + float(np.trace(cov_a @ cov_b)) / s**2
    )
    return np.sqrt(variance)


class TestGramSubmodular:
    def test_single_ranking(self):
        rng = np.random.default_rng(5)
        cut = random_cut(rng, 6)
        a = _random_full(rng, 6)
        gram = gram_submodular(cut, [a])
        phi = feature_map(cut, a)
        assert gram.values.shape == (1, 1)
        assert gram.values[0, 0] == k_s(phi, phi)

    def test_repeated_ranking_rank_one(self):
        rng = np.random.default_rng(6)
        cut = random_cut(rng, 6)
        a = _random_full(rng, 6)
        gram = gram_submodular(cut, [a] * 5)
        assert np.allclose(gram.values, gram.values[0, 0])

    def test_matches_naive_pairwise(self):
        rng = np.random.default_rng(7)
        cut = random_cut(rng, 8)
        rankings = [_random_exhaustive(rng, 8) for _ in range(50)]
        gram = gram_submodular(cut, rankings)
        naive = np.empty((50, 50))
        for i, a in enumerate(rankings):
            for j, b in enumerate(rankings):
                naive[i, j] = k_s(feature_map(cut, a), feature_map(cut, b))
        assert np.abs(gram.values - naive).max() <= 1e-12

    def test_thread_count_invariance(self):
        rng = np.random.default_rng(8)
        cut = random_cut(rng, 7)
        rankings = [_random_exhaustive(rng, 7) for _ in range(40)]
        base = gram_submodular(cut, rankings, n_jobs=1).values
        two = gram_submodular(cut, rankings, n_jobs=2).values
        many = gram_submodular(cut, rankings, n_jobs=0).values
        assert (base == two).all() and (base == many).all()

    def test_sampled_mode_deterministic(self):
        rng = np.random.default_rng(9)
        cut = random_cut(rng, 6)
        rankings = [P(6, {0}, {1}), P(6, {2}, {3}), _random_full(rng, 6)]
        a = gram_submodular(cut, rankings, "sampled", 200, seed=5).values
        b = gram_submodular(cut, rankings, "sampled", 200, seed=5, n_jobs=2).values
        assert (a == b).all()

    def test_psd(self):
        rng = np.random.default_rng(10)
        cut = random_cut(rng, 8)
        rankings = [_random_exhaustive(rng, 8) for _ in range(60)]
        assert psd_check(gram_submodular(cut, rankings), 1e-8)

    def test_mixed_universe_rejected(self):
        rng = np.random.default_rng(11)
        cut = random_cut(rng, 6)
        with pytest.raises(ValueError):
            gram_submodular(cut, [_random_full(rng, 6), _random_full(rng, 5)])


class NaiveKendall:
    """O(n^2) pair-enumeration oracle, independent of the library paths."""

    @staticmethod
    def ranks(partition):
        r = {}
        for i, b in enumerate(partition.blocks):
            for j in b:
                r[j] = i
        return r

    @classmethod
    def statistics(cls, a, b):
        ra, rb = cls.ranks(a), cls.ranks(b)
        concordant = discordant = ties_a = ties_b = 0
        n = a.n
        for u in range(n):
            for v in range(u + 1, n):
                sa = (ra[u] > ra[v]) - (ra[u] < ra[v])
                sb = (rb[u] > rb[v]) - (rb[u] < rb[v])
                if sa == 0:
                    ties_a += 1
                if sb == 0:
                    ties_b += 1
                if sa * sb > 0:
                    concordant += 1
                elif sa * sb < 0:
                    discordant += 1
        return concordant, discordant, ties_a, ties_b

    @classmethod
    def tau(cls, a, b):
        c, d, ta, tb = cls.statistics(a, b)
        n0 = a.n * (a.n - 1) // 2
        if ta == 0 and tb == 0:
            return (c - d) / n0
        denom = np.sqrt((n0 - ta) * (n0 - tb))
        return (c - d) / denom if denom else 0.0


class TestKendall:
    def test_identical(self):
        a = _random_full(np.random.default_rng(12), 9)
        assert kendall_tau(a, a) == 1.0

    def test_reversal(self):
        a = from_permutation(list(range(8)))
        b = from_permutation(list(range(8))[::-1])
        assert kendall_tau(a, b) == -1.0

    def test_three_object_example(self):
        a = from_permutation([0, 1, 2])
        b = from_permutation([0, 2, 1])
        assert kendall_tau(a, b) == pytest.approx(1 / 3, abs=1e-15)

    def test_fast_path_equals_naive(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = int(rng.integers(2, 51))
            a, b = _random_full(rng, n), _random_full(rng, n)
            assert kendall_tau(a, b) == NaiveKendall.tau(a, b)

    def test_ties_match_naive_taub(self):
        rng = np.random.default_rng(14)
        for _ in range(100):
            n = int(rng.integers(2, 10))
            a, b = _random_exhaustive(rng, n), _random_exhaustive(rng, n)
            assert kendall_tau(a, b) == pytest.approx(NaiveKendall.tau(a, b), abs=1e-12)

    def test_bounds_and_reversal_extremes(self):
        rng = np.random.default_rng(15)
        for _ in range(200):
            n = int(rng.integers(2, 12))
            a, b = _random_full(rng, n), _random_full(rng, n)
            tau = kendall_tau(a, b)
            assert -1.0 <= tau <= 1.0
            ra = [next(iter(blk)) for blk in a.blocks]
            rb = [next(iter(blk)) for blk in b.blocks]
            assert (tau == -1.0) == (ra == rb[::-1])

    def test_non_exhaustive_rejected(self):
        with pytest.raises(ValueError):
            kendall_tau(P(5, {0}, {1}), _random_full(np.random.default_rng(0), 5))

    def test_mixed_universe_rejected(self):
        rng = np.random.default_rng(16)
        with pytest.raises(ValueError):
            kendall_tau(_random_full(rng, 5), _random_full(rng, 6))


class TestMallows:
    def test_identical_is_one(self):
        a = _random_full(np.random.default_rng(17), 7)
        for lam in (0.0, 0.5, 3.0):
            assert mallows(a, a, lam) == 1.0

    def test_lambda_zero(self):
        rng = np.random.default_rng(18)
        a, b = _random_full(rng, 6), _random_full(rng, 6)
        assert mallows(a, b, 0.0) == 1.0

    def test_reversal(self):
        a = from_permutation(list(range(6)))
        b = from_permutation(list(range(6))[::-1])
        assert mallows(a, b, 1.0) == pytest.approx(np.exp(-1.0), abs=1e-15)

    def test_negative_lambda(self):
        a = _random_full(np.random.default_rng(19), 4)
        with pytest.raises(ValueError):
            mallows(a, a, -0.1)


class TestGramBaseline:
    def test_identical_dataset_all_ones(self):
        a = _random_full(np.random.default_rng(20), 6)
        gram = gram_baseline("kendall", [a] * 4)
        assert (gram.values == 1.0).all()

    def test_reversal_pair(self):
        a = from_permutation(list(range(6)))
        b = from_permutation(list(range(6))[::-1])
        gram = gram_baseline("kendall", [a, b])
        assert np.allclose(gram.values, [[1.0, -1.0], [-1.0, 1.0]])

    def test_fast_path_matches_scalar(self):
        rng = np.random.default_rng(21)
        rankings = [_random_exhaustive(rng, 7) for _ in range(15)]
        for kind, lam in (("kendall", 1.0), ("mallows", 0.7)):
            fast = gram_baseline(kind, rankings, lam).values
            fn = (
                kendall_tau
                if kind == "kendall"
                else lambda x, y: mallows(x, y, 0.7)
            )
            scalar = np.array([[fn(a, b) for b in rankings] for a in rankings])
            assert (fast == scalar).all()

    def test_non_exhaustive_exact_is_double_average(self):
        rng = np.random.default_rng(22)
        a, b = P(4, {0}, {1}), P(4, {3}, {2})
        gram = gram_baseline("kendall", [a, b], mode="exact")
        pairs = [
            kendall_tau(x, y)
            for x in coherent_extensions(a)
            for y in coherent_extensions(b)
        ]
        assert gram.values[0, 1] == pytest.approx(np.mean(pairs), abs=1e-12)

    def test_non_exhaustive_sampled_close_to_exact(self):
        a, b = P(4, {0}, {1}), P(4, {3}, {2})
        exact = gram_baseline("kendall", [a, b], mode="exact").values
        sampled = gram_baseline("kendall", [a, b], mode="sampled",
                                n_samples=5000, seed=3).values
        # pairwise tau has bounded variance; 3 standard errors at s = 5000
        assert np.abs(sampled - exact).max() <= 3 * 1.0 / np.sqrt(5000) + 0.01

    def test_sampled_deterministic(self):
        a, b = P(5, {0}, {1}), P(5, {3}, {2})
        g1 = gram_baseline("mallows", [a, b], 1.0, "sampled", 100, seed=9).values
        g2 = gram_baseline("mallows", [a, b], 1.0, "sampled", 100, seed=9).values
        assert (g1 == g2).all()

    def test_cross_gram_matches_square(self):
        rng = np.random.default_rng(23)
        rankings = [_random_exhaustive(rng, 6) for _ in range(8)]
        square = gram_baseline("kendall", rankings).values
        cross = cross_gram_baseline("kendall", rankings[:3], rankings)
        assert (cross == square[:3]).all()


class TestRelabelingInvariance:
    def test_all_kernels(self):
        rng = np.random.default_rng(24)
        n = 6
        cut = random_cut(rng, n)
        a, b = _random_exhaustive(rng, n), _random_exhaustive(rng, n)
        perm = rng.permutation(n)
        w_new = np.empty_like(cut.graph.weights)
        w_new[np.ix_(perm, perm)] = cut.graph.weights
        cut_new = CutFunction(InformationGraph(n, w_new, 1.0))

        def relabel(part):
            return OrderedPartition(
                n, tuple(frozenset(int(perm[j]) for j in blk) for blk in part.blocks)
            )

        phi_a, phi_b = feature_map(cut, a), feature_map(cut, b)
        phi_a2 = feature_map(cut_new, relabel(a))
        phi_b2 = feature_map(cut_new, relabel(b))
        assert k_s(phi_a2, phi_b2) == pytest.approx(k_s(phi_a, phi_b), abs=1e-9)
        assert kendall_tau(relabel(a), relabel(b)) == pytest.approx(
            kendall_tau(a, b), abs=1e-12
        )
        assert mallows(relabel(a), relabel(b), 1.3) == pytest.approx(
            mallows(a, b, 1.3), abs=1e-12
        )


class TestPsdCheck:
    def test_identity(self):
        assert psd_check(np.eye(4), 0.0)

    def test_indefinite(self):
        assert not psd_check(np.array([[1.0, 2.0], [2.0, 1.0]]), 1e-8)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            psd_check(np.array([[1.0, 2.0], [0.0, 1.0]]), 0.0)

    def test_gram_matrices_pass(self):
        rng = np.random.default_rng(25)
        cut = random_cut(rng, 6)
        rankings = [_random_full(rng, 6) for _ in range(30)]
        assert psd_check(gram_submodular(cut, rankings), 1e-8)


class TestGramIO:
    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(26)
        values = rng.normal(size=(5, 5))
        values = values @ values.T
        gram = GramMatrix(values, np.arange(5), "submodular")
        path = tmp_path / "gram.bin"
        save_gram_binary(path, gram)
        header = path.read_bytes()[:16]
        assert header[:4] == b"GRAM"
        assert int.from_bytes(header[4:8], "little") == 1
        assert int.from_bytes(header[8:16], "little") == 5
        assert (load_gram_binary(path) == values).all()

    def test_csv_round_trip(self, tmp_path):
        values = np.array([[1.0, -0.25], [-0.25, 2.0]]) / 3.0
        gram = GramMatrix(values, np.arange(2), "kendall")
        path = tmp_path / "gram.csv"
        save_gram_csv(path, gram)
        assert (load_gram_csv(path) == values).all()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOPE" + b"\x00" * 12)
        with pytest.raises(ValueError):
            load_gram_binary(path)


def test_gram_from_feature_maps_is_product():
    rng = np.random.default_rng(27)
    phi = rng.normal(size=(6, 4))
    assert (gram_from_feature_maps(phi) == phi @ phi.T).all()


def test_compute_feature_maps_matches_scalar():
    rng = np.random.default_rng(28)
    cut = random_cut(rng, 5)
    rankings = [_random_full(rng, 5) for _ in range(10)]
    maps = compute_feature_maps(cut, rankings)
    for i, r in enumerate(rankings):
        assert (maps[i] == feature_map(cut, r)).all()
