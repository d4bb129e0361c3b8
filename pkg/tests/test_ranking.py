import json

import numpy as np
import pytest

import reference
from conftest import make_numeric_graph, make_random_graph
from egoscout.graph import FeatureKind, FeatureSpec, GraphSchema
from egoscout.histograms import (
    Binning,
    BinningMismatchError,
    build_binnings,
    divergence_calls,
    reset_divergence_calls,
)
from egoscout.ranking import (
    ColdProfileError,
    EmptyProfileError,
    IndexMismatchError,
    RankMode,
    SurpriseIndex,
    UnknownNodeError,
    candidate_set,
    cold_start_rank,
    interest_scores,
    precompute_surprise,
    rank_neighbors,
    top_interesting,
    top_surprising,
)
from egoscout.sessions import BlendWeights, SessionProfile


def build_index(g, weights=None, **kwargs):
    return precompute_surprise(g, build_binnings(g), weights, **kwargs)


def warm_profile(g, binnings, visits, **kwargs):
    p = SessionProfile("t", g, binnings, **kwargs)
    for v in visits:
        p.record_visit(v)
    return p


class TestPrecompute:
    def test_zero_surprise_when_local_equals_global(self):
        # complete graph, identical values: every local equals the global
        edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        g = make_numeric_graph(edges, [[7.0] * 4])
        index = build_index(g)
        np.testing.assert_array_equal(index.node_surprise, 0.0)

    def test_maximal_surprise_single_feature(self):
        # focus star: center value differs from every leaf; the center's
        # local (all leaves) vs global puts nearly all mass apart only when
        # distributions are disjoint, so use a 2-node-type construction
        g = make_numeric_graph(
            [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (0, 3)], [[0.0, 0.0, 0.0, 0.0]]
        )
        # hand-build binning with two bins and a synthetic global that is
        # disjoint from a local: simplest exact case is a 2-cluster graph
        g2 = make_numeric_graph([(0, 1), (1, 2), (0, 2), (2, 3)], [[1.0, 1.0, 1.0, 9.0]])
        index2 = build_index(g2)
        # node 3's only neighbor is 2 (value 1.0): local=(1,0); global=(0.75,0.25)
        s = index2.feature_surprise[3, 0]
        assert s == pytest.approx(reference.js_ref([1.0, 0.0], [0.75, 0.25]), abs=1e-12)

    def test_matches_no_cache_oracle(self):
        g = make_random_graph(20, n=100, numeric_features=3, categorical_features=1)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        expected = reference.surprise_ref(g, binnings)
        for i in range(g.node_count):
            np.testing.assert_allclose(index.feature_surprise[i], expected[i][0], atol=1e-12)
            assert index.node_surprise[i] == pytest.approx(expected[i][1], abs=1e-12)

    def test_bounds_and_header_invariant(self):
        weights = [0.5, 2.0, 1.0, 0.25]
        g = make_random_graph(21, n=80)
        index = build_index(g, weights=weights)
        assert index.feature_surprise.min() >= 0.0
        assert index.feature_surprise.max() <= 1.0
        assert index.node_surprise.max() <= sum(weights) + 1e-12
        np.testing.assert_allclose(
            index.node_surprise, index.feature_surprise @ np.asarray(weights), atol=0
        )

    def test_lru_mode_matches_materialized(self):
        g = make_random_graph(22, n=60)
        binnings = build_binnings(g)
        full = precompute_surprise(g, binnings)
        lazy = precompute_surprise(g, binnings, materialize_locals=False, lru_size=16)
        np.testing.assert_array_equal(full.feature_surprise, lazy.feature_surprise)
        nodes = np.array([0, 5, 9])
        for j in range(len(binnings)):
            np.testing.assert_allclose(
                full.local_mass_rows(j, nodes), lazy.local_mass_rows(j, nodes), atol=0
            )

    def test_parallel_matches_serial(self):
        g = make_random_graph(23, n=60)
        binnings = build_binnings(g)
        serial = precompute_surprise(g, binnings)
        threaded = precompute_surprise(g, binnings, parallel=True)
        np.testing.assert_array_equal(serial.feature_surprise, threaded.feature_surprise)

    def test_binning_must_cover_graph(self):
        g = make_numeric_graph([(0, 1)], [[1.0, 5.0]])
        bad = Binning(0, FeatureKind.NUMERICAL, edges=(2.0, 3.0))
        with pytest.raises(BinningMismatchError):
            precompute_surprise(g, [bad])


class TestIndexSerialization:
    def test_roundtrip_preserves_everything(self, tmp_path):
        g = make_random_graph(24, n=40)
        index = build_index(g)
        path = tmp_path / "index.json"
        index.save(path)
        back = SurpriseIndex.load(path)
        np.testing.assert_array_equal(back.feature_surprise, index.feature_surprise)
        np.testing.assert_array_equal(back.node_surprise, index.node_surprise)
        assert back.graph_fingerprint == index.graph_fingerprint
        assert back.binning_fingerprints == index.binning_fingerprints
        nodes = np.arange(10)
        for j in range(len(g.schema)):
            np.testing.assert_array_equal(
                back.local_mass_rows(j, nodes), index.local_mass_rows(j, nodes)
            )

    def test_save_is_byte_deterministic(self, tmp_path):
        g = make_random_graph(25, n=30)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        build_index(g).save(a)
        build_index(g).save(b)
        assert a.read_bytes() == b.read_bytes()

    def test_fingerprint_validation(self):
        g = make_random_graph(26, n=30)
        other = make_random_graph(27, n=30)
        index = build_index(g)
        index.validate_graph(g)
        with pytest.raises(IndexMismatchError):
            index.validate_graph(other)
        with pytest.raises(IndexMismatchError):
            index.validate_binnings(build_binnings(other))

    def test_version_checked(self):
        with pytest.raises(ValueError, match="version"):
            SurpriseIndex.from_doc({"version": 42})


class TestCandidateSet:
    def test_degree_cap_keeps_highest_degree(self):
        edges = [(0, i) for i in range(1, 1501)]
        # leaves 501..1500 get one extra edge each so they out-rank the rest
        edges += [(500 + i, 1000 + i) for i in range(1, 501)]
        g = make_numeric_graph(edges, [[0.0] * 1501])
        cand = candidate_set(g, 0, cap=1000)
        assert len(cand) == 1000
        assert np.all(g.degrees[cand] == 2)

    def test_cap_tie_broken_by_node_id(self):
        g = make_numeric_graph([(0, i) for i in range(1, 6)], [[0.0] * 6])
        cand = candidate_set(g, 0, cap=3)
        assert cand.tolist() == [1, 2, 3]

    def test_exclude_removed_before_cap(self):
        g = make_numeric_graph([(0, i) for i in range(1, 6)], [[0.0] * 6])
        cand = candidate_set(g, 0, cap=3, exclude=[1, 2])
        assert cand.tolist() == [3, 4, 5]

    def test_unknown_focus(self):
        g = make_numeric_graph([(0, 1)], [[0.0, 0.0]])
        with pytest.raises(UnknownNodeError):
            candidate_set(g, 99)


class TestInterestScores:
    def test_perfect_match_zero(self):
        # candidate whose neighborhood equals the visited node set
        g = make_numeric_graph(
            [(0, 1), (0, 2), (3, 1), (3, 2), (1, 2)], [[5.0, 1.0, 2.0, 5.0]]
        )
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [1, 2])
        per_feature, agg = interest_scores(np.array([3]), profile, index)
        # node 3's neighbors {1, 2} have exactly the visited values {1, 2}
        assert agg[0] == pytest.approx(0.0, abs=1e-12)

    def test_disjoint_maximal(self):
        g = make_numeric_graph([(0, 1), (2, 3), (1, 2)], [[1.0, 1.0, 9.0, 9.0]])
        binnings = [Binning(0, FeatureKind.NUMERICAL, edges=(1.0, 5.0, 9.0))]
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [0])  # profile mass at value 1
        # candidate 3's local = {node 2}, value 9: disjoint from profile
        _, agg = interest_scores(np.array([3]), profile, index)
        assert agg[0] == pytest.approx(1.0, abs=1e-12)

    def test_empty_profile_error(self):
        g = make_random_graph(30, n=20)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        empty = SessionProfile("t", g, binnings)
        with pytest.raises(EmptyProfileError):
            interest_scores(np.array([0]), empty, index)

    def test_matches_oracle(self):
        g = make_random_graph(31, n=60)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [3, 8, 15, 3])
        cands = np.arange(20)
        per_feature, agg = interest_scores(cands, profile, index)
        profile_ref = [
            reference.profile_hist_ref(g, profile.visits, None, j, binnings[j])
            for j in range(len(binnings))
        ]
        for ci, c in enumerate(cands):
            for j in range(len(binnings)):
                expected = reference.js_ref(
                    reference.local_hist_ref(g, int(c), j, binnings[j]), profile_ref[j]
                )
                assert per_feature[ci, j] == pytest.approx(expected, abs=1e-12)


class TestRankNeighbors:
    def test_blend_arithmetic_and_order(self, monkeypatch):
        # (s, r) = {a: (0.8, 0.9), b: (0.2, 0.0), c: (0.5, 0.5)}, equal
        # weights: t = {a: 0.45, b: 0.60, c: 0.50} so the order is b, c, a.
        g = make_numeric_graph([(3, 0), (3, 1), (3, 2), (0, 1)], [[0.0] * 4])
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        index.feature_surprise = np.array([[0.8], [0.2], [0.5], [0.0]])
        index.node_surprise = index.feature_surprise[:, 0].copy()
        fake_r = np.array([[0.9], [0.0], [0.5]])
        monkeypatch.setattr(
            "egoscout.ranking.interest_scores",
            lambda cands, profile, idx: (fake_r, fake_r[:, 0].copy()),
        )
        profile = warm_profile(g, binnings, [0, 1, 2])
        result = rank_neighbors(g, index, profile, 3, k=3)
        assert [sn.node for sn in result.neighbors] == [1, 2, 0]
        assert [sn.blended for sn in result.neighbors] == pytest.approx([0.60, 0.50, 0.45])
        assert result.mode_used is RankMode.COMBINED and not result.cold_start

    def test_empty_profile_falls_back_to_cold_start(self):
        g = make_random_graph(32, n=30)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        result = rank_neighbors(g, index, None, 0, k=5)
        assert result.cold_start and result.mode_used is RankMode.SURPRISE
        cold = cold_start_rank(g, index, 0, 5)
        assert [sn.node for sn in result.neighbors] == [sn.node for sn in cold]
        assert all(sn.interest is None and sn.blended is None for sn in result.neighbors)

    def test_not_yet_warm_profile_is_cold(self):
        g = make_random_graph(33, n=30)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [1, 2])  # below warm_after=3
        result = rank_neighbors(g, index, profile, 0, k=5)
        assert result.cold_start

    def test_interest_mode_cold_profile_errors(self):
        g = make_random_graph(34, n=30)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        with pytest.raises(EmptyProfileError):
            rank_neighbors(g, index, None, 0, k=3, mode=RankMode.INTEREST)
        profile = warm_profile(g, binnings, [1])
        with pytest.raises(ColdProfileError):
            rank_neighbors(g, index, profile, 0, k=3, mode=RankMode.INTEREST)

    def test_k_larger_than_candidates_returns_all(self):
        g = make_numeric_graph([(0, 1), (0, 2)], [[1.0, 2.0, 3.0]])
        index = build_index(g)
        result = rank_neighbors(g, index, None, 0, k=50)
        assert len(result.neighbors) == 2

    def test_exclude_honored(self):
        g = make_random_graph(35, n=30)
        index = build_index(g)
        neigh = [int(x) for x in g.neighbors_of(0)]
        result = rank_neighbors(g, index, None, 0, k=10, exclude=neigh[:1])
        assert neigh[0] not in [sn.node for sn in result.neighbors]

    def test_deterministic(self):
        g = make_random_graph(36, n=60)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [1, 2, 3])
        a = rank_neighbors(g, index, profile, 0, k=8)
        b = rank_neighbors(g, index, profile, 0, k=8)
        assert [(sn.node, sn.surprise, sn.interest, sn.blended) for sn in a.neighbors] == [
            (sn.node, sn.surprise, sn.interest, sn.blended) for sn in b.neighbors
        ]

    def test_js_call_count_is_candidates_times_features(self):
        g = make_random_graph(37, n=80, numeric_features=3, categorical_features=1)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [1, 2, 3, 4])
        focus = int(np.argmax(g.degrees))
        profile.histograms()  # materialize U outside the measured window
        reset_divergence_calls()
        result = rank_neighbors(g, index, profile, focus, k=5)
        n_cand = len(candidate_set(g, focus))
        assert divergence_calls() == n_cand * len(binnings)
        assert result.mode_used is RankMode.COMBINED


class TestColdStartRank:
    def test_orders_by_surprise(self):
        g = make_random_graph(38, n=40)
        index = build_index(g)
        result = cold_start_rank(g, index, 0, k=100)
        scores = [sn.surprise for sn in result]
        assert scores == sorted(scores, reverse=True)

    def test_degree_tiebreak_on_equal_surprise(self):
        # identical values make every surprise 0; degree decides
        edges = [(0, 1), (0, 2)]
        edges += [(1, 3), (1, 4), (1, 5)]  # node 1: degree 4
        edges += [(2, 3)]  # node 2: degree 2
        edges += [(3, 4), (4, 5)]
        g = make_numeric_graph(edges, [[1.0] * 6])
        index = build_index(g)
        result = cold_start_rank(g, index, 0, k=2)
        assert [sn.node for sn in result] == [1, 2]

    def test_matches_oracle_on_random_graphs(self):
        for seed in range(3):
            g = make_random_graph(200 + seed, n=60)
            binnings = build_binnings(g)
            index = precompute_surprise(g, binnings)
            focus = int(np.argmax(g.degrees))
            got = cold_start_rank(g, index, focus, k=10)
            expected = reference.rank_ref(
                g, binnings, [], focus, g.node_count, mode="combined"
            )
            reference.check_rank_equivalence(got, expected, "combined")


class TestTopK:
    def test_top_surprising_id_ties(self):
        g = make_numeric_graph([(0, 1), (0, 2), (1, 2)], [[1.0] * 3])
        index = build_index(g)
        result = top_surprising(g, index, 0, k=2)
        assert [sn.node for sn in result] == [1, 2]  # equal scores, lowest ids

    def test_top_interesting_examples(self):
        g = make_random_graph(40, n=40)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [2, 4, 6])
        focus = int(np.argmax(g.degrees))
        result = top_interesting(g, index, profile, focus, k=5)
        rs = [sn.interest for sn in result]
        assert rs == sorted(rs)
        expected = reference.rank_ref(
            g, binnings, profile.visits, focus, g.node_count, mode="interest"
        )
        reference.check_rank_equivalence(result, expected, "interest")

    def test_top_interesting_empty_profile_error(self):
        g = make_random_graph(41, n=20)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        with pytest.raises(EmptyProfileError):
            top_interesting(g, index, SessionProfile("t", g, binnings), 0, 3)


class TestProperties:
    def test_monotonicity_blend_extremes(self):
        g = make_random_graph(42, n=60)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        focus = int(np.argmax(g.degrees))

        surprise_only = warm_profile(g, binnings, [1, 2, 3], blend=BlendWeights(1.0, 0.0))
        combined = rank_neighbors(g, index, surprise_only, focus, k=10)
        pure = top_surprising(g, index, focus, k=10, lambdas=surprise_only.lambdas)
        assert [sn.node for sn in combined.neighbors] == [sn.node for sn in pure]

        interest_only = warm_profile(g, binnings, [1, 2, 3], blend=BlendWeights(0.0, 1.0))
        combined_r = rank_neighbors(g, index, interest_only, focus, k=10)
        pure_r = top_interesting(g, index, interest_only, focus, k=10)
        assert [sn.node for sn in combined_r.neighbors] == [sn.node for sn in pure_r]

    def test_lambda_scaling_leaves_order_unchanged(self):
        g = make_random_graph(43, n=60, numeric_features=3, categorical_features=1)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        focus = int(np.argmax(g.degrees))
        base = warm_profile(g, binnings, [1, 2, 3], lambdas=[1.0, 0.5, 2.0, 1.0])
        scaled = warm_profile(g, binnings, [1, 2, 3], lambdas=[3.0, 1.5, 6.0, 3.0])
        for mode in RankMode:
            a = rank_neighbors(g, index, base, focus, k=10, mode=mode)
            b = rank_neighbors(g, index, scaled, focus, k=10, mode=mode)
            assert [sn.node for sn in a.neighbors] == [sn.node for sn in b.neighbors]

    def test_blended_feature_bound(self):
        g = make_random_graph(44, n=50)
        binnings = build_binnings(g)
        index = precompute_surprise(g, binnings)
        profile = warm_profile(g, binnings, [1, 2, 3], blend=BlendWeights(0.3, 0.7))
        result = rank_neighbors(g, index, profile, 0, k=100)
        for sn in result.neighbors:
            assert np.all(sn.feature_blended >= 0.0)
            assert np.all(sn.feature_blended <= 1.0 + 1e-12)

    def test_oracle_equivalence_all_modes(self):
        for seed in range(4):
            g = make_random_graph(
                300 + seed, n=50, numeric_features=3, categorical_features=1
            )
            binnings = build_binnings(g)
            index = precompute_surprise(g, binnings)
            profile = warm_profile(g, binnings, [1, 5, 9])
            focus = int(np.argmax(g.degrees))
            for mode in RankMode:
                got = rank_neighbors(g, index, profile, focus, k=10, mode=mode)
                expected = reference.rank_ref(
                    g, binnings, profile.visits, focus, g.node_count, mode=mode.value
                )
                reference.check_rank_equivalence(got.neighbors, expected, mode.value)
