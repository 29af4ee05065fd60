import json
import warnings

import numpy as np
import pytest

from memgc.baselines import DartPivotWarning
from memgc.compressor import METHODS, CompressionConfig, compress, compress_with, run_method
from memgc.graph import GraphError, dumps, partition_connectivity, validate
from memgc.vecmath import retention_count

from .conftest import make_graph
from .oracles import unit_rows


def _split_graph(rng, n_iso=100, n_con=100, dim=8, n_ent=6):
    x = unit_rows(rng, n_iso + n_con, dim)
    edges = []
    for t in range(n_iso, n_iso + n_con):
        for e in rng.choice(n_ent, size=int(rng.integers(1, 3)), replace=False):
            edges.append((int(e), t, float(rng.uniform(0.1, 1.0))))
    clips = rng.integers(0, 20, size=n_iso + n_con)
    return make_graph(x, clips=clips, edges=edges, n_entities=n_ent)


@pytest.fixture
def split_graph(rng):
    return _split_graph(rng)


class TestConfig:
    def test_unified_ratio(self):
        cfg = CompressionConfig(compression_ratio=0.3)
        assert cfg.alpha == pytest.approx(0.7) and cfg.beta == pytest.approx(0.7)

    def test_overrides(self):
        cfg = CompressionConfig(0.3, isolated_retention=0.5, connected_retention=0.9)
        assert (cfg.alpha, cfg.beta) == (0.5, 0.9)

    def test_defaults(self):
        cfg = CompressionConfig()
        assert (cfg.clustering_ratio, cfg.balance) == (0.05, 0.1)

    @pytest.mark.parametrize("c", [-0.1, 1.0])
    def test_bad_ratio(self, c):
        with pytest.raises(ValueError):
            CompressionConfig(compression_ratio=c)


class TestCompress:
    def test_zero_ratio_identity(self, split_graph):
        out, report = compress(split_graph, CompressionConfig(0.0))
        assert out == split_graph
        assert dumps(out) == dumps(split_graph)
        assert report.removed == []

    def test_seventy_plus_seventy(self, split_graph):
        out, report = compress(split_graph, CompressionConfig(0.3))
        assert len(report.retained_isolated) == 70
        assert len(report.retained_connected) == 70
        assert len(out) == 140

    def test_partition_of_ids(self, split_graph):
        _, report = compress(split_graph, CompressionConfig(0.5))
        kept, removed = set(report.retained), set(report.removed)
        assert not kept & removed
        assert kept | removed == set(split_graph.text_ids.tolist())

    def test_output_valid_and_entities_kept(self, split_graph):
        out, _ = compress(split_graph, CompressionConfig(0.7))
        assert validate(out).ok
        assert out.entity_nodes == split_graph.entity_nodes
        kept = set(out.text_ids.tolist())
        assert all(e.text_id in kept for e in out.edges)

    def test_branch_membership(self, split_graph):
        _, report = compress(split_graph, CompressionConfig(0.3))
        iso, con = partition_connectivity(split_graph)
        assert set(report.retained_isolated) <= set(iso)
        assert set(report.retained_connected) <= set(con)

    def test_report_fields(self, split_graph):
        _, report = compress(split_graph, CompressionConfig(0.3))
        assert report.n_clusters == 5
        assert len(report.cluster_radius) == 5
        assert 0 < report.retained_score_fraction <= 1
        assert report.covering_radius > 0
        d = json.loads(report.to_json(timing=False))
        assert "duration" not in d
        assert "duration" in report.to_dict()

    def test_single_branch_graphs(self, rng):
        iso_only = make_graph(unit_rows(rng, 30, 4))
        _, report = compress(iso_only, CompressionConfig(0.5))
        assert len(report.retained_isolated) == 15 and report.retained_connected == []
        assert report.retained_score is None

        x = unit_rows(rng, 30, 4)
        con_only = make_graph(x, edges=[(0, t, 1.0 + t) for t in range(30)])
        _, report = compress(con_only, CompressionConfig(0.5))
        assert report.retained_isolated == [] and len(report.retained_connected) == 15
        assert report.covering_radius == 0.0

    def test_empty_graph(self):
        empty = make_graph(np.zeros((0, 3)))
        with pytest.raises(GraphError):
            compress(empty, CompressionConfig())

    @pytest.mark.parametrize("c", [0.1, 0.29, 0.5, 0.7, 0.95])
    def test_count_exactness(self, rng, c):
        g = _split_graph(rng, n_iso=int(rng.integers(1, 80)), n_con=int(rng.integers(1, 80)))
        iso, con = partition_connectivity(g)
        _, report = compress(g, CompressionConfig(c))
        assert len(report.retained) == retention_count(len(iso), 1 - c) + retention_count(len(con), 1 - c)

    def test_deterministic(self, split_graph):
        a_graph, a = compress(split_graph, CompressionConfig(0.5, seed=7))
        b_graph, b = compress(split_graph, CompressionConfig(0.5, seed=7))
        assert a.to_json(timing=False) == b.to_json(timing=False)
        assert dumps(a_graph) == dumps(b_graph)


class TestBaselineDispatch:
    @pytest.mark.parametrize("policy", ["random", "clustering", "dart"])
    def test_per_branch_counts(self, split_graph, policy):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DartPivotWarning)
            out, report = compress_with(policy, split_graph, 0.3, seed=3)
        assert len(report.retained_isolated) == 70 and len(report.retained_connected) == 70
        assert validate(out).ok

    @pytest.mark.parametrize("policy", ["adjacent-fifo", "capacity_evict"])
    def test_chronological_budget(self, split_graph, policy):
        out, report = compress_with(policy, split_graph, 0.3)
        assert len(report.retained) <= 140
        assert validate(out).ok

    def test_capacity_evict_fills_budget(self, split_graph):
        _, report = compress_with("capacity_evict", split_graph, 0.3)
        assert len(report.retained) == 140

    @pytest.mark.parametrize("method", METHODS)
    def test_zero_ratio_identity(self, split_graph, method):
        out, report = run_method(method, split_graph, 0.0)
        assert out == split_graph
        assert report.removed == []

    def test_clustering_one_per_cluster(self, split_graph):
        _, report = compress_with("clustering", split_graph, 0.5, seed=0)
        assert len(report.retained_isolated) == retention_count(100, 0.5)

    def test_unknown_policy(self, split_graph):
        with pytest.raises(ValueError):
            compress_with("lru", split_graph, 0.3)

    def test_method_dispatch_matches_direct(self, split_graph):
        _, a = run_method("streammeco", split_graph, 0.5, CompressionConfig(seed=2))
        _, b = compress(split_graph, CompressionConfig(0.5, seed=2))
        assert a.retained == b.retained
