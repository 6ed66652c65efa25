import json

import numpy as np
import pytest

from haarlab import (SearchConfig, build_lattice, carleson_constant,
                     extremal_search, greedy_embedding_sequence,
                     replay_artifact, uniform_measure)


CFG = SearchConfig(dim=1, top_level=0, leaf_level=-3, r=1, seed=7,
                   iterations=30, root_amplitude=0.3)


def test_zero_iterations_returns_seed_instance():
    result = extremal_search(SearchConfig(seed=5, iterations=0))
    assert len(result.history) == 1
    assert result.history[0] == result.rho


def test_search_is_deterministic():
    a = extremal_search(CFG)
    b = extremal_search(CFG)
    assert a.rho == b.rho
    assert a.to_artifact() == b.to_artifact()
    c = extremal_search(SearchConfig(dim=1, top_level=0, leaf_level=-3, r=1,
                                     seed=8, iterations=30,
                                     root_amplitude=0.3))
    assert c.to_artifact() != a.to_artifact()


def test_incumbent_never_decreases():
    result = extremal_search(CFG)
    assert all(b >= a for a, b in zip(result.history, result.history[1:]))
    assert result.history[-1] == result.rho
    assert result.rho >= result.history[0]


def test_artifact_is_json_serializable_and_replays():
    result = extremal_search(CFG)
    artifact = json.loads(json.dumps(result.to_artifact()))
    ok, recomputed = replay_artifact(artifact)
    assert ok
    assert recomputed["rho"] == pytest.approx(result.rho, rel=1e-12)
    assert recomputed["constants"]["norm"] == pytest.approx(
        result.report.norm, rel=1e-12)


def test_replay_detects_tampering():
    artifact = extremal_search(CFG).to_artifact()
    artifact["mu"][0] *= 2.0
    ok, _ = replay_artifact(artifact)
    assert not ok
    artifact2 = extremal_search(CFG).to_artifact()
    artifact2["rho"] += 1e-3
    assert not replay_artifact(artifact2)[0]


def test_greedy_embedding_normalized_and_bounded():
    seq, const = greedy_embedding_sequence(3, seed=0, iterations=15)
    lat = build_lattice(1, 0, -3)
    mu = uniform_measure(lat, total=1.0)
    assert carleson_constant(seq, mu) == pytest.approx(1.0, rel=1e-12)
    assert 1.0 <= const <= 4.0


def test_greedy_embedding_nondecreasing_with_depth():
    prev_seq, prev = None, 0.0
    for depth in range(3, 7):
        prev_seq, const = greedy_embedding_sequence(depth, seed=1,
                                                    iterations=10,
                                                    init=prev_seq)
        assert const >= prev - 1e-12
        assert const <= 4.0 + 1e-9
        prev = const
