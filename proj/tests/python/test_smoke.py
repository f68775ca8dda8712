import math
import os

import pytest

import cphs

CONFIG_DIR = os.environ.get("CPHS_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


def config(name):
    return os.path.join(CONFIG_DIR, name)


def test_hunt_probability_matches_reference():
    p = cphs.hunt_probability(0.05, 0.70, 2.0, 2.2, 100.0)
    assert math.isclose(p, 0.46908136207871640, rel_tol=1e-12)
    with pytest.raises(Exception):
        cphs.hunt_probability(0.05, 0.70, 2.0, 2.2, 0.0)


def test_probit_probability_matches_reference():
    p = cphs.probit_probability(6.5, -2.6, 300.0)
    assert math.isclose(p, 0.52371698926092645, rel_tol=1e-12)


def test_wasserstein1_weighted():
    d = cphs.wasserstein1(
        [0.1, 0.5, 0.9], [0.2, 0.4, 1.0],
        weights_a=[0.2, 0.3, 0.5], weights_b=[0.5, 0.25, 0.25],
    )
    assert math.isclose(d, 0.26, rel_tol=1e-12)
    equal = cphs.wasserstein1([0.31, 2.7, -1.2, 0.05], [1.5, -0.4, 0.9, 2.2])
    assert math.isclose(equal, 0.835, rel_tol=1e-12)


def test_d_separation_motifs():
    nodes = ["m", "x", "y"]
    chain = [("x", "m"), ("m", "y")]
    assert cphs.d_separated(nodes, chain, "x", "y", ["m"])
    assert not cphs.d_separated(nodes, chain, "x", "y")
    collider = [("x", "m"), ("y", "m")]
    assert cphs.d_separated(nodes, collider, "x", "y")
    assert not cphs.d_separated(nodes, collider, "x", "y", ["m"])


def test_implied_and_adjustment():
    nodes = ["c", "t", "y"]
    edges = [("c", "t"), ("c", "y"), ("t", "y")]
    assert cphs.implied_independencies(nodes, edges) == []
    feasible, zset = cphs.adjustment_set(nodes, edges, "t", "y")
    assert feasible
    assert zset == ["c"]


def test_schedule_counts_from_case_config():
    counts = cphs.schedule_event_counts(config("case_study.cfg"))
    assert counts == [36, 36, 18, 18, 18, 18, 36]
    assert sum(counts) == 180


def test_simulate_writes_dataset(tmp_path):
    out = cphs.simulate(config("planted_edge.cfg"), seed=4, out_dir=str(tmp_path))
    assert out["records"] == out["slots"] * 10
    assert (tmp_path / "ive_dataset.csv").exists()


def test_run_loop_recovers_planted_edge(tmp_path):
    result = cphs.run_loop(config("planted_edge.cfg"), seed=1, out_dir=str(tmp_path))
    assert result["termination"] == "graph_converged"
    assert result["iterations"] <= 3
    assert ("outdoor_lux", "action") in result["final_edges"]
    assert result["best_discrepancy"] <= result["existing_discrepancy"]
    for name in result["files"]:
        assert (tmp_path / name).exists()
    assert (tmp_path / "report.svg").read_text().startswith("<svg")
