import itertools
import math

import numpy as np
import pytest

import qcaan


def test_born_probabilities_are_normalized():
    p = np.asarray(qcaan.born_probabilities(4, layers=2, seed=3))
    assert p.shape == (16,)
    assert abs(p.sum() - 1.0) < 1e-10
    zero = qcaan.born_probabilities(3, layers=1, theta=[0.0] * 12)
    assert zero[0] == pytest.approx(1.0)


def test_sampling_and_sinkhorn():
    bits = qcaan.sample_bitstrings(3, shots=200, seed=1)
    assert bits.shape == (200, 3)
    assert set(np.unique(bits)) <= {0, 1}
    assert abs(qcaan.sinkhorn_divergence(bits, bits)) < 1e-6
    zeros = np.zeros((2, 5), dtype=np.uint8)
    ones = np.ones((1, 5), dtype=np.uint8)
    assert qcaan.sinkhorn_divergence(zeros, ones, epsilon=0.01) == pytest.approx(5.0, abs=0.05)
    with pytest.raises(ValueError):
        qcaan.sinkhorn_divergence(np.full((2, 2), 2, dtype=np.uint8), zeros[:, :2])


def test_train_qcbm_reduces_loss():
    target = np.ones((64, 3), dtype=np.uint8)
    r = qcaan.train_qcbm(target, iters=100, batch=256, seed=0)
    assert len(r["step_loss"]) == 100
    assert r["final_loss"] < r["initial_loss"]


def test_architecture_rule():
    assert qcaan.generator_hidden_dims(94, 16) == [32, 64, 128]
    assert qcaan.discriminator_hidden_dims(94, 16) == [128, 64, 32, 16]
    assert qcaan.generator_hidden_dims(94, 16, literal=True) == [32, 64, 96]


def test_oversamplers_stay_in_the_minority_hull():
    rng = np.random.default_rng(0)
    minority = rng.random((20, 3))
    s = qcaan.smote(minority, 50, k=3, seed=2)
    assert s.shape == (50, 3)
    assert (s >= minority.min(axis=0) - 1e-12).all() and (s <= minority.max(axis=0) + 1e-12).all()
    r = qcaan.random_oversample(minority, 10, seed=1)
    assert all(any(np.array_equal(row, m) for m in minority) for row in r)
    g = qcaan.qcaan_oversample(minority, 15, q=4, epochs=3, refresh_period=1, qcbm_iters=2, seed=1)
    assert g.shape == (15, 3)
    assert np.isfinite(g).all()


def test_metrics_and_statistics():
    r = qcaan.report_from_counts(1300, 0, 1, 1251)
    assert r["accuracy"] == 2551 / 2552
    assert r["recall"] == 1251 / 1252
    e = qcaan.evaluate([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8])
    assert e["auc"] == 0.75
    h, p, df = qcaan.kruskal_wallis({"a": [1, 2, 3], "b": [101, 102, 103]})
    assert h == pytest.approx(3.857, abs=1e-3)
    assert df == 1
    names, z, _ = qcaan.dunn_test({"a": [1, 2, 3, 4], "b": [11, 12, 13, 14]})
    assert names == ["a", "b"]
    assert z[0][1] == pytest.approx(-2.309, abs=5e-3)
    flat = qcaan.bayesian_bootstrap_mean([0.7] * 5, replications=100)
    assert qcaan.hdi(flat) == (0.7, 0.7)


def test_metadata_and_logistic():
    x = np.array([[0.0, 0.0], [0.0, 1.0], [3.0, 3.0], [3.0, 4.0], [1.0, 0.0]])
    y = [0, 0, 1, 1, 0]
    md = qcaan.compute_metadata(x, y)
    assert (md["n_neg"], md["n_pos"]) == (3, 2)
    assert md["d_p"]["min"] == 1.0
    pairs = [math.dist(a, b) for a, b in itertools.combinations(x[[0, 1, 4]], 2)]
    assert md["d_n"]["max"] == pytest.approx(max(pairs))
    scores = qcaan.fit_logistic_scores(x, y, x)
    assert qcaan.evaluate(y, list(scores))["accuracy"] == 1.0
    scaled = qcaan.minmax_scale(x)
    assert scaled.min() == 0.0 and scaled.max() == 1.0


def test_experiment_round_trip(tmp_path):
    config = qcaan.write_demo_datasets(str(tmp_path / "demo"))
    small = tmp_path / "demo" / "small.json"
    small.write_text(
        '{"output_dir": "out", "datasets": [{"name": "demo_oil", "path": "demo_oil.csv"}],'
        ' "strategies": ["none", "smote"], "seeds": [0], "q": 4}'
    )
    assert config.endswith("config.json")
    first = qcaan.run_experiment1(str(small))
    assert first["complete"] and first["computed"] == 2
    again = qcaan.run_experiment1(str(small))
    assert again["reused"] == 2 and again["computed"] == 0
    assert [r["accuracy"] for r in again["records"]] == [r["accuracy"] for r in first["records"]]
    assert len(qcaan.config_hash(str(small))) == 16
