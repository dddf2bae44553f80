import math

import pytest

import rlmut


def test_fisher_matches_closed_form():
    assert rlmut.fisher_exact(8, 2, 2, 8) == pytest.approx(4252 / 184756, rel=1e-12)
    assert rlmut.fisher_exact(3, 3, 3, 3) == pytest.approx(1.0)


def test_killed_pair_and_rate():
    assert rlmut.killed_pair(50, 0, 0, 50) == "killed"
    assert rlmut.killed_pair(0, 50, 50, 0) == "weaker_original"
    assert rlmut.killed_pair(5, 5, 5, 5) == "not_killed"
    rec = rlmut.killing_rate(["killed", "killed", "not_killed", "not_killed"])
    assert rec["rate"] == pytest.approx(0.5)
    assert rec["killed"]


def test_scores():
    assert rlmut.mutation_score([[1.0, 0.0], [0.5]]) == pytest.approx(0.5)
    assert rlmut.sensitivity(0.2, 0.8) == pytest.approx(0.75)
    assert rlmut.sensitivity(0.8, 0.2) == 0.0
    est, lo, hi = rlmut.probability_of_improvement([True] * 20, [False] * 20, samples=200, seed=1)
    assert est == pytest.approx(1.0)
    assert lo <= est <= hi


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        rlmut.fisher_exact(-1, 0, 0, 0)
    with pytest.raises(ValueError):
        rlmut.normalize_config({"env": "CartPole"})


def test_catalog_and_spaces():
    assert rlmut.catalog("DQN") == ["SDF", "SLS", "NEI", "SNU", "SPV", "SMR"]
    assert rlmut.catalog("A2C") == ["SDF", "NEI", "SEC", "SNR"]
    hp = rlmut.default_hyperparameters("DQN")
    space = rlmut.default_space("SDF", hp)
    assert space and hp["gamma"] not in space
    mutated = rlmut.apply_mutation("SDF", 0.9, hp)
    assert mutated["gamma"] == pytest.approx(0.9)


def test_train_and_evaluate_are_seeded():
    hp = rlmut.default_hyperparameters("A2C")
    hp.update(total_steps=2000, n_steps=8, hidden=[16])
    a = rlmut.train("CartPole", hp, 5)
    b = rlmut.train("CartPole", hp, 5)
    assert a == b
    configs = rlmut.random_configs("CartPole", 10, 3)
    outcomes = rlmut.evaluate(a["agent"], "CartPole", configs)
    assert len(outcomes) == 10
    assert all(o["length"] >= 1 and math.isfinite(o["return"]) for o in outcomes)


def test_derive_seed():
    s = rlmut.derive_seed(7, "train", None, 0, 1)
    assert s == rlmut.derive_seed(7, "train", "NEI", 3, 1)
    assert s != rlmut.derive_seed(7, "train", None, 0, 2)


def test_run_all(tmp_path):
    config = {
        "schema_version": 1,
        "env": "GridBridge",
        "algorithm": "A2C",
        "n": 2,
        "hyperparameters": {"total_steps": 1500, "n_steps": 8, "hidden": [16]},
        "operators": [{"operator": "SDF", "configs": 1, "space": [0.5]}],
        "generators": {"weak": {"pool": 6, "select": 3}, "strong": {"count": 3, "candidates": 6}},
        "stats": {"bootstrap_samples": 20},
        "replay_sample": 6,
        "seed": 4,
        "artifacts": str(tmp_path / "run"),
    }
    report = rlmut.run_all(config)
    assert report["n"] == 2
    assert set(report["generators"]) >= {"weak", "strong"}
    assert rlmut.load_report(tmp_path / "run" / "report.json") == report
