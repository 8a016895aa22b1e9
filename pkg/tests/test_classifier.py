import math
import warnings

import numpy as np
import pytest
from sklearn.base import clone

from vqc_titanic.circuits import SpecError
from vqc_titanic.classifier import (
    VQCClassifier,
    class_probabilities,
    cross_entropy_loss,
    parse_model_name,
    predict,
    predict_from_probabilities,
    train,
)

from oracles import H, phase, ry


def toy_set(rule, n=20, seed=1, margin=0.1):
    rng = np.random.default_rng(seed)
    X, y = [], []
    while len(X) < n:
        p = rng.uniform(size=2)
        s = rule(p)
        if abs(s) < margin:
            continue
        X.append(p)
        y.append(int(s > 0))
    return np.array(X), np.array(y)


@pytest.fixture(scope="module")
def small_data():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(40, 5))
    y = (X[:, 1] + 0.3 * X[:, 0] > 0.6).astype(int)
    return X, y


class TestProbabilities:
    def test_all_zero_model(self):
        m = VQCClassifier("Z", 15).set_theta(np.zeros(15), 5)
        q0, q1 = class_probabilities(m, np.zeros(5))
        assert q0 == pytest.approx(1.0, abs=1e-12) and q1 == pytest.approx(0.0, abs=1e-12)

    def test_single_qubit_matrix_oracle(self):
        m = VQCClassifier("Z", 2, feature_map_reps=1).set_theta([math.pi, 0.0], 1)
        psi = ry(0.0) @ ry(math.pi) @ phase(0.0) @ H @ np.array([1, 0], dtype=complex)
        q0, q1 = class_probabilities(m, [0.0])
        assert q1 == pytest.approx(abs(psi[1]) ** 2, abs=1e-12)
        assert q0 == pytest.approx(abs(psi[0]) ** 2, abs=1e-12)

    def test_single_qubit_general(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            x, t0, t1 = rng.uniform(), *rng.uniform(-np.pi, np.pi, 2)
            m = VQCClassifier("Z", 2, feature_map_reps=2).set_theta([t0, t1], 1)
            u = phase(2 * x) @ H
            psi = ry(t1) @ ry(t0) @ u @ u @ np.array([1, 0], dtype=complex)
            assert class_probabilities(m, [x])[1] == pytest.approx(abs(psi[1]) ** 2, abs=1e-12)

    @pytest.mark.parametrize("kind", ["Z", "ZZ"])
    def test_normalised_and_batched_agrees(self, kind):
        rng = np.random.default_rng(2)
        m = VQCClassifier(kind, 20).set_theta(rng.uniform(-np.pi, np.pi, 20), 5)
        X = rng.uniform(size=(25, 5))
        proba = m.predict_proba(X)
        np.testing.assert_allclose(proba.sum(axis=1), 1, atol=1e-10)
        for row, x in zip(proba, X):
            np.testing.assert_allclose(row, class_probabilities(m, x), atol=1e-12)

    def test_qubit_readout(self):
        m = VQCClassifier("Z", 10, readout="qubit", readout_qubit=2).set_theta(np.zeros(10), 5)
        x = np.zeros(5)
        assert class_probabilities(m, x)[1] == pytest.approx(0.0, abs=1e-12)
        theta = np.zeros(10)
        theta[2] = math.pi  # flip qubit 2 in the first RY layer; CX ladder then fans it out
        m.set_theta(theta, 5)
        q_parity = VQCClassifier("Z", 10).set_theta(theta, 5).predict_proba([x])[0, 1]
        q_qubit = m.predict_proba([x])[0, 1]
        assert q_qubit == pytest.approx(1.0, abs=1e-12)
        assert 0.0 <= q_parity <= 1.0

    def test_out_of_range_warns(self):
        m = VQCClassifier("Z", 10).set_theta(np.zeros(10), 5)
        with pytest.warns(RuntimeWarning):
            class_probabilities(m, np.full(5, 1.5))

    def test_arity(self):
        m = VQCClassifier("Z", 10).set_theta(np.zeros(10), 5)
        with pytest.raises(ValueError):
            class_probabilities(m, np.zeros(4))
        with pytest.raises(ValueError):
            m.predict_proba(np.zeros((3, 4)))


class TestLoss:
    def test_perfect(self):
        m = VQCClassifier("Z", 2, feature_map_reps=2).set_theta([0.0, 0.0], 1)
        loss = cross_entropy_loss(m, np.zeros((3, 1)), [0, 0, 0])
        assert loss == pytest.approx(0.0, abs=2e-10)

    def test_coin_flip(self):
        m = VQCClassifier("Z", 2, feature_map_reps=1).set_theta([0.0, 0.0], 1)
        loss = cross_entropy_loss(m, np.zeros((4, 1)), [0, 1, 1, 0])
        assert loss == pytest.approx(math.log(2), abs=1e-12)

    def test_matches_definition(self, small_data):
        X, y = small_data
        m = VQCClassifier("ZZ", 10).set_theta(np.linspace(-1, 1, 10), 5)
        q = m.predict_proba(X)
        expected = -np.mean(np.log(np.clip(q[np.arange(len(y)), y], 1e-10, 1 - 1e-10)))
        assert cross_entropy_loss(m, X, y) == pytest.approx(expected, abs=1e-12)

    def test_empty(self):
        m = VQCClassifier("Z", 10).set_theta(np.zeros(10), 5)
        with pytest.raises(ValueError):
            cross_entropy_loss(m, np.zeros((0, 5)), [])


class TestPredict:
    @pytest.mark.parametrize("q,label", [((0.9, 0.1), 0), ((0.2, 0.8), 1), ((0.5, 0.5), 0)])
    def test_rule(self, q, label):
        assert predict_from_probabilities(*q) == label

    def test_tie_within_tolerance(self):
        assert predict_from_probabilities(0.5 - 1e-13, 0.5 + 1e-13) == 0

    def test_single_row_matches_batch(self, small_data):
        X, _ = small_data
        m = VQCClassifier("Z", 10).set_theta(np.linspace(0, 2, 10), 5)
        assert [predict(m, x) for x in X[:10]] == list(m.predict(X[:10]))

    def test_unfitted(self):
        with pytest.raises(Exception):
            VQCClassifier().predict(np.zeros((1, 5)))


class TestTraining:
    def test_single_iteration(self, small_data):
        X, y = small_data
        report = train(VQCClassifier("Z", 10), X, y, max_iterations=1, seed=3)
        assert len(report.loss_curve) == 1
        assert report.iterations_used == 1
        assert report.evaluations == 10 + 1 + 1

    def test_seed_determinism(self, small_data):
        X, y = small_data
        a = VQCClassifier("Z", 10, max_iter=30, random_state=4).fit(X, y).train_report_
        b = VQCClassifier("Z", 10, max_iter=30, random_state=4).fit(X, y).train_report_
        assert a.final_theta.tobytes() == b.final_theta.tobytes()
        assert a.loss_curve == b.loss_curve

    def test_threads_do_not_change_result(self, small_data):
        X, y = small_data
        a = VQCClassifier("Z", 10, max_iter=20, random_state=1).fit(X, y)
        b = VQCClassifier("Z", 10, max_iter=20, random_state=1, n_jobs=4).fit(X, y)
        np.testing.assert_array_equal(a.theta_, b.theta_)

    def test_report_contents(self, small_data):
        X, y = small_data
        m = VQCClassifier("Z", 10, max_iter=40, random_state=0).fit(X, y)
        r = m.train_report_
        assert len(r.loss_curve) <= 40
        assert r.iterations_used == len(r.loss_curve)
        assert np.all(r.initial_theta >= -np.pi) and np.all(r.initial_theta <= np.pi)
        best = np.minimum.accumulate(r.loss_curve)
        assert np.all(np.diff(best) <= 0)
        assert m.loss(X, y) == pytest.approx(r.best_loss, abs=1e-12)
        assert r.best_loss <= min(r.init_losses[0], min(r.loss_curve))
        assert r.wall_time >= 0 and not r.failed

    def test_optimizer_failure_is_reported(self, small_data, monkeypatch):
        import vqc_titanic.classifier as mod

        def boom(*args, **kwargs):
            raise RuntimeError("simulated failure")

        monkeypatch.setattr(mod, "minimize", boom)
        m = VQCClassifier("Z", 10, random_state=2).fit(*small_data)
        assert m.train_report_.failed
        assert "simulated failure" in m.train_report_.message
        np.testing.assert_array_equal(m.theta_, m.train_report_.initial_theta)

    @pytest.mark.parametrize("rule", [
        lambda p: p[0] + p[1] - 1,
        lambda p: p[0] - 0.5,
    ])
    def test_toy_separability(self, rule):
        X, y = toy_set(rule)
        hits = 0
        for seed in range(10):
            m = VQCClassifier("Z", 6, max_iter=300, random_state=seed).fit(X, y)
            hits += np.mean(m.predict(X) == y) >= 0.95
        assert hits >= 8


class TestEstimatorApi:
    def test_get_params_and_clone(self):
        m = VQCClassifier("ZZ", 25, max_iter=7)
        params = m.get_params()
        assert params["feature_map"] == "ZZ" and params["n_params"] == 25
        c = clone(m)
        assert c.get_params() == params and c is not m

    def test_score(self, small_data):
        X, y = small_data
        m = VQCClassifier("Z", 10, max_iter=50).fit(X, y)
        assert m.score(X, y) == pytest.approx(np.mean(m.predict(X) == y))

    def test_names(self):
        assert parse_model_name("Z20") == ("Z", 20)
        assert parse_model_name("zz35") == ("ZZ", 35)
        with pytest.raises(ValueError):
            parse_model_name("Q10")
        m = VQCClassifier.from_name("ZZ15")
        assert (m.feature_map, m.n_params) == ("ZZ", 15)

    def test_bad_parameter_count(self, small_data):
        with pytest.raises(SpecError):
            VQCClassifier("Z", 12).fit(*small_data)

    def test_bad_labels(self, small_data):
        X, _ = small_data
        with pytest.raises(ValueError):
            VQCClassifier("Z", 10).fit(X, np.full(len(X), 2))


class TestPersistence:
    def test_round_trip_bit_exact(self, small_data, tmp_path):
        X, y = small_data
        m = VQCClassifier("ZZ", 15, max_iter=15, random_state=9, entanglement="linear").fit(X, y)
        path = tmp_path / "model.txt"
        m.save(path)
        back = VQCClassifier.load(path)
        assert back.theta_.tobytes() == m.theta_.tobytes()
        assert back.get_params() == m.get_params()
        np.testing.assert_array_equal(back.predict_proba(X), m.predict_proba(X))
        assert back.dumps() == m.dumps()

    def test_record_is_text(self, small_data):
        m = VQCClassifier("Z", 10).set_theta(np.full(10, 0.1), 5)
        text = m.dumps()
        assert "feature_map='Z'" in text and "theta=0.1," in text and "n_features=5" in text
