import numpy as np
import pytest
from sklearn.base import clone

from vqc_titanic.svc import LinearSVC, svc_predict, svc_train


def blobs(seed=0, n=30):
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=0.3, size=(n, 2)) + [-1.5, 0]
    b = rng.normal(scale=0.3, size=(n, 2)) + [1.5, 0]
    X = np.vstack([a, b])
    y = np.array([0] * n + [1] * n)
    keep = np.abs(X[:, 0]) > 1.0  # margin of 2 around x0 = 0
    return X[keep], y[keep]


class TestExamples:
    def test_one_dimensional(self):
        m = svc_train(np.array([[-1.0], [1.0]]), [0, 1], c=1.0)
        assert m.decision_function([[0.0]])[0] == pytest.approx(0.0, abs=1e-3)
        assert list(m.predict([[-1.0], [1.0]])) == [0, 1]

    def test_separable_blobs(self):
        X, y = blobs()
        m = svc_train(X, y, tolerance=1e-4)
        assert np.mean(m.predict(X) == y) == 1.0
        assert m.converged_

    def test_xor(self):
        X = np.array([[0, 0], [1, 1], [0, 1], [1, 0]], dtype=float)
        y = np.array([0, 0, 1, 1])
        m = svc_train(X, y)
        assert np.mean(m.predict(X) == y) <= 0.75

    def test_single_class(self):
        with pytest.raises(ValueError):
            svc_train(np.zeros((3, 2)), [1, 1, 1])


class TestPredict:
    def test_positive_side(self):
        m = LinearSVC().set_weights([1, 0, 0, 0, 0], 0.0)
        assert svc_predict(m, [0.9, 0.1, 0.2, 0.3, 0.4]) == 1

    def test_negative_side(self):
        m = LinearSVC().set_weights([1.0], -0.8)
        assert svc_predict(m, [0.5]) == 0  # w.x + b = -0.3

    def test_tie(self):
        m = LinearSVC().set_weights([1.0, -1.0], 0.0)
        assert svc_predict(m, [0.4, 0.4]) == 0

    def test_unfitted(self):
        with pytest.raises(Exception):
            LinearSVC().predict([[0.0]])


@pytest.fixture(scope="module")
def fitted():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(120, 5))
    y = (X @ [1, -2, 0.5, 0, 1] + rng.normal(scale=0.4, size=120) > 0.2).astype(int)
    return X, y, LinearSVC(C=1.0).fit(X, y)


class TestSolver:
    def test_dual_feasible(self, fitted):
        _, _, m = fitted
        assert np.all(m.dual_coef_ >= 0) and np.all(m.dual_coef_ <= m.C)

    def test_dual_objective_non_decreasing(self, fitted):
        h = np.array(fitted[2].dual_objective_history_)
        assert np.all(np.diff(h) >= -1e-12)

    def test_gap_below_tolerance(self, fitted):
        m = fitted[2]
        assert m.converged_ and 0 <= m.duality_gap_ <= m.tol

    def test_weights_from_duals(self, fitted):
        X, y, m = fitted
        s = np.where(y == 1, 1.0, -1.0)
        w = (m.dual_coef_ * s) @ np.hstack([X, np.ones((len(X), 1))])
        np.testing.assert_allclose(m.coef_, w[:-1], atol=1e-10)
        assert m.intercept_ == pytest.approx(w[-1], abs=1e-10)

    def test_deterministic(self, fitted):
        X, y, m = fitted
        again = LinearSVC(C=1.0).fit(X, y)
        assert again.coef_.tobytes() == m.coef_.tobytes()
        assert again.intercept_ == m.intercept_

    def test_matches_reference_objective(self, fitted):
        X, y, m = fitted
        s = np.where(y == 1, 1.0, -1.0)

        def primal(w, b):
            return 0.5 * (w @ w + b * b) + np.maximum(0, 1 - s * (X @ w + b)).sum()

        optimize = pytest.importorskip("scipy.optimize")
        z0 = np.zeros(6)
        ref = optimize.minimize(lambda z: primal(z[:5], z[5]), z0, method="Powell",
                             options=dict(xtol=1e-10, ftol=1e-12, maxfev=200000))
        assert primal(m.coef_, m.intercept_) <= ref.fun + 1e-3

    def test_max_passes(self, fitted):
        X, y, _ = fitted
        m = LinearSVC(max_passes=1).fit(X, y)
        assert m.n_passes_ == 1 and len(m.dual_objective_history_) == 1


def test_dump_round_trip():
    X, y = blobs(1)
    m = LinearSVC(C=0.5).fit(X, y)
    back = LinearSVC.loads(m.dumps())
    assert back.coef_.tobytes() == m.coef_.tobytes()
    assert back.intercept_ == m.intercept_ and back.C == 0.5
    np.testing.assert_array_equal(back.predict(X), m.predict(X))


def test_clone():
    assert clone(LinearSVC(C=3.0)).get_params()["C"] == 3.0
