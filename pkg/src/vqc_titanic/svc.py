"""Linear soft-margin SVC trained by dual coordinate descent.

Solves ``min_w 0.5 |w|^2 + C sum_i max(0, 1 - s_i w.x_i)`` with ``s_i = +-1``.
The bias is folded into ``w`` through a constant feature of value
``intercept_scaling``, so it is regularised like the other weights. Each pass
visits the dual variables in index order (no shuffling, no shrinking) and
maximises the dual exactly along each coordinate, clipped to ``[0, C]``.
Training stops when the duality gap falls to ``tol`` or after ``max_passes``.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_binary_labels, check_features


class LinearSVC(ClassifierMixin, BaseEstimator):
    def __init__(self, C=1.0, tol=1e-4, max_passes=1000, intercept_scaling=1.0):
        self.C = C
        self.tol = tol
        self.max_passes = max_passes
        self.intercept_scaling = intercept_scaling

    def _augment(self, X):
        return np.hstack([X, np.full((X.shape[0], 1), float(self.intercept_scaling))])

    def fit(self, X, y):
        X = check_features(X)
        y = check_binary_labels(y, X.shape[0])
        if np.unique(y).size < 2:
            raise ValueError("training data must contain both classes")
        if self.C <= 0:
            raise ValueError("C must be positive")
        Xa = self._augment(X)
        s = np.where(y == 1, 1.0, -1.0)
        Z = Xa * s[:, None]  # rows s_i x_i
        q_diag = np.einsum("ij,ij->i", Z, Z)
        C = float(self.C)

        n, d = Z.shape
        alpha = [0.0] * n
        w = np.zeros(d)
        rows = [Z[i] for i in range(n)]
        history = []
        gap = np.inf
        passes = 0
        for passes in range(1, self.max_passes + 1):
            for i in range(n):
                qii = q_diag[i]
                if qii == 0.0:
                    continue
                zi = rows[i]
                a = alpha[i]
                g = float(w @ zi) - 1.0
                if a == 0.0:
                    pg = min(g, 0.0)
                elif a == C:
                    pg = max(g, 0.0)
                else:
                    pg = g
                if pg != 0.0:
                    new = min(max(a - g / qii, 0.0), C)
                    if new != a:
                        w += (new - a) * zi
                        alpha[i] = new
            alpha_arr = np.asarray(alpha)
            half_norm = 0.5 * float(w @ w)
            dual = float(alpha_arr.sum()) - half_norm
            primal = half_norm + C * float(np.maximum(0.0, 1.0 - Z @ w).sum())
            history.append(dual)
            gap = primal - dual
            if gap <= self.tol:
                break

        self.classes_ = np.array([0, 1])
        self.n_features_in_ = X.shape[1]
        self.coef_ = w[:-1].copy()
        self.intercept_ = float(w[-1] * self.intercept_scaling)
        self.dual_coef_ = np.asarray(alpha)
        self.dual_objective_history_ = history
        self.duality_gap_ = gap
        self.n_passes_ = passes
        self.converged_ = gap <= self.tol
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_features(X, n_features=self.n_features_in_)
        return X @ self.coef_ + self.intercept_

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(int)

    def set_weights(self, coef, intercept):
        """Install a hyperplane directly (no training)."""
        self.coef_ = np.asarray(coef, dtype=np.float64).ravel()
        self.intercept_ = float(intercept)
        self.n_features_in_ = self.coef_.size
        self.classes_ = np.array([0, 1])
        return self

    def dumps(self) -> str:
        check_is_fitted(self, "coef_")
        return (
            "# vqc_titanic LinearSVC\n"
            f"C={self.C!r}\n"
            "weights=" + ",".join(repr(float(v)) for v in self.coef_) + "\n"
            f"bias={float(self.intercept_)!r}\n"
        )

    @classmethod
    def loads(cls, text: str) -> "LinearSVC":
        record = dict(
            line.split("=", 1) for line in text.splitlines() if line and not line.startswith("#")
        )
        model = cls(C=float(record["C"]))
        return model.set_weights([float(v) for v in record["weights"].split(",")], float(record["bias"]))


def svc_train(X, y, c=1.0, tolerance=1e-4, max_passes=1000) -> LinearSVC:
    return LinearSVC(C=c, tol=tolerance, max_passes=max_passes).fit(X, y)


def svc_predict(model: LinearSVC, x) -> int:
    return int(model.predict(np.atleast_2d(x))[0])
