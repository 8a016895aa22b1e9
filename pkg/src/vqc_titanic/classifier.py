"""Hybrid variational quantum classifier.

A feature vector ``x`` is encoded by a Pauli feature map, transformed by a
RealAmplitudes ansatz with trainable angles ``theta``, and read out exactly
from the final statevector. The default readout assigns even-parity
bitstrings to class 0 and odd-parity bitstrings to class 1. Training
minimises the mean cross-entropy with :func:`vqc_titanic.optimizer.minimize`,
one objective evaluation per optimizer iteration.
"""
from __future__ import annotations

import math
import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from . import losses
from ._validation import check_binary_labels, check_features
from .circuits import (
    AnsatzSpec,
    FeatureMapSpec,
    bind,
    build_feature_map,
    build_real_amplitudes,
    params_to_reps,
)
from .optimizer import CobylaConfig, minimize
from .statevector import (
    StateVector,
    circuit_unitary,
    parity_mask,
    run_circuit,
    zero_state,
)

READOUTS = ("parity", "qubit")
_MODEL_NAME = re.compile(r"^(ZZ|Z)(\d+)$")
_TIE_TOL = 1e-12


@dataclass
class TrainReport:
    loss_curve: List[float]
    final_theta: np.ndarray
    iterations_used: int
    wall_time: float
    initial_theta: np.ndarray
    evaluations: int = 0
    converged: bool = False
    status: str = ""
    failed: bool = False
    message: str = ""
    best_loss: float = math.nan
    init_losses: List[float] = field(default_factory=list)


def parse_model_name(name: str):
    """``"Z20"`` -> ``("Z", 20)``; ``"ZZ35"`` -> ``("ZZ", 35)``."""
    m = _MODEL_NAME.match(name.strip().upper())
    if not m:
        raise ValueError(f"unrecognised model name {name!r}; expected Z<k> or ZZ<k>")
    return m.group(1), int(m.group(2))


class VQCClassifier(ClassifierMixin, BaseEstimator):
    """Variational quantum classifier with exact statevector readout.

    Parameters
    ----------
    feature_map : {"Z", "ZZ"}
        First-order (no entanglement) or second-order Pauli expansion.
    n_params : int
        Number of ansatz angles; must be a multiple of the feature count,
        at least twice it.
    feature_map_reps : int
        Repetitions of the feature-map block.
    entanglement : {"full", "linear"}
        CX topology for the ZZ map and the ansatz.
    readout : {"parity", "qubit"}
        ``"parity"``: class = popcount parity of the measured bitstring.
        ``"qubit"``: class = value of qubit ``readout_qubit``.
    max_iter : int
        Counted optimizer iterations (one objective evaluation each).
    rho_begin, rho_end : float
        Trust-region radii of the optimizer.
    random_state : int
        Seed for the uniform ``[-pi, pi]`` initial angles.
    n_jobs : int or None
        Worker threads for the loss over rows. Results do not depend on it.
    """

    def __init__(
        self,
        feature_map="Z",
        n_params=20,
        feature_map_reps=2,
        entanglement="full",
        readout="parity",
        readout_qubit=0,
        max_iter=150,
        rho_begin=1.0,
        rho_end=1e-4,
        random_state=0,
        n_jobs=None,
    ):
        self.feature_map = feature_map
        self.n_params = n_params
        self.feature_map_reps = feature_map_reps
        self.entanglement = entanglement
        self.readout = readout
        self.readout_qubit = readout_qubit
        self.max_iter = max_iter
        self.rho_begin = rho_begin
        self.rho_end = rho_end
        self.random_state = random_state
        self.n_jobs = n_jobs

    @classmethod
    def from_name(cls, name: str, **params) -> "VQCClassifier":
        kind, k = parse_model_name(name)
        return cls(feature_map=kind, n_params=k, **params)

    # -- structure -------------------------------------------------------

    def _specs(self, n_features):
        if self.readout not in READOUTS:
            raise ValueError(f"readout must be one of {READOUTS}")
        fmap = FeatureMapSpec(self.feature_map, n_features, self.feature_map_reps, self.entanglement)
        ansatz = AnsatzSpec(n_features, params_to_reps(self.n_params, n_features), self.entanglement)
        return fmap, ansatz

    def _build(self, n_features):
        self.feature_map_spec_, self.ansatz_spec_ = self._specs(n_features)
        self.feature_circuit_ = build_feature_map(self.feature_map_spec_)
        self.ansatz_circuit_ = build_real_amplitudes(self.ansatz_spec_)
        self.n_features_in_ = n_features
        self.classes_ = np.array([0, 1])
        n = n_features
        if self.readout == "parity":
            self._odd = parity_mask(n)
        else:
            if not 0 <= self.readout_qubit < n:
                raise ValueError("readout_qubit out of range")
            self._odd = ((np.arange(2 ** n) >> self.readout_qubit) & 1).astype(bool)

    # -- simulation ------------------------------------------------------

    def encode(self, X) -> StateVector:
        """Feature-map states for every row of ``X`` (a batched StateVector)."""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        circuit = bind(self.feature_circuit_, X)
        return run_circuit(circuit, initial=zero_state(self.n_features_in_, batch=X.shape[0]))

    def ansatz_unitary(self, theta) -> np.ndarray:
        return circuit_unitary(bind(self.ansatz_circuit_, theta))

    def _odd_probability(self, encoded: np.ndarray, unitary: np.ndarray) -> np.ndarray:
        def chunk(block):
            out = block @ unitary.T
            return np.sum(np.abs(out[:, self._odd]) ** 2, axis=1)

        workers = self.n_jobs or 1
        if workers <= 1 or encoded.shape[0] < 2 * workers:
            return chunk(encoded)
        blocks = np.array_split(encoded, workers)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, blocks))
        return np.concatenate(parts)

    def _q1(self, X, theta) -> np.ndarray:
        return self._odd_probability(self.encode(X).amplitudes, self.ansatz_unitary(theta))

    # -- estimator API ---------------------------------------------------

    def fit(self, X, y):
        X = check_features(X)
        y = check_binary_labels(y, X.shape[0])
        self._build(X.shape[1])
        n_theta = self.ansatz_spec_.num_parameters
        rng = np.random.default_rng(self.random_state)
        theta0 = rng.uniform(-np.pi, np.pi, n_theta)

        encoded = self.encode(X).amplitudes
        positive = y == 1

        def objective(theta):
            q1 = self._odd_probability(encoded, self.ansatz_unitary(theta))
            q_true = np.where(positive, q1, 1.0 - q1)
            return float(np.mean(losses.binary_cross_entropy(q_true)))

        curve: List[float] = []
        config = CobylaConfig(self.rho_begin, self.rho_end, self.max_iter, seed=self.random_state or 0)
        start = time.perf_counter()
        try:
            result = minimize(objective, theta0, config, callback=lambda x, f: curve.append(f))
        except Exception as exc:  # optimizer failure is reported, never raised
            self.theta_ = theta0
            self.train_report_ = TrainReport(
                curve, theta0.copy(), len(curve), time.perf_counter() - start, theta0.copy(),
                failed=True, message=f"{type(exc).__name__}: {exc}",
            )
            return self
        self.theta_ = result.best_point
        self.train_report_ = TrainReport(
            loss_curve=curve,
            final_theta=result.best_point.copy(),
            iterations_used=result.iterations,
            wall_time=time.perf_counter() - start,
            initial_theta=theta0,
            evaluations=result.evaluations,
            converged=result.converged,
            status=result.status,
            failed=result.status == "rounding",
            best_loss=result.best_value,
            init_losses=result.history[: n_theta + 1],
        )
        return self

    def predict_proba(self, X) -> np.ndarray:
        check_is_fitted(self, "theta_")
        X = check_features(X, n_features=self.n_features_in_)
        q1 = self._q1(X, self.theta_)
        return np.column_stack([1.0 - q1, q1])

    def predict(self, X) -> np.ndarray:
        proba = self.predict_proba(X)
        return (proba[:, 1] - proba[:, 0] > _TIE_TOL).astype(int)

    def loss(self, X, y) -> float:
        """Mean cross-entropy of the fitted model on ``(X, y)``."""
        check_is_fitted(self, "theta_")
        X = check_features(X, n_features=self.n_features_in_)
        y = check_binary_labels(y, X.shape[0])
        q1 = self._q1(X, self.theta_)
        return float(np.mean(losses.binary_cross_entropy(np.where(y == 1, q1, 1.0 - q1))))

    def set_theta(self, theta, n_features: int) -> "VQCClassifier":
        """Install explicit angles without training (builds the circuits)."""
        self._build(n_features)
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.ansatz_spec_.num_parameters,):
            raise ValueError(
                f"theta must have {self.ansatz_spec_.num_parameters} entries, got {theta.shape}"
            )
        self.theta_ = theta.copy()
        return self

    # -- persistence -----------------------------------------------------

    def dumps(self) -> str:
        """Text record: one ``key=value`` per line, floats in round-trip precision."""
        check_is_fitted(self, "theta_")
        lines = ["# vqc_titanic VQCClassifier"]
        for key, value in sorted(self.get_params().items()):
            lines.append(f"{key}={value!r}")
        lines.append(f"n_features={self.n_features_in_}")
        lines.append("theta=" + ",".join(repr(float(t)) for t in self.theta_))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "VQCClassifier":
        import ast

        record = {}
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            record[key] = value
        theta = [float(v) for v in record.pop("theta").split(",")] if record.get("theta") else []
        n_features = int(record.pop("n_features"))
        params = {k: ast.literal_eval(v) for k, v in record.items()}
        return cls(**params).set_theta(theta, n_features)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "VQCClassifier":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


# -- functional surface ---------------------------------------------------


def class_probabilities(model: VQCClassifier, x):
    """``(q0, q1)`` for a single feature vector, by direct circuit simulation."""
    check_is_fitted(model, "theta_")
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (model.n_features_in_,):
        raise ValueError(f"expected {model.n_features_in_} features, got {x.shape}")
    if np.any((x < 0) | (x > 1)):
        warnings.warn("feature values outside [0, 1]", RuntimeWarning, stacklevel=2)
    circuit = bind(model.feature_circuit_, x).compose(bind(model.ansatz_circuit_, model.theta_))
    probs = run_circuit(circuit).probabilities()
    q1 = float(probs[model._odd].sum())
    return 1.0 - q1, q1


def cross_entropy_loss(model: VQCClassifier, X, y) -> float:
    X = check_features(X)
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    return model.loss(X, y)


def train(model: VQCClassifier, X, y, max_iterations: int, seed: int) -> TrainReport:
    model.set_params(max_iter=max_iterations, random_state=seed)
    model.fit(X, y)
    return model.train_report_


def predict(model: VQCClassifier, x) -> int:
    q0, q1 = class_probabilities(model, x)
    return int(q1 - q0 > _TIE_TOL)


def predict_from_probabilities(q0: float, q1: float) -> int:
    return int(q1 - q0 > _TIE_TOL)


kl_divergence = losses.kl_divergence
