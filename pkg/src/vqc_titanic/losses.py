"""Entropy, cross-entropy and Kullback-Leibler divergence (natural log)."""
import numpy as np

EPS = 1e-10


def _distribution(p, name):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D distribution")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"{name} is not a probability distribution: {p}")
    return p


def entropy(p) -> float:
    """``-sum p log p`` with ``0 log 0 = 0``."""
    p = _distribution(p, "p")
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def cross_entropy(p, q, eps: float = EPS) -> float:
    """``-sum p log q``; ``q`` is clipped to ``[eps, 1 - eps]`` before the log."""
    p = _distribution(p, "p")
    q = _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(np.clip(q[nz], eps, 1.0 - eps))))


def kl_divergence(p, q, eps: float = EPS) -> float:
    """Relative entropy ``sum p log(p / q)``, equal to ``cross_entropy(p, q) - entropy(p)``."""
    p = _distribution(p, "p")
    q = _distribution(q, "q")
    if p.shape != q.shape:
        raise ValueError("p and q must have the same length")
    nz = p > 0
    return float(np.sum(p[nz] * (np.log(p[nz]) - np.log(np.clip(q[nz], eps, 1.0 - eps)))))


def binary_cross_entropy(q_true_class, eps: float = EPS) -> np.ndarray:
    """Per-row loss ``-log q_y`` given the probability assigned to each row's true class."""
    return -np.log(np.clip(q_true_class, eps, 1.0 - eps))
