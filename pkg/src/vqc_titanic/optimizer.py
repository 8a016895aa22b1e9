"""COBYLA: Powell's derivative-free method built on linear interpolation.

The optimizer keeps a simplex of ``n + 1`` points, interpolates the objective
linearly over it, and steps to the edge of a trust region of radius ``rho``
along the model's descent direction. When a step stops paying off and the
simplex is well shaped, ``rho`` is halved, down to ``rho_end``.

The control flow follows Powell's original ``cobylb`` routine closely. The
merit function ``f + mu * max_violation`` and its penalty update are kept,
but no constraint functions are accepted, so the violation is always zero
and the trust-region subproblem reduces to a steepest-descent step of
length ``rho``.

Layout of the working arrays (0-based, ``n`` = dimension):

``sim[:, n]``
    the best vertex so far (the simplex origin),
``sim[:, j]``, ``j < n``
    displacement of vertex ``j`` from the origin,
``simi``
    inverse of ``sim[:, :n]``,
``datmat[:, j]``
    ``(f, violation)`` at vertex ``j`` (column ``n`` is the origin).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

# Powell's constants
_ALPHA = 0.25  # minimum acceptable sigma, as a fraction of rho
_BETA = 2.1  # maximum acceptable edge length, as a multiple of rho
_GAMMA = 0.5  # size of a geometry-repair step
_DELTA = 1.1  # edge-length threshold for dropping a far vertex

# stand-in for non-finite objective values inside the linear model
_NONFINITE_SURROGATE = 1e30


@dataclass(frozen=True)
class CobylaConfig:
    rho_begin: float = 1.0
    rho_end: float = 1e-4
    max_iterations: int = 1000
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.rho_end <= self.rho_begin:
            raise ValueError("need 0 < rho_end <= rho_begin")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class OptResult:
    """Outcome of :func:`minimize`.

    ``history`` holds every objective value in evaluation order, including
    the ``n + 1`` evaluations that build the initial simplex. Only the later
    ones count as iterations.
    """

    best_point: np.ndarray
    best_value: float
    evaluations: int
    iterations: int
    converged: bool
    status: str
    final_rho: float
    history: List[float] = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    @property
    def budget_exhausted(self) -> bool:
        return self.status == "budget"


class _Budget(Exception):
    pass


def _steepest_step(gradient: np.ndarray, rho: float):
    """Minimise ``g . d`` subject to ``|d| <= rho``.

    Returns the step and whether it reached the trust-region boundary.
    """
    gnorm = math.sqrt(float(gradient @ gradient))
    if gnorm == 0.0 or not math.isfinite(gnorm):
        return np.zeros_like(gradient), False
    return -(rho / gnorm) * gradient, True


def _replace_vertex(sim, simi, jdrop, dx):
    """Swap in displacement ``dx`` as column ``jdrop`` and update the inverse."""
    sim[:, jdrop] = dx
    simi[jdrop, :] /= simi[jdrop, :] @ dx
    for j in range(sim.shape[0]):
        if j != jdrop:
            simi[j, :] -= (simi[j, :] @ dx) * simi[jdrop, :]


def minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    config: Optional[CobylaConfig] = None,
    callback: Optional[Callable[[np.ndarray, float], None]] = None,
) -> OptResult:
    """Minimise ``objective`` from ``x0`` without derivatives.

    Parameters
    ----------
    objective
        Maps a 1-D float array to a scalar. NaN and infinite values are
        treated as +inf: such points never become the best point and never
        enter the simplex through a trust-region step.
    x0
        Starting point, shape ``(n,)`` with ``n >= 1``.
    config
        Radii and iteration budget. The budget counts evaluations after the
        ``n + 1`` that build the initial simplex.
    callback
        Called as ``callback(x, f)`` after every counted iteration.
    """
    config = config or CobylaConfig()
    x0 = np.array(x0, dtype=np.float64).ravel()
    n = x0.size
    if n < 1:
        raise ValueError("x0 must have at least one component")
    max_evals = config.max_iterations + n + 1

    history: List[float] = []
    best = {"x": x0.copy(), "f": math.inf}
    counters = {"geometry_steps": 0, "trust_steps": 0, "rho_reductions": 0, "simplex_swaps": 0}

    def evaluate(x):
        if len(history) >= max_evals:
            raise _Budget
        try:
            f = float(objective(x.copy()))
        except (FloatingPointError, OverflowError, ZeroDivisionError):
            f = math.inf
        if not math.isfinite(f):
            f = math.inf
        history.append(f)
        if f < best["f"]:
            best["x"], best["f"] = x.copy(), f
        if len(history) > n + 1 and callback is not None:
            callback(x.copy(), f)
        return f

    def model_value(f):
        return f if math.isfinite(f) else _NONFINITE_SURROGATE

    rho = float(config.rho_begin)
    rho_end = float(config.rho_end)
    parmu = 0.0
    sim = np.zeros((n, n + 1))
    sim[:, :n] = np.eye(n) * rho
    sim[:, n] = x0
    simi = np.eye(n) / rho
    datmat = np.zeros((2, n + 1))  # rows: objective, constraint violation

    status = "converged"
    try:
        datmat[:, n] = (model_value(evaluate(x0)), 0.0)
        for j in range(n):
            x = sim[:, n].copy()
            x[j] += rho
            f = model_value(evaluate(x))
            datmat[:, j] = (f, 0.0)
            if f < datmat[0, n]:
                # the new point becomes the origin; vertex j is the old origin
                sim[j, n] = x[j]
                datmat[:, [j, n]] = datmat[:, [n, j]]
                sim[j, : j + 1] = -rho
                for k in range(j + 1):
                    simi[j, k] = -simi[k : j + 1, k].sum()

        ibrnch = True
        while True:
            # --- make the lowest-merit vertex the origin
            phi = datmat[0] + parmu * datmat[1]
            nbest = n
            for j in range(n):
                if phi[j] < phi[nbest] or (
                    phi[j] == phi[nbest] and parmu == 0.0 and datmat[1, j] < datmat[1, nbest]
                ):
                    nbest = j
            if nbest < n:
                counters["simplex_swaps"] += 1
                datmat[:, [nbest, n]] = datmat[:, [n, nbest]]
                shift = sim[:, nbest].copy()
                sim[:, nbest] = 0.0
                sim[:, n] += shift
                sim[:, :n] -= shift[:, None]
                simi[nbest, :] = -simi.sum(axis=0)

            if np.max(np.abs(simi @ sim[:, :n] - np.eye(n))) > 0.1:
                status = "rounding"
                break

            # --- linear model; gradient of the objective
            gradient = (datmat[0, :n] - datmat[0, n]) @ simi

            parsig = _ALPHA * rho
            pareta = _BETA * rho
            vsig = 1.0 / np.sqrt(np.sum(simi ** 2, axis=1))
            veta = np.sqrt(np.sum(sim[:, :n] ** 2, axis=0))
            acceptable = bool(np.all(vsig >= parsig) and np.all(veta <= pareta))

            if not ibrnch and not acceptable:
                # --- geometry repair: replace the worst-shaped vertex
                counters["geometry_steps"] += 1
                jdrop, temp = -1, pareta
                for j in range(n):
                    if veta[j] > temp:
                        jdrop, temp = j, veta[j]
                if jdrop < 0:
                    for j in range(n):
                        if vsig[j] < temp:
                            jdrop, temp = j, vsig[j]
                dx = _GAMMA * rho * vsig[jdrop] * simi[jdrop, :]
                if gradient @ dx > 0.0:
                    dx = -dx
                _replace_vertex(sim, simi, jdrop, dx)
                f = model_value(evaluate(sim[:, n] + dx))
                datmat[:, jdrop] = (f, 0.0)
                ibrnch = True
                continue

            # --- trust-region step
            dx, full = _steepest_step(gradient, rho)
            reduce_rho = False
            if not full and dx @ dx < 0.25 * rho * rho:
                ibrnch = True
                reduce_rho = True
            else:
                counters["trust_steps"] += 1
                predicted = -(gradient @ dx)
                resnew = 0.0
                prerec = datmat[1, n] - resnew
                barmu = -predicted / prerec if prerec > 0.0 else 0.0
                if parmu < 1.5 * barmu:
                    parmu = 2.0 * barmu
                    phi = datmat[0] + parmu * datmat[1]
                    if np.any(phi[:n] < phi[n]):
                        continue
                prerem = parmu * prerec + predicted

                ibrnch = True
                f = evaluate(sim[:, n] + dx)
                vmold = datmat[0, n] + parmu * datmat[1, n]
                trured = vmold - (f + parmu * 0.0)
                if parmu == 0.0 and f == datmat[0, n]:
                    prerem = prerec
                    trured = datmat[1, n]

                if not math.isfinite(f):
                    reduce_rho = True
                else:
                    ratio = 1.0 if trured <= 0.0 else 0.0
                    jdrop = -1
                    proj = np.abs(simi @ dx)
                    for j in range(n):
                        if proj[j] > ratio:
                            jdrop, ratio = j, proj[j]
                    sigbar = proj * vsig

                    edgmax = _DELTA * rho
                    far = -1
                    for j in range(n):
                        if sigbar[j] >= parsig or sigbar[j] >= vsig[j]:
                            temp = veta[j]
                            if trured > 0.0:
                                temp = math.sqrt(float(np.sum((dx - sim[:, j]) ** 2)))
                            if temp > edgmax:
                                far, edgmax = j, temp
                    if far >= 0:
                        jdrop = far

                    if jdrop < 0:
                        reduce_rho = True
                    else:
                        _replace_vertex(sim, simi, jdrop, dx)
                        datmat[:, jdrop] = (f, 0.0)
                        if trured > 0.0 and trured >= 0.1 * prerem:
                            continue
                        reduce_rho = True

            if reduce_rho:
                if not acceptable:
                    ibrnch = False
                    continue
                if rho > rho_end:
                    rho *= 0.5
                    if rho <= 1.5 * rho_end:
                        rho = rho_end
                    counters["rho_reductions"] += 1
                    if parmu > 0.0:
                        # no constraints: the penalty is no longer needed
                        parmu = 0.0
                    continue
                status = "converged"
                break
    except _Budget:
        status = "budget"

    return OptResult(
        best_point=best["x"],
        best_value=best["f"],
        evaluations=len(history),
        iterations=max(0, len(history) - (n + 1)),
        converged=status == "converged",
        status=status,
        final_rho=rho,
        history=history,
        counters=counters,
    )
