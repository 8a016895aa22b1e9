"""Feature-map and ansatz circuit builders.

Circuits carry symbolic angles until :func:`bind` substitutes values
positionally. Three angle forms appear before binding:

* a bare symbol name ``"theta_3"`` (ansatz rotations),
* :class:`Scaled` ``factor * x_i`` (first-order phases),
* :class:`PairPhase` ``2 * (pi - x_i) * (pi - x_j)`` (second-order phases).

Binding a 2-D value array ``(batch, n_symbols)`` yields per-row angle arrays,
which :mod:`vqc_titanic.statevector` applies to a batch of states in one pass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Tuple

import numpy as np

from .statevector import BindingError, Gate, SizeError

ENTANGLEMENTS = ("full", "linear")


class SpecError(ValueError):
    """Invalid feature-map or ansatz settings."""


@dataclass(frozen=True)
class Scaled:
    symbol: str
    factor: float = 2.0

    @property
    def symbols(self):
        return (self.symbol,)

    def evaluate(self, values: Mapping):
        return self.factor * values[self.symbol]

    def __str__(self):
        return f"{self.factor!r}*{self.symbol}"


@dataclass(frozen=True)
class PairPhase:
    first: str
    second: str

    @property
    def symbols(self):
        return (self.first, self.second)

    def evaluate(self, values: Mapping):
        return 2.0 * (math.pi - values[self.first]) * (math.pi - values[self.second])

    def __str__(self):
        return f"2*(pi-{self.first})*(pi-{self.second})"


def _angle_symbols(angle):
    if isinstance(angle, str):
        return (angle,)
    return getattr(angle, "symbols", ())


@dataclass(frozen=True)
class Circuit:
    """Immutable ordered gate list over ``n_qubits`` with positional symbols."""

    n_qubits: int
    gates: Tuple[Gate, ...] = ()
    symbols: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "symbols", tuple(self.symbols))
        if len(set(self.symbols)) != len(self.symbols):
            raise SpecError("circuit symbols must be distinct")
        known = set(self.symbols)
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise SizeError(f"gate {g} addresses qubit {q} outside {self.n_qubits} qubits")
            missing = set(_angle_symbols(g.angle)) - known
            if missing:
                raise BindingError(f"gate {g} refers to undeclared symbols {sorted(missing)}")

    @property
    def num_parameters(self) -> int:
        return len(self.symbols)

    def count(self, kind: str) -> int:
        return sum(g.kind == kind for g in self.gates)

    def compose(self, other: "Circuit") -> "Circuit":
        """Append ``other`` after ``self``; symbol lists are concatenated."""
        if other.n_qubits != self.n_qubits:
            raise SizeError("cannot compose circuits of different widths")
        return Circuit(self.n_qubits, self.gates + other.gates, self.symbols + other.symbols)

    __add__ = compose

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True)
class FeatureMapSpec:
    kind: str = "Z"
    n_features: int = 5
    reps: int = 2
    entanglement: str = "full"

    def __post_init__(self):
        if self.kind not in ("Z", "ZZ"):
            raise SpecError(f"feature map kind must be 'Z' or 'ZZ', got {self.kind!r}")
        if self.n_features < 1 or self.reps < 1:
            raise SpecError("n_features and reps must be >= 1")
        if self.entanglement not in ENTANGLEMENTS:
            raise SpecError(f"entanglement must be one of {ENTANGLEMENTS}")


@dataclass(frozen=True)
class AnsatzSpec:
    n_qubits: int = 5
    reps: int = 3
    entanglement: str = "full"

    def __post_init__(self):
        if self.n_qubits < 1 or self.reps < 1:
            raise SpecError("n_qubits and reps must be >= 1")
        if self.entanglement not in ENTANGLEMENTS:
            raise SpecError(f"entanglement must be one of {ENTANGLEMENTS}")

    @property
    def num_parameters(self) -> int:
        return self.n_qubits * (self.reps + 1)


def entangling_pairs(n_qubits: int, entanglement: str = "full"):
    """Control/target pairs, control always the lower index, in lexicographic order."""
    if entanglement == "full":
        return [(i, j) for i in range(n_qubits) for j in range(i + 1, n_qubits)]
    if entanglement == "linear":
        return [(i, i + 1) for i in range(n_qubits - 1)]
    raise SpecError(f"entanglement must be one of {ENTANGLEMENTS}")


def feature_symbols(n: int):
    return tuple(f"x_{i}" for i in range(n))


def build_z_feature_map(spec: FeatureMapSpec) -> Circuit:
    """First-order Pauli expansion: per repetition, H on every qubit then P(2 x_i)."""
    if spec.kind != "Z":
        raise SpecError("build_z_feature_map needs kind 'Z'")
    d = spec.n_features
    xs = feature_symbols(d)
    gates = []
    for _ in range(spec.reps):
        gates += [Gate("H", i) for i in range(d)]
        gates += [Gate("P", i, angle=Scaled(xs[i])) for i in range(d)]
    return Circuit(d, gates, xs)


def build_zz_feature_map(spec: FeatureMapSpec) -> Circuit:
    """Second-order Pauli expansion.

    Each repetition applies the first-order block, then for every entangling
    pair ``(i, j)`` the sequence ``CX(i->j), P(2(pi-x_i)(pi-x_j)) on j, CX(i->j)``.
    """
    if spec.kind != "ZZ":
        raise SpecError("build_zz_feature_map needs kind 'ZZ'")
    d = spec.n_features
    if d < 2:
        raise SpecError("the ZZ feature map needs at least two features")
    xs = feature_symbols(d)
    gates = []
    for _ in range(spec.reps):
        gates += [Gate("H", i) for i in range(d)]
        gates += [Gate("P", i, angle=Scaled(xs[i])) for i in range(d)]
        for i, j in entangling_pairs(d, spec.entanglement):
            gates += [
                Gate("CX", j, control=i),
                Gate("P", j, angle=PairPhase(xs[i], xs[j])),
                Gate("CX", j, control=i),
            ]
    return Circuit(d, gates, xs)


def build_feature_map(spec: FeatureMapSpec) -> Circuit:
    return build_z_feature_map(spec) if spec.kind == "Z" else build_zz_feature_map(spec)


def build_real_amplitudes(spec: AnsatzSpec) -> Circuit:
    """RY layer, then ``reps`` times [CX entangling block, RY layer]."""
    n = spec.n_qubits
    thetas = tuple(f"theta_{k}" for k in range(spec.num_parameters))
    it = iter(thetas)
    gates = [Gate("RY", q, angle=next(it)) for q in range(n)]
    for _ in range(spec.reps):
        gates += [Gate("CX", j, control=i) for i, j in entangling_pairs(n, spec.entanglement)]
        gates += [Gate("RY", q, angle=next(it)) for q in range(n)]
    return Circuit(n, gates, thetas)


def bind(circuit: Circuit, values) -> Circuit:
    """Substitute ``values`` for the circuit's symbols, in order.

    ``values`` is a sequence of length ``circuit.num_parameters`` or a 2-D
    array with one row per batch element.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.shape[-1:] != (circuit.num_parameters,) and not (
        circuit.num_parameters == 0 and values.size == 0
    ):
        raise BindingError(
            f"expected {circuit.num_parameters} values, got shape {values.shape}"
        )
    if values.ndim == 1:
        mapping = {s: float(v) for s, v in zip(circuit.symbols, values)}
    elif values.ndim == 2:
        mapping = {s: values[:, k] for k, s in enumerate(circuit.symbols)}
    else:
        raise BindingError("values must be 1-D or 2-D")

    bound = []
    for g in circuit.gates:
        a = g.angle
        if isinstance(a, str):
            a = mapping[a]
        elif hasattr(a, "evaluate"):
            a = a.evaluate(mapping)
        bound.append(g if a is g.angle else Gate(g.kind, g.target, g.control, a))
    return Circuit(circuit.n_qubits, bound, ())


def params_to_reps(n_params: int, n_qubits: int) -> int:
    """Ansatz repetitions giving ``n_params`` parameters on ``n_qubits`` qubits."""
    if n_qubits < 1 or n_params % n_qubits or n_params // n_qubits < 2:
        raise SpecError(
            f"{n_params} parameters cannot be laid out as {n_qubits} x (reps + 1) with reps >= 1"
        )
    return n_params // n_qubits - 1


def dumps(circuit: Circuit) -> str:
    """Plain-text gate list, one gate per line: ``KIND target [control] [angle]``."""
    lines = []
    for g in circuit.gates:
        parts = [g.kind, str(g.target)]
        if g.control is not None:
            parts.append(str(g.control))
        if g.angle is not None:
            if isinstance(g.angle, np.ndarray) and g.angle.ndim > 0:
                raise ValueError("cannot dump per-row angles")
            parts.append(repr(float(g.angle)) if g.is_bound else str(g.angle))
        lines.append(" ".join(parts))
    return "\n".join(lines) + ("\n" if lines else "")
