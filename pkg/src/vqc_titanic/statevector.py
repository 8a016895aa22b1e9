"""Dense statevector simulation for the gate set {H, P, RY, CX}.

Qubit ordering is little-endian: qubit ``k`` is bit ``k`` of the basis
index, so ``|q4 q3 q2 q1 q0>`` maps to ``sum_k q_k * 2**k``.

Gates are applied in place by viewing the amplitude array as
``(batch, 2**(n-t-1), 2, 2**t)`` and updating the two slices that differ only
in bit ``t``. A leading batch axis lets one call evolve many states at once,
with per-row angles where a gate is data dependent.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass
from typing import Iterable, Optional, Union

import numpy as np

MAX_QUBITS = 24
GATE_KINDS = ("H", "P", "RY", "CX")
_SQRT1_2 = 1.0 / np.sqrt(2.0)

Angle = Union[float, str, np.ndarray, None]


class SizeError(ValueError):
    """Qubit count or qubit index outside the supported range."""


class BindingError(ValueError):
    """A symbolic angle was left unbound, or a binding had the wrong arity."""


@dataclass(frozen=True)
class Gate:
    """A single gate application.

    ``angle`` is a float once bound. Before binding it may be a symbol name
    (a ``str``) or a :class:`~vqc_titanic.circuits.Expr`.
    """

    kind: str
    target: int
    control: Optional[int] = None
    angle: Angle = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if (self.kind == "CX") != (self.control is not None):
            raise ValueError("CX needs a control qubit; other gates must not have one")
        if self.control is not None and self.control == self.target:
            raise ValueError("control and target must differ")
        if self.kind in ("P", "RY") and self.angle is None:
            raise ValueError(f"{self.kind} needs an angle")

    @property
    def qubits(self) -> tuple:
        return (self.target,) if self.control is None else (self.control, self.target)

    @property
    def is_bound(self) -> bool:
        return self.angle is None or isinstance(self.angle, (numbers.Real, np.ndarray))


class StateVector:
    """Amplitudes of an ``n_qubits`` register.

    ``amplitudes`` has shape ``(2**n,)`` for a single state or ``(batch, 2**n)``
    for a stack of independent states.
    """

    def __init__(self, amplitudes, n_qubits: Optional[int] = None):
        amplitudes = np.array(amplitudes, dtype=np.complex128)
        dim = amplitudes.shape[-1]
        if n_qubits is None:
            n_qubits = int(dim).bit_length() - 1
        _check_n_qubits(n_qubits)
        if dim != 2 ** n_qubits or amplitudes.ndim not in (1, 2):
            raise SizeError(f"expected {2 ** n_qubits} amplitudes, got shape {amplitudes.shape}")
        self.n_qubits = n_qubits
        self.amplitudes = amplitudes

    @property
    def batched(self) -> bool:
        return self.amplitudes.ndim == 2

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.n_qubits)

    def norm_squared(self):
        return np.sum(np.abs(self.amplitudes) ** 2, axis=-1)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def __array__(self, dtype=None, copy=None):
        return self.amplitudes if dtype is None else self.amplitudes.astype(dtype)

    def __len__(self):
        return self.amplitudes.shape[-1]

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, shape={self.amplitudes.shape})"


def _check_n_qubits(n_qubits):
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise SizeError(f"n_qubits must be an integer in [1, {MAX_QUBITS}], got {n_qubits!r}")


def zero_state(n_qubits: int, batch: Optional[int] = None) -> StateVector:
    """Return ``|0...0>``, optionally repeated ``batch`` times."""
    _check_n_qubits(n_qubits)
    shape = (2 ** n_qubits,) if batch is None else (batch, 2 ** n_qubits)
    amps = np.zeros(shape, dtype=np.complex128)
    amps[..., 0] = 1.0
    return StateVector(amps, n_qubits)


def basis_states(n_qubits: int) -> StateVector:
    """All computational basis states stacked as a batch (the identity matrix)."""
    _check_n_qubits(n_qubits)
    return StateVector(np.eye(2 ** n_qubits, dtype=np.complex128), n_qubits)


def _split(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    batch = amps.shape[0]
    return amps.reshape(batch, 2 ** (n_qubits - qubit - 1), 2, 2 ** qubit)


def _angle_column(angle, batch):
    """Broadcast a scalar or per-row angle against the split view."""
    angle = np.asarray(angle, dtype=np.float64)
    if angle.ndim == 0:
        return angle
    if angle.shape != (batch,):
        raise SizeError(f"per-row angles need shape ({batch},), got {angle.shape}")
    return angle[:, None, None]


def apply_gate(state: StateVector, gate: Gate, inplace: bool = False) -> StateVector:
    """Apply ``gate`` to ``state`` and return the result.

    The input is copied unless ``inplace`` is true.
    """
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise SizeError(f"qubit index {q} out of range for {n} qubits")
    if not gate.is_bound:
        raise BindingError(f"gate {gate.kind} on qubit {gate.target} has unbound angle {gate.angle!r}")

    out = state if inplace else state.copy()
    amps = out.amplitudes if out.batched else out.amplitudes[None, :]
    batch = amps.shape[0]
    view = _split(amps, n, gate.target)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]

    if gate.kind == "H":
        s = a0 + a1
        a1 -= a0
        a1 *= -_SQRT1_2
        np.multiply(s, _SQRT1_2, out=a0)
    elif gate.kind == "P":
        a1 *= np.exp(1j * _angle_column(gate.angle, batch))
    elif gate.kind == "RY":
        half = _angle_column(gate.angle, batch) / 2.0
        c, s = np.cos(half), np.sin(half)
        new0 = c * a0 - s * a1
        a1 *= c
        a1 += s * a0
        a0[...] = new0
    else:  # CX: swap target pair inside the control=1 half
        ctrl, tgt = gate.control, gate.target
        full = amps.reshape((batch,) + (2,) * n)
        # axis for qubit k in the (batch, q_{n-1}, ..., q_0) view
        c_ax, t_ax = n - ctrl, n - tgt
        idx1 = [slice(None)] * (n + 1)
        idx1[c_ax] = 1
        idx1[t_ax] = 0
        idx2 = list(idx1)
        idx2[t_ax] = 1
        idx1, idx2 = tuple(idx1), tuple(idx2)
        tmp = full[idx1].copy()
        full[idx1] = full[idx2]
        full[idx2] = tmp
    return out


def run_circuit(circuit, n_qubits: Optional[int] = None, initial: Optional[StateVector] = None) -> StateVector:
    """Fold :func:`apply_gate` over ``circuit`` starting from ``|0...0>``.

    ``circuit`` is a :class:`~vqc_titanic.circuits.Circuit` or any iterable of
    bound gates. ``initial`` overrides the start state (it is not modified).
    """
    gates: Iterable[Gate] = getattr(circuit, "gates", circuit)
    if n_qubits is None:
        n_qubits = getattr(circuit, "n_qubits", None) if initial is None else initial.n_qubits
    if initial is None:
        state = zero_state(n_qubits)
    else:
        if n_qubits != initial.n_qubits:
            raise SizeError("initial state does not match n_qubits")
        state = initial.copy()
    for gate in gates:
        apply_gate(state, gate, inplace=True)
    return state


def circuit_unitary(circuit, n_qubits: Optional[int] = None) -> np.ndarray:
    """Unitary matrix of a bound circuit, built by evolving every basis state."""
    n_qubits = circuit.n_qubits if n_qubits is None else n_qubits
    columns = run_circuit(circuit, n_qubits, initial=basis_states(n_qubits)).amplitudes
    # row j of ``columns`` is U|j>
    return columns.T


def parity_mask(n_qubits: int) -> np.ndarray:
    """Boolean mask of basis indices with odd popcount."""
    idx = np.arange(2 ** n_qubits)
    parity = np.zeros_like(idx)
    for k in range(n_qubits):
        parity ^= (idx >> k) & 1
    return parity.astype(bool)


def probability_of_parity(state: StateVector, parity: int):
    """Total probability of the basis states whose popcount has the given parity.

    Returns a float for a single state and an array for a batch.
    """
    if parity not in (0, 1):
        raise ValueError("parity must be 0 or 1")
    probs = state.probabilities()
    norm = probs.sum(axis=-1)
    assert np.all(np.abs(norm - 1.0) < 1e-8), "state is not normalized"
    odd = parity_mask(state.n_qubits)
    mask = odd if parity == 1 else ~odd
    out = probs[..., mask].sum(axis=-1)
    return float(out) if out.ndim == 0 else out


def probability_of_qubit(state: StateVector, qubit: int, value: int = 1):
    """Marginal probability that ``qubit`` reads ``value``."""
    if not 0 <= qubit < state.n_qubits:
        raise SizeError(f"qubit index {qubit} out of range")
    bits = (np.arange(2 ** state.n_qubits) >> qubit) & 1
    out = state.probabilities()[..., bits == value].sum(axis=-1)
    return float(out) if out.ndim == 0 else out
