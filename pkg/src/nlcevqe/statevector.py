"""Exact statevector simulation of XX / Z rotation circuits with adjoint gradients."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from . import kernels
from .model import HamiltonianTerms, apply_hamiltonian, energy_expectation

MAX_QUBITS = 24


@dataclass(frozen=True)
class Gate:
    """``exp(i theta X_a X_b)`` (kind ``"xx"``) or ``exp(i theta Z_a)`` (kind ``"z"``)."""

    kind: str
    qubits: Tuple[int, ...]
    slot: int


@dataclass
class GateSequence:
    n_qubits: int
    gates: List[Gate]
    n_slots: int

    def __post_init__(self):
        for g in self.gates:
            want = 2 if g.kind == "xx" else 1
            if g.kind not in ("xx", "z") or len(set(g.qubits)) != want:
                raise ValueError(f"malformed gate {g}")
            if max(g.qubits) >= self.n_qubits or min(g.qubits) < 0:
                raise ValueError(f"gate {g} outside a {self.n_qubits}-qubit register")
            if not 0 <= g.slot < self.n_slots:
                raise ValueError(f"gate {g} refers to a missing angle slot")

    def __len__(self):
        return len(self.gates)


def prepare_reference(n_qubits: int) -> np.ndarray:
    """Fully polarized state |up ... up>."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits}")
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_xx(psi: np.ndarray, a: int, b: int, theta: float) -> np.ndarray:
    return kernels.rotate_xx(psi, a, b, theta)


def apply_z(psi: np.ndarray, q: int, theta: float) -> np.ndarray:
    return kernels.rotate_z(psi, q, theta)


def _apply(psi, gate: Gate, theta: float):
    if gate.kind == "xx":
        kernels.rotate_xx(psi, gate.qubits[0], gate.qubits[1], theta)
    else:
        kernels.rotate_z(psi, gate.qubits[0], theta)


def _check_angles(seq: GateSequence, angles) -> np.ndarray:
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (seq.n_slots,):
        raise ValueError(f"expected {seq.n_slots} angles, got shape {angles.shape}")
    return angles


def run_circuit(seq: GateSequence, angles: Sequence[float]) -> np.ndarray:
    angles = _check_angles(seq, angles)
    psi = prepare_reference(seq.n_qubits)
    for g in seq.gates:
        _apply(psi, g, angles[g.slot])
    return psi


def energy_and_gradient(
    seq: GateSequence, angles: Sequence[float], terms: HamiltonianTerms
) -> Tuple[float, np.ndarray]:
    """Energy and d(energy)/d(angle slot) by one forward and one reverse sweep.

    With ``lam = U_after^dag H psi_final`` the derivative with respect to a
    gate ``exp(i t G)`` is ``-2 Im <lam|G|psi>`` evaluated right after the
    gate; both vectors are then un-rotated past it.
    """
    angles = _check_angles(seq, angles)
    if terms.n_sites != seq.n_qubits:
        raise ValueError("Hamiltonian and circuit sizes differ")
    psi = run_circuit(seq, angles)
    energy = energy_expectation(terms, psi)
    lam = apply_hamiltonian(terms, psi)
    grad = np.zeros(seq.n_slots)
    for g in reversed(seq.gates):
        if g.kind == "xx":
            amp = kernels.braket_xx(lam, psi, g.qubits[0], g.qubits[1])
        else:
            amp = kernels.braket_z(lam, psi, g.qubits[0])
        grad[g.slot] += -2.0 * amp.imag
        _apply(psi, g, -angles[g.slot])
        _apply(lam, g, -angles[g.slot])
    return energy, grad


def overlap(psi_a: np.ndarray, psi_b: np.ndarray) -> complex:
    """<psi_a|psi_b>."""
    if psi_a.shape != psi_b.shape:
        raise ValueError("states have different sizes")
    return complex(np.vdot(psi_a, psi_b))


def dump_state(psi: np.ndarray, path) -> None:
    """Debug dump: little-endian interleaved (re, im) doubles."""
    np.asarray(psi, dtype="<c16").view("<f8").tofile(path)


def load_state(path) -> np.ndarray:
    return np.fromfile(path, dtype="<f8").view("<c16")
