"""In-place amplitude kernels for Pauli rotations and Pauli-string products.

Amplitude index ``k`` encodes the register bitwise with site 0 as the least
significant bit; bit value 0 is spin up (Z eigenvalue +1).  Every kernel works
on reshaped views of the flat array, so pairs of amplitudes related by a bit
flip are addressed by slicing instead of index tables.
"""

import numpy as np


def n_qubits_of(psi: np.ndarray) -> int:
    n = psi.size.bit_length() - 1
    if psi.ndim != 1 or (1 << n) != psi.size:
        raise ValueError(f"state of size {psi.size} is not a qubit register")
    return n


def one_qubit_view(psi: np.ndarray, n: int, q: int) -> np.ndarray:
    """View with axis 1 indexing bit ``q``."""
    return psi.reshape(1 << (n - 1 - q), 2, 1 << q)


def two_qubit_view(psi: np.ndarray, n: int, a: int, b: int) -> np.ndarray:
    """View with axis 1 indexing the higher and axis 3 the lower of ``a, b``."""
    lo, hi = (a, b) if a < b else (b, a)
    return psi.reshape(1 << (n - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)


def _quads(v):
    return v[:, 0, :, 0, :], v[:, 1, :, 1, :], v[:, 0, :, 1, :], v[:, 1, :, 0, :]


def rotate_xx(psi: np.ndarray, a: int, b: int, theta: float) -> np.ndarray:
    """psi <- exp(i theta X_a X_b) psi."""
    if a == b:
        raise ValueError("XX rotation needs two distinct qubits")
    n = n_qubits_of(psi)
    c, s = np.cos(theta), 1j * np.sin(theta)
    v = two_qubit_view(psi, n, a, b)
    p00, p11, p01, p10 = _quads(v)
    for u, w in ((p00, p11), (p01, p10)):
        t = u.copy()
        u *= c
        u += s * w
        w *= c
        w += s * t
    return psi


def rotate_z(psi: np.ndarray, q: int, theta: float) -> np.ndarray:
    """psi <- exp(i theta Z_q) psi."""
    n = n_qubits_of(psi)
    v = one_qubit_view(psi, n, q)
    ph = np.exp(1j * theta)
    v[:, 0, :] *= ph
    v[:, 1, :] *= ph.conjugate()
    return psi


def expect_z(psi: np.ndarray, q: int) -> float:
    n = n_qubits_of(psi)
    v = one_qubit_view(psi, n, q)
    p = (v.real**2 + v.imag**2) if np.iscomplexobj(v) else v**2
    return float(p[:, 0, :].sum() - p[:, 1, :].sum())


def expect_xx(psi: np.ndarray, a: int, b: int) -> float:
    n = n_qubits_of(psi)
    p00, p11, p01, p10 = _quads(two_qubit_view(psi, n, a, b))
    return 2.0 * float((np.vdot(p00, p11) + np.vdot(p01, p10)).real)


def braket_z(lam: np.ndarray, psi: np.ndarray, q: int) -> complex:
    """<lam| Z_q |psi>."""
    n = n_qubits_of(psi)
    lv, pv = one_qubit_view(lam, n, q), one_qubit_view(psi, n, q)
    return np.vdot(lv[:, 0, :], pv[:, 0, :]) - np.vdot(lv[:, 1, :], pv[:, 1, :])


def braket_xx(lam: np.ndarray, psi: np.ndarray, a: int, b: int) -> complex:
    """<lam| X_a X_b |psi>."""
    n = n_qubits_of(psi)
    l00, l11, l01, l10 = _quads(two_qubit_view(lam, n, a, b))
    p00, p11, p01, p10 = _quads(two_qubit_view(psi, n, a, b))
    return np.vdot(l00, p11) + np.vdot(l11, p00) + np.vdot(l01, p10) + np.vdot(l10, p01)


def add_xx(out: np.ndarray, psi: np.ndarray, a: int, b: int, coef: float) -> None:
    """out += coef * X_a X_b psi."""
    n = n_qubits_of(psi)
    o00, o11, o01, o10 = _quads(two_qubit_view(out, n, a, b))
    p00, p11, p01, p10 = _quads(two_qubit_view(psi, n, a, b))
    o00 += coef * p11
    o11 += coef * p00
    o01 += coef * p10
    o10 += coef * p01


def flip_all(psi: np.ndarray) -> np.ndarray:
    """Product of X on every qubit (reverses the amplitude order)."""
    return psi[::-1].copy()


def z_eigenvalues(n: int, q: int) -> np.ndarray:
    """Vector of Z_q eigenvalues (+1 / -1) over the computational basis."""
    k = np.arange(1 << n)
    return 1.0 - 2.0 * ((k >> q) & 1)
