"""Exact references: cluster diagonalization and the infinite-chain energy."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib.resources import files
from pathlib import Path
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla
from scipy.integrate import quad
from scipy.linalg import eigh

from .lattice import Cluster
from .model import HamiltonianTerms, apply_hamiltonian, build_hamiltonian

MAX_DENSE = 12
MAX_ITERATIVE = 18
PARITY_FROM = 16


@dataclass
class EdResult:
    ground_energy: float
    ground_state: np.ndarray
    method: str
    residual: float


def hamiltonian_matrix(terms: HamiltonianTerms, parity: bool = False) -> sp.csr_matrix:
    """Sparse H built from bit masks (independent of the amplitude kernels).

    With ``parity=True`` the matrix is restricted to the even spin-flip
    sector, i.e. basis states with an even number of down spins.
    """
    n = terms.n_sites
    k = np.arange(1 << n)
    diag = np.zeros(k.size)
    for site, coef in terms.field_terms:
        diag += coef * (1 - 2 * ((k >> site) & 1))
    rows, cols, vals = [k], [k], [diag]
    for (a, b), coef in terms.ising_terms:
        rows.append(k)
        cols.append(k ^ ((1 << a) | (1 << b)))
        vals.append(np.full(k.size, coef))
    r, c, v = (np.concatenate(x) for x in (rows, cols, vals))
    if parity:
        pop = np.zeros(k.size, dtype=int)
        for q in range(n):
            pop += (k >> q) & 1
        even = np.flatnonzero(pop % 2 == 0)
        pos = np.full(k.size, -1)
        pos[even] = np.arange(even.size)
        keep = pos[r] >= 0
        dim = even.size
        return sp.csr_matrix((v[keep], (pos[r[keep]], pos[c[keep]])), shape=(dim, dim))
    return sp.csr_matrix((v, (r, c)), shape=(k.size, k.size))


def _even_sector(n: int) -> np.ndarray:
    k = np.arange(1 << n)
    pop = np.zeros(k.size, dtype=int)
    for q in range(n):
        pop += (k >> q) & 1
    return np.flatnonzero(pop % 2 == 0)


def _start_vector(dim: int, seed: int = 1234) -> np.ndarray:
    v = 1e-3 * np.random.default_rng(seed).standard_normal(dim)
    v[0] += 1.0
    return v


def _fix_sign(psi):
    i = np.argmax(np.abs(psi))
    return psi * (np.abs(psi[i]) / psi[i])


def ed_ground_state(
    terms: HamiltonianTerms,
    n_qubits: Optional[int] = None,
    method: str = "auto",
    parity: Optional[bool] = None,
    tol: float = 1e-12,
) -> EdResult:
    """Lowest eigenpair of the cluster Hamiltonian.

    ``method="dense"`` diagonalizes the full matrix (N <= 12); ``"iterative"``
    runs Lanczos on a matrix-free operator that streams the Hamiltonian terms.
    """
    n = terms.n_sites if n_qubits is None else n_qubits
    if n != terms.n_sites:
        raise ValueError("n_qubits does not match the Hamiltonian")
    if method == "auto":
        method = "dense" if n <= 8 else "iterative"
    if parity is None:
        parity = n >= PARITY_FROM
    scale = sum(abs(c) for _, c in terms.field_terms) + sum(abs(c) for _, c in terms.ising_terms)
    scale = max(scale, 1.0)

    if method == "dense":
        if n > MAX_DENSE:
            raise ValueError(f"dense ED limited to {MAX_DENSE} sites")
        H = hamiltonian_matrix(terms).toarray()
        w, v = eigh(H, subset_by_index=[0, 0])
        energy, psi = float(w[0]), v[:, 0]
    elif method == "iterative":
        if n > MAX_ITERATIVE:
            raise ValueError(f"iterative ED limited to {MAX_ITERATIVE} sites")
        if n == 1:
            return ed_ground_state(terms, method="dense")
        if parity:
            H = hamiltonian_matrix(terms, parity=True)
            w, v = sla.eigsh(H, k=1, which="SA", tol=tol, v0=_start_vector(H.shape[0]))
            psi = np.zeros(1 << n)
            psi[_even_sector(n)] = v[:, 0]
        else:
            dim = 1 << n
            op = sla.LinearOperator(
                (dim, dim), matvec=lambda x: apply_hamiltonian(terms, x.ravel()), dtype=float
            )
            w, v = sla.eigsh(op, k=1, which="SA", tol=tol, v0=_start_vector(dim))
            psi = v[:, 0]
        energy = float(w[0])
    else:
        raise ValueError(f"unknown ED method {method!r}")

    psi = _fix_sign(psi / np.linalg.norm(psi)).astype(complex)
    res = float(np.linalg.norm(apply_hamiltonian(terms, psi) - energy * psi))
    if res > 1e-10 * scale:
        raise RuntimeError(f"ED did not converge: residual {res:.2e}")
    return EdResult(energy, psi, method + ("+parity" if parity and method == "iterative" else ""), res)


def ed_energy(c: Cluster, J: float, h: float = 1.0, periodic: bool = False, **kw) -> float:
    return ed_ground_state(build_hamiltonian(c, J, h, periodic), **kw).ground_energy


def exact_chain_energy_per_site(J: float, h: float) -> float:
    """Ground-state energy per site of the infinite chain.

    ``e = -(1/2 pi) int_{-pi}^{pi} sqrt(h^2 + J^2 + 2 h J cos k) dk``.
    """
    if J < 0 or h < 0 or (J == 0 and h == 0):
        raise ValueError("need J, h >= 0, not both zero")
    if J == 0 or h == 0:
        return -float(J + h)
    val, _ = quad(
        lambda k: np.sqrt(max(h * h + J * J + 2 * h * J * np.cos(k), 0.0)),
        0.0,
        np.pi,
        epsabs=1e-13,
        epsrel=1e-13,
        limit=500,
    )
    return -val / np.pi


@dataclass
class FiniteSizeRow:
    L: int
    ed_per_site: float
    exact_per_site: float

    @property
    def abs_error(self) -> float:
        return abs(self.ed_per_site - self.exact_per_site)


def ed_finite_size_check(L_max: int, J: float = 1.0, h: float = 1.0, L_min: int = 3) -> List[FiniteSizeRow]:
    """Per-site ED energies of periodic rings against the infinite-chain value."""
    if L_max > MAX_ITERATIVE:
        raise ValueError(f"L_max must be <= {MAX_ITERATIVE}")
    exact = exact_chain_energy_per_site(J, h)
    rows = []
    for L in range(L_min, L_max + 1):
        e = ed_energy(Cluster(1, L), J, h, periodic=True)
        rows.append(FiniteSizeRow(L, e / L, exact))
    return rows


@dataclass
class ReferenceTable:
    """Tabulated (J/h, e) pairs, linearly interpolated; NaN outside the table."""

    J_over_h: np.ndarray
    energy: np.ndarray
    uncertainty: Optional[np.ndarray] = None
    source: str = ""

    def __call__(self, ratio: float) -> float:
        x = float(ratio)
        if x < self.J_over_h[0] - 1e-12 or x > self.J_over_h[-1] + 1e-12:
            return float("nan")
        return float(np.interp(x, self.J_over_h, self.energy))


def load_reference_table(path) -> ReferenceTable:
    """Read a CSV with columns ``J_over_h, energy_per_site[, uncertainty]``.

    Lines starting with ``#`` are metadata; ``# source = ...`` is kept.
    """
    text = Path(path).read_text().splitlines()
    source = ""
    body = []
    for line in text:
        if line.startswith("#"):
            key, _, val = line[1:].partition("=")
            if key.strip() == "source":
                source = val.strip()
        elif line.strip():
            body.append(line)
    rows = list(csv.DictReader(body))
    if not rows or "J_over_h" not in rows[0] or "energy_per_site" not in rows[0]:
        raise ValueError(f"{path}: need columns J_over_h and energy_per_site")
    data = sorted((float(r["J_over_h"]), float(r["energy_per_site"]), float(r.get("uncertainty") or "nan")) for r in rows)
    arr = np.array(data)
    unc = arr[:, 2] if "uncertainty" in rows[0] else None
    return ReferenceTable(arr[:, 0], arr[:, 1], unc, source)


def shipped_square_reference() -> ReferenceTable:
    """Square-lattice reference energies from the high-field series shipped with the package."""
    return load_reference_table(files("nlcevqe").joinpath("data/square_series_reference.csv"))
