"""Transverse-field Ising Hamiltonian H = -h sum_v Z_v - J sum_<v,m> X_v X_m."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from . import kernels
from .lattice import Bond, Cluster

NORM_TOL = 1e-12


@dataclass(frozen=True)
class HamiltonianTerms:
    n_sites: int
    J: float
    h: float
    field_terms: Tuple[Tuple[int, float], ...]
    ising_terms: Tuple[Tuple[Bond, float], ...]

    @cached_property
    def diagonal(self) -> np.ndarray:
        """Diagonal (field) part of H over the computational basis."""
        d = np.zeros(1 << self.n_sites)
        for site, coef in self.field_terms:
            d += coef * kernels.z_eigenvalues(self.n_sites, site)
        return d

    def scaled(self, J: float, h: float) -> "HamiltonianTerms":
        """Same geometry at different couplings."""
        return HamiltonianTerms(
            self.n_sites,
            J,
            h,
            tuple((s, -h) for s, _ in self.field_terms),
            tuple((b, -J) for b, _ in self.ising_terms),
        )


def build_hamiltonian(c: Cluster, J: float, h: float, periodic: bool = False) -> HamiltonianTerms:
    """TFIM terms on the open cluster, optionally closed by its boundary bonds."""
    if not (np.isfinite(J) and np.isfinite(h)):
        raise ValueError("couplings must be finite")
    bonds = c.bonds + (c.boundary_bonds if periodic else ())
    return HamiltonianTerms(
        n_sites=c.n_sites,
        J=float(J),
        h=float(h),
        field_terms=tuple((s, -float(h)) for s in c.sites),
        ising_terms=tuple((b, -float(J)) for b in bonds),
    )


def check_normalized(psi: np.ndarray) -> None:
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized: |psi|^2 - 1 = {norm2 - 1.0:.3e}")


def energy_expectation(terms: HamiltonianTerms, psi: np.ndarray) -> float:
    """<psi|H|psi>, streamed term by term without forming H."""
    if psi.size != 1 << terms.n_sites:
        raise ValueError("state size does not match the Hamiltonian")
    check_normalized(psi)
    e = 0.0
    for site, coef in terms.field_terms:
        e += coef * kernels.expect_z(psi, site)
    for (a, b), coef in terms.ising_terms:
        e += coef * kernels.expect_xx(psi, a, b)
    return e


def apply_hamiltonian(terms: HamiltonianTerms, psi: np.ndarray) -> np.ndarray:
    """H psi for a real or complex amplitude vector."""
    out = terms.diagonal * psi
    for (a, b), coef in terms.ising_terms:
        kernels.add_xx(out, psi, a, b, coef)
    return out
