import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlcevqe import kernels
from nlcevqe.lattice import Cluster
from nlcevqe.model import apply_hamiltonian, build_hamiltonian, check_normalized, energy_expectation
from nlcevqe.reference import hamiltonian_matrix
from nlcevqe.statevector import prepare_reference

CLUSTERS = [Cluster(1, 1), Cluster(1, 4), Cluster(2, 2), Cluster(2, 3), Cluster(1, 7)]


def random_state(n, rng):
    psi = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return psi / np.linalg.norm(psi)


def test_term_counts():
    terms = build_hamiltonian(Cluster(2, 3), 0.5, 2.0)
    assert len(terms.field_terms) == 6
    assert len(terms.ising_terms) == 7
    assert all(c == -2.0 for _, c in terms.field_terms)
    assert all(c == -0.5 for _, c in terms.ising_terms)
    ring = build_hamiltonian(Cluster(1, 5), 1.0, 1.0, periodic=True)
    assert len(ring.ising_terms) == 5


def test_nonfinite_couplings_rejected():
    with pytest.raises(ValueError):
        build_hamiltonian(Cluster(1, 3), np.nan, 1.0)


@pytest.mark.parametrize("c", CLUSTERS, ids=lambda c: c.id)
def test_reference_state_energy(c):
    h = 0.7
    terms = build_hamiltonian(c, 1.3, h)
    assert energy_expectation(terms, prepare_reference(c.n_sites)) == pytest.approx(-h * c.n_sites, abs=1e-14)


@pytest.mark.parametrize("c", CLUSTERS, ids=lambda c: c.id)
def test_streamed_terms_match_matrix(c):
    rng = np.random.default_rng(3)
    terms = build_hamiltonian(c, 0.9, 1.1)
    H = hamiltonian_matrix(terms)
    psi = random_state(c.n_sites, rng)
    np.testing.assert_allclose(apply_hamiltonian(terms, psi), H @ psi, atol=1e-12)
    assert energy_expectation(terms, psi) == pytest.approx(np.vdot(psi, H @ psi).real, abs=1e-12)


def test_unnormalized_state_rejected():
    terms = build_hamiltonian(Cluster(1, 3), 1.0, 1.0)
    with pytest.raises(ValueError):
        energy_expectation(terms, 2 * prepare_reference(3))
    with pytest.raises(ValueError):
        check_normalized(np.ones(4) / 1.9)
    with pytest.raises(ValueError):
        energy_expectation(terms, prepare_reference(4))


def test_single_site_energies():
    terms = build_hamiltonian(Cluster(1, 1), 0.0, 1.0)
    assert energy_expectation(terms, np.array([1.0, 0.0])) == -1.0
    assert energy_expectation(terms, np.array([0.0, 1.0])) == 1.0


@settings(max_examples=30, deadline=None)
@given(J=st.floats(-2, 2), h=st.floats(-2, 2), seed=st.integers(0, 2**31))
def test_energy_linear_in_couplings(J, h, seed):
    c = Cluster(2, 3)
    psi = random_state(c.n_sites, np.random.default_rng(seed))
    e_field = energy_expectation(build_hamiltonian(c, 0.0, 1.0), psi)
    e_bond = energy_expectation(build_hamiltonian(c, 1.0, 0.0), psi)
    assert energy_expectation(build_hamiltonian(c, J, h), psi) == pytest.approx(J * e_bond + h * e_field, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_spin_flip_invariance(seed):
    """P = prod X commutes with XX and maps the field energy of P psi to minus its value."""
    c = Cluster(1, 6)
    psi = random_state(c.n_sites, np.random.default_rng(seed))
    flipped = kernels.flip_all(psi)
    ising = build_hamiltonian(c, 1.0, 0.0)
    field = build_hamiltonian(c, 0.0, 1.0)
    assert energy_expectation(ising, flipped) == pytest.approx(energy_expectation(ising, psi), abs=1e-12)
    assert energy_expectation(field, flipped) == pytest.approx(-energy_expectation(field, psi), abs=1e-12)


def test_scaled_terms():
    terms = build_hamiltonian(Cluster(2, 2), 1.0, 1.0).scaled(0.25, 3.0)
    ref = build_hamiltonian(Cluster(2, 2), 0.25, 3.0)
    assert terms == ref
