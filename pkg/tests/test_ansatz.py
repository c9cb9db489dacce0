import json

import numpy as np
import pytest

from nlcevqe.ansatz import (
    build_ansatz,
    default_layers,
    initial_guess_h0_periodic,
    map_periodic_to_open,
    wrap_parameters,
)
from nlcevqe.lattice import Cluster
from nlcevqe.model import build_hamiltonian
from nlcevqe.reference import ed_energy


@pytest.mark.parametrize(
    "lx,ly,variant,per_layer",
    [
        (1, 6, "hva", 3 + 3),  # reflection: 3 site orbits, 3 bond orbits
        (1, 6, "phva", 1 + 3 + 3),  # plus the single wrap link
        (1, 7, "phva", 1 + 3 + 4),
        (2, 2, "phva", 1 + 1),  # all sites and all bonds equivalent, no wrap
        (3, 3, "hva", 3 + 2),
    ],
)
def test_parameters_per_layer(lx, ly, variant, per_layer):
    spec = build_ansatz(Cluster(lx, ly), 3, variant)
    assert spec.n_per_layer == per_layer
    assert spec.n_free == 3 * per_layer


def test_untied_counts_every_gate():
    c = Cluster(2, 3)
    spec = build_ansatz(c, 2, "phva", tie=False)
    per_layer = c.n_sites + len(c.bonds) + len(c.boundary_bonds)
    assert spec.n_free == 2 * per_layer == spec.sequence.n_slots


def test_ring_has_two_parameters_per_layer():
    spec = build_ansatz(Cluster(1, 8), 4, "hva", periodic=True)
    assert spec.n_free == 8
    assert spec.boundary_slots.size == 0
    roles = [spec.slots[g.slot].role for g in spec.sequence.gates[:16]]
    assert roles == ["bond"] * 8 + ["site"] * 8


def test_layer_order_boundary_bulk_field():
    spec = build_ansatz(Cluster(1, 5), 2, "phva")
    roles = [spec.slots[g.slot].role for g in spec.sequence.gates]
    assert roles == (["boundary"] + ["bond"] * 4 + ["site"] * 5) * 2


def test_phva_reduces_to_hva_with_zero_boundary_angles():
    c = Cluster(2, 3)
    terms = build_hamiltonian(c, 0.7, 1.0)
    phva, hva = build_ansatz(c, 2, "phva"), build_ansatz(c, 2, "hva")
    p_h = np.random.default_rng(0).uniform(0, np.pi, hva.n_free)
    # pHVA free parameters per layer: [boundary orbits, then the HVA block]
    nb = phva.n_per_layer - hva.n_per_layer
    p_p = np.concatenate([np.concatenate([np.zeros(nb), blk]) for blk in p_h.reshape(2, -1)])
    assert phva.energy(p_p, terms) == pytest.approx(hva.energy(p_h, terms), abs=1e-13)


def test_tied_energy_equals_untied_with_copied_angles():
    c = Cluster(3, 3)
    terms = build_hamiltonian(c, 0.3, 1.0)
    tied, free = build_ansatz(c, 2, "phva"), build_ansatz(c, 2, "phva", tie=False)
    p = np.random.default_rng(1).uniform(0, np.pi, tied.n_free)
    assert tied.energy(p, terms) == pytest.approx(free.energy(tied.angles(p), terms), abs=1e-13)


def test_tied_state_is_symmetric():
    c = Cluster(1, 6)
    spec = build_ansatz(c, 2, "hva")
    psi = spec.state(np.random.default_rng(2).uniform(0, np.pi, spec.n_free))
    k = np.arange(psi.size)
    mirrored = np.zeros_like(k)
    for q in range(6):
        mirrored |= ((k >> q) & 1) << (5 - q)
    np.testing.assert_allclose(psi[mirrored], psi, atol=1e-13)


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_ansatz(Cluster(1, 4), 0)
    with pytest.raises(ValueError):
        build_ansatz(Cluster(1, 4), 2, "qaoa")
    spec = build_ansatz(Cluster(1, 4), 2)
    with pytest.raises(ValueError):
        spec.angles(np.zeros(spec.n_free + 1))


@pytest.mark.parametrize("lx,ly,periodic,expected", [(1, 7, False, 4), (1, 7, True, 3), (3, 4, False, 6), (1, 1, False, 1)])
def test_default_layers(lx, ly, periodic, expected):
    assert default_layers(Cluster(lx, ly), periodic) == expected


def test_wrap_parameters():
    p = np.array([-0.1, np.pi, 3 * np.pi + 0.2, 0.5])
    np.testing.assert_allclose(wrap_parameters(p), [np.pi - 0.1, 0.0, 0.2, 0.5], atol=1e-12)
    assert np.all((wrap_parameters(np.linspace(-20, 20, 101)) >= 0) & (wrap_parameters(np.linspace(-20, 20, 101)) < np.pi))


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_pi_over_four_prepares_ising_ground_state(n):
    """All angles pi/4 with floor(N/2) layers reach E = -N on the odd ring at h = 0."""
    ring = Cluster(1, n)
    spec = build_ansatz(ring, n // 2, "hva", periodic=True)
    terms = build_hamiltonian(ring, 1.0, 0.0, periodic=True)
    assert spec.energy(initial_guess_h0_periodic(ring, n // 2), terms) == pytest.approx(-n, abs=1e-12)


def test_pi_over_four_rejections():
    with pytest.raises(ValueError):
        initial_guess_h0_periodic(Cluster(1, 6), 3)
    with pytest.raises(ValueError):
        initial_guess_h0_periodic(Cluster(1, 7), 2)
    with pytest.raises(ValueError):
        initial_guess_h0_periodic(Cluster(3, 3), 4)


def test_map_periodic_to_open_chain():
    spec = build_ansatz(Cluster(1, 6), 3, "phva")
    ring = np.array([0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    p = map_periodic_to_open(ring, spec)
    angles = spec.angles(p)
    for slot, info in enumerate(spec.slots):
        xx, z = ring.reshape(3, 2)[info.layer]
        assert angles[slot] == pytest.approx(z if info.role == "site" else xx)


def test_map_periodic_to_open_rectangle_zeroes_interior():
    c = Cluster(3, 4)
    spec = build_ansatz(c, 2, "phva")
    angles = spec.angles(map_periodic_to_open([0.3, 0.7, 0.4, 0.8], spec))
    interior_sites = {4, 7}
    for slot, info in enumerate(spec.slots):
        if info.role == "site":
            expected = 0.0 if info.element[0] in interior_sites else [0.7, 0.8][info.layer]
            assert angles[slot] == pytest.approx(expected)
    with pytest.raises(ValueError):
        map_periodic_to_open([0.3, 0.7], spec)


def test_ring_seed_is_exact_for_periodic_solution():
    """The ring angles put on the open chain reproduce the ring energy under the closed Hamiltonian."""
    c = Cluster(1, 5)
    ring_spec = build_ansatz(c, 2, "hva", periodic=True)
    open_spec = build_ansatz(c, 2, "phva")
    ring_p = np.array([0.3, 0.2, 0.5, 0.1])
    terms = build_hamiltonian(c, 1.0, 1.0, periodic=True)
    assert open_spec.energy(map_periodic_to_open(ring_p, open_spec), terms) == pytest.approx(
        ring_spec.energy(ring_p, terms), abs=1e-12
    )


def test_variational_bound_random_angles():
    c = Cluster(2, 3)
    terms = build_hamiltonian(c, 0.8, 1.0)
    e0 = ed_energy(c, 0.8, 1.0)
    spec = build_ansatz(c, 3)
    rng = np.random.default_rng(4)
    assert all(spec.energy(rng.uniform(0, np.pi, spec.n_free), terms) >= e0 - 1e-12 for _ in range(20))


def test_ansatz_json():
    spec = build_ansatz(Cluster(2, 2), 1)
    data = json.loads(spec.to_json())
    assert data["n_free"] == spec.n_free
    assert len(data["gates"]) == len(spec.sequence)
