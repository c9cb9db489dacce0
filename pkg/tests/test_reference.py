import numpy as np
import pytest

from nlcevqe.lattice import Cluster
from nlcevqe.model import build_hamiltonian
from nlcevqe.reference import (
    ed_energy,
    ed_finite_size_check,
    ed_ground_state,
    exact_chain_energy_per_site,
    load_reference_table,
    shipped_square_reference,
)


def test_single_site():
    assert ed_energy(Cluster(1, 1), 0.0, 1.0) == pytest.approx(-1.0, abs=1e-14)


def test_open_dimer():
    assert ed_energy(Cluster(1, 2), 1.0, 1.0) == pytest.approx(-np.sqrt(5), abs=1e-12)


def test_periodic_triangle_at_zero_field():
    assert ed_energy(Cluster(1, 3), 1.0, 0.0, periodic=True) == pytest.approx(-3.0, abs=1e-12)


@pytest.mark.parametrize("lx,ly", [(1, 6), (2, 3), (2, 4), (3, 3), (1, 10), (3, 4)])
def test_dense_and_iterative_agree(lx, ly):
    terms = build_hamiltonian(Cluster(lx, ly), 0.9, 1.0)
    dense = ed_ground_state(terms, method="dense")
    for parity in (False, True):
        it = ed_ground_state(terms, method="iterative", parity=parity)
        assert it.ground_energy == pytest.approx(dense.ground_energy, abs=1e-10)
        assert abs(np.vdot(it.ground_state, dense.ground_state)) == pytest.approx(1.0, abs=1e-8)
    assert dense.residual <= 1e-10 * 20


def test_parity_is_default_for_large_clusters():
    res = ed_ground_state(build_hamiltonian(Cluster(2, 8), 0.3, 1.0))
    assert res.method == "iterative+parity"


def test_ed_limits():
    with pytest.raises(ValueError):
        ed_ground_state(build_hamiltonian(Cluster(1, 13), 1.0, 1.0), method="dense")
    with pytest.raises(ValueError):
        ed_ground_state(build_hamiltonian(Cluster(1, 3), 1.0, 1.0), method="lanczos")
    with pytest.raises(ValueError):
        ed_ground_state(build_hamiltonian(Cluster(1, 3), 1.0, 1.0), n_qubits=4)


@pytest.mark.parametrize("J,h,expected", [(1.0, 1.0, -4 / np.pi), (0.0, 1.0, -1.0), (1.0, 0.0, -1.0), (0.0, 2.5, -2.5)])
def test_exact_anchors(J, h, expected):
    assert exact_chain_energy_per_site(J, h) == pytest.approx(expected, abs=1e-12)


def test_exact_is_symmetric_under_duality():
    for J in (0.2, 0.7, 1.3):
        assert exact_chain_energy_per_site(J, 1.0) == pytest.approx(exact_chain_energy_per_site(1.0, J), abs=1e-12)


def test_exact_rejects_bad_couplings():
    with pytest.raises(ValueError):
        exact_chain_energy_per_site(-1.0, 1.0)
    with pytest.raises(ValueError):
        exact_chain_energy_per_site(0.0, 0.0)


def test_finite_size_rings_approach_exact():
    """Critical rings converge as pi / (6 L^2) (central charge 1/2, velocity 2)."""
    rows = ed_finite_size_check(12)
    errs = [r.abs_error for r in rows]
    assert errs == sorted(errs, reverse=True)
    for r in rows[3:]:
        assert r.abs_error * r.L**2 == pytest.approx(np.pi / 6, rel=0.05)
    with pytest.raises(ValueError):
        ed_finite_size_check(19)


def test_reference_table_roundtrip(tmp_path):
    path = tmp_path / "ref.csv"
    path.write_text("# source = hand typed\nJ_over_h,energy_per_site,uncertainty\n0.2,-1.01,0.001\n0.1,-1.0025,0.0001\n")
    table = load_reference_table(path)
    assert table.source == "hand typed"
    assert list(table.J_over_h) == [0.1, 0.2]
    assert table(0.15) == pytest.approx(-1.00625)
    assert np.isnan(table(0.3))
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    with pytest.raises(ValueError):
        load_reference_table(bad)


def test_shipped_reference_low_field_limit():
    table = shipped_square_reference()
    assert "series" in table.source
    assert table(0.0) == pytest.approx(-1.0, abs=1e-15)
    # leading terms of the square-lattice series: -J^2/2 - 15 J^4/32 - 147 J^6/128
    J = 0.05
    assert table(J) == pytest.approx(-1 - J**2 / 2 - 15 * J**4 / 32 - 147 * J**6 / 128, abs=1e-9)
    assert np.all(table.uncertainty >= 0)
