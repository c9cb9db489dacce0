import csv
import io
import json

import numpy as np
import pytest

from nlcevqe.lattice import build_plan
from nlcevqe.nlce import (
    Checkpoint,
    LayerRule,
    ed_cluster_energies,
    order_table,
    per_site_energy,
    reduced_energies,
    run_nlce,
)
from nlcevqe.reference import exact_chain_energy_per_site


@pytest.mark.parametrize("lattice,n_max", [("chain", 10), ("square", 12)])
def test_partition_of_unity(lattice, n_max):
    """The site-count observable E_c = N_c gives exactly one site per site."""
    plan = build_plan(lattice, n_max)
    table = order_table(plan, {c.id: float(c.n_sites) for c in plan.clusters})
    for order, p in table.items():
        assert p == pytest.approx(1.0, abs=1e-12), order


def test_bond_count_observable_on_square():
    """Bonds per site converge to 2 once the 1x2 cluster is included."""
    plan = build_plan("square", 9)
    table = order_table(plan, {c.id: float(len(c.bonds)) for c in plan.clusters})
    assert table[1] == 0.0
    assert all(table[n] == pytest.approx(2.0, abs=1e-12) for n in range(2, 10))


def test_chain_telescoping_identity():
    rng = np.random.default_rng(0)
    plan = build_plan("chain", 9)
    energies = {c.id: rng.normal() for c in plan.clusters}
    table = order_table(plan, energies)
    for L in range(2, 10):
        assert table[L] == pytest.approx(energies[f"1x{L}"] - energies[f"1x{L - 1}"], abs=1e-12)


def test_array_valued_energies():
    plan = build_plan("square", 6)
    grid = [0.2, 0.5]
    energies = {c.id: ed_cluster_energies(c, grid) for c in plan.clusters}
    red = reduced_energies(plan, energies)
    scalar = {c.id: energies[c.id][1] for c in plan.clusters}
    assert per_site_energy(plan, red)[1] == pytest.approx(per_site_energy(plan, reduced_energies(plan, scalar)))


def test_missing_cluster_energy():
    plan = build_plan("chain", 3)
    with pytest.raises(KeyError):
        reduced_energies(plan, {"1x1": -1.0})


def test_order_one_is_single_site():
    res = run_nlce("square", 1, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(res.energy(), -1.0, atol=1e-14)


def test_chain_ed_converges_towards_exact():
    res = run_nlce("chain", 10, [0.5, 1.0])
    exact = np.array([exact_chain_energy_per_site(g, 1.0) for g in res.grid])
    errs = [np.abs(res.energy(n) - exact) for n in (4, 6, 8, 10)]
    assert all(np.all(a > b) for a, b in zip(errs, errs[1:]))
    assert errs[-1][0] < 1e-8


@pytest.mark.parametrize(
    "text,mode,offset,n8",
    [("ceil", "ceil", 0, 4), ("ceil-1", "ceil", -1, 3), ("ceil+2", "ceil", 2, 6), ("fixed:3", "fixed", 3, 3)],
)
def test_layer_rule(text, mode, offset, n8):
    from nlcevqe.lattice import Cluster

    rule = LayerRule.parse(text)
    assert (rule.mode, rule.offset) == (mode, offset)
    assert rule(Cluster(2, 4)) == n8
    assert rule(Cluster(1, 1)) >= 1


def test_layer_rule_rejects_garbage():
    with pytest.raises(ValueError):
        LayerRule.parse("floor")


def test_unknown_solver():
    with pytest.raises(ValueError):
        run_nlce("chain", 3, [1.0], solver="dmrg")


def test_vqe_matches_ed_on_small_chain():
    grid = [0.5, 1.0]
    vqe = run_nlce("chain", 6, grid, solver="vqe")
    ed = run_nlce("chain", 6, grid, solver="ed")
    for n in vqe.orders:
        np.testing.assert_allclose(vqe.orders[n], ed.orders[n], atol=1e-8)
    assert not any(d["flagged"] for d in vqe.diagnostics.values())
    assert vqe.diagnostics["1x6"]["layers"] == 3


def test_hybrid_uses_ed_below_cutoff():
    res = run_nlce("chain", 4, [1.0], solver="hybrid", ed_cutoff=3)
    assert set(res.records) == {"1x4"}
    assert res.config["ed_cutoff"] == 3


def test_checkpoint_resume(tmp_path):
    path = tmp_path / "ck.jsonl"
    grid = [0.8, 1.0]
    first = run_nlce("chain", 4, grid, solver="vqe", checkpoint=path)
    n_lines = len(path.read_text().splitlines())
    # four VQE clusters, each with a seed record (J/h = 1) and one new grid point
    assert n_lines == 8
    store = Checkpoint(path)
    assert len(store.done) == 4
    second = run_nlce("chain", 4, grid, solver="vqe", checkpoint=path)
    assert len(path.read_text().splitlines()) == n_lines
    for n in first.orders:
        np.testing.assert_array_equal(first.orders[n], second.orders[n])


def test_partial_checkpoint_only_solves_missing_points(tmp_path):
    path = tmp_path / "ck.jsonl"
    run_nlce("chain", 3, [1.0, 0.9], solver="vqe", checkpoint=path)
    before = len(path.read_text().splitlines())
    run_nlce("chain", 3, [1.0, 0.9, 0.8], solver="vqe", checkpoint=path)
    lines = path.read_text().splitlines()[before:]
    assert len(lines) == 3
    assert all(json.loads(l)["record"]["J_over_h"] == pytest.approx(0.8) for l in lines)


def test_exports():
    res = run_nlce("chain", 3, [0.5, 1.0])
    rows = list(csv.DictReader(io.StringIO(res.to_csv(lambda g: exact_chain_energy_per_site(g, 1.0)))))
    assert len(rows) == 3 * 2
    last = rows[-1]
    assert last["order"] == "3" and last["solver"] == "ed"
    assert float(last["rel_error"]) == pytest.approx(float(last["energy_per_site"]) / float(last["reference"]) - 1)
    data = json.loads(res.to_json())
    assert data["config"]["n_max"] == 3
    assert set(data["cluster_energies"]) == {"1x1", "1x2", "1x3"}
