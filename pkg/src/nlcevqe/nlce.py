"""Numerical linked-cluster sums over rectangular graphs.

The reduction and the weighted sum are pure functions of a cluster-energy
map; which solver produced the energies is irrelevant to them.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence

import numpy as np

from .lattice import Cluster, ExpansionPlan, build_plan
from .model import build_hamiltonian
from .reference import ed_ground_state
from .vqe import CRITICAL_POINT, OptimizerConfig, SweepRecord, solve_cluster

log = logging.getLogger(__name__)

SOLVERS = ("ed", "vqe", "hybrid")
VQE_ED_FLAG = 1e-6


def reduced_energies(plan: ExpansionPlan, energies: Mapping[str, object]) -> Dict[str, object]:
    """Inclusion-exclusion: E_red(c) = E(c) - sum_{c' < c} n(c, c') E_red(c').

    Values may be scalars or numpy arrays (one entry per coupling).
    """
    missing = [c.id for c in plan.clusters if c.id not in energies]
    if missing:
        raise KeyError(f"no energy for clusters {missing}")
    red = {}
    for c in sorted(plan.clusters, key=lambda c: (c.n_sites, c.lx)):
        val = energies[c.id]
        for sub in plan.clusters:
            if sub.id == c.id or sub.id not in red:
                continue
            n = plan.embeddings.get((c.id, sub.id), 0)
            if n:
                val = val - n * red[sub.id]
        red[c.id] = val
    return red


def per_site_energy(plan: ExpansionPlan, reduced: Mapping[str, object], order: Optional[int] = None):
    """Weighted sum of reduced energies over clusters with at most ``order`` sites."""
    order = plan.n_max if order is None else order
    total = 0.0
    for c in plan.clusters:
        if c.n_sites <= order:
            total = total + plan.weights[c.id] * reduced[c.id]
    return total


def order_table(plan: ExpansionPlan, energies: Mapping[str, object]) -> Dict[int, object]:
    red = reduced_energies(plan, energies)
    return {n: per_site_energy(plan, red, n) for n in range(1, plan.n_max + 1)}


@dataclass
class LayerRule:
    """``ceil`` gives ceil(N/2) + offset layers; ``fixed`` gives ``offset`` layers."""

    mode: str = "ceil"
    offset: int = 0

    def __call__(self, c: Cluster) -> int:
        if self.mode == "ceil":
            return max(1, math.ceil(c.n_sites / 2) + self.offset)
        if self.mode == "fixed":
            return max(1, self.offset)
        raise ValueError(f"unknown layer rule {self.mode!r}")

    @classmethod
    def parse(cls, text: str) -> "LayerRule":
        """``"ceil"``, ``"ceil-1"``, ``"ceil+2"`` or ``"fixed:4"``."""
        text = text.strip()
        if text.startswith("fixed:"):
            return cls("fixed", int(text.split(":", 1)[1]))
        if text.startswith("ceil"):
            rest = text[4:]
            return cls("ceil", int(rest) if rest else 0)
        raise ValueError(f"cannot parse layer rule {text!r}")


@dataclass
class NlceResult:
    lattice: str
    grid: np.ndarray
    solver: str
    orders: Dict[int, np.ndarray]
    cluster_energies: Dict[str, np.ndarray]
    records: Dict[str, List[SweepRecord]] = field(default_factory=dict)
    diagnostics: Dict[str, dict] = field(default_factory=dict)
    config: dict = field(default_factory=dict)

    def energy(self, order: Optional[int] = None) -> np.ndarray:
        return self.orders[max(self.orders) if order is None else order]

    def to_csv(self, reference: Optional[Callable[[float], float]] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["order", "J_over_h", "energy_per_site", "solver"]
        if reference is not None:
            head += ["reference", "rel_error"]
        w.writerow(head)
        for n, e in sorted(self.orders.items()):
            for g, val in zip(self.grid, e):
                row = [n, repr(float(g)), repr(float(val)), self.solver]
                if reference is not None:
                    ref = reference(float(g))
                    row += [repr(ref), repr(float(val) / ref - 1.0)]
                w.writerow(row)
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice,
            "solver": self.solver,
            "grid": [float(g) for g in self.grid],
            "orders": {str(n): [float(x) for x in e] for n, e in sorted(self.orders.items())},
            "cluster_energies": {k: [float(x) for x in v] for k, v in self.cluster_energies.items()},
            "records": {k: [r.to_dict() for r in v] for k, v in self.records.items()},
            "diagnostics": self.diagnostics,
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def ed_cluster_energies(c: Cluster, grid: Sequence[float], h: float = 1.0) -> np.ndarray:
    return np.array([ed_ground_state(build_hamiltonian(c, g * h, h)).ground_energy for g in grid])


def _record_from_dict(d: dict) -> SweepRecord:
    return SweepRecord(**{**d, "params": np.array(d["params"], dtype=float)})


class Checkpoint:
    """Append-only JSON-lines store of finished (cluster, grid point) optimizations.

    Only the parent process writes to it, so lines never interleave.
    """

    def __init__(self, path):
        self.path = Path(path)
        self.done: Dict[str, dict] = {}
        if self.path.exists():
            for line in self.path.read_text().splitlines():
                if line.strip():
                    d = json.loads(line)
                    tag = d["tag"] if d["tag"] == "seed" else round(float(d["record"]["J_over_h"]), 12)
                    self.done.setdefault(d["key"], {})[tag] = _record_from_dict(d["record"])

    def get(self, key: str) -> dict:
        return dict(self.done.get(key, {}))

    def put(self, key: str, tag: str, rec: SweepRecord) -> None:
        t = tag if tag == "seed" else round(float(rec.J_over_h), 12)
        self.done.setdefault(key, {})[t] = rec
        with self.path.open("a") as fh:
            fh.write(json.dumps({"key": key, "tag": tag, "record": rec.to_dict()}) + "\n")


def _solve_job(args):
    c, grid, layers, cfg, variant, seed_ratio, ring, done = args
    new = []
    recs = solve_cluster(
        c, grid, layers, cfg, variant=variant, seed_ratio=seed_ratio, ring=ring,
        done=done, callback=lambda tag, rec: new.append((tag, rec)),
    )
    return recs, new


def run_nlce(
    lattice: str,
    n_max: int,
    grid: Sequence[float],
    solver: str = "ed",
    layer_rule: Optional[LayerRule] = None,
    cfg: Optional[OptimizerConfig] = None,
    ed_cutoff: int = 0,
    check_against_ed: int = 14,
    checkpoint=None,
    variant: str = "phva",
    ring: str = "perimeter",
    seed_ratio: Optional[float] = None,
    jobs: int = 1,
) -> NlceResult:
    """Solve every cluster of the plan on ``grid`` and build the per-order table.

    ``solver="hybrid"`` uses ED for clusters with at most ``ed_cutoff`` sites
    and VQE above.  VQE energies of clusters with at most ``check_against_ed``
    sites are compared with ED and flagged if higher by more than 1e-6.
    With ``jobs > 1`` the VQE clusters are solved in a process pool.
    """
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}")
    plan = build_plan(lattice, n_max)
    grid = np.array(sorted(set(float(g) for g in grid)))
    layer_rule = layer_rule or LayerRule()
    cfg = cfg or OptimizerConfig()
    seed_ratio = CRITICAL_POINT[lattice] if seed_ratio is None else seed_ratio
    store = Checkpoint(checkpoint) if checkpoint else None

    energies, records, diagnostics = {}, {}, {}
    vqe_jobs = []
    for c in plan.clusters:
        if solver == "vqe" or (solver == "hybrid" and c.n_sites > ed_cutoff):
            layers = layer_rule(c)
            key = f"{lattice}:{c.id}:l{layers}:{variant}:{ring}:{seed_ratio!r}"
            done = store.get(key) if store else {}
            vqe_jobs.append((key, c, (c, list(grid), layers, cfg, variant, seed_ratio, ring, done)))
        else:
            energies[c.id] = ed_cluster_energies(c, grid)

    def collect(key, c, result):
        recs, new = result
        if store:
            for tag, rec in new:
                store.put(key, tag, rec)
        records[c.id] = recs
        energies[c.id] = np.array([r.energy for r in recs])
        log.info("%s solved with %d layers", c.id, recs[0].layers if recs else 0)

    if jobs > 1 and len(vqe_jobs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {pool.submit(_solve_job, args): (key, c) for key, c, args in vqe_jobs}
            for fut in as_completed(futures):
                collect(*futures[fut], fut.result())
    else:
        for key, c, args in vqe_jobs:
            collect(key, c, _solve_job(args))

    for key, c, args in vqe_jobs:
        recs = records[c.id]
        diag = {"layers": args[2], "converged": [bool(r.converged) for r in recs]}
        if c.n_sites <= check_against_ed:
            excess = energies[c.id] - ed_cluster_energies(c, grid)
            diag["max_excess_over_ed"] = float(excess.max())
            diag["flagged"] = bool(excess.max() > VQE_ED_FLAG)
        diagnostics[c.id] = diag

    return NlceResult(
        lattice=lattice,
        grid=grid,
        solver=solver,
        orders=order_table(plan, energies),
        cluster_energies=energies,
        records=records,
        diagnostics=diagnostics,
        config={
            "lattice": lattice,
            "n_max": n_max,
            "solver": solver,
            "layer_rule": f"{layer_rule.mode}:{layer_rule.offset}",
            "variant": variant,
            "ring": ring,
            "seed_ratio": seed_ratio,
            "ed_cutoff": ed_cutoff,
            "optimizer": vars(cfg).copy(),
        },
    )
