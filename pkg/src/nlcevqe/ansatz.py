"""Layered (periodic) Hamiltonian variational ansatz with symmetry-tied angles.

One layer applies, in this order, the boundary-link XX rotations, the bulk
XX rotations (brick-wall order) and the single-site Z rotations.  The ``hva``
variant drops the boundary links; ``phva`` keeps them with their own angles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .lattice import Cluster, perimeter_bonds, perimeter_loop, symmetry_orbits
from .model import HamiltonianTerms
from .statevector import Gate, GateSequence, energy_and_gradient, run_circuit

VARIANTS = ("hva", "phva")


@dataclass(frozen=True)
class SlotInfo:
    layer: int
    role: str  # "boundary", "bond" or "site"
    element: Tuple[int, ...]


@dataclass
class AnsatzSpec:
    cluster: Cluster
    n_layers: int
    variant: str
    periodic: bool
    tied: bool
    sequence: GateSequence
    slots: List[SlotInfo]
    tying: np.ndarray  # slot -> free parameter index
    n_free: int

    @property
    def boundary_slots(self) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.slots) if s.role == "boundary"], dtype=int)

    @property
    def n_per_layer(self) -> int:
        return self.n_free // self.n_layers

    def angles(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_free,):
            raise ValueError(f"expected {self.n_free} parameters, got shape {params.shape}")
        return params[self.tying]

    def reduce_gradient(self, slot_grad: np.ndarray) -> np.ndarray:
        return np.bincount(self.tying, weights=slot_grad, minlength=self.n_free)

    def state(self, params) -> np.ndarray:
        return run_circuit(self.sequence, self.angles(params))

    def energy_and_gradient(self, params, terms: HamiltonianTerms):
        e, g = energy_and_gradient(self.sequence, self.angles(params), terms)
        return e, self.reduce_gradient(g)

    def energy(self, params, terms: HamiltonianTerms) -> float:
        return self.energy_and_gradient(params, terms)[0]

    def free_from_slots(self, slot_values) -> np.ndarray:
        """Project slot angles onto the free parameters (first slot of each orbit)."""
        out = np.zeros(self.n_free)
        seen = np.zeros(self.n_free, dtype=bool)
        for slot, k in enumerate(self.tying):
            if not seen[k]:
                out[k] = slot_values[slot]
                seen[k] = True
        return out

    def to_dict(self) -> dict:
        return {
            "cluster": self.cluster.id,
            "n_layers": self.n_layers,
            "variant": self.variant,
            "periodic": self.periodic,
            "tied": self.tied,
            "n_free": self.n_free,
            "gates": [
                {"kind": g.kind, "qubits": list(g.qubits), "slot": g.slot, "role": self.slots[g.slot].role}
                for g in self.sequence.gates
            ],
            "tying": self.tying.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def default_layers(c: Cluster, periodic: bool = False) -> int:
    n = c.n_sites
    return max(1, n // 2 if periodic else math.ceil(n / 2))


def _orbit_index(orbits) -> dict:
    return {item: k for k, orb in enumerate(orbits) for item in orb}


def _periodic_orbits(c: Cluster):
    """Site and bond orbits of the closed cluster under translations and the point group."""
    bonds = list(c.bonds) + list(c.boundary_bonds)
    if c.is_chain:
        return [tuple(c.sites)], [tuple(bonds)]
    horiz = [b for b in bonds if c.coords(b[0])[1] == c.coords(b[1])[1]]
    vert = [b for b in bonds if b not in horiz]
    if c.lx == c.ly:
        return [tuple(c.sites)], [tuple(bonds)]
    return [tuple(c.sites)], [tuple(horiz), tuple(vert)]


def build_ansatz(
    c: Cluster,
    n_layers: int,
    variant: str = "phva",
    tie: bool = True,
    periodic: bool = False,
) -> AnsatzSpec:
    """Gate sequence and tying map for ``n_layers`` layers on cluster ``c``.

    ``periodic=True`` builds the ansatz for the closed cluster (boundary
    bonds become ordinary Hamiltonian bonds) with translation tying, i.e. two
    angles per layer on a ring.
    """
    if n_layers < 1:
        raise ValueError("n_layers must be >= 1")
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")

    if periodic:
        boundary = []
        bonds = list(c.boundary_bonds) + list(c.bonds)
        site_orbits, bond_orbits = _periodic_orbits(c)
        boundary_orbits = []
    else:
        orbits = symmetry_orbits(c)
        boundary = list(c.boundary_bonds) if variant == "phva" else []
        bonds = list(c.bonds)
        site_orbits, bond_orbits = list(orbits.sites), list(orbits.bonds)
        boundary_orbits = list(orbits.boundary_bonds) if boundary else []

    idx_boundary = _orbit_index(boundary_orbits)
    idx_bond = _orbit_index(bond_orbits)
    idx_site = _orbit_index(site_orbits)
    per_layer = len(boundary_orbits) + len(bond_orbits) + len(site_orbits)

    gates, slots, tying = [], [], []
    for layer in range(n_layers):
        base = layer * per_layer
        for role, items, index, offset in (
            ("boundary", boundary, idx_boundary, 0),
            ("bond", bonds, idx_bond, len(boundary_orbits)),
            ("site", list(c.sites), idx_site, len(boundary_orbits) + len(bond_orbits)),
        ):
            for item in items:
                slot = len(slots)
                qubits = tuple(item) if role != "site" else (item,)
                gates.append(Gate("xx" if role != "site" else "z", qubits, slot))
                slots.append(SlotInfo(layer, role, qubits))
                tying.append(base + offset + index[item])

    tying = np.array(tying, dtype=int)
    if not tie:
        tying = np.arange(len(slots))
    n_free = int(tying.max()) + 1 if len(slots) else 0
    seq = GateSequence(c.n_sites, gates, len(slots))
    return AnsatzSpec(c, n_layers, variant, periodic, tie, seq, slots, tying, n_free)


def wrap_parameters(p) -> np.ndarray:
    """Reduce every angle into [0, pi); the circuit changes only by a sign."""
    r = np.mod(np.asarray(p, dtype=float), np.pi)
    r[r >= np.pi] = 0.0
    return r


def initial_guess_h0_periodic(c: Cluster, n_layers: int) -> np.ndarray:
    """All-pi/4 angles, which prepare the h = 0 ground state of an odd ring."""
    if not c.is_chain:
        raise ValueError("the pi/4 construction applies to periodic chains only")
    if c.n_sites % 2 == 0:
        raise ValueError("no closed-form h = 0 angles for even rings")
    if n_layers < c.n_sites // 2:
        raise ValueError(f"need at least {c.n_sites // 2} layers, got {n_layers}")
    return np.full(2 * n_layers, np.pi / 4)


def map_periodic_to_open(
    periodic_params, target: AnsatzSpec, perimeter_only: Optional[bool] = None
) -> np.ndarray:
    """Seed an open-cluster ansatz from a tied ring solution.

    ``periodic_params`` holds ``(xx, z)`` per layer.  Perimeter bonds, boundary
    links and perimeter sites take the ring value of their layer; bonds and
    sites inside the perimeter loop start at zero.
    """
    p = np.asarray(periodic_params, dtype=float).reshape(-1, 2)
    if len(p) != target.n_layers:
        raise ValueError(
            f"ring solution has {len(p)} layers, target ansatz has {target.n_layers}"
        )
    c = target.cluster
    if perimeter_only is None:
        perimeter_only = not c.is_chain
    rim_sites = set(perimeter_loop(c)) if perimeter_only else set(c.sites)
    rim_bonds = set(perimeter_bonds(c)) if perimeter_only else set(c.bonds)
    values = np.zeros(target.sequence.n_slots)
    for slot, info in enumerate(target.slots):
        xx, z = p[info.layer]
        if info.role == "boundary":
            values[slot] = xx
        elif info.role == "bond":
            values[slot] = xx if info.element in rim_bonds else 0.0
        else:
            values[slot] = z if info.element[0] in rim_sites else 0.0
    return wrap_parameters(target.free_from_slots(values))
