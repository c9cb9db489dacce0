"""Rectangular clusters on the chain and square lattice.

Sites of an ``Lx x Ly`` rectangle are labelled ``s = y * Lx + x`` with
``0 <= x < Lx`` and ``0 <= y < Ly``.  A chain segment of length ``L`` is the
``1 x L`` rectangle, so its sites are simply ``0 .. L-1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Tuple

Bond = Tuple[int, int]

LATTICES = ("chain", "square")
CLOSURES = ("torus", "perimeter")


def _bond(a: int, b: int) -> Bond:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Orbits:
    """Partition of sites, bonds and boundary bonds under the point group."""

    group_order: int
    sites: Tuple[Tuple[int, ...], ...]
    bonds: Tuple[Tuple[Bond, ...], ...]
    boundary_bonds: Tuple[Tuple[Bond, ...], ...]

    @property
    def n_per_layer(self) -> int:
        return len(self.sites) + len(self.bonds) + len(self.boundary_bonds)


@dataclass(frozen=True)
class Cluster:
    lx: int
    ly: int
    closure: str = "torus"
    bonds: Tuple[Bond, ...] = field(init=False)
    boundary_bonds: Tuple[Bond, ...] = field(init=False)

    def __post_init__(self):
        if self.lx < 1 or self.ly < 1:
            raise ValueError(f"invalid rectangle {self.lx}x{self.ly}")
        if self.lx > self.ly:
            raise ValueError("clusters are stored with lx <= ly")
        if self.closure not in CLOSURES:
            raise ValueError(f"unknown closure {self.closure!r}")
        object.__setattr__(self, "bonds", tuple(_bulk_bonds(self.lx, self.ly)))
        object.__setattr__(
            self, "boundary_bonds", tuple(_wrap_bonds(self.lx, self.ly, self.closure))
        )

    @property
    def id(self) -> str:
        return f"{self.lx}x{self.ly}"

    @property
    def n_sites(self) -> int:
        return self.lx * self.ly

    @property
    def dims(self) -> Tuple[int, int]:
        return (self.lx, self.ly)

    @property
    def sites(self) -> Tuple[int, ...]:
        return tuple(range(self.n_sites))

    @property
    def is_chain(self) -> bool:
        return self.lx == 1

    def coords(self, site: int) -> Tuple[int, int]:
        return site % self.lx, site // self.lx

    def site(self, x: int, y: int) -> int:
        return y * self.lx + x

    @cached_property
    def symmetry_orbits(self) -> Orbits:
        return symmetry_orbits(self)

    def __repr__(self):
        return f"Cluster({self.id})"


def _bulk_bonds(lx: int, ly: int) -> List[Bond]:
    """Open-rectangle bonds in brick-wall order.

    Row bonds (along x) first, then column bonds (along y); within each
    direction the even-offset bonds precede the odd-offset ones.
    """
    out = []
    for parity in (0, 1):
        for y in range(ly):
            for x in range(parity, lx - 1, 2):
                out.append(_bond(y * lx + x, y * lx + x + 1))
    for parity in (0, 1):
        for y in range(parity, ly - 1, 2):
            for x in range(lx):
                out.append(_bond(y * lx + x, (y + 1) * lx + x))
    return out


def _wrap_bonds(lx: int, ly: int, closure: str) -> List[Bond]:
    # a wrap bond across a width-2 direction would duplicate a bulk bond
    if closure == "perimeter" and lx > 1:
        return []
    out = []
    if lx >= 3:
        out += [_bond(y * lx + lx - 1, y * lx) for y in range(ly)]
    if ly >= 3:
        out += [_bond((ly - 1) * lx + x, x) for x in range(lx)]
    return out


def _group(c: Cluster) -> List[Tuple[int, ...]]:
    """Point-group elements as site permutations (duplicates removed)."""
    lx, ly = c.lx, c.ly
    maps = [
        lambda x, y: (x, y),
        lambda x, y: (lx - 1 - x, y),
        lambda x, y: (x, ly - 1 - y),
        lambda x, y: (lx - 1 - x, ly - 1 - y),
    ]
    if lx == ly:
        maps += [
            lambda x, y: (y, x),
            lambda x, y: (ly - 1 - y, x),
            lambda x, y: (y, lx - 1 - x),
            lambda x, y: (ly - 1 - y, lx - 1 - x),
        ]
    perms = []
    for m in maps:
        p = tuple(c.site(*m(*c.coords(s))) for s in c.sites)
        if p not in perms:
            perms.append(p)
    return perms


def _orbits_of(items, act) -> Tuple[tuple, ...]:
    seen = set()
    orbits = []
    for it in items:
        if it in seen:
            continue
        orb = sorted({act(g, it) for g in act.group})
        seen.update(orb)
        orbits.append(tuple(orb))
    return tuple(orbits)


def symmetry_orbits(c: Cluster) -> Orbits:
    """Orbits of sites, bonds and boundary bonds under the cluster point group.

    Chains use the reflection group (order 2), rectangles the order-4 group
    of axis flips and squares the full order-8 dihedral group.
    """
    group = _group(c)

    def act_site(g, s):
        return g[s]

    def act_bond(g, b):
        return _bond(g[b[0]], g[b[1]])

    act_site.group = act_bond.group = group
    return Orbits(
        group_order=len(group),
        sites=_orbits_of(c.sites, act_site),
        bonds=_orbits_of(c.bonds, act_bond),
        boundary_bonds=_orbits_of(c.boundary_bonds, act_bond),
    )


def point_group(c: Cluster) -> List[Tuple[int, ...]]:
    return _group(c)


def perimeter_loop(c: Cluster) -> List[int]:
    """Sites of the outer boundary of ``c`` in cyclic order.

    For a chain this is the chain itself; for ``Lx, Ly >= 2`` it is the
    closed loop of ``2 (Lx + Ly) - 4`` boundary sites.
    """
    if c.lx == 1:
        return list(c.sites)
    lx, ly = c.lx, c.ly
    loop = [c.site(x, 0) for x in range(lx)]
    loop += [c.site(lx - 1, y) for y in range(1, ly)]
    loop += [c.site(x, ly - 1) for x in range(lx - 2, -1, -1)]
    loop += [c.site(0, y) for y in range(ly - 2, 0, -1)]
    return loop


def perimeter_bonds(c: Cluster) -> List[Bond]:
    loop = perimeter_loop(c)
    if c.lx == 1:
        return list(c.bonds)
    return [_bond(loop[i], loop[(i + 1) % len(loop)]) for i in range(len(loop))]


def enumerate_clusters(lattice: str, n_max: int, closure: str = "torus") -> List[Cluster]:
    """All rectangles of the expansion, ordered by site count then ``Lx``."""
    if lattice not in LATTICES:
        raise ValueError(f"unknown lattice {lattice!r}; expected one of {LATTICES}")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if lattice == "chain":
        return [Cluster(1, n, closure) for n in range(1, n_max + 1)]
    dims = [
        (lx, ly)
        for lx in range(1, n_max + 1)
        for ly in range(lx, n_max + 1)
        if lx * ly <= n_max
    ]
    dims.sort(key=lambda d: (d[0] * d[1], d[0]))
    return [Cluster(lx, ly, closure) for lx, ly in dims]


def count_embeddings(c: Cluster, sub: Cluster) -> int:
    """Number of placements of ``sub`` inside ``c`` (both orientations)."""
    a, b = sub.lx, sub.ly
    total = 0
    orientations = [(a, b)] if a == b else [(a, b), (b, a)]
    for p, q in orientations:
        if p <= c.lx and q <= c.ly:
            total += (c.lx - p + 1) * (c.ly - q + 1)
    return total


def embedding_weight(lattice: str, c: Cluster) -> int:
    """Per-site embedding count of ``c`` on the infinite lattice."""
    if lattice == "chain":
        return 1
    return 1 if c.lx == c.ly else 2


@dataclass
class ExpansionPlan:
    lattice: str
    n_max: int
    clusters: List[Cluster]
    embeddings: Dict[Tuple[str, str], int]
    weights: Dict[str, int]

    def cluster(self, cid: str) -> Cluster:
        for c in self.clusters:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def truncated(self, order: int) -> "ExpansionPlan":
        keep = [c for c in self.clusters if c.n_sites <= order]
        ids = {c.id for c in keep}
        return ExpansionPlan(
            self.lattice,
            order,
            keep,
            {k: v for k, v in self.embeddings.items() if k[0] in ids},
            {k: v for k, v in self.weights.items() if k in ids},
        )

    def to_dict(self) -> dict:
        return {
            "lattice": self.lattice,
            "n_max": self.n_max,
            "clusters": [
                {
                    "id": c.id,
                    "lx": c.lx,
                    "ly": c.ly,
                    "n_sites": c.n_sites,
                    "bonds": [list(b) for b in c.bonds],
                    "boundary_bonds": [list(b) for b in c.boundary_bonds],
                }
                for c in self.clusters
            ],
            "embeddings": [[k[0], k[1], v] for k, v in sorted(self.embeddings.items())],
            "weights": {c.id: self.weights[c.id] for c in self.clusters},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def build_plan(lattice: str, n_max: int, closure: str = "torus") -> ExpansionPlan:
    clusters = enumerate_clusters(lattice, n_max, closure)
    embeddings = {}
    for c in clusters:
        for sub in clusters:
            n = count_embeddings(c, sub)
            if n:
                embeddings[(c.id, sub.id)] = n
    weights = {c.id: embedding_weight(lattice, c) for c in clusters}
    return ExpansionPlan(lattice, n_max, clusters, embeddings, weights)
