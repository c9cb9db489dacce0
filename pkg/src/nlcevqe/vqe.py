"""VQE driver: single-point minimization, adiabatic sweeps and the per-cluster pipeline."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .ansatz import (
    AnsatzSpec,
    build_ansatz,
    default_layers,
    initial_guess_h0_periodic,
    map_periodic_to_open,
    wrap_parameters,
)
from .lattice import Cluster, perimeter_loop
from .model import HamiltonianTerms, build_hamiltonian
from .optimize import conjugate_gradient, trust_region_sr1

log = logging.getLogger(__name__)

METHODS = ("trust-region-quasi-newton", "conjugate-gradient")
CRITICAL_POINT = {"chain": 1.0, "square": 0.328}


@dataclass
class OptimizerConfig:
    method: str = "trust-region-quasi-newton"
    gradient_tolerance: float = 1e-10
    max_iterations: int = 10000
    energy_tolerance: float = 1e-12
    restarts: int = 0
    perturbation: float = 0.1
    fallback: bool = True
    delta: float = 0.02
    ring_starts: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown optimizer method {self.method!r}")
        if min(self.gradient_tolerance, self.energy_tolerance, self.delta) <= 0:
            raise ValueError("tolerances and sweep step must be positive")


@dataclass
class SweepRecord:
    cluster: str
    lx: int
    ly: int
    J_over_h: float
    layers: int
    energy: float
    params: np.ndarray = field(repr=False)
    iterations: int
    grad_norm: float
    converged: bool
    initial_energy: float = float("nan")
    method: str = "vqe"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["params"] = [float(x) for x in np.asarray(self.params)]
        return d


CSV_COLUMNS = ("cluster", "Lx", "Ly", "J_over_h", "layers", "energy", "grad_norm", "iterations", "converged")


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + ("method",))
    for r in records:
        w.writerow([r.cluster, r.lx, r.ly, repr(r.J_over_h), r.layers, repr(r.energy),
                    repr(r.grad_norm), r.iterations, int(r.converged), r.method])
    return buf.getvalue()


def records_to_json(records: Iterable[SweepRecord]) -> str:
    return json.dumps([r.to_dict() for r in records], indent=1)


def _local(fun, x0, cfg: OptimizerConfig):
    kw = dict(gtol=cfg.gradient_tolerance, ftol=cfg.energy_tolerance, max_iter=cfg.max_iterations)
    if cfg.method == "conjugate-gradient":
        return conjugate_gradient(fun, x0, **kw)
    res = trust_region_sr1(fun, x0, **kw)
    if cfg.fallback and res.grad_norm > cfg.gradient_tolerance:
        alt = conjugate_gradient(fun, res.x, **kw)
        alt.nit += res.nit
        if alt.fun <= res.fun:
            return alt
    return res


def minimize(
    spec: AnsatzSpec,
    terms: HamiltonianTerms,
    init,
    cfg: Optional[OptimizerConfig] = None,
    seed: Optional[int] = None,
) -> SweepRecord:
    """Locally minimize the circuit energy from ``init``.

    With ``cfg.restarts > 0`` the best point is perturbed by Gaussian noise
    of scale ``cfg.perturbation`` and re-optimized; the lowest energy wins.
    """
    cfg = cfg or OptimizerConfig()
    init = np.asarray(init, dtype=float)
    if init.shape != (spec.n_free,):
        raise ValueError(f"init has {init.size} entries, ansatz has {spec.n_free} parameters")

    def fun(p):
        return spec.energy_and_gradient(p, terms)

    e_init = fun(init)[0]
    best = _local(fun, init, cfg)
    nit = best.nit
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    for _ in range(cfg.restarts):
        trial = _local(fun, best.x + cfg.perturbation * rng.standard_normal(spec.n_free), cfg)
        nit += trial.nit
        if trial.fun < best.fun:
            best = trial
    c = spec.cluster
    return SweepRecord(
        cluster=c.id,
        lx=c.lx,
        ly=c.ly,
        J_over_h=terms.J / terms.h if terms.h else float("inf"),
        layers=spec.n_layers,
        energy=float(best.fun),
        params=wrap_parameters(best.x),
        iterations=nit,
        grad_norm=best.grad_norm,
        converged=best.grad_norm <= cfg.gradient_tolerance,
        initial_energy=float(e_init),
    )


def _key(ratio: float) -> float:
    return round(float(ratio), 12)


def _sweep_path(spec, path, seed_params, cfg, done=None, callback=None) -> List[SweepRecord]:
    c = spec.cluster
    params = np.asarray(seed_params, dtype=float)
    out = []
    for J, h in path:
        rec = (done or {}).get(_key(J / h)) if h else None
        if rec is None:
            terms = build_hamiltonian(c, J, h, periodic=spec.periodic)
            rec = minimize(spec, terms, params, cfg)
            if not rec.converged:
                log.info("%s: no convergence at J=%g h=%g (|g|=%.2e)", c.id, J, h, rec.grad_norm)
            if callback:
                callback(rec)
        params = np.asarray(rec.params, dtype=float)
        out.append(rec)
    return out


def adiabatic_sweep(
    spec: AnsatzSpec,
    couplings: Sequence[float],
    seed_params,
    cfg: Optional[OptimizerConfig] = None,
    h: float = 1.0,
    done: Optional[dict] = None,
    callback=None,
) -> List[SweepRecord]:
    """Warm-started minimization along a monotone list of J/h values.

    Points found in ``done`` (keyed by J/h) are reused instead of re-optimized,
    and their parameters seed the next point; ``callback`` sees each new record.
    """
    cfg = cfg or OptimizerConfig()
    ratios = np.asarray(couplings, dtype=float)
    steps = np.diff(ratios)
    if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("couplings must be strictly monotone")
    return _sweep_path(spec, [(r * h, h) for r in ratios], seed_params, cfg, done, callback)


def _ramp(start: float, stop: float, step: float) -> np.ndarray:
    n = max(1, int(np.ceil(abs(stop - start) / step - 1e-9)))
    return np.linspace(start, stop, n + 1)


def solve_ring(
    n_sites: int, n_layers: int, J_over_h: float, cfg: Optional[OptimizerConfig] = None
) -> SweepRecord:
    """Translation-tied HVA solution of the periodic chain at ``J_over_h``.

    Odd rings with enough layers start from the exact h = 0 angles and follow
    an adiabatic path in the field; even rings use several random starts.
    """
    cfg = cfg or OptimizerConfig()
    ring = Cluster(1, n_sites)
    spec = build_ansatz(ring, n_layers, "hva", tie=True, periodic=True)
    if n_sites % 2 == 1 and n_sites >= 3 and n_layers >= n_sites // 2:
        p0 = initial_guess_h0_periodic(ring, n_sites // 2)
        p0 = np.concatenate([p0, np.zeros(spec.n_free - p0.size)])
        # the h = 0 state is a stationary point for every h; nudge off it
        p0 = p0 + 1e-3 * np.random.default_rng(cfg.seed).standard_normal(p0.size)
        if J_over_h >= 1:
            path = [(1.0, s) for s in _ramp(0.0, 1.0 / J_over_h, cfg.delta)]
        else:
            path = [(1.0, s) for s in _ramp(0.0, 1.0, cfg.delta)]
            path += [(r, 1.0) for r in _ramp(1.0, J_over_h, cfg.delta)[1:]]
        return _sweep_path(spec, path, p0, cfg)[-1]
    terms = build_hamiltonian(ring, J_over_h, 1.0, periodic=True)
    rng = np.random.default_rng(cfg.seed)
    starts = [rng.uniform(0, np.pi, spec.n_free) for _ in range(max(1, cfg.ring_starts))]
    return min((minimize(spec, terms, s, cfg) for s in starts), key=lambda r: r.energy)


def seed_parameters(
    spec: AnsatzSpec, J_over_h: float, cfg: Optional[OptimizerConfig] = None, ring: str = "perimeter"
) -> np.ndarray:
    """Initial angles for an open cluster from the matching ring solution.

    ``ring="perimeter"`` uses a ring as long as the cluster perimeter,
    ``ring="sites"`` one with the same number of sites.
    """
    c = spec.cluster
    if c.n_sites == 1:
        return np.zeros(spec.n_free)
    if c.n_sites == 2:
        return np.full(spec.n_free, np.pi / 8)
    length = len(perimeter_loop(c)) if ring == "perimeter" else c.n_sites
    rec = solve_ring(length, spec.n_layers, J_over_h, cfg)
    return map_periodic_to_open(rec.params, spec)


def solve_cluster(
    c: Cluster,
    grid: Sequence[float],
    n_layers: Optional[int] = None,
    cfg: Optional[OptimizerConfig] = None,
    variant: str = "phva",
    seed_ratio: Optional[float] = None,
    tie: bool = True,
    ring: str = "perimeter",
    done: Optional[dict] = None,
    callback=None,
) -> List[SweepRecord]:
    """Ring seeding, optimization at the seed coupling, then sweeps both ways over ``grid``.

    ``done`` maps J/h to finished records (the seed point under the key
    ``"seed"``); those points are not re-optimized.  ``callback(tag, rec)``
    is called for every new record with tag ``"seed"`` or ``"grid"``.
    """
    cfg = cfg or OptimizerConfig()
    done = done or {}
    if seed_ratio is None:
        seed_ratio = CRITICAL_POINT["chain" if c.is_chain else "square"]
    n_layers = n_layers or default_layers(c)
    spec = build_ansatz(c, n_layers, variant, tie=tie)
    seed_rec = done.get("seed")
    if seed_rec is None:
        init = seed_parameters(spec, seed_ratio, cfg, ring)
        seed_rec = minimize(spec, build_hamiltonian(c, seed_ratio, 1.0), init, cfg)
        if callback:
            callback("seed", seed_rec)
    grid_done = {k: v for k, v in done.items() if k != "seed"}
    on_grid = (lambda rec: callback("grid", rec)) if callback else None

    grid = sorted(set(float(g) for g in grid))
    below = [g for g in grid if g <= seed_ratio][::-1]
    above = [g for g in grid if g > seed_ratio]
    out = {}
    for part in (below, above):
        if not part:
            continue
        if np.isclose(part[0], seed_ratio, rtol=0, atol=1e-12):
            out[_key(part[0])] = seed_rec
            part = part[1:]
        for rec in adiabatic_sweep(spec, part, seed_rec.params, cfg, done=grid_done, callback=on_grid) if part else []:
            out[_key(rec.J_over_h)] = rec
    return [out[_key(g)] for g in grid]
