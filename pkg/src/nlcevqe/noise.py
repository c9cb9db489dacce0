"""Monte Carlo propagation of Gaussian cluster-energy noise through the NLCE."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from .lattice import ExpansionPlan, build_plan
from .nlce import per_site_energy, reduced_energies

SCALINGS = {
    "constant": lambda n: 1.0,
    "sqrtN": lambda n: float(np.sqrt(n)),
    "linearN": lambda n: float(n),
}
MIN_SAMPLES = 1000
CHUNK = 20000


@dataclass
class NoiseStudyConfig:
    sigma: float = 1e-3
    scaling: str = "constant"
    n_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.scaling not in SCALINGS:
            raise ValueError(f"unknown scaling mode {self.scaling!r}; choose from {sorted(SCALINGS)}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.n_samples < MIN_SAMPLES:
            raise ValueError(f"n_samples must be at least {MIN_SAMPLES}")

    def cluster_sigma(self, n_sites: int) -> float:
        return self.sigma * SCALINGS[self.scaling](n_sites)


@dataclass
class NoiseResult:
    sigma_nlce: float
    mean: float
    clean: float
    stderr: float
    n_samples: int
    seed: int


def propagate_noise(
    plan: ExpansionPlan,
    clean_energies: Mapping[str, float],
    cfg: NoiseStudyConfig,
    order: Optional[int] = None,
) -> NoiseResult:
    """Sample noisy cluster energies, run the reduction on each sample and
    report the spread of the per-site estimate.

    Samples are drawn in chunks, each from its own substream of ``cfg.seed``.
    """
    order = plan.n_max if order is None else order
    clean = per_site_energy(plan, reduced_energies(plan, clean_energies), order)
    streams = np.random.SeedSequence(cfg.seed).spawn(-(-cfg.n_samples // CHUNK))
    parts = []
    left = cfg.n_samples
    for ss in streams:
        n = min(CHUNK, left)
        left -= n
        rng = np.random.default_rng(ss)
        noisy = {
            c.id: clean_energies[c.id] + cfg.cluster_sigma(c.n_sites) * rng.standard_normal(n)
            for c in plan.clusters
        }
        parts.append(per_site_energy(plan, reduced_energies(plan, noisy), order))
    samples = np.concatenate(parts)
    std = float(np.std(samples, ddof=1))
    return NoiseResult(
        sigma_nlce=std,
        mean=float(samples.mean()),
        clean=float(clean),
        stderr=std / np.sqrt(2 * (cfg.n_samples - 1)),
        n_samples=cfg.n_samples,
        seed=cfg.seed,
    )


def linear_coefficients(plan: ExpansionPlan, order: Optional[int] = None) -> Dict[str, float]:
    """d e / d E_c for every cluster (the estimate is linear in the E_c)."""
    ids = [c.id for c in plan.clusters]
    unit = {cid: np.eye(len(ids))[i] for i, cid in enumerate(ids)}
    grad = per_site_energy(plan, reduced_energies(plan, unit), order)
    return dict(zip(ids, np.asarray(grad, dtype=float)))


def analytic_sigma(plan: ExpansionPlan, cfg: NoiseStudyConfig, order: Optional[int] = None) -> float:
    coef = linear_coefficients(plan, order)
    return float(np.sqrt(sum((coef[c.id] * cfg.cluster_sigma(c.n_sites)) ** 2 for c in plan.clusters)))


@dataclass
class NoiseRow:
    order: int
    mode: str
    sigma: float
    sigma_nlce: float
    stderr: float
    n_samples: int
    seed: int


def scaling_study(
    lattice: str,
    orders: Sequence[int],
    modes: Sequence[str] = ("constant", "linearN"),
    sigma: float = 1e-3,
    n_samples: int = 100_000,
    seed: int = 0,
    clean_energies: Optional[Mapping[str, float]] = None,
) -> List[NoiseRow]:
    """sigma_NLCE against truncation order for each scaling mode.

    The spread does not depend on the clean energies, so they default to 0.
    """
    plan = build_plan(lattice, max(orders))
    clean = clean_energies or {c.id: 0.0 for c in plan.clusters}
    rows = []
    for mode in modes:
        for order in orders:
            sub = plan.truncated(order)
            cfg = NoiseStudyConfig(sigma, mode, n_samples, seed)
            res = propagate_noise(sub, {c.id: clean[c.id] for c in sub.clusters}, cfg)
            rows.append(NoiseRow(order, mode, sigma, res.sigma_nlce, res.stderr, n_samples, seed))
    return rows


NOISE_COLUMNS = ("order", "mode", "sigma", "sigma_nlce", "n_samples", "seed")


def noise_rows_to_csv(rows: Sequence[NoiseRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(NOISE_COLUMNS)
    for r in rows:
        w.writerow([r.order, r.mode, repr(r.sigma), repr(r.sigma_nlce), r.n_samples, r.seed])
    return buf.getvalue()
