"""High-field perturbation series of the ground-state energy per site.

Each rectangle's energy is expanded in powers of J (h = 1) by
Rayleigh-Schroedinger perturbation theory about the polarized state.  The
reduced contribution of a ``w x h`` rectangle starts at order
``J^(2 (w + h - 2))``, so the rectangular expansion over all rectangles with
``w + h - 2 <= K`` gives the lattice series exactly through ``J^(2K)``.
"""

from __future__ import annotations

from typing import Dict, List, Tuple

import numpy as np
from scipy.interpolate import pade

from . import kernels
from .lattice import Cluster, ExpansionPlan, count_embeddings, embedding_weight
from .nlce import reduced_energies


def cluster_series(c: Cluster, order: int) -> np.ndarray:
    """Coefficients ``a[n]`` of ``E_c(J) = sum_n a[n] J^n`` for ``n <= order``.

    Uses Wigner's 2n+1 rule, so only wavefunction corrections up to
    ``order // 2`` are stored.
    """
    n = c.n_sites
    if n == 1:
        out = np.zeros(order + 1)
        out[0] = -1.0
        return out
    # V conserves spin-flip parity, so work on the even sector: the last
    # spin is fixed by the others, and a bond touching it acts as one X.
    last = n - 1
    k = np.arange(1 << last)
    pop = np.zeros(k.size)
    for q in range(last):
        pop += (k >> q) & 1
    pop += pop % 2
    e0 = -float(n)
    denom = -2.0 * pop  # E0 - H0 on each basis state
    denom[0] = np.inf

    def apply_v(x):
        out = np.zeros_like(x)
        for a, b in c.bonds:
            if last in (a, b):
                q = a + b - last
                view_o = kernels.one_qubit_view(out, last, q)
                view_x = kernels.one_qubit_view(x, last, q)
                view_o[:, 0, :] -= view_x[:, 1, :]
                view_o[:, 1, :] -= view_x[:, 0, :]
            else:
                kernels.add_xx(out, x, a, b, -1.0)
        return out

    kmax = order // 2
    psi = [np.zeros(k.size)]
    psi[0][0] = 1.0
    del k, pop
    M = np.zeros((kmax + 1, kmax + 1))
    E = [e0]
    for m in range(1, kmax + 2):
        v = apply_v(psi[m - 1])
        M[:m, m - 1] = [p @ v for p in psi]
        if m > kmax:
            break
        E.append(v[0])  # <0|V|psi^(m-1)>
        for j in range(1, m + 1):
            v -= E[j] * psi[m - j]
        v /= denom
        v[0] = 0.0
        psi.append(v)
    M = np.triu(M) + np.triu(M, 1).T
    S = np.array([[psi[i] @ psi[j] for j in range(kmax + 1)] for i in range(kmax + 1)])

    coeff = np.zeros(order + 1)
    coeff[0] = e0
    for p in range(1, order + 1):
        if p <= kmax:
            coeff[p] = E[p]
            continue
        # 2n+1 rule: E^(p) from psi^(n), psi^(p-1-n) with n = p // 2
        hi = p // 2
        lo = p - 1 - hi
        val = M[lo, hi]
        for i in range(1, hi + 1):
            for j in range(1, lo + 1 if lo < hi else hi + 1):
                if 0 < p - i - j:
                    val -= coeff[p - i - j] * S[i, j]
        coeff[p] = val
    return coeff


def series_clusters(lattice: str, K: int) -> List[Cluster]:
    """Rectangles needed for a series exact through ``J^(2K)``."""
    out = []
    for lx in range(1, K + 2):
        for ly in range(lx, K + 2):
            if lx + ly - 2 <= K and (lattice == "square" or lx == 1):
                out.append(Cluster(lx, ly))
    out.sort(key=lambda c: (c.n_sites, c.lx))
    return out


def lattice_series(lattice: str, K: int) -> np.ndarray:
    """Per-site energy coefficients through ``J^(2K)``."""
    clusters = series_clusters(lattice, K)
    plan = ExpansionPlan(
        lattice,
        max(c.n_sites for c in clusters),
        clusters,
        {(a.id, b.id): count_embeddings(a, b) for a in clusters for b in clusters if count_embeddings(a, b)},
        {c.id: embedding_weight(lattice, c) for c in clusters},
    )
    energies = {c.id: cluster_series(c, 2 * K) for c in clusters}
    red = reduced_energies(plan, energies)
    total = sum(plan.weights[c.id] * red[c.id] for c in clusters)
    return total


def pade_table(coeffs: np.ndarray, J: float, min_order: int = 4) -> Dict[Tuple[int, int], float]:
    """Pade approximants in ``u = J^2`` evaluated at ``J``.

    Approximants with a pole in ``[0, 1.05 J^2]`` are dropped.
    """
    u_coeffs = np.asarray(coeffs)[::2]
    u = J * J
    out = {}
    total = len(u_coeffs) - 1
    for m in range(1, total):
        n = total - m
        if n + m < min_order:
            continue
        p, q = pade(u_coeffs, m, n)
        poles = q.roots
        if any(abs(r.imag) < 1e-9 and 0 <= r.real <= 1.05 * u for r in np.atleast_1d(poles)):
            continue
        out[(n, m)] = float(p(u) / q(u))
    return out


def pade_estimate(coeffs: np.ndarray, J: float, spread: int = 2) -> Tuple[float, float]:
    """Mean and standard deviation of the near-diagonal Pade approximants."""
    table = pade_table(coeffs, J)
    vals = [v for (n, m), v in table.items() if abs(n - m) <= spread]
    if not vals:
        raise ValueError("no usable Pade approximant")
    return float(np.mean(vals)), float(np.std(vals))


def partial_sum(coeffs: np.ndarray, J: float) -> float:
    return float(sum(a * J**i for i, a in enumerate(coeffs)))
