"""Gradient-based local minimizers used by the VQE loop.

Both routines take ``fun(x) -> (f, grad)`` and never accept a step that
raises ``f``.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, line_search

log = logging.getLogger(__name__)


@dataclass
class OptResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    nfev: int
    status: str

    @property
    def grad_norm(self) -> float:
        return float(np.max(np.abs(self.grad))) if self.grad.size else 0.0


def _tr_subproblem(g, B, radius):
    """Exact minimizer of g.s + s.B.s/2 over |s| <= radius (B symmetric)."""
    lam, Q = np.linalg.eigh(B)
    gq = Q.T @ g
    if lam[0] > 0:
        s = -Q @ (gq / lam)
        if np.linalg.norm(s) <= radius:
            return s

    def norm_minus_radius(sigma):
        return np.linalg.norm(gq / (lam + sigma)) - radius

    lo = max(0.0, -lam[0])
    eps = 1e-12 * max(1.0, abs(lam).max())
    if norm_minus_radius(lo + eps) < 0:
        # hard case: move to the boundary along the lowest eigenvector
        sigma = lo + eps
        s = -Q @ (gq / (lam + sigma))
        tau = np.sqrt(max(radius**2 - s @ s, 0.0))
        return s + tau * Q[:, 0]
    hi = lo + np.linalg.norm(g) / radius + eps
    while norm_minus_radius(hi) > 0:
        hi *= 2
    sigma = brentq(norm_minus_radius, lo + eps, hi, xtol=1e-14, rtol=1e-12)
    return -Q @ (gq / (lam + sigma))


def trust_region_sr1(
    fun, x0, gtol=1e-10, ftol=1e-12, max_iter=10000, radius=0.5, max_radius=4.0, patience=10
) -> OptResult:
    """Trust-region quasi-Newton method with symmetric rank-one Hessian updates."""
    x = np.array(x0, dtype=float)
    f, g = fun(x)
    n = x.size
    B = np.eye(n)
    nfev, flat = 1, 0
    status = "max_iter"
    it = 0
    for it in range(1, max_iter + 1):
        if n == 0 or np.max(np.abs(g)) <= gtol:
            status = "gtol"
            it -= 1
            break
        s = _tr_subproblem(g, B, radius)
        predicted = -(g @ s + 0.5 * s @ B @ s)
        f_new, g_new = fun(x + s)
        nfev += 1
        y = g_new - g
        r = y - B @ s
        denom = r @ s
        if abs(denom) > 1e-8 * np.linalg.norm(s) * np.linalg.norm(r):
            B += np.outer(r, r) / denom
        actual = f - f_new
        rho = actual / predicted if predicted > 0 else -1.0
        snorm = np.linalg.norm(s)
        if rho > 0.75 and snorm > 0.8 * radius:
            radius = min(2 * radius, max_radius)
        elif rho < 0.1:
            radius *= 0.5
        if f_new < f:
            flat = flat + 1 if actual <= ftol * max(1.0, abs(f)) else 0
            x, f, g = x + s, f_new, g_new
            if flat >= patience:
                status = "gtol" if np.max(np.abs(g)) <= gtol else "ftol"
                break
        if radius < 1e-14:
            status = "stalled"
            break
    return OptResult(x, f, g, it, nfev, status)


def conjugate_gradient(fun, x0, gtol=1e-10, ftol=1e-12, max_iter=10000, patience=10) -> OptResult:
    """Polak-Ribiere+ nonlinear conjugate gradients with a strong-Wolfe line search."""
    x = np.array(x0, dtype=float)
    cache = {}

    def call(z):
        key = z.tobytes()
        if key not in cache:
            cache.clear()
            cache[key] = fun(z)
        return cache[key]

    f, g = call(x)
    d = -g
    nfev, flat, status, it = 1, 0, "max_iter", 0
    for it in range(1, max_iter + 1):
        if x.size == 0 or np.max(np.abs(g)) <= gtol:
            status, it = "gtol", it - 1
            break
        if g @ d >= 0:
            d = -g
        with warnings.catch_warnings():
            # a failed search is handled below by restarting along -g
            warnings.filterwarnings("ignore", message="The line search algorithm did not converge")
            alpha, fc, gc, f_new, _, g_new = line_search(
                lambda z: call(z)[0], lambda z: call(z)[1], x, d, g, f, c2=0.1
            )
        nfev += fc + gc
        if alpha is None or f_new is None or f_new >= f:
            if np.array_equal(d, -g):
                status = "stalled"
                break
            d = -g
            continue
        x_new = x + alpha * d
        if g_new is None:
            g_new = call(x_new)[1]
        beta = max(0.0, g_new @ (g_new - g) / (g @ g))
        flat = flat + 1 if f - f_new <= ftol * max(1.0, abs(f)) else 0
        x, f, g = x_new, f_new, g_new
        d = -g + beta * d
        if it % max(x.size, 1) == 0:
            d = -g
        if flat >= patience:
            status = "gtol" if np.max(np.abs(g)) <= gtol else "ftol"
            break
    return OptResult(x, f, g, it, nfev, status)
