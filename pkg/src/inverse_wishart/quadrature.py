"""Globally adaptive Gauss-Legendre quadrature for vectorized integrands."""

from __future__ import annotations

import heapq
import math
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import NDArray

Integrand = Callable[[NDArray[np.float64]], NDArray[np.float64]]


class QuadratureError(RuntimeError):
    """Adaptive refinement hit its panel budget before reaching tolerance."""


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    x, w = np.polynomial.legendre.leggauss(order)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _panel(f: Integrand, a: float, b: float, order: int) -> float:
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    return half * float(np.dot(w, f(a + half * (x + 1.0))))


def adaptive_gl(
    f: Integrand,
    a: float,
    b: float,
    atol: float = 1e-12,
    rtol: float = 1e-12,
    order: int = 20,
    initial: int | NDArray = 8,
    max_panels: int = 20000,
) -> tuple[float, float]:
    """Integrate ``f`` over [a, b]; return ``(value, error_estimate)``.

    Panels are bisected worst-first. A panel's error is estimated by comparing
    its Gauss-Legendre value with the sum over its two halves. ``initial`` is
    either a panel count or an explicit array of breakpoints.
    """
    if a == b:
        return 0.0, 0.0
    if isinstance(initial, (int, np.integer)):
        edges = np.linspace(a, b, int(initial) + 1)
    else:
        edges = np.asarray(initial, dtype=float)
    heap: list[tuple[float, float, float, float]] = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        whole = _panel(f, lo, hi, order)
        mid = 0.5 * (lo + hi)
        halves = _panel(f, lo, mid, order) + _panel(f, mid, hi, order)
        e = abs(whole - halves)
        total += halves
        err += e
        heapq.heappush(heap, (-e, lo, hi, halves))
    panels = len(heap)
    while err > max(atol, rtol * abs(total)):
        if panels >= max_panels:
            raise QuadratureError(
                f"no convergence on [{a}, {b}] after {panels} panels; "
                f"achieved error {err:.3e}, value {total:.6e}"
            )
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        parts = []
        for plo, phi in ((lo, mid), (mid, hi)):
            pm = 0.5 * (plo + phi)
            whole = _panel(f, plo, phi, order)
            halves = _panel(f, plo, pm, order) + _panel(f, pm, phi, order)
            parts.append((abs(whole - halves), plo, phi, halves))
        total += parts[0][3] + parts[1][3] - val
        err += parts[0][0] + parts[1][0] + neg_e
        for p in parts:
            heapq.heappush(heap, (-p[0], p[1], p[2], p[3]))
        panels += 1
    # re-sum to shed the running-sum drift
    total = math.fsum(item[3] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return total, err


def integrate(f: Integrand, a: float, b: float, **kwargs) -> float:
    return adaptive_gl(f, a, b, **kwargs)[0]


def integrate_to_infinity(
    f: Integrand, a: float, scale: float = 1.0, **kwargs
) -> tuple[float, float]:
    """Integrate over [a, inf) through x = a + scale * t / (1 - t), t in [0, 1)."""

    def g(t: NDArray) -> NDArray:
        one_minus = 1.0 - t
        x = a + scale * t / one_minus
        return f(x) * (scale / one_minus**2)

    return adaptive_gl(g, 0.0, 1.0, **kwargs)


def fixed_gl(f: Integrand, edges: NDArray, order: int = 20) -> NDArray[np.float64]:
    """Per-panel integrals of ``f`` on consecutive ``edges`` (fixed order)."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    half = 0.5 * np.diff(edges)
    nodes = edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return half * (vals @ w)
