"""Composite Gauss-Legendre quadrature over piecewise-smooth integrands."""

import logging
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

logger = logging.getLogger("ritz-bounds.quadrature")

DEFAULT_ORDER = 16
MAX_LEVEL = 14


@lru_cache(maxsize=8)
def _rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(order)


def _panel_sum(
    f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int, order: int
) -> tuple[float, float]:
    nodes, weights = _rule(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    values = np.asarray(f(x), dtype=float)
    return float(np.dot(w, values)), float(np.dot(w, np.abs(values)))


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    tol: float = 1e-10,
    order: int = DEFAULT_ORDER,
) -> float:
    """
    Integrate a vectorized function over consecutive smooth pieces.

    Each piece between neighbouring breakpoints is covered by equal panels
    of the Gauss-Legendre rule; the panel count doubles until two successive
    values differ by less than tol relative to the integral of |f|.

    Args:
        f: Vectorized integrand
        breakpoints: Increasing points; f is smooth between neighbours
        tol: Relative refinement tolerance
        order: Gauss-Legendre points per panel

    Returns:
        The integral over [breakpoints[0], breakpoints[-1]]
    """
    points = [float(p) for p in breakpoints]
    if len(points) < 2 or any(b <= a for a, b in zip(points, points[1:])):
        raise ValueError(f"breakpoints must be strictly increasing, got {points}")

    total = 0.0
    for a, b in zip(points, points[1:]):
        panels = 1
        value, magnitude = _panel_sum(f, a, b, panels, order)
        for _ in range(MAX_LEVEL):
            panels *= 2
            refined, magnitude = _panel_sum(f, a, b, panels, order)
            converged = abs(refined - value) <= tol * max(magnitude, np.finfo(float).tiny)
            value = refined
            if converged:
                break
        else:
            logger.warning(f"Quadrature on [{a}, {b}] stopped at {panels} panels before reaching tol={tol}")
        total += value
    return total
