"""Gauss-Legendre rules mapped to the unit interval and composite versions over knot grids."""
from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on [0, 1].

    Args:
        order: Number of nodes (exact for polynomials of degree 2*order - 1)

    Returns:
        tuple: (nodes, weights), each of shape (order,)
    """
    if order < 1:
        raise ValueError(f"Quadrature order must be positive, got {order}")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def composite_points(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    """
    Quadrature points and weights of a composite rule with one panel per interval.

    Args:
        edges: Increasing panel boundaries, shape (P + 1,)
        order: Nodes per panel

    Returns:
        tuple: (points, weights), each of shape (P, order)
    """
    nodes, weights = gauss_legendre_unit(order)
    left = edges[:-1, None]
    width = np.diff(edges)[:, None]
    return left + width * nodes[None, :], width * weights[None, :]


def composite_integral(func: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, order: int = 4) -> np.ndarray:
    """
    Integrate a vectorised function over [edges[0], edges[-1]] panel by panel.

    The integrand may return shape (M,) or (M, d); the result is a scalar or a
    d-vector accordingly.
    """
    points, weights = composite_points(edges, order)
    values = np.asarray(func(points.ravel()), dtype=float)
    if values.ndim == 1:
        return weights.ravel() @ values
    return weights.ravel() @ values.reshape(points.size, -1)
