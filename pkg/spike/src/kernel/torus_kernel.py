"""
Closed-form kernel functions on the unit torus.

phi is the reproducing kernel of H^1(T)/R, g its autocorrelation. Every
function accepts scalars or numpy arrays and reduces its argument modulo 1
through ``frac`` first.
"""
import numpy as np

# Offsets closer than this to an integer are treated as the integer itself.
INTEGER_SNAP = 1e-14


def frac(x):
    """Fractional part in [0, 1), with near-integers snapped to 0."""
    x = np.asarray(x, dtype=float)
    y = x - np.floor(x)
    y = np.where((y < INTEGER_SNAP) | (y > 1.0 - INTEGER_SNAP), 0.0, y)
    return y[()] if y.ndim == 0 else y


def phi(x):
    """phi(x) = {x}^2/2 - {x}/2 + 1/12."""
    y = frac(x)
    return 0.5 * y * y - 0.5 * y + 1.0 / 12.0


def phi_prime(x):
    """
    phi'(x) = {x} - 1/2 away from the jump points.

    Raises:
        ValueError: If any offset sits on an integer; use phi_prime_right or
            phi_prime_left there.
    """
    y = frac(x)
    if np.any(y == 0.0):
        raise ValueError("phi_prime is discontinuous at integers, request a side explicitly")
    return y - 0.5


def phi_prime_right(x):
    """Right limit phi'(x+); equals -1/2 at integers."""
    return frac(x) - 0.5


def phi_prime_left(x):
    """Left limit phi'(x-); equals +1/2 at integers."""
    y = frac(x)
    return np.where(y == 0.0, 0.5, y - 0.5)[()]


def g(x):
    """Autocorrelation of phi: -{x}^4/24 + {x}^3/12 - {x}^2/24 + 1/720."""
    y = frac(x)
    return -(y ** 2) * (1.0 - y) ** 2 / 24.0 + 1.0 / 720.0


def g_prime(x):
    y = frac(x)
    return -(y ** 3) / 6.0 + y * y / 4.0 - y / 12.0


def g_second(x):
    """g'' is continuous on the torus, so no side needs to be chosen."""
    y = frac(x)
    return -0.5 * y * y + 0.5 * y - 1.0 / 12.0


def g_third_right(x):
    return 0.5 - frac(x)


def g_third_left(x):
    y = frac(x)
    return np.where(y == 0.0, -0.5, 0.5 - y)[()]


def hermite_basis(s):
    """
    Cubic Hermite basis on the unit interval.

    Args:
        s: Local coordinate(s) in [0, 1]

    Returns:
        tuple: (p00, p10, p01, p11)

    Raises:
        ValueError: If s leaves [0, 1]
    """
    s = np.asarray(s, dtype=float)
    if np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("Hermite basis is defined on [0, 1] only")
    s2 = s * s
    s3 = s2 * s
    p00 = 2.0 * s3 - 3.0 * s2 + 1.0
    p10 = s3 - 2.0 * s2 + s
    p01 = -2.0 * s3 + 3.0 * s2
    p11 = s3 - s2
    return p00[()], p10[()], p01[()], p11[()]


def kernel_sum(x, positions: np.ndarray, amplitudes: np.ndarray) -> np.ndarray:
    """
    Direct evaluation of sum_j a_j phi(x - x_j).

    Args:
        x: Evaluation points, shape (M,)
        positions: Knot positions, shape (N,)
        amplitudes: Amplitudes, shape (N, d)

    Returns:
        np.ndarray: Values of shape (M, d)
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    weights = phi(x[:, None] - np.asarray(positions)[None, :])
    return weights @ np.asarray(amplitudes, dtype=float).reshape(len(positions), -1)
