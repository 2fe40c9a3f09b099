"""Reproducing kernel, autocorrelation and Hermite basis on the unit torus."""

from .torus_kernel import (
    INTEGER_SNAP,
    frac,
    phi,
    phi_prime,
    phi_prime_left,
    phi_prime_right,
    g,
    g_prime,
    g_second,
    g_third_left,
    g_third_right,
    hermite_basis,
    kernel_sum,
)

__all__ = [
    "INTEGER_SNAP",
    "frac",
    "phi",
    "phi_prime",
    "phi_prime_left",
    "phi_prime_right",
    "g",
    "g_prime",
    "g_second",
    "g_third_left",
    "g_third_right",
    "hermite_basis",
    "kernel_sum",
]
