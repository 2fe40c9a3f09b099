"""Shared fixtures for the SPIKE test-suite."""
import numpy as np
import pytest

from src.state import KnotState


def random_state(n: int, dim: int = 1, seed: int = 0, scale: float = 1.0, mean=None) -> KnotState:
    """Random valid state: jittered knots, zero-sum amplitudes."""
    rng = np.random.default_rng(seed)
    positions = (np.arange(n) + 0.8 * rng.random(n) - 0.4) / n
    positions = np.sort(positions - np.floor(positions))
    amplitudes = scale * rng.normal(size=(n, dim)) / n
    amplitudes -= amplitudes.mean(axis=0, keepdims=True)
    if mean is None:
        mean = rng.normal(size=dim)
    return KnotState(positions=positions, amplitudes=amplitudes, mean=mean)


@pytest.fixture
def make_state():
    """Factory fixture returning ``random_state``."""
    return random_state


@pytest.fixture
def jump_state() -> KnotState:
    """Two kernels a = 10 at -0.02 and -10 at +0.02."""
    return KnotState(positions=[0.02, 0.98], amplitudes=[[-10.0], [10.0]], mean=[0.0])
