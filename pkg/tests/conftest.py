"""Shared builders for the test suite.

Random models are always drawn from an explicitly seeded generator so a
failing case can be replayed from the test id alone.
"""

from __future__ import annotations

import numpy as np
import pytest

from netloop.core import NetworkModel, PlantModel


def make_plant(rng: np.random.Generator, *, n: int = 2, m: int | None = None,
               alpha: int = 1, beta: int = 1, index: int = 0,
               stable: bool | None = None) -> PlantModel:
    """A generic plant with full-rank weights and PSD noise covariances."""
    m = n if m is None else m
    A = rng.uniform(-1.2, 1.2, (n, n))
    if stable is True:
        A *= 0.6 / max(1e-9, np.abs(np.linalg.eigvals(A)).max())
    elif stable is False:
        A *= 1.3 / max(1e-9, np.abs(np.linalg.eigvals(A)).max())
    B = rng.uniform(-1.0, 1.0, (n, m)) + np.eye(n, m)
    root = rng.uniform(-0.7, 0.7, (n, n))
    sigma_w = root @ root.T + 0.3 * np.eye(n)
    return PlantModel(A=A, B=B, Q1=np.eye(n), Q2=np.eye(n), R=np.eye(m),
                      sigma_w=sigma_w, sigma_x0=0.5 * np.eye(n),
                      mean_x0=np.zeros(n), alpha=alpha, beta=beta, index=index)


def make_network(max_delay: int, *, capacities=None) -> NetworkModel:
    """Strictly decreasing integer prices, unit capacities by default."""
    prices = np.arange(max_delay + 1, 0, -1, dtype=float) * 2.0 - 1.0
    if capacities is None:
        capacities = [1] * (max_delay + 1)
    return NetworkModel(max_delay=max_delay, prices=prices,
                        capacities=capacities)


@pytest.fixture
def rng():
    return np.random.default_rng(20260816)
