"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from qsd import make_ensemble


def ket(*amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


def projector(*amplitudes) -> np.ndarray:
    v = ket(*amplitudes)
    return np.outer(v, v.conj())


def trine_states() -> list[np.ndarray]:
    """Three symmetric pure qubit states at Bloch angles 0, 120, 240 degrees."""
    states = []
    for k in range(3):
        angle = 2.0 * np.pi * k / 3.0
        states.append(projector(np.cos(angle / 2.0), np.sin(angle / 2.0)))
    return states


@pytest.fixture(scope="session")
def trine_ensemble():
    return make_ensemble([1.0 / 3.0] * 3, trine_states())


@pytest.fixture(scope="session")
def zero_plus_ensemble():
    """Equal-prior |0> vs |+>: the standard nonorthogonal two-state instance."""
    return make_ensemble([0.5, 0.5], [projector(1, 0), projector(1, 1)])


@pytest.fixture(scope="session")
def orthogonal_ensemble():
    return make_ensemble([0.5, 0.5], [projector(1, 0), projector(0, 1)])


def orthogonal_instance(n: int, rng=None):
    """n mutually orthogonal pure states in dimension n with random priors."""
    rng = rng or np.random.default_rng(0)
    priors = rng.exponential(size=n)
    priors /= priors.sum()
    states = [np.diag([1.0 if i == x else 0.0 for i in range(n)]).astype(complex) for x in range(n)]
    return make_ensemble(priors, states)
