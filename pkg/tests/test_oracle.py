"""Grid oracle against closed forms and the solver."""

from __future__ import annotations

import numpy as np
import pytest

from qsd import UnsupportedDimension, helstrom, make_ensemble, oracle_grid, solve
from qsd.rand import random_ensemble, random_planar_qubit_ensemble

from .conftest import projector


def test_orthogonal_pair():
    ensemble = make_ensemble([0.5, 0.5], [projector(1, 0), projector(0, 1)])
    assert oracle_grid(ensemble) == pytest.approx(1.0, abs=1e-3)


def test_zero_plus(zero_plus_ensemble):
    assert oracle_grid(zero_plus_ensemble) == pytest.approx(0.8536, abs=1e-3)


def test_trine(trine_ensemble):
    assert oracle_grid(trine_ensemble) == pytest.approx(0.6667, abs=1e-3)


def test_rejects_qutrits():
    rng = np.random.default_rng(40)
    with pytest.raises(UnsupportedDimension):
        oracle_grid(random_ensemble(rng, 2, 3))


def test_rejects_more_than_three_states():
    rng = np.random.default_rng(41)
    with pytest.raises(UnsupportedDimension):
        oracle_grid(random_ensemble(rng, 4, 2))


def test_two_state_tracks_helstrom():
    rng = np.random.default_rng(42)
    for _ in range(5):
        ensemble = random_ensemble(rng, 2, 2, pure=bool(rng.integers(2)))
        value = oracle_grid(ensemble)
        target = helstrom(ensemble).value
        assert value <= target + 1e-9
        assert abs(value - target) <= 1e-3


def test_three_state_planar_tracks_solver():
    rng = np.random.default_rng(43)
    for _ in range(3):
        ensemble = random_planar_qubit_ensemble(rng, 3)
        value = oracle_grid(ensemble)
        result = solve(ensemble)
        assert result.converged
        assert value <= result.guess_probability + 1e-9
        assert abs(value - result.guess_probability) <= 1e-3
