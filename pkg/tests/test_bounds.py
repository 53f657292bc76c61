"""Cyclic lower bound and its ordering optimization."""

from __future__ import annotations

import numpy as np
import pytest

from qsd import (
    BadPermutation,
    TooLarge,
    best_cyclic_bound,
    helstrom,
    lower_bound,
    make_ensemble,
    solve,
)
from qsd.rand import random_ensemble

from .conftest import projector

TRINE_BOUND = (1.0 + 1.5 * (np.sqrt(3) / 3)) / 3  # pair norms sqrt(3)/3 each


def test_identical_states_give_one_over_n():
    rho = np.eye(2) / 2
    for n in (2, 4):
        ensemble = make_ensemble([1 / n] * n, [rho] * n)
        report = lower_bound(ensemble)
        assert report.lower_bound == pytest.approx(1 / n, abs=1e-12)
        assert all(t == pytest.approx(0.0, abs=1e-12) for t in report.pair_terms)


def test_two_state_bound_equals_helstrom(zero_plus_ensemble):
    report = lower_bound(zero_plus_ensemble)
    assert report.lower_bound == pytest.approx(0.8535533905932737, abs=1e-12)
    assert report.lower_bound == pytest.approx(helstrom(zero_plus_ensemble).value, abs=1e-12)


def test_trine_bound_value(trine_ensemble):
    report = lower_bound(trine_ensemble)
    assert TRINE_BOUND == pytest.approx(0.6220084679281462, abs=1e-15)
    assert report.lower_bound == pytest.approx(TRINE_BOUND, abs=1e-12)
    np.testing.assert_allclose(report.pair_terms, [np.sqrt(3) / 3] * 3, atol=1e-12)


def test_report_is_self_consistent(trine_ensemble):
    report = lower_bound(trine_ensemble)
    n = len(report.pair_terms)
    assert report.lower_bound == (1.0 + 0.5 * sum(report.pair_terms)) / n
    assert all(0.0 <= t <= 2.0 for t in report.pair_terms)


def test_bad_permutation(trine_ensemble):
    with pytest.raises(BadPermutation):
        lower_bound(trine_ensemble, ordering=[0, 1, 1])


def test_explicit_ordering_changes_pairing():
    rng = np.random.default_rng(60)
    ensemble = random_ensemble(rng, 4, 2)
    default = lower_bound(ensemble)
    rotated = lower_bound(ensemble, ordering=[1, 2, 3, 0])
    # same cycle, so same value
    assert rotated.lower_bound == pytest.approx(default.lower_bound, abs=1e-12)


class TestBestCyclic:
    def test_two_states_single_cycle(self, zero_plus_ensemble):
        assert best_cyclic_bound(zero_plus_ensemble).lower_bound == pytest.approx(
            lower_bound(zero_plus_ensemble).lower_bound, abs=1e-15
        )

    def test_symmetric_trine_keeps_input_order(self, trine_ensemble):
        report = best_cyclic_bound(trine_ensemble)
        assert report.lower_bound == pytest.approx(TRINE_BOUND, abs=1e-12)
        assert report.ordering == (0, 1, 2)

    def test_asymmetric_four_states_beats_or_matches_input_order(self):
        ensemble = make_ensemble(
            [0.4, 0.3, 0.2, 0.1],
            [projector(1, 0), projector(1, 1), projector(0, 1), projector(1, -1)],
        )
        best = best_cyclic_bound(ensemble)
        base = lower_bound(ensemble)
        assert best.lower_bound >= base.lower_bound - 1e-15
        # exhaustive: the three distinct 4-cycles
        cycles = [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3)]
        brute = max(lower_bound(ensemble, c).lower_bound for c in cycles)
        assert best.lower_bound == pytest.approx(brute, abs=1e-15)

    def test_too_many_states(self):
        rng = np.random.default_rng(61)
        ensemble = random_ensemble(rng, 9, 2)
        with pytest.raises(TooLarge):
            best_cyclic_bound(ensemble)


def test_dominance_against_solver():
    rng = np.random.default_rng(62)
    for _ in range(30):
        n = int(rng.integers(2, 7))
        d = int(rng.choice([2, 3, 4]))
        ensemble = random_ensemble(rng, n, d, pure=bool(rng.integers(2)))
        report = lower_bound(ensemble)
        result = solve(ensemble)
        assert result.converged
        assert report.lower_bound <= result.guess_probability + 1e-9
        assert 1.0 / n - 1e-12 <= report.lower_bound <= 1.0 + 1e-12
