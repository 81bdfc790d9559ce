import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from gcover import case_study as cs
from gcover.circle_cocycle import circle
from gcover.errors import InvariantViolation
from gcover.expectation import (expectation, expectation_modulus, expectation_squared, naive_phase, phase_trajectory,
                                wrap)
from gcover.oracle import exact_expectation
from gcover.phase_space import random_generator, standard_kahler

from helpers import K3, Z2, boson_samples

seeds = st.integers(0, 2**31 - 1)


def test_wrap():
    assert wrap(np.pi) == np.pi
    assert wrap(-np.pi) == np.pi
    assert np.isclose(wrap(3 * np.pi / 2), -np.pi / 2)


@pytest.mark.parametrize("s", ["boson", "fermion"])
def test_identity(s):
    kah = standard_kahler(2, s)
    ev = expectation(np.zeros((4, 4)), kah)
    assert np.isclose(ev.value, 1.0) and ev.phase == 0.0
    assert np.isclose(expectation_squared(np.eye(4), kah), 1.0)


def test_boson_examples():
    kah = standard_kahler(1, "boson")
    ev = expectation(np.pi * Z2, kah)
    assert np.isclose(ev.modulus, 1.0) and np.isclose(ev.phase, -np.pi / 2)
    assert abs(expectation(1.3 * cs.X_GEN, kah).phase) < 1e-12


@pytest.mark.parametrize("t", [0.3, 1.0, 2.5])
def test_nilpotent_against_oracle(t):
    kah = standard_kahler(1, "boson")
    lib = expectation(t * K3, kah).value
    assert abs(lib - exact_expectation(t * K3, kah, cutoff=120)) < 1e-5


@given(st.integers(1, 4), st.sampled_from(["boson", "fermion"]), seeds)
def test_modulus_consistent_with_squared(n, s, seed):
    kah = standard_kahler(n, s)
    m = expm(0.7 * random_generator(n, s, seed=seed).k)
    assert np.isclose(expectation_modulus(m, kah), np.sqrt(abs(expectation_squared(m, kah))), rtol=1e-8, atol=1e-12)


@given(st.integers(1, 3), st.sampled_from(["boson", "fermion"]), seeds)
def test_phase_squares_to_squared(n, s, seed):
    kah = standard_kahler(n, s)
    k = random_generator(n, s, seed=seed).k
    ev = expectation(k, kah)
    if ev.defined and ev.modulus > 1e-6:
        assert abs(ev.value ** 2 - ev.squared) < 1e-8 * max(1.0, abs(ev.squared))


@given(st.integers(1, 3), st.sampled_from(["boson", "fermion"]), seeds)
def test_squared_phase_is_circle(n, s, seed):
    kah = standard_kahler(n, s)
    m = expm(0.5 * random_generator(n, s, seed=seed).k)
    sq = expectation_squared(m, kah)
    phi = circle(m, kah)
    assert np.isclose(sq / abs(sq), np.conj(phi) if kah.is_boson else phi)


@given(st.integers(1, 3), st.sampled_from(["boson", "fermion"]), st.floats(-3, 3), seeds)
def test_commuting_generator_is_eigenstate(n, s, scale, seed):
    # K commuting with J: |J> is an eigenstate and the phase is linear in tr(JK)
    kah = standard_kahler(n, s)
    k = random_generator(n, s, seed=seed, scale=0.3).k
    k = scale * (k - kah.j @ k @ kah.j) / 2
    sign = 1 if kah.is_boson else -1
    ev = expectation(k, kah)
    assert np.isclose(ev.modulus, 1.0)
    assert abs(wrap(ev.phase - sign * 0.25 * np.trace(kah.j @ k))) < 1e-9


def test_fermion_two_mode_closed_form():
    kah = standard_kahler(2, "fermion")
    for n1, n3 in [(0.3, -1.2), (2.0, 0.5), (-1.0, 2.7)]:
        assert abs(expectation(cs.fermion_generator(n1, n3), kah).value - cs.fermion_closed(n1, n3)) < 1e-10


def test_undefined_phase_at_zero_modulus():
    kah = standard_kahler(2, "fermion")
    ev = expectation(cs.fermion_generator(np.pi / 2, 0.0), kah)
    assert not ev.defined and ev.value == 0


def test_dimension_mismatch():
    with pytest.raises(InvariantViolation):
        expectation(np.zeros((4, 4)), standard_kahler(1, "boson"))


def test_trajectory_rows_and_naive_range():
    kah = standard_kahler(1, "boson")
    rows = phase_trajectory(Z2, kah, np.linspace(0, 8, 81))
    assert rows[0]["phase_wrapped"] == 0.0
    un = np.array([r["phase_unwrapped"] for r in rows])
    assert np.allclose(un, -0.5 * np.linspace(0, 8, 81), atol=1e-9)
    naive = np.array([r["phase_naive"] for r in rows])
    assert np.all(np.abs(naive) <= np.pi / 2 + 1e-12)
    with pytest.raises(InvariantViolation):
        phase_trajectory(Z2, kah, [1.0, 0.0])


def test_trajectory_parallel_matches_serial():
    kah = standard_kahler(2, "boson")
    k = boson_samples(2, 1, seed=5)[0]
    grid = np.linspace(0, 2, 9)
    assert phase_trajectory(k, kah, grid, workers=4) == phase_trajectory(k, kah, grid)


def test_naive_phase_clamped():
    kah = standard_kahler(1, "boson")
    assert abs(naive_phase(expm(3 * Z2), kah)) <= np.pi / 2
