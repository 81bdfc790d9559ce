import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from gcover.cartan import boundary_margin, cartan_decompose, is_interior, lie_split, sqrt_relative
from gcover.errors import FermionBoundary
from gcover.phase_space import random_generator, relative_complex_structure, standard_kahler

from helpers import t_phi

stats = st.sampled_from(["boson", "fermion"])
seeds = st.integers(0, 2**31 - 1)


@given(st.integers(1, 4), stats, seeds)
def test_cartan_invariants(n, s, seed):
    kah = standard_kahler(n, s)
    j = kah.j
    m = expm(0.5 * random_generator(n, s, seed=seed).k)
    f = cartan_decompose(m, kah)
    assert np.allclose(f.t @ f.u, m, atol=1e-9)
    assert np.allclose(f.u @ j, j @ f.u, atol=1e-9)
    assert np.allclose(f.k_plus @ j, -j @ f.k_plus, atol=1e-9)
    assert np.allclose(expm(f.k_plus), f.t, atol=1e-9)
    assert np.allclose(f.t @ f.t, f.delta, atol=1e-9)


def test_boson_always_interior():
    kah = standard_kahler(1, "boson")
    ok, margin = is_interior(expm(np.array([[2.0, 0.0], [0.0, -2.0]])), kah)
    assert ok and margin > 0


def test_fermion_boundary_detected():
    kah = standard_kahler(2, "fermion")
    assert boundary_margin(t_phi(1.1), kah) < 1e-12
    assert not is_interior(t_phi(1.1), kah)[0]
    with pytest.raises(FermionBoundary):
        cartan_decompose(t_phi(1.1), kah)


@given(st.integers(1, 3), stats, seeds)
def test_lie_split(n, s, seed):
    kah = standard_kahler(n, s)
    k = random_generator(n, s, seed=seed).k
    km, kp = lie_split(k, kah)
    assert np.allclose(km + kp, k)
    assert np.allclose(km @ kah.j, kah.j @ km)
    assert np.allclose(kp @ kah.j, -kah.j @ kp)


@given(st.integers(1, 3), stats, seeds)
def test_sqrt_relative_transports_j(n, s, seed):
    kah = standard_kahler(n, s)
    m = expm(0.4 * random_generator(n, s, seed=seed).k)
    jt = m @ kah.j @ np.linalg.inv(m)
    t, t_inv = sqrt_relative(jt, kah)
    assert np.allclose(t @ kah.j @ t_inv, jt, atol=1e-9)
    assert np.allclose(t @ t, relative_complex_structure(m, kah), atol=1e-9)
