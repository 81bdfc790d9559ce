import numpy as np
from hypothesis import given, strategies as st

from gcover import case_study as cs
from gcover.expectation import expectation, wrap
from gcover.phase_space import standard_kahler

coords = st.floats(-3, 3)


def test_grid():
    g = cs.grid()
    assert len(g) == 21 and g[0] == -3 and g[-1] == 3


@given(coords, coords)
def test_boson_closed_forms(a, c):
    ev = expectation(cs.boson_generator(a, c), standard_kahler(1, "boson"))
    assert abs(1 / ev.squared - cs.boson_squared_closed(a, c)) < 1e-9
    assert abs(ev.modulus ** 4 - cs.boson_modulus_closed(a, c)) < 1e-9
    assert abs(wrap(ev.phase - cs.boson_phase_closed(a, c))) < 1e-9


@given(coords, coords)
def test_boson_phase_odd_in_c(a, c):
    assert np.isclose(cs.boson_phase_closed(a, -c), -cs.boson_phase_closed(a, c))


def test_boson_axes():
    assert cs.boson_phase_closed(2.0, 0.0) == 0
    assert np.isclose(cs.boson_phase_closed(0.0, np.pi), -np.pi / 2)
    assert np.isclose(cs.boson_modulus_closed(1.0, 0.0), 1 / np.cosh(1.0) ** 2)


def test_diagonal_limit_continuous():
    for c in (0.5, 2.0):
        near = cs.boson_phase_closed(c + 1e-6, c)
        assert abs(near - cs.boson_phase_closed(c, c)) < 1e-5
        assert abs(cs.boson_squared_closed(c + 1e-6, c) - cs.boson_squared_closed(c, c)) < 1e-5


@given(coords, coords)
def test_fermion_closed_forms(n1, n3):
    kah = standard_kahler(2, "fermion")
    assert abs(expectation(cs.fermion_generator(n1, n3), kah).value - cs.fermion_closed(n1, n3)) < 1e-9
    assert abs(expectation(cs.fermion_generator(n1, n3, 0.5), kah).value - cs.fermion_closed(n1, n3, True)) < 1e-9


def test_fermion_h_antisymmetric():
    h = cs.fermion_h(np.arange(1.0, 7.0))
    assert np.allclose(h, -h.T)


def test_sweeps():
    rows = cs.boson_sweep(points=5, extent=1.0)
    assert len(rows) == 25 and set(rows[0]) == {"a", "c", "modulus", "phase", "re", "im"}
    rows = cs.fermion_sweep(points=4, extent=2.0, half=True)
    assert len(rows) == 16
    assert all(np.isclose(r["re"] + 1j * r["im"], cs.fermion_closed(r["n1"], r["n3"], True)) for r in rows)
