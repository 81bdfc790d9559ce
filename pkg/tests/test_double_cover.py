import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from gcover.cartan import boundary_margin
from gcover.double_cover import (CoverElement, identity, inverse, lift, lift_generator, migrate_reference,
                                 migration_phase, multiply, repair_reference)
from gcover.errors import InvalidTarget, InvariantViolation, ReferenceMismatch
from gcover.phase_space import random_generator, standard_kahler

from helpers import Z2, t_phi

seeds = st.integers(0, 2**31 - 1)
stats = st.sampled_from(["boson", "fermion"])


def _element(n, s, seed, scale=0.4, sheet=1):
    kah = standard_kahler(n, s)
    return lift(expm(scale * random_generator(n, s, seed=seed).k), sheet, kah)


def test_identity_and_center():
    kah = standard_kahler(1, "boson")
    e, z = identity(kah), identity(kah, -1)
    assert e.psi == 1 and z.psi == -1
    assert np.isclose(multiply(z, z).psi, 1)
    assert np.isclose(inverse(z).psi, -1)


def test_lift_u1():
    kah = standard_kahler(1, "boson")
    for tau in (-2.0, 0.4, 3.0):
        assert np.isclose(lift(expm(tau * Z2), 1, kah).psi, np.exp(0.5j * tau))
    with pytest.raises(InvariantViolation):
        lift(np.eye(2), 0, kah)


def test_invariant_enforced():
    kah = standard_kahler(1, "boson")
    with pytest.raises(InvariantViolation):
        CoverElement(np.eye(2), 1j, kah)


@given(st.integers(1, 3), stats, seeds, seeds)
def test_center_and_projection(n, s, s1, s2):
    a, b = _element(n, s, s1), _element(n, s, s2)
    z = identity(a.reference, -1)
    assert np.isclose(multiply(a, z).psi, -a.psi)
    assert np.isclose(multiply(z, a).psi, -a.psi)
    try:
        ab = multiply(a, b)
    except Exception:
        return
    assert np.allclose(ab.m, a.m @ b.m, atol=1e-10)


@given(st.integers(1, 3), stats, seeds)
def test_inverse_round_trip(n, s, seed):
    a = _element(n, s, seed)
    e = multiply(a, inverse(a))
    assert np.allclose(e.m, np.eye(2 * n), atol=1e-10)
    assert abs(e.psi - 1) < 1e-9


@given(st.integers(1, 3), stats, seeds, seeds, seeds)
def test_associativity(n, s, s1, s2, s3):
    a, b, c = (_element(n, s, x, scale=0.3) for x in (s1, s2, s3))
    try:
        left = multiply(multiply(a, b), c)
        right = multiply(a, multiply(b, c))
    except Exception:
        return
    assert abs(left.psi - right.psi) < 1e-9


def test_boson_fourfold_rotation():
    kah = standard_kahler(1, "boson")
    g = lift(expm(np.pi / 2 * Z2), 1, kah)
    acc = identity(kah)
    for _ in range(4):
        acc = multiply(acc, g)
    assert abs(acc.psi + 1) < 1e-9
    for _ in range(4):
        acc = multiply(acc, g)
    assert abs(acc.psi - 1) < 1e-9


def test_lift_generator_follows_path():
    kah = standard_kahler(1, "boson")
    assert abs(lift_generator(2 * np.pi * Z2, kah).psi + 1) < 1e-9
    assert abs(lift_generator(4 * np.pi * Z2, kah).psi - 1) < 1e-9


def test_reference_mismatch():
    kah = standard_kahler(1, "boson")
    s = expm(np.diag([0.2, -0.2]))
    other = kah.with_j(s @ kah.j @ np.linalg.inv(s))
    with pytest.raises(ReferenceMismatch):
        multiply(identity(kah), identity(other))


def _nearby_reference(kah, seed, size=0.3):
    g = expm(size * random_generator(kah.n_modes, kah.statistics, seed=seed).k)
    return kah.with_j(g @ kah.j @ np.linalg.inv(g))


@given(st.integers(1, 3), stats, seeds)
def test_migration_round_trip(n, s, seed):
    a = _element(n, s, seed)
    new = _nearby_reference(a.reference, seed + 1)
    try:
        there = migrate_reference(a, new)
        back = migrate_reference(there, a.reference)
    except Exception:
        return
    assert abs(back.psi - a.psi) < 1e-9
    assert migrate_reference(a, a.reference) is a


@given(stats, seeds)
def test_migration_orders_agree(s, seed):
    a = _element(2, s, seed)
    new = _nearby_reference(a.reference, seed + 7)
    try:
        left = migration_phase(a.m, a.reference, new, "left")
        right = migration_phase(a.m, a.reference, new, "right")
    except Exception:
        return
    assert abs(left - right) < 1e-9


def test_invalid_target():
    kah = standard_kahler(1, "boson")
    with pytest.raises(InvalidTarget):
        migrate_reference(identity(kah), -kah.j)


def test_repair_interior_is_identity():
    kah = standard_kahler(2, "fermion")
    a = _element(2, "fermion", 3, scale=0.2)
    ref, moved = repair_reference([a], seed=0)
    assert ref.same_reference(kah)
    assert moved[0].psi == a.psi


def test_repair_boundary_element():
    kah = standard_kahler(2, "fermion")
    # lift at a reference where T_phi is interior, then ask for a repair near the standard one
    anchor = _nearby_reference(kah, 11, size=0.2)
    el = lift(t_phi(0.7), 1, anchor)
    ref, moved = repair_reference([el], seed=1, kahler=kah)
    assert boundary_margin(moved[0].m, ref) > 1e-6


def test_repair_batch_near_boundary():
    kah = standard_kahler(2, "fermion")
    rng = np.random.default_rng(4)
    els = []
    for i in range(10):
        k = random_generator(2, "fermion", seed=int(rng.integers(2**31)), scale=1e-3).k
        m = t_phi(rng.uniform(0, 2 * np.pi)) @ expm(k)
        els.append(lift(m, 1, _nearby_reference(kah, 100 + i, size=0.2)))
    for el in els:
        ref, moved = repair_reference([el], seed=2, kahler=kah)
        assert boundary_margin(moved[0].m, ref) > 1e-6


def test_json_round_trip():
    a = _element(2, "boson", 5)
    b = CoverElement.from_dict(a.to_dict())
    assert np.allclose(b.m, a.m) and b.psi == a.psi
