import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from gcover.double_cover import identity, lift, lift_generator
from gcover.errors import IndexOutOfRange
from gcover.oracle import build_fock, quad_operator
from gcover.phase_space import random_generator, standard_kahler
from gcover.wick import crossings, matchings, pairing_sum, two_point, wick_context, wick_moment

seeds = st.integers(0, 2**31 - 1)


def _double_factorial(d):
    out = 1
    for k in range(d - 1, 0, -2):
        out *= k
    return out


@pytest.mark.parametrize("d", [0, 2, 4, 6, 8])
def test_matching_count(d):
    ms = list(matchings(list(range(d))))
    assert len(ms) == _double_factorial(d)
    assert len({tuple(m) for m in ms}) == len(ms)


def test_crossings():
    assert crossings([(0, 2), (1, 3)]) == 1
    assert crossings([(0, 1), (2, 3)]) == 0
    assert crossings([(0, 3), (1, 2)]) == 0


@pytest.mark.parametrize("d", [2, 4, 6, 8])
def test_pairing_sum_against_permutation_sum(d):
    # direct sum over permutations with pi(2i-1) < pi(2i), each matching counted with multiplicity 2^(d/2) (d/2)!
    from itertools import permutations
    from math import factorial

    rng = np.random.default_rng(d)
    c = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    idx = list(range(d))
    for fermion in (False, True):
        total = 0j
        for p in permutations(range(d)):
            if any(p[2 * i] > p[2 * i + 1] for i in range(d // 2)):
                continue
            sign = 1
            if fermion:
                inv = sum(1 for i in range(d) for j in range(i + 1, d) if p[i] > p[j])
                sign = -1 if inv % 2 else 1
            term = sign
            for i in range(d // 2):
                term = term * c[p[2 * i], p[2 * i + 1]]
            total += term
        total /= factorial(d // 2)
        assert np.isclose(pairing_sum(c, idx, fermion), total)


@pytest.mark.parametrize("s", ["boson", "fermion"])
def test_identity_two_point(s):
    kah = standard_kahler(2, s)
    e = identity(kah)
    ctx = wick_context(e)
    assert np.allclose(ctx.r_matrix, np.eye(4))
    assert np.allclose(ctx.c_tilde, two_point(kah))
    for a in range(4):
        for b in range(4):
            assert np.isclose(wick_moment([a, b], e), 0.5 * (kah.g_metric[a, b] + 1j * kah.omega[a, b]))


@pytest.mark.parametrize("s", ["boson", "fermion"])
def test_commuting_element_has_trivial_r(s):
    kah = standard_kahler(2, s)
    k = random_generator(2, s, seed=1).k
    k = (k - kah.j @ k @ kah.j) / 2
    ctx = wick_context(lift(expm(k), 1, kah))
    assert np.allclose(ctx.r_matrix, np.eye(4), atol=1e-10)


@given(st.sampled_from(["boson", "fermion"]), seeds, st.integers(0, 3))
def test_odd_moments_vanish(s, seed, a):
    kah = standard_kahler(2, s)
    cov = lift(expm(0.3 * random_generator(2, s, seed=seed).k), 1, kah)
    assert wick_moment([a], cov) == 0
    assert wick_moment([a, 0, 1], cov) == 0


def test_zero_order_is_amplitude():
    kah = standard_kahler(1, "boson")
    cov = lift_generator(0.4 * np.array([[0.0, 1.0], [1.0, 0.0]]), kah)
    assert wick_moment([], cov) == wick_context(cov).base_amplitude


def test_index_validation():
    kah = standard_kahler(1, "fermion")
    e = identity(kah)
    with pytest.raises(IndexOutOfRange):
        wick_moment([0, 2], e)
    with pytest.raises(IndexOutOfRange):
        wick_moment([0, 1], e, one_based=True)
    with pytest.raises(IndexOutOfRange):
        wick_moment([0] * 14, e)
    assert np.isclose(wick_moment([1, 2], e, one_based=True), wick_moment([0, 1], e))


@given(seeds, st.lists(st.integers(0, 5), min_size=2, max_size=6).filter(lambda x: len(x) % 2 == 0))
def test_fermion_oracle(seed, idx):
    kah = standard_kahler(3, "fermion")
    k = random_generator(3, "fermion", seed=seed, scale=0.6).k
    cov = lift_generator(k, kah)
    fock = build_fock(kah)
    vec = expm(quad_operator(k, fock)) @ fock.vacuum
    for a in reversed(idx):
        vec = fock.xi[a] @ vec
    assert abs(wick_moment(idx, cov) - fock.vacuum.conj() @ vec) < 1e-8


@given(seeds, st.integers(0, 5))
def test_exchange_relation(seed, pos):
    # xi^a xi^b + xi^b xi^a = G^ab (fermions) and xi^a xi^b - xi^b xi^a = i Omega^ab (bosons)
    for s in ("fermion", "boson"):
        kah = standard_kahler(2, s)
        cov = lift_generator(0.5 * random_generator(2, s, seed=seed).k, kah)
        rng = np.random.default_rng(seed)
        idx = list(rng.integers(0, 4, size=4))
        i = pos % 3
        a, b = idx[i], idx[i + 1]
        swapped = idx[:i] + [b, a] + idx[i + 2:]
        rest = idx[:i] + idx[i + 2:]
        lhs = wick_moment(idx, cov)
        if s == "fermion":
            rhs = -wick_moment(swapped, cov) + kah.g_metric[a, b] * wick_moment(rest, cov)
        else:
            rhs = wick_moment(swapped, cov) + 1j * kah.omega[a, b] * wick_moment(rest, cov)
        assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(lhs))
