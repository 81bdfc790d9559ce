"""Generalized Wick theorem for <J| xi^{a_1} ... xi^{a_d} U(M, psi) |J>.

With the Cartan factor T = exp(K_+) of M and L = tanh(K_+), the moment equals
<J|U|J> times a pairing sum over the effective covariance
C~ = R C R^T, where C = (G + i Omega)/2 and R = 1 + P_+ L P_-, P_+- = (1 +- iJ)/2
(|J> is annihilated by P_+ xi).
Each perfect matching contributes once; fermionic matchings carry the sign
(-1)^(number of crossings).
"""

from dataclasses import dataclass

import numpy as np

from .cartan import cartan_decompose
from .errors import IndexOutOfRange
from .expectation import amplitude

MAX_ORDER = 12


@dataclass(frozen=True)
class WickContext:
    r_matrix: np.ndarray
    c_tilde: np.ndarray
    base_amplitude: complex
    fermion: bool


def two_point(kahler):
    """<J| xi^a xi^b |J> = (G^{ab} + i Omega^{ab})/2."""
    return 0.5 * (kahler.g_metric + 1j * kahler.omega)


def wick_context(cover):
    kah = cover.reference
    cf = cartan_decompose(cover.m, kah)
    n2 = kah.dim
    one = np.eye(n2)
    p_plus = (one + 1j * kah.j) / 2
    p_minus = (one - 1j * kah.j) / 2
    # tanh K_+ = (T - T^-1)(T + T^-1)^-1 with T = exp(K_+)
    lmat = np.linalg.solve((cf.t + cf.t_inv).T, (cf.t - cf.t_inv).T).T
    # the ket is annihilated by P_+ xi, so the creation part of L sits between P_+ and P_-
    r = one + p_plus @ lmat @ p_minus
    c = r @ two_point(kah) @ r.T
    return WickContext(r_matrix=r, c_tilde=c, base_amplitude=complex(amplitude(cover)), fermion=not kah.is_boson)


def matchings(items):
    """All perfect matchings of a list as lists of index pairs (first index smallest)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for m in matchings(remaining):
            yield [(first, other)] + m


def crossings(matching):
    """Number of crossing pairs (a < c < b < d) in a matching of positions."""
    n = 0
    for i, (a, b) in enumerate(matching):
        for c, d in matching[i + 1:]:
            if (a < c < b < d) or (c < a < d < b):
                n += 1
    return n


def pairing_sum(c, indices, fermion):
    """Sum over perfect matchings of prod C[a_i, a_j], with the crossing sign for fermions."""
    d = len(indices)
    if d % 2:
        return 0j
    terms = []
    for m in matchings(list(range(d))):
        val = 1.0 + 0j
        for i, j in m:
            val *= c[indices[i], indices[j]]
        if fermion and crossings(m) % 2:
            val = -val
        terms.append(val)
    return _tree_sum(terms) if terms else 1.0 + 0j


def _tree_sum(xs):
    xs = list(xs)
    while len(xs) > 1:
        xs = [xs[i] + xs[i + 1] if i + 1 < len(xs) else xs[i] for i in range(0, len(xs), 2)]
    return xs[0]


def wick_moment(indices, cover, context=None, one_based=False):
    """<J| xi^{a_1} ... xi^{a_d} U(M, psi) |J>; indices are 0-based unless one_based."""
    n2 = cover.reference.dim
    idx = [int(a) - (1 if one_based else 0) for a in indices]
    if len(idx) > MAX_ORDER:
        raise IndexOutOfRange(f"moment order {len(idx)} exceeds {MAX_ORDER}")
    for a in idx:
        if not 0 <= a < n2:
            raise IndexOutOfRange(f"index {a + (1 if one_based else 0)} outside the phase space of dimension {n2}")
    if len(idx) % 2:
        return 0j
    ctx = context or wick_context(cover)
    if not idx:
        return ctx.base_amplitude
    return ctx.base_amplitude * pairing_sum(ctx.c_tilde, idx, ctx.fermion)
