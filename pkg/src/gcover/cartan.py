"""Canonical Cartan decomposition M = T u relative to a reference J.

T = sqrt(Delta_M) and K_+ = log(Delta_M)/2 anticommute with J (T is generated
by K_+), while u = T^{-1} M commutes with J. For fermions the principal
branches are unique only away from det(1 + Delta_M) = 0.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, schur

from .errors import FermionBoundary
from .phase_space import relative_complex_structure

BOUNDARY_TOL = 1e-8


@dataclass(frozen=True)
class CartanFactors:
    t: np.ndarray
    u: np.ndarray
    k_plus: np.ndarray
    delta: np.ndarray
    t_inv: np.ndarray = None


def _metric_factor(kahler):
    # g = L L^T; Delta is self-adjoint (bosons) or orthogonal (fermions) w.r.t. g
    return cholesky(kahler.g_inv, lower=True)


def delta_function(delta, kahler, funcs):
    """Apply scalar functions to Delta through its g-normal eigendecomposition.

    Bosons: Delta is g-self-adjoint with positive spectrum (real eigh).
    Fermions: Delta is g-orthogonal, diagonalized by a complex Schur form.
    Principal branches with the cut on the negative real axis.
    """
    low = _metric_factor(kahler)
    a = low.T @ delta @ np.linalg.inv(low.T)
    out = []
    if kahler.is_boson:
        a = (a + a.T) / 2
        w, v = np.linalg.eigh(a)
        w = np.maximum(w, np.finfo(float).tiny)
        for f in funcs:
            fa = (v * f(w)) @ v.T
            out.append(np.linalg.solve(low.T, fa @ low.T))
    else:
        t, z = schur(a, output="complex")
        w = np.diag(t)
        for f in funcs:
            fa = ((z * f(w)) @ z.conj().T).real
            out.append(np.linalg.solve(low.T, fa @ low.T))
    return out


def boundary_margin(m, kahler, delta=None):
    """|det(1 + Delta_M)|; zero exactly on the fermionic quasi-boundary."""
    if delta is None:
        delta = relative_complex_structure(m, kahler)
    return float(abs(np.linalg.det(np.eye(len(delta)) + delta)))


def is_interior(m, kahler, tol=BOUNDARY_TOL):
    """(interior?, margin) with margin = |det(1 + Delta_M)|. Bosons are always interior."""
    margin = boundary_margin(np.asarray(getattr(m, "m", m), float), kahler)
    return (margin >= tol, margin)


def _sqrt(w):
    return np.sqrt(w.astype(complex)) if np.iscomplexobj(w) else np.sqrt(w)


def cartan_decompose(m, kahler, tol=BOUNDARY_TOL):
    """M = T u with T = sqrt(Delta_M), K_+ = log(Delta_M)/2, u = T^{-1} M."""
    m = np.asarray(getattr(m, "m", m), float)
    delta = relative_complex_structure(m, kahler)
    if not kahler.is_boson:
        margin = boundary_margin(m, kahler, delta)
        if margin < tol:
            raise FermionBoundary(margin)
    t, t_inv, k2 = delta_function(
        delta, kahler,
        [lambda w: _sqrt(w), lambda w: 1 / _sqrt(w), lambda w: np.log(w.astype(complex)) if np.iscomplexobj(w) else np.log(w)],
    )
    k_plus = k2 / 2
    jj = kahler.j
    # exact projections onto the J-anticommuting generator space
    k_plus = (k_plus + jj @ k_plus @ jj) / 2
    u = t_inv @ m
    return CartanFactors(t=t, u=u, k_plus=k_plus, delta=delta, t_inv=t_inv)


def lie_split(k, kahler):
    """K = K_- + K_+ with K_- = (K - JKJ)/2 commuting and K_+ = (K + JKJ)/2 anticommuting with J."""
    k = np.asarray(getattr(k, "k", k), float)
    jkj = kahler.j @ k @ kahler.j
    return (k - jkj) / 2, (k + jkj) / 2


def sqrt_relative(j_tilde, kahler, tol=BOUNDARY_TOL):
    """T = sqrt(-J~ J), so that J~ = T J T^{-1}. Returns (T, T^{-1})."""
    delta = -np.asarray(j_tilde, float) @ kahler.j
    if not kahler.is_boson:
        margin = float(abs(np.linalg.det(np.eye(len(delta)) + delta)))
        if margin < tol:
            raise FermionBoundary(margin)
    t, t_inv = delta_function(delta, kahler, [lambda w: _sqrt(w), lambda w: 1 / _sqrt(w)])
    return t, t_inv
