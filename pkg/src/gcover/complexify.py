"""Complex-linear / antilinear split and the real <-> complex matrix dictionary.

A real 2N x 2N matrix X commuting with J acts complex-linearly on the
+i eigenspace of J. Its complexification Xbar is the N x N matrix of that
action; with J in standard form Xbar = X1 + i X2 for X = [[X1, X2], [-X2, X1]].
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneratePair, InvariantViolation
from .phase_space import block_form, group_inverse, relative_complex_structure, rel_dev

COMMUTE_TOL = 1e-9
SINGULAR_TOL = 1e-8


@dataclass(frozen=True)
class ComplexSplit:
    c_part: np.ndarray
    d_part: np.ndarray
    z_part: np.ndarray = None


@dataclass(frozen=True)
class ComplexMatrix:
    entries: np.ndarray

    def to_real(self):
        a, b = self.entries.real, self.entries.imag
        return np.block([[a, b], [-b, a]])


def _j_of(j):
    return np.asarray(getattr(j, "j", j), dtype=float)


def split(m, j):
    """C = (M - JMJ)/2 commutes with J, D = (M + JMJ)/2 anticommutes with J."""
    m = np.asarray(getattr(m, "m", m), float)
    jj = _j_of(j)
    if rel_dev(jj @ jj, -np.eye(len(jj))) > 1e-10:
        raise InvariantViolation("J^2 != -1")
    jmj = jj @ m @ jj
    c = (m - jmj) / 2
    d = (m + jmj) / 2
    z = None
    if _well_conditioned(c):
        z = np.linalg.solve(c, d)
    return ComplexSplit(c, d, z)


def _well_conditioned(c):
    s = np.linalg.svd(c, compute_uv=False)
    return s[-1] > SINGULAR_TOL * max(1.0, s[0])


@lru_cache(maxsize=64)
def _plus_i_basis(key, n2):
    j = np.frombuffer(key, dtype=float).reshape(n2, n2)
    p = (np.eye(n2) - 1j * j) / 2
    u, s, _ = np.linalg.svd(p)
    v = u[:, : n2 // 2]
    v.setflags(write=False)
    return v


def plus_i_basis(j):
    """Orthonormal basis (2N x N, complex) of the +i eigenspace of J."""
    jj = np.ascontiguousarray(_j_of(j))
    return _plus_i_basis(jj.tobytes(), jj.shape[0])


def _is_standard(jj):
    return np.array_equal(jj, block_form(len(jj) // 2))


def _check_commutes(x, jj, tol):
    scale = max(1.0, np.linalg.norm(x)) * np.linalg.norm(jj)
    dev = np.linalg.norm(x @ jj - jj @ x)
    if dev > tol * scale:
        raise InvariantViolation(f"matrix does not commute with J (||[X,J]|| = {dev:.2e})")


def complex_matrix(x, j=None, check=True, tol=COMMUTE_TOL):
    """N x N complex matrix of a J-linear real map (J standard when omitted)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[0] // 2
    jj = block_form(n) if j is None else _j_of(j)
    if check:
        _check_commutes(x, jj, tol)
    if _is_standard(jj):
        return x[:n, :n] + 1j * x[:n, n:]
    v = plus_i_basis(jj)
    return v.conj().T @ x @ v


def to_complex(k, j=None, tol=COMMUTE_TOL):
    """Complexify K commuting with J. With standard J this is K1 + i K2."""
    return ComplexMatrix(complex_matrix(np.asarray(getattr(k, "k", k), float), j, True, tol))


def complex_eigenvalues(x, j=None, check=True):
    return np.linalg.eigvals(complex_matrix(x, j, check))


def det_bar(k, j=None, check=True):
    """Complex determinant, from the eigenvalue product of the complexified matrix."""
    return complex(np.prod(complex_eigenvalues(np.asarray(getattr(k, "k", k), float), j, check)))


def tr_bar(k, j=None, check=True):
    return complex(np.trace(complex_matrix(np.asarray(getattr(k, "k", k), float), j, check)))


def c_part(m, j):
    m = np.asarray(getattr(m, "m", m), float)
    jj = _j_of(j)
    return (m - jj @ m @ jj) / 2


def z_of(m, j):
    """Z_M = C_M^{-1} D_M. Raises DegeneratePair when C_M is singular."""
    s = split(m, j)
    if s.z_part is None:
        raise DegeneratePair("C_M is not invertible (element on the fermionic quasi-boundary)")
    return s.z_part


def z_from_delta(m, kahler):
    """Z_M via (1 - Delta_{M^-1})(1 + Delta_{M^-1})^{-1}; used as a cross-check."""
    minv = group_inverse(m, kahler)
    delta = relative_complex_structure(minv, kahler)
    one = np.eye(len(delta))
    return (one - delta) @ np.linalg.inv(one + delta)


def complex_inner(v, w, kahler):
    """<v, w> = g(v, w) + i omega(v, w)."""
    return v @ kahler.g_inv @ w + 1j * (v @ kahler.omega_inv @ w)
