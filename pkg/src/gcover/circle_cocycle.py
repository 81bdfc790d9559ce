"""Circle function phi(M) and cocycle eta(M1, M2) relative to a reference J.

phi(M) is the unit phase of detbar(C_M). The cocycle is
eta = sum_i arg(lambda_i), lambda_i the eigenvalues of the complexified
1 - Z_{M1} Z_{M2^{-1}}, with arg in (-pi, pi] and the negative real axis
mapped to +pi. It satisfies phi(M1 M2) = phi(M1) phi(M2) exp(i eta).
"""

from dataclasses import dataclass, field

import numpy as np

from .complexify import c_part, complex_eigenvalues, complex_matrix
from .errors import DegeneratePair, FermionBoundary
from .phase_space import group_inverse

SINGULAR_TOL = 1e-8
AXIS_SNAP = 1e-10
PAIR_TOL = 1e-6


@dataclass(frozen=True)
class CocycleValue:
    eta: float
    eigen_args: list = field(default_factory=list)
    margin: float = np.inf

    @property
    def half_phase(self):
        return np.exp(0.5j * self.eta)


def _mat(x):
    return np.asarray(getattr(x, "m", x), float)


def branch_arg(z):
    """Principal arg in (-pi, pi] with points within AXIS_SNAP of the negative axis sent to +pi."""
    z = complex(z)
    if z.real < 0 and abs(z.imag) <= AXIS_SNAP * abs(z):
        return np.pi
    return float(np.angle(z))


def _jlinear(x, j):
    return (x - j @ x @ j) / 2


def det_bar_c(m, kahler):
    """detbar(C_M) computed from eigenvalues of the complexified C_M."""
    c = c_part(_mat(m), kahler.j)
    return complex(np.prod(complex_eigenvalues(c, kahler.j, check=False)))


def circle(m, kahler, tol=SINGULAR_TOL):
    """phi(M) = detbar(C_M)/|detbar(C_M)|; FermionBoundary when detbar(C_M) ~ 0."""
    d = det_bar_c(m, kahler)
    if abs(d) < tol:
        raise FermionBoundary(d, f"circle function undefined: |detbar(C_M)| = {abs(d):.3e}")
    return d / abs(d)


def _pair_eigenvalues(lam):
    """Group the doubly degenerate fermionic spectrum into pairs (plus a lone 1 for odd N)."""
    lam = list(lam)
    lone = []
    if len(lam) % 2:
        i = int(np.argmin([abs(x - 1) for x in lam]))
        lone.append(lam.pop(i))
    pairs = []
    while lam:
        a = lam.pop(0)
        d = [abs(a - b) for b in lam]
        i = int(np.argmin(d))
        b = lam.pop(i)
        if d[i] > PAIR_TOL * max(1.0, abs(a)):
            return None
        pairs.append((a, b))
    return pairs, lone


def eigen_args(lam, fermion):
    """Per-eigenvalue arguments; degenerate fermionic pairs share the arg of their mean
    so a pair numerically split across the cut still contributes 2 * pi."""
    if fermion:
        grouped = _pair_eigenvalues(lam)
        if grouped is not None:
            pairs, lone = grouped
            args = []
            for a, b in pairs:
                t = branch_arg((a + b) / 2)
                args += [t, t]
            args += [branch_arg(x) for x in lone]
            return args
    return [branch_arg(x) for x in lam]


def cocycle(m1, m2, kahler, tol=SINGULAR_TOL):
    """eta(M1, M2) from the eigenvalue phases of 1 - Z_{M1} Z_{M2^{-1}}."""
    j = kahler.j
    m1 = _mat(m1)
    m2inv = group_inverse(_mat(m2), kahler)
    c1 = c_part(m1, j)
    c2 = c_part(m2inv, j)
    margins = []
    for c, name in ((c1, "C_{M1}"), (c2, "C_{M2^-1}")):
        d = abs(np.prod(complex_eigenvalues(c, j, check=False)))
        margins.append(d)
        if d < tol:
            raise DegeneratePair(f"{name} is singular (|detbar| = {d:.3e})")
    z1 = np.linalg.solve(c1, (m1 + j @ m1 @ j) / 2)
    z2 = np.linalg.solve(c2, (m2inv + j @ m2inv @ j) / 2)
    a = _jlinear(np.eye(len(j)) - z1 @ z2, j)
    lam = np.linalg.eigvals(complex_matrix(a, j, check=False))
    d = abs(np.prod(lam))
    margins.append(d)
    if d < tol:
        raise DegeneratePair(f"1 - Z1 Z2 is singular (|detbar| = {d:.3e})")
    args = eigen_args(lam, not kahler.is_boson)
    return CocycleValue(eta=float(np.sum(args)), eigen_args=args, margin=float(min(margins)))


def half_cocycle_phase(m1, m2, kahler):
    """exp(i eta/2): the continuous object consumed by the double-cover product."""
    return cocycle(m1, m2, kahler).half_phase
