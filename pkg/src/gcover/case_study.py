"""Single-mode bosonic and two-mode fermionic examples with closed forms.

Bosons: K = a X + c Z on one mode, X^ = -i(p^2 - q^2)/2 and Z^ = -i(n + 1/2).
Fermions: two modes with h built from six parameters x_1..x_6; on the even
sector (|00>, |11>) the Hamiltonian is n.sigma with
n = ((x4 - x3)/2, (x1 - x6)/2, -(x2 + x5)/2).
"""

import numpy as np

from .expectation import expectation
from .phase_space import standard_kahler

X_GEN = np.array([[0.0, 1.0], [1.0, 0.0]])
Z_GEN = np.array([[0.0, 1.0], [-1.0, 0.0]])
# grid nodes with |a| = |c| up to rounding are treated as lying on the diagonal
DIAGONAL_TOL = 1e-12


def boson_generator(a, c):
    return a * X_GEN + c * Z_GEN


def fermion_h(x):
    x1, x2, x3, x4, x5, x6 = x
    return np.array([[0, x1, x2, x3], [-x1, 0, x4, x5], [-x2, -x4, 0, x6], [-x3, -x5, -x6, 0]], float)


def fermion_generator(n1, n3, scale=1.0):
    """K = h for the even-sector vector n = scale * (n1, 0, n3)."""
    return fermion_h((0.0, -2 * scale * n3, 0.0, 2 * scale * n1, 0.0, 0.0))


def boson_squared_closed(a, c):
    """<J|e^K|J>^-2 = cosh s + (i c / s) sinh s, s = sqrt(a^2 - c^2)."""
    d = a * a - c * c
    if abs(d) < DIAGONAL_TOL:
        return 1 + 1j * c
    s = np.sqrt(complex(d))
    return complex(np.cosh(s) + 1j * c / s * np.sinh(s))


def boson_modulus_closed(a, c):
    """2(a^2 - c^2) / (a^2 - 2c^2 + a^2 cosh(2 sqrt(a^2 - c^2))), which equals |<J|e^K|J>|^4."""
    d = a * a - c * c
    if abs(d) < DIAGONAL_TOL:
        return 1 / (1 + c * c)
    s = np.sqrt(complex(d))
    return float((2 * d / (a * a - 2 * c * c + a * a * np.cosh(2 * s))).real)


def boson_phase_closed(a, c):
    """arg <J|e^K|J>, continuous along exp(tK) and odd in c."""
    d = a * a - c * c
    if abs(d) < DIAGONAL_TOL:
        return -0.5 * np.arctan(c)
    r = np.sqrt(abs(d))
    if d > 0:
        return -0.5 * np.arctan(c * np.tanh(r) / r)
    cc = abs(c)
    inner = (cc - r) * np.cos(r) * np.sin(r) / (cc + (r - cc) * np.cos(r) ** 2)
    return float(np.sign(c) * (-0.5 * np.arctan(inner) - r / 2))


def boson_phase_printed(a, c):
    """The phase expression with a single cos r in the denominator and no odd extension (kept for comparison)."""
    d = a * a - c * c
    if abs(d) < DIAGONAL_TOL:
        return -0.5 * np.arctan(c)
    r = np.sqrt(abs(d))
    if d > 0:
        return -0.5 * np.arctan(c * np.tanh(r) / r)
    return float(-0.5 * np.arctan((c - r) * np.cos(r) * np.sin(r) / (c + (r - c) * np.cos(r))) - r / 2)


def fermion_closed(n1, n3, half=False):
    """<00|exp(-i n.sigma)|00> = cos t - i sin t n3/|n| with t = |n| (t = |n|/2 when half)."""
    th = np.hypot(n1, n3)
    t = th / 2 if half else th
    return complex(np.cos(t) - 1j * np.sin(t) * (n3 / th if th > 0 else 0.0))


def grid(points=21, extent=3.0):
    return np.linspace(-extent, extent, points)


def boson_sweep(points=21, extent=3.0):
    kah = standard_kahler(1, "boson")
    rows = []
    for a in grid(points, extent):
        for c in grid(points, extent):
            ev = expectation(boson_generator(a, c), kah)
            rows.append({"a": float(a), "c": float(c), "modulus": ev.modulus, "phase": ev.phase,
                         "re": ev.value.real, "im": ev.value.imag})
    return rows


def fermion_sweep(points=21, extent=3.0, half=False):
    kah = standard_kahler(2, "fermion")
    rows = []
    for n1 in grid(points, extent):
        for n3 in grid(points, extent):
            ev = expectation(fermion_generator(n1, n3, 0.5 if half else 1.0), kah)
            rows.append({"n1": float(n1), "n3": float(n3), "modulus": ev.modulus,
                         "phase": ev.phase if ev.defined else float("nan"),
                         "re": ev.value.real, "im": ev.value.imag, "defined": ev.defined})
    return rows
