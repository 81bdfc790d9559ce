"""Shared sample generators and the acceptance-report registry."""

import numpy as np
from scipy.linalg import expm

from gcover.phase_space import block_form, generator_from_hamiltonian, random_generator, standard_kahler

X2 = np.array([[0.0, 1.0], [1.0, 0.0]])
Z2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
K1 = Z2.copy()
K2 = X2.copy()
K3 = np.array([[0.0, 1.0], [0.0, 0.0]])

REPORT = {}


def record(label, ok, detail=""):
    REPORT[label] = (bool(ok), detail)
    print(f"{label}: {'PASS' if ok else 'FAIL'} {detail}")


def spectral_radius(k):
    return float(np.max(np.abs(np.linalg.eigvals(k))))


def rescale(k, radius):
    r = spectral_radius(k)
    return k if r == 0 else k * (radius / r)


def random_symplectic(n, rng, scale=0.4):
    return expm(random_generator(n, "boson", seed=int(rng.integers(2**31)), scale=scale).k)


def embed_modes(blocks):
    """Direct sum of single-mode 2x2 generators in (q_1..q_N, p_1..p_N) order."""
    n = len(blocks)
    k = np.zeros((2 * n, 2 * n))
    for i, b in enumerate(blocks):
        idx = [i, i + n]
        k[np.ix_(idx, idx)] = b
    return k


def boson_samples(n, count, seed, max_radius=2.0):
    """Random bosonic generators with spectral radius <= max_radius, a third of them
    engineered: real-diagonalizable, purely imaginary, and nilpotent mixtures in a random symplectic frame."""
    rng = np.random.default_rng(seed)
    out = []
    single = [lambda r: r * X2, lambda r: r * Z2, lambda r: r * K3, lambda r: -r * K3]
    for i in range(count):
        kind = i % 6
        if kind < 3 and n >= 1:
            choice = {0: [0, 1], 1: [1, 1], 2: [2, 1, 0, 3]}[kind]
            blocks = [single[choice[(j + i) % len(choice)]](rng.uniform(0.3, 1.5)) for j in range(n)]
            s = random_symplectic(n, rng)
            k = s @ embed_modes(blocks) @ np.linalg.inv(s)
            if spectral_radius(k) > max_radius:
                k = rescale(k, max_radius)
        else:
            k = random_generator(n, "boson", seed=int(rng.integers(2**31))).k
            k = rescale(k, rng.uniform(0.3, max_radius))
        out.append(k)
    return out


def fermion_samples(n, count, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return [random_generator(n, "fermion", seed=int(rng.integers(2**31)), scale=scale).k for _ in range(count)]


def t_phi(phi):
    """N=2 fermionic element with T J T^-1 = -J: it sits on the quasi-boundary of the standard J."""
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[0, c, 0, s], [-c, 0, -s, 0], [0, s, 0, -c], [-s, 0, c, 0]], float)


def standard(n, statistics):
    return standard_kahler(n, statistics)


def omega(n):
    return block_form(n)


def hamiltonian_generator(h, kahler):
    return generator_from_hamiltonian(h, kahler).k
