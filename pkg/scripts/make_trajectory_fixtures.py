"""Generate the N=4 phase-trajectory fixtures (oracle values along exp(tK^)).

Fermions: exact 16-dimensional Fock space. Bosons: Riccati flow of the squeezing matrix.
Usage: python3 scripts/make_trajectory_fixtures.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np
from scipy.linalg import expm

from gcover.io import dumps, matrix_to_json
from gcover.oracle import build_fock, gaussian_amplitude_ode, quad_operator
from gcover.phase_space import generator_from_hamiltonian, random_generator, standard_kahler

N = 4
POINTS = 201


def boson_generator(seed):
    """Stable oscillator: positive frequencies plus a weak random symmetric coupling."""
    kah = standard_kahler(N, "boson")
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=0.15, size=(2 * N, 2 * N))
    h = np.diag(rng.uniform(0.5, 1.5, size=2 * N)) + (a + a.T) / 2
    return generator_from_hamiltonian(h, kah).k, kah


def fermion_values(k, kah, t_grid):
    fock = build_fock(kah)
    kh = quad_operator(k, fock)
    return [complex((expm(t * kh) @ fock.vacuum)[0]) for t in t_grid]


def fixture(statistics, seed, t_max):
    if statistics == "boson":
        k, kah = boson_generator(seed)
    else:
        kah = standard_kahler(N, "fermion")
        k = random_generator(N, "fermion", seed=seed).k
    t_grid = np.linspace(0.0, t_max, POINTS)
    if statistics == "boson":
        vals = gaussian_amplitude_ode(k, kah, t_grid)
        method = "riccati"
    else:
        vals = fermion_values(k, kah, t_grid)
        method = "fock"
    return {"statistics": statistics, "seed": seed, "method": method,
            "generator": matrix_to_json(k, statistics), "t": t_grid.tolist(),
            "oracle": [[complex(z).real, complex(z).imag] for z in vals]}


def main(outdir="tests/fixtures"):
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for statistics, seed, t_max in (("fermion", 7, 6.0), ("boson", 11, 10.0)):
        (out / f"trajectory_{statistics}_n{N}.json").write_text(dumps(fixture(statistics, seed, t_max)))
        print("wrote", out / f"trajectory_{statistics}_n{N}.json")


if __name__ == "__main__":
    main(*sys.argv[1:])
