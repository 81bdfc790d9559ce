"""Kahler structures, quadratic Hamiltonians, Lie generators and group elements.

Phase-space vectors use the ordering (q_1..q_N, p_1..p_N). Bosons keep the
symplectic form Omega fixed and derive the metric G = -J Omega; fermions keep
the metric G fixed and derive Omega = J G. In both cases J = Omega g = -G omega.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import expm

from .errors import InvariantViolation

STRUCT_TOL = 1e-10


class Statistics(str, Enum):
    BOSON = "boson"
    FERMION = "fermion"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


def rel_dev(a, b):
    """Relative Frobenius deviation ||a - b|| / max(1, ||b||)."""
    return np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def block_form(n):
    """The 2N x 2N matrix [[0, 1], [-1, 0]] in (q, p) ordering."""
    z = np.zeros((n, n))
    e = np.eye(n)
    return np.block([[z, e], [-e, z]])


@dataclass(frozen=True)
class KahlerStructure:
    n_modes: int
    statistics: Statistics
    omega: np.ndarray
    g_metric: np.ndarray
    j: np.ndarray
    omega_inv: np.ndarray
    g_inv: np.ndarray
    _key: bytes = field(default=b"", repr=False, compare=False)

    def __post_init__(self):
        n2 = 2 * self.n_modes
        for name in ("omega", "g_metric", "j", "omega_inv", "g_inv"):
            a = getattr(self, name)
            if a.shape != (n2, n2):
                raise InvariantViolation(f"{name} has shape {a.shape}, expected {(n2, n2)}")
        one = np.eye(n2)
        j, om, g = self.j, self.omega, self.g_metric
        checks = {
            "J^2 = -1": rel_dev(j @ j, -one),
            "Omega omega = 1": rel_dev(om @ self.omega_inv, one),
            "G g = 1": rel_dev(g @ self.g_inv, one),
            "J = Omega g": rel_dev(om @ self.g_inv, j),
            "J = -G omega": rel_dev(-g @ self.omega_inv, j),
            "Omega antisymmetric": rel_dev(om, -om.T),
            "G symmetric": rel_dev(g, g.T),
        }
        bad = {k: v for k, v in checks.items() if v > STRUCT_TOL}
        if bad:
            raise InvariantViolation(f"incompatible Kahler structure: {bad}")
        if np.min(np.linalg.eigvalsh((g + g.T) / 2)) <= 0:
            raise InvariantViolation("metric G is not positive definite")
        object.__setattr__(self, "_key", np.round(j, 12).tobytes() + self.statistics.value.encode())

    @property
    def dim(self):
        return 2 * self.n_modes

    @property
    def is_boson(self):
        return self.statistics is Statistics.BOSON

    @property
    def kinematic(self):
        """The statistics-preserved bilinear form: Omega (bosons) or G (fermions)."""
        return self.omega if self.is_boson else self.g_metric

    @property
    def kinematic_inv(self):
        return self.omega_inv if self.is_boson else self.g_inv

    @property
    def is_standard(self):
        n = self.n_modes
        return rel_dev(self.j, block_form(n)) < 1e-13 and rel_dev(self.kinematic, block_form(n) if self.is_boson else np.eye(2 * n)) < 1e-13

    @classmethod
    def from_j(cls, j, statistics, kinematic=None):
        """Build the triangle from J and the kinematic form (standard if omitted)."""
        statistics = Statistics.parse(statistics)
        j = np.asarray(j, dtype=float)
        n = j.shape[0] // 2
        if statistics is Statistics.BOSON:
            om = block_form(n) if kinematic is None else np.asarray(kinematic, float)
            g = -j @ om
            g = (g + g.T) / 2
            om_inv = np.linalg.inv(om)
            g_inv = om_inv @ j
        else:
            g = np.eye(2 * n) if kinematic is None else np.asarray(kinematic, float)
            om = j @ g
            om = (om - om.T) / 2
            g_inv = np.linalg.inv(g)
            om_inv = -g_inv @ j
        return cls(n, statistics, _frozen(om), _frozen(g), _frozen(j), _frozen(om_inv), _frozen(g_inv))

    def with_j(self, new_j):
        """Same kinematic form, different complex structure."""
        return KahlerStructure.from_j(new_j, self.statistics, self.kinematic)

    def same_reference(self, other, tol=1e-12):
        return (self.statistics is other.statistics and self.n_modes == other.n_modes
                and np.linalg.norm(self.j - other.j) < tol
                and np.linalg.norm(self.kinematic - other.kinematic) < tol)


def standard_kahler(n_modes, statistics):
    """Standard triangle: Omega = J = [[0,1],[-1,0]] and G = 1."""
    if n_modes < 1:
        raise InvariantViolation("n_modes must be >= 1")
    statistics = Statistics.parse(statistics)
    return KahlerStructure.from_j(block_form(n_modes), statistics)


def _mat(x, attr):
    return np.asarray(getattr(x, attr, x), dtype=float)


@dataclass(frozen=True)
class QuadraticHamiltonian:
    h: np.ndarray
    statistics: Statistics

    def __post_init__(self):
        h = np.asarray(self.h, float)
        sign = 1 if Statistics.parse(self.statistics) is Statistics.BOSON else -1
        if rel_dev(h, sign * h.T) > STRUCT_TOL:
            kind = "symmetric" if sign > 0 else "antisymmetric"
            raise InvariantViolation(f"h must be {kind}")
        object.__setattr__(self, "h", _frozen(h))
        object.__setattr__(self, "statistics", Statistics.parse(self.statistics))


@dataclass(frozen=True)
class LieGenerator:
    k: np.ndarray
    statistics: Statistics
    kinematic: np.ndarray = None

    def __post_init__(self):
        k = np.asarray(self.k, float)
        stats = Statistics.parse(self.statistics)
        n = k.shape[0] // 2
        form = self.kinematic
        if form is None:
            form = block_form(n) if stats is Statistics.BOSON else np.eye(2 * n)
        form = np.asarray(form, float)
        if np.linalg.norm(k @ form + form @ k.T) > STRUCT_TOL * max(1.0, np.linalg.norm(k) * np.linalg.norm(form)):
            raise InvariantViolation("K is not in the Lie algebra")
        object.__setattr__(self, "k", _frozen(k))
        object.__setattr__(self, "statistics", stats)
        object.__setattr__(self, "kinematic", _frozen(form))

    @property
    def spectral_radius(self):
        return float(np.max(np.abs(np.linalg.eigvals(self.k)))) if self.k.size else 0.0

    def exp(self):
        return GroupElement(expm(self.k), self.statistics, self.kinematic)


@dataclass(frozen=True)
class GroupElement:
    m: np.ndarray
    statistics: Statistics
    kinematic: np.ndarray = None

    def __post_init__(self):
        m = np.asarray(self.m, float)
        stats = Statistics.parse(self.statistics)
        n = m.shape[0] // 2
        form = self.kinematic
        if form is None:
            form = block_form(n) if stats is Statistics.BOSON else np.eye(2 * n)
        form = np.asarray(form, float)
        if rel_dev(m @ form @ m.T, form) > STRUCT_TOL * max(1.0, np.linalg.norm(m) ** 2):
            raise InvariantViolation("M does not preserve the kinematic form")
        if stats is Statistics.FERMION and np.linalg.det(m) < 0:
            raise InvariantViolation("fermionic M must have det M = +1")
        object.__setattr__(self, "m", _frozen(m))
        object.__setattr__(self, "statistics", stats)
        object.__setattr__(self, "kinematic", _frozen(form))


def generator_from_hamiltonian(h, kahler):
    """K = Omega h (bosons) or K = G h (fermions)."""
    hh = QuadraticHamiltonian(_mat(h, "h"), kahler.statistics)
    form = kahler.omega if kahler.is_boson else kahler.g_metric
    return LieGenerator(form @ hh.h, kahler.statistics, kahler.kinematic)


def hamiltonian_from_generator(k, kahler):
    """Inverse map: h = omega K (bosons) or h = g K (fermions)."""
    kk = LieGenerator(_mat(k, "k"), kahler.statistics, kahler.kinematic)
    inv = kahler.omega_inv if kahler.is_boson else kahler.g_inv
    h = inv @ kk.k
    sign = 1 if kahler.is_boson else -1
    return QuadraticHamiltonian((h + sign * h.T) / 2, kahler.statistics)


def random_generator(n_modes, statistics, seed=None, scale=1.0, kahler=None):
    """Random Lie generator from a Gaussian h, (anti)symmetrized so the algebra
    constraint holds exactly. Deterministic for a fixed seed."""
    if scale <= 0:
        raise InvariantViolation("scale must be positive")
    kahler = kahler or standard_kahler(n_modes, statistics)
    rng = np.random.default_rng(seed)
    a = rng.normal(scale=scale, size=(2 * n_modes, 2 * n_modes))
    h = (a + a.T) / 2 if kahler.is_boson else (a - a.T) / 2
    return generator_from_hamiltonian(h, kahler)


def group_inverse(m, kahler):
    """M^{-1} from the preserved form, avoiding a numerical inverse."""
    m = _mat(m, "m")
    form, inv = kahler.kinematic, kahler.kinematic_inv
    return form @ m.T @ inv


def relative_complex_structure(m, kahler):
    """Delta_M = -M J M^{-1} J."""
    m = _mat(m, "m")
    j = kahler.j
    return -m @ j @ group_inverse(m, kahler) @ j


def project_to_group(m, kahler, tol=1e-10):
    """One first-order correction step back onto the group when drift exceeds tol."""
    form, inv = kahler.kinematic, kahler.kinematic_inv
    err = m @ form @ m.T - form
    if np.linalg.norm(err) <= tol * max(1.0, np.linalg.norm(m) ** 2):
        return m
    return (np.eye(m.shape[0]) - 0.5 * err @ inv) @ m


def is_lie_algebra(k, kahler, tol=STRUCT_TOL):
    k = _mat(k, "k")
    form = kahler.kinematic
    return np.linalg.norm(k @ form + form @ k.T) <= tol * max(1.0, np.linalg.norm(k))


def is_group_element(m, kahler, tol=STRUCT_TOL):
    m = _mat(m, "m")
    form = kahler.kinematic
    ok = rel_dev(m @ form @ m.T, form) <= tol * max(1.0, np.linalg.norm(m) ** 2)
    if not kahler.is_boson:
        ok = ok and np.linalg.det(m) > 0
    return bool(ok)


def expm_generator(k):
    return expm(_mat(k, "k"))


def compatible_j(j, kahler, tol=1e-9):
    """True when j is a complex structure compatible with kahler's kinematic form."""
    j = np.asarray(j, float)
    if j.shape != (kahler.dim, kahler.dim):
        return False
    if rel_dev(j @ j, -np.eye(kahler.dim)) > tol:
        return False
    form = kahler.kinematic
    if rel_dev(j @ form @ j.T, form) > tol:
        return False
    if kahler.is_boson:
        g = -j @ form
        return bool(np.min(np.linalg.eigvalsh((g + g.T) / 2)) > 0)
    return True
