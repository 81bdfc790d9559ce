"""Superpositions sum_k c_k U(M_k, psi_k)|J> of Gaussian states over one reference.

Overlaps X_kk' = <J|U_k^dag U_k'|J> come from the relative cover element
(M_k^-1 M_k', psi_k* psi_k' e^{i eta/2}). Moments rotate the index string by M_k
and reuse the generalized Wick sum of the relative element.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .circle_cocycle import cocycle
from .double_cover import CoverElement, inverse, lift, multiply
from .errors import ContinuationAmbiguous, DegeneratePair, FermionBoundary, InvariantViolation
from .expectation import amplitude, expectation_squared
from .phase_space import group_inverse, project_to_group
from .wick import pairing_sum, wick_context, wick_moment

AMBIGUITY_RATIO = 0.8
MAX_OVERLAP_CHANGE = 0.5


@dataclass(frozen=True)
class SuperpositionState:
    coefficients: np.ndarray
    branches: tuple
    overlap_cache: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coefficients, complex).ravel()
        br = tuple(self.branches)
        if len(c) != len(br) or not br:
            raise InvariantViolation("need one coefficient per branch and at least one branch")
        ref = br[0].reference
        if any(not b.reference.same_reference(ref) for b in br[1:]):
            raise InvariantViolation("all branches must share one reference complex structure")
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "branches", br)

    @property
    def reference(self):
        return self.branches[0].reference

    @property
    def size(self):
        return len(self.branches)

    @property
    def overlaps(self):
        if self.overlap_cache is None:
            object.__setattr__(self, "overlap_cache", overlap_matrix(self))
        return self.overlap_cache

    def norm_squared(self):
        c = self.coefficients
        return complex(np.conj(c) @ self.overlaps @ c)

    def with_phase(self, z):
        """Multiply every psi_k by the same unit phase z (not a cover element map; for gauge checks)."""
        br = tuple(_unchecked(b.m, b.psi * z, b.reference) for b in self.branches)
        return SuperpositionState(self.coefficients, br)

    def to_dict(self):
        return {"coefficients": [[z.real, z.imag] for z in self.coefficients],
                "branches": [b.to_dict() for b in self.branches]}

    @classmethod
    def from_dict(cls, obj):
        c = [complex(*z) if isinstance(z, (list, tuple)) else complex(z) for z in obj["coefficients"]]
        return cls(c, [CoverElement.from_dict(b) for b in obj["branches"]])


def _unchecked(m, psi, reference):
    el = CoverElement.__new__(CoverElement)
    object.__setattr__(el, "m", m)
    object.__setattr__(el, "psi", complex(psi))
    object.__setattr__(el, "reference", reference)
    return el


def relative_element(a, b):
    """The cover element of U_a^dag U_b: (M_a^-1 M_b, psi_a* psi_b exp(i eta(M_a^-1, M_b)/2)).

    Built from the product formula directly so that a common phase on all psi_k
    (see with_phase) cancels exactly instead of failing the psi^2 = phi(M) check.
    """
    if not a.reference.same_reference(b.reference):
        return multiply(inverse(a), b)
    kah = a.reference
    a_inv = group_inverse(a.m, kah)
    eta = cocycle(a_inv, b.m, kah).eta
    m = project_to_group(a_inv @ b.m, kah)
    psi = np.conj(a.psi) * b.psi * np.exp(0.5j * eta)
    return _unchecked(m, psi / abs(psi), kah)


def _overlap(a, b):
    return complex(amplitude(relative_element(a, b)))


def overlap_matrix(state, workers=1):
    """X_kk' = <J|U_k^dag U_k'|J>; raises DegeneratePair naming the offending pair."""
    br = state.branches
    m = len(br)
    pairs = [(k, l) for k in range(m) for l in range(m)]

    def one(kl):
        k, l = kl
        if k == l:
            return 1.0 + 0j
        try:
            return _overlap(br[k], br[l])
        except (DegeneratePair, FermionBoundary, InvariantViolation) as exc:
            raise DegeneratePair(f"overlap ({k}, {l}) not admissible: {exc}", pair=(k, l)) from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            vals = list(ex.map(one, pairs))
    else:
        vals = [one(p) for p in pairs]
    x = np.array(vals, complex).reshape(m, m)
    if not np.allclose(x, x.conj().T, atol=1e-8):
        raise InvariantViolation("overlap matrix is not Hermitian")
    return x


def continue_sign(root, previous, ratio=AMBIGUITY_RATIO):
    """Pick +-root nearest to previous; ambiguous when the two distances are too similar."""
    d_plus, d_minus = abs(root - previous), abs(-root - previous)
    near, far = sorted((d_plus, d_minus))
    if far == 0 or near / far > ratio:
        raise ContinuationAmbiguous(f"sign continuation ambiguous (distances {near:.3e}, {far:.3e}); reduce the step")
    return root if d_plus <= d_minus else -root


def evolve_step(state, directions, epsilon):
    """M_k -> M_k exp(eps K_k), with every overlap continued from the previous one."""
    if len(directions) != state.size:
        raise InvariantViolation("one direction per branch is required")
    if epsilon == 0:
        return state
    kah = state.reference
    old = state.overlaps
    new_br = []
    for b, k in zip(state.branches, directions):
        k = np.asarray(getattr(k, "k", k), float)
        if epsilon * np.linalg.norm(k, 2) > 1.0:
            raise ContinuationAmbiguous("step too large for principal-sheet lifting; reduce epsilon")
        new_br.append(multiply(b, lift(expm(epsilon * k), 1, kah)))
    m = state.size
    x = np.eye(m, dtype=complex)
    for i in range(m):
        for j in range(i + 1, m):
            mij = np.linalg.solve(new_br[i].m, new_br[j].m)
            root = np.sqrt(complex(expectation_squared(mij, kah)))
            val = continue_sign(root, old[i, j])
            if abs(val - old[i, j]) > MAX_OVERLAP_CHANGE:
                raise ContinuationAmbiguous(f"overlap ({i}, {j}) changed by {abs(val - old[i, j]):.3f}; reduce epsilon")
            x[i, j], x[j, i] = val, np.conj(val)
    return SuperpositionState(state.coefficients, new_br, overlap_cache=x)


def evolve(state, directions, epsilon, steps):
    """Repeated evolve_step; yields the state after each step."""
    for _ in range(steps):
        state = evolve_step(state, directions, epsilon)
        yield state


def moment(state, indices, one_based=False):
    """<Psi| xi^{a_1} ... xi^{a_d} |Psi> = sum_kk' c_k* c_k' <J|U_k^dag xi...xi U_k'|J>."""
    idx = [int(a) - (1 if one_based else 0) for a in indices]
    c = state.coefficients
    br = state.branches
    # validates the index string (range and order) once
    wick_moment(idx, CoverElement(np.eye(state.reference.dim), 1.0, state.reference))
    if not idx:
        return state.norm_squared()
    if len(idx) % 2:
        return 0j
    total = 0j
    for k in range(state.size):
        mk = br[k].m
        for l in range(state.size):
            ctx = wick_context(relative_element(br[k], br[l]))
            # U_k^dag xi^a U_k = M_k^a_b xi^b and the pairing sum is multilinear in the indices
            val = ctx.base_amplitude * pairing_sum(mk @ ctx.c_tilde @ mk.T, idx, ctx.fermion)
            total += np.conj(c[k]) * c[l] * val
    return complex(total)
