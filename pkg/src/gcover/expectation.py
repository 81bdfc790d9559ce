"""Vacuum expectation values <J|U|J>: squared value, modulus and full phase.

The squared value is 1/detbar(C_M) for bosons and detbar(C_M) for fermions,
with C_M = (M - JMJ)/2. The phase of exp(K^) itself is fixed by moving to a
reference J~ adapted to K and transporting back with the cocycle.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, schur

from .cartan import BOUNDARY_TOL, boundary_margin, delta_function
from .circle_cocycle import branch_arg, cocycle, det_bar_c
from .complexify import complex_eigenvalues
from .errors import InvariantViolation
from .phase_space import group_inverse

FLIP_MARGIN = 1e-6


@dataclass(frozen=True)
class ExpectationValue:
    modulus: float
    phase: float
    squared: complex
    defined: bool = True
    phase_unwrapped: float = None

    @property
    def value(self):
        if not self.defined:
            return 0j
        return self.modulus * np.exp(1j * self.phase)


def wrap(x):
    """Map to (-pi, pi]."""
    y = np.mod(x + np.pi, 2 * np.pi) - np.pi
    return float(np.where(y == -np.pi, np.pi, y))


def _mat(x, attr):
    return np.asarray(getattr(x, attr, x), float)


def expectation_squared(m, kahler):
    """<J|U(M)|J>^2: 1/detbar(C_M) for bosons, detbar(C_M) for fermions."""
    d = det_bar_c(_mat(m, "m"), kahler)
    return 1 / d if kahler.is_boson else d


def expectation_modulus(m, kahler):
    """|<J|U(M)|J>| = det(C_M)^{-1/4} (bosons) or det(C_M)^{1/4} (fermions)."""
    m = _mat(m, "m")
    j = kahler.j
    c = (m - j @ m @ j) / 2
    sign, logdet = np.linalg.slogdet(c)
    if sign <= 0:
        return 0.0
    return float(np.exp(-logdet / 4 if kahler.is_boson else logdet / 4))


# --- fermions -------------------------------------------------------------

def _schur_planes(k):
    """Orthonormal basis Q and list of K-invariant 2-planes (index pairs) with frequencies."""
    t, q = schur(k, output="real")
    n2 = len(k)
    planes, singles = [], []
    i = 0
    while i < n2:
        if i + 1 < n2 and abs(t[i + 1, i]) > 0:
            planes.append(((i, i + 1), t[i, i + 1]))
            i += 2
        else:
            singles.append(i)
            i += 1
    for a, b in zip(singles[::2], singles[1::2]):
        planes.append(((a, b), 0.0))
    return q, planes


def adapted_reference_fermion(k, kahler):
    """A complex structure J~ commuting with K with det(1 - J~ J) bounded away from 0.

    K is quasi-diagonalized by a real Schur form; on every invariant plane J~ is
    +-[[0,1],[-1,0]]. Signs start aligned with J and are then flipped greedily
    (largest margin gain first) until |det(1 - J~ J)| > FLIP_MARGIN.
    """
    k = _mat(k, "k")
    j = kahler.j
    q, planes = _schur_planes(k)
    blocks = []
    for (a, b), _ in planes:
        e = np.zeros((len(k), len(k)))
        e[a, b], e[b, a] = 1.0, -1.0
        blocks.append(q @ e @ q.T)
    sig = np.array([1.0 if np.sum(bl * j) >= 0 else -1.0 for bl in blocks])

    def build(s):
        return sum(si * bl for si, bl in zip(s, blocks))

    def margin(s):
        return boundary_margin(None, kahler, delta=-build(s) @ j)

    cur = margin(sig)
    for _ in range(len(blocks)):
        if cur > FLIP_MARGIN:
            break
        trials = []
        for i in range(len(blocks)):
            s = sig.copy()
            s[i] *= -1
            trials.append((margin(s), i))
        best, i = max(trials)
        sig[i] *= -1
        cur = best
    return build(sig), cur


def phase_fermion(k, kahler, m=None):
    """Full <J|exp(K^)|J> for fermions: arg = -tr(K J~)/4 - eta(T^{-1}, e^K)/2."""
    k = _mat(k, "k")
    m = expm(k) if m is None else m
    sq = expectation_squared(m, kahler)
    mod = expectation_modulus(m, kahler)
    if boundary_margin(m, kahler) < BOUNDARY_TOL:
        return ExpectationValue(modulus=mod, phase=float("nan"), squared=sq, defined=False)
    jt, _ = adapted_reference_fermion(k, kahler)
    t_inv, = delta_function(-jt @ kahler.j, kahler, [lambda w: 1 / np.sqrt(w)])
    eta = cocycle(t_inv, m, kahler).eta
    raw = -0.25 * np.trace(k @ jt) - 0.5 * eta
    return ExpectationValue(modulus=mod, phase=wrap(raw), squared=sq, defined=True, phase_unwrapped=float(raw))


# --- bosons ---------------------------------------------------------------

def half_arg_det_sqrt(c, j):
    """arg detbar sqrt(C): half-arguments of the eigenvalues of the complexified C,
    with eigenvalues on the negative real axis contributing zero (they come in
    conjugate pairs whose roots cancel)."""
    lam = complex_eigenvalues(c, j, check=False)
    total = 0.0
    for z in lam:
        a = branch_arg(z)
        if a == np.pi:
            continue
        total += a / 2
    return total


def phase_boson(k, kahler, m=None, nf=None):
    """Full <J|exp(K^)|J> for bosons.

    arg = tr(K_I J~)/4 + eta(T^{-1}, e^K)/2 - arg detbar sqrt(T^{-1} C~ T)
          + eta(T^{-1} e^K, T)/2
    with K = K_I + K', J~ standard in the (rescaled) normal-form basis of K,
    C~ = (e^{K'} - J~ e^{K'} J~)/2 and T = sqrt(-J~ J).
    """
    from .normal_form import adapted_reference_boson

    k = _mat(k, "k")
    m = expm(k) if m is None else m
    sq = expectation_squared(m, kahler)
    mod = expectation_modulus(m, kahler)
    ref = adapted_reference_boson(k, kahler) if nf is None else nf
    jt, k_i, k_rest = ref.j_tilde, ref.k_imag, ref.k_rest
    t, t_inv = delta_function(-jt @ kahler.j, kahler, [np.sqrt, lambda w: 1 / np.sqrt(w)])
    ekr = expm(k_rest)
    c_t = (ekr - jt @ ekr @ jt) / 2
    inner = t_inv @ c_t @ t
    inner = (inner - kahler.j @ inner @ kahler.j) / 2
    eta1 = cocycle(t_inv, m, kahler).eta
    eta2 = cocycle(t_inv @ m, t, kahler).eta
    raw = 0.25 * np.trace(k_i @ jt) + 0.5 * eta1 - half_arg_det_sqrt(inner, kahler.j) + 0.5 * eta2
    return ExpectationValue(modulus=mod, phase=wrap(raw), squared=sq, defined=True, phase_unwrapped=float(raw))


def expectation(k, kahler):
    """<J|exp(K^)|J> with the statistics-appropriate phase formula."""
    k = _mat(k, "k")
    if k.shape != (kahler.dim, kahler.dim):
        raise InvariantViolation("generator dimension does not match the Kahler structure")
    return phase_boson(k, kahler) if kahler.is_boson else phase_fermion(k, kahler)


def naive_phase(m, kahler):
    """Principal square root of the squared value: phase confined to (-pi/2, pi/2]."""
    return branch_arg(expectation_squared(m, kahler)) / 2


def phase_trajectory(k, kahler, t_grid, workers=1):
    """Evaluate exp(t K^) along t_grid. Returns a list of dicts with t, modulus,
    phase_wrapped, phase_unwrapped, phase_naive and defined; the unwrapped
    series is continued across grid points."""
    k = _mat(k, "k")
    t_grid = np.asarray(t_grid, float)
    if np.any(np.diff(t_grid) < 0):
        raise InvariantViolation("t_grid must be sorted")

    def one(t):
        ev = expectation(t * k, kahler)
        return ev, naive_phase(expm(t * k), kahler)

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(one, t_grid))
    else:
        results = [one(t) for t in t_grid]
    rows = []
    prev = None
    for t, (ev, nv) in zip(t_grid, results):
        if ev.defined:
            ph = ev.phase
            if prev is None:
                un = ph
            else:
                un = prev + wrap(ph - prev)
            prev = un
        else:
            un = float("nan")
        rows.append({"t": float(t), "modulus": ev.modulus, "phase_wrapped": ev.phase if ev.defined else float("nan"),
                     "phase_unwrapped": un, "phase_naive": nv if ev.defined else float("nan"), "defined": ev.defined})
    return rows


def amplitude(cover):
    """<J|U(M, psi)|J> = D(M) psi* (bosons) or D(M) psi (fermions)."""
    kah = cover.reference
    mod = expectation_modulus(cover.m, kah)
    return mod * (np.conj(cover.psi) if kah.is_boson else cover.psi)


def inverse_amplitude_check(m, kahler):
    """Consistency helper: modulus of M and M^{-1} agree."""
    return expectation_modulus(group_inverse(m, kahler), kahler)
