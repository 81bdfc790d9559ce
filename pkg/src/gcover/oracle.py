"""Brute-force ground truth on Fock space.

Fermions use the Jordan-Wigner chain (exact, N <= 6). Bosons use truncated
ladder operators (N <= 2, cutoff <= 200) with convergence certified by
doubling the cutoff. For bosonic systems too large to truncate there is a
second, independent oracle: the vacuum amplitude of exp(t K^) obeys a Riccati
ODE for the squeezing matrix, integrated to high accuracy.

Conventions: q = (a^+ + a)/sqrt2, p = i(a^+ - a)/sqrt2, so the reference
vacuum is annihilated by (1 + iJ) xi / 2 with J in standard form.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply
from scipy.special import jv

from .errors import DimensionTooLarge, TruncationNotConverged

MAX_FERMION_MODES = 6
MAX_BOSON_MODES = 2
# largest truncated bosonic Fock dimension (cutoff ** N)
MAX_FOCK_DIM = 400 ** 2
MASK_FRACTION = 0.1


@dataclass(frozen=True)
class FockOperators:
    dim: int
    xi: list
    vacuum: np.ndarray
    cutoff: int = None
    kahler: object = None

    @property
    def n_modes(self):
        return len(self.xi) // 2

    def safe_mask(self):
        """Boolean mask over basis states excluding the top MASK_FRACTION of each mode's levels."""
        if self.cutoff is None:
            return np.ones(self.dim, dtype=bool)
        keep = int(np.floor(self.cutoff * (1 - MASK_FRACTION)))
        grids = np.indices((self.cutoff,) * self.n_modes).reshape(self.n_modes, -1)
        return np.all(grids < keep, axis=0)


def _fermion_ladders(n):
    a1 = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1|: annihilates the occupied level
    zz = np.diag([1.0, -1.0])
    one = np.eye(2)
    out = []
    for i in range(n):
        op = np.array([[1.0]])
        for k in range(n):
            op = np.kron(op, zz if k < i else a1 if k == i else one)
        out.append(op)
    return out


def _boson_ladders(n, cutoff, sparse):
    a1 = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    eye = np.eye(cutoff)
    if sparse:
        a1, eye = sp.csr_matrix(a1), sp.identity(cutoff, format="csr")
        kron = sp.kron
    else:
        kron = np.kron
    out = []
    for i in range(n):
        op = a1 if i == 0 else eye
        for k in range(1, n):
            op = kron(op, a1 if k == i else eye)
        out.append(sp.csr_matrix(op) if sparse else op)
    return out


def build_fock(kahler, cutoff=None, sparse=None):
    """Dense (or sparse, for large bosonic truncations) matrices of xi^a and the vacuum |J>.

    Requires the standard reference J: other references are reached by
    conjugating with the oracle of a basis change, which the tests do explicitly.
    """
    n = kahler.n_modes
    if kahler.is_boson:
        if n > MAX_BOSON_MODES:
            raise DimensionTooLarge(f"boson oracle supports N <= {MAX_BOSON_MODES}")
        cutoff = cutoff or 80
        if cutoff ** n > MAX_FOCK_DIM:
            raise DimensionTooLarge(f"cutoff {cutoff} ** {n} exceeds {MAX_FOCK_DIM}")
        if sparse is None:
            sparse = cutoff ** n > 2000
        ladders = _boson_ladders(n, cutoff, sparse)
        dim = cutoff ** n
    else:
        if n > MAX_FERMION_MODES:
            raise DimensionTooLarge(f"fermion oracle supports N <= {MAX_FERMION_MODES}")
        ladders = _fermion_ladders(n)
        dim = 2 ** n
        cutoff = None
        sparse = False
    s2 = np.sqrt(2.0)
    qs = [(a.conj().T + a) / s2 for a in ladders]
    ps = [1j * (a.conj().T - a) / s2 for a in ladders]
    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    return FockOperators(dim=dim, xi=qs + ps, vacuum=vac, cutoff=cutoff, kahler=kahler)


def quad_operator(k, fock):
    """K^ = -(i/2) omega_ac K^c_b xi^a xi^b (bosons) or (1/2) g_ac K^c_b xi^a xi^b (fermions)."""
    k = np.asarray(getattr(k, "k", k), float)
    kah = fock.kahler
    coeff = -0.5j * (kah.omega_inv @ k) if kah.is_boson else 0.5 * (kah.g_inv @ k)
    n2 = len(fock.xi)
    op = None
    for a in range(n2):
        for b in range(n2):
            c = coeff[a, b]
            if c == 0:
                continue
            term = c * (fock.xi[a] @ fock.xi[b])
            op = term if op is None else op + term
    if op is None:
        op = sp.csr_matrix((fock.dim, fock.dim), dtype=complex) if sp.issparse(fock.xi[0]) else np.zeros((fock.dim, fock.dim), complex)
    return op


def chebyshev_expm_antihermitian(op, v, t=1.0, tol=1e-15):
    """exp(t A) v for anti-Hermitian A via the Chebyshev expansion of exp(-i t H), H = iA.

    The spectrum of H is bracketed by Gershgorin discs, so the expansion is
    valid without eigenvalue estimates; terms stop once the Bessel weights
    drop below tol past the turning point k ~ a t.
    """
    h = (1j * op).tocsr()
    diag = h.diagonal().real
    radius = np.asarray(abs(h).sum(axis=1)).ravel() - np.abs(diag)
    lo, hi = float(np.min(diag - radius)), float(np.max(diag + radius))
    half, centre = (hi - lo) / 2 or 1.0, (hi + lo) / 2
    x = half * t
    n_terms = int(x + 20 * np.log(max(x, 2.0)) + 40)
    bessel = jv(np.arange(n_terms + 1), x)
    v = np.asarray(v, complex)
    apply = lambda y: (h @ y - centre * y) / half
    t_prev, t_cur = v, apply(v)
    out = bessel[0] * t_prev + 2 * (-1j) * bessel[1] * t_cur
    for k in range(2, n_terms + 1):
        t_prev, t_cur = t_cur, 2 * apply(t_cur) - t_prev
        out = out + 2 * (-1j) ** k * bessel[k] * t_cur
        if k > x and abs(bessel[k]) < tol:
            break
    return np.exp(-1j * centre * t) * out


def evolve_vacuum(k, fock, t=1.0, method="chebyshev"):
    """exp(t K^)|J>. Large truncations use a Chebyshev series (K^ is anti-Hermitian) or expm_multiply."""
    op = quad_operator(k, fock)
    if sp.issparse(op):
        if method == "chebyshev":
            return chebyshev_expm_antihermitian(op, fock.vacuum, t)
        return expm_multiply(t * op.tocsc(), fock.vacuum)
    return expm(t * op) @ fock.vacuum


def _even_sector(fock):
    """Basis states with even total occupation; quadratic K^ never leaves this sector from |J>."""
    levels = np.indices((fock.cutoff,) * fock.n_modes).reshape(fock.n_modes, -1)
    return np.flatnonzero(levels.sum(axis=0) % 2 == 0)


def truncated_amplitude(k, kahler, cutoff):
    """Bosonic <J|exp(K^)|J> at one cutoff, without the doubling certificate."""
    fock = build_fock(kahler, cutoff)
    op = quad_operator(k, fock)
    if not sp.issparse(op):
        return complex((expm(op) @ fock.vacuum)[0])
    keep = _even_sector(fock)
    sub = op.tocsr()[keep][:, keep]
    vac = fock.vacuum[keep]
    return complex(chebyshev_expm_antihermitian(sub, vac)[0])


def exact_expectation(k, kahler, cutoff=None, conv_tol=1e-7):
    """<J|exp(K^)|J>. Bosons: truncated Fock, certified by cutoff doubling."""
    if kahler.is_boson:
        cutoff = cutoff or 120
        a = truncated_amplitude(k, kahler, cutoff)
        b = truncated_amplitude(k, kahler, 2 * cutoff)
        if abs(a - b) > conv_tol:
            raise TruncationNotConverged(f"cutoff {cutoff} vs {2 * cutoff}: difference {abs(a - b):.3e}")
        return b
    fock = build_fock(kahler)
    return complex(evolve_vacuum(k, fock)[0])


def exact_conjugation_check(k, fock):
    """max_a || [K^, xi^a] + K^a_b xi^b ||, restricted to safe levels for bosons."""
    k = np.asarray(getattr(k, "k", k), float)
    kh = quad_operator(k, fock)
    mask = fock.safe_mask()
    worst = 0.0
    for a in range(len(fock.xi)):
        lhs = kh @ fock.xi[a] - fock.xi[a] @ kh
        for b in range(len(fock.xi)):
            if k[a, b] != 0:
                lhs = lhs + k[a, b] * fock.xi[b]
        lhs = lhs.toarray() if sp.issparse(lhs) else lhs
        worst = max(worst, float(np.max(np.abs(lhs[np.ix_(mask, mask)]), initial=0.0)))
    return worst


def gaussian_amplitude_ode(k, kahler, t_grid=(1.0,), rtol=1e-12, atol=1e-13):
    """Bosonic <J|exp(t K^)|J> from the Riccati flow of exp(t K^)|J> = c exp(a^+ Z a^+ / 2)|J>.

    With K^ = a^+ P a^+ / 2 + a^+ Q a + a R a / 2 + s (normal ordered):
    dZ/dt = P + Q Z + Z Q^T + Z R Z and d log c/dt = tr(R Z)/2 + s.
    Independent of truncation and of any branch choice; returns one value per t.
    """
    if not kahler.is_boson or not kahler.is_standard:
        raise ValueError("Riccati oracle requires bosons in the standard basis")
    k = np.asarray(getattr(k, "k", k), float)
    n = kahler.n_modes
    h = kahler.omega_inv @ k
    h = (h + h.T) / 2
    eye = np.eye(n)
    wa = np.vstack([eye, -1j * eye]) / np.sqrt(2)  # xi = wa a + wd a^+
    wd = np.vstack([eye, 1j * eye]) / np.sqrt(2)
    pmat = -1j * wd.T @ h @ wd
    rmat = -1j * wa.T @ h @ wa
    qmat = -1j * wd.T @ h @ wa
    s = -0.5j * np.trace(wa.T @ h @ wd)

    def rhs(_, y):
        z = y[: n * n].reshape(n, n)
        dz = pmat + qmat @ z + z @ qmat.T + z @ rmat @ z
        dl = 0.5 * np.trace(rmat @ z) + s
        return np.concatenate([dz.ravel(), [dl]])

    t_grid = np.atleast_1d(np.asarray(t_grid, float))
    y0 = np.zeros(n * n + 1, complex)
    t_end = float(np.max(t_grid)) if len(t_grid) else 0.0
    if t_end == 0:
        return np.ones(len(t_grid), complex)
    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", t_eval=np.sort(t_grid), rtol=rtol, atol=atol)
    order = np.argsort(np.argsort(t_grid))
    logc = sol.y[-1][order]
    return np.exp(logc)
