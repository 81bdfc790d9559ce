"""Real symplectic normal form of a bosonic generator and the Jordan-Chevalley split.

In the normal-form basis (columns of S, ordered q_1..q_N, p_1..p_N) the
symplectic form is standard and S^{-1} K S = [[O_I, O_R], [O_L, -O_I^T]] is a
direct sum of the blocks below, each attached to a set of mode indices:

  class 1  real pair +-mu, Jordan size D        O_I = mu + subdiagonal ones
  class 2  quadruplet +-mu +- i nu, size D       O_I = real Jordan form (2D modes)
  class 3  zero, D even (only D = 2)             O_L = -sigma  (K = [[0, 0], [-sigma, 0]])
  class 4  zero, D odd (only D = 1)              K = 0
  class 5  +-i nu, D even (only D = 2)           O_R, O_L as in the block table
  class 6  +-i nu, D odd (only D = 1)            K = s nu [[0, 1], [-1, 0]], s = i sigma = +-1

sigma for class 6 is stored as the real sign s = i sigma. Self-paired blocks
with longer Jordan chains raise IllConditioned.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import least_squares

from .complexify import complex_matrix
from .errors import IllConditioned, InvariantViolation
from .phase_space import block_form

CLUSTER_TOL = 1e-5
RANK_TOL = 1e-8
COND_MAX = 1e8
EPS_START = 0.5
EPS_MIN = 1e-6
BRANCH_DISTANCE = 0.1


@dataclass(frozen=True)
class BlockDescriptor:
    class_c: int
    eigenvalue: complex
    jordan_dim: int
    sigma: float = 1.0
    index_range: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        c, d = self.class_c, self.jordan_dim
        ok = {1: d >= 1, 2: d >= 1, 3: d % 2 == 0, 4: d % 2 == 1, 5: d % 2 == 0, 6: d % 2 == 1}
        if c not in ok or not ok[c]:
            raise InvariantViolation(f"class {c} incompatible with Jordan dimension {d}")

    @property
    def n_modes(self):
        return {1: self.jordan_dim, 2: 2 * self.jordan_dim, 3: self.jordan_dim // 2}.get(self.class_c, self.jordan_dim)

    def table_blocks(self):
        """(I_I, I_R, I_L) for this block."""
        d = self.jordan_dim
        lam = complex(self.eigenvalue)
        mu, nu, s = lam.real, lam.imag, self.sigma
        m = self.n_modes
        z = np.zeros((m, m))
        sub = np.eye(m, k=-1)
        if self.class_c == 1:
            return mu * np.eye(d) + sub, z, z
        if self.class_c == 2:
            rot = np.array([[mu, nu], [-nu, mu]])
            ii = np.kron(np.eye(d), rot) + np.kron(np.eye(d, k=-1), np.eye(2))
            return ii, z, z
        if self.class_c == 3:
            il = z.copy()
            il[-1, -1] = s * (-1) ** (d // 2)
            return s * sub * self.scale, z, il * self.scale
        if self.class_c == 4:
            return sub, z, z
        if self.class_c == 5:
            anti = np.fliplr(np.eye(d))
            ir = nu * anti
            il = -nu * anti
            for i in range(d - 1):
                ir[d - 1 - i, i + 1] = (-1) ** i
                il[d - 2 - i, i] = (-1) ** (i + 1)
            return z, s * ir, s * il
        # class 6: s = i sigma
        alt = np.fliplr(np.diag([(-1) ** i for i in range(d)])) * nu
        return sub, s * alt, -s * alt

    def to_dict(self):
        lam = complex(self.eigenvalue)
        return {"class": self.class_c, "eigenvalue": [lam.real, lam.imag], "jordan_dim": self.jordan_dim,
                "sigma": self.sigma, "modes": list(self.index_range), "scale": self.scale}


@dataclass(frozen=True)
class NormalFormResult:
    s: np.ndarray
    blocks: list = field(default_factory=list)
    k_normal: np.ndarray = None

    @property
    def n_modes(self):
        return len(self.s) // 2

    def assemble(self):
        """Direct sum of the Table blocks placed at their mode indices."""
        return assemble(self.blocks, self.n_modes)

    def j_tilde(self):
        """The complex structure that is standard in this basis."""
        return self.s @ block_form(self.n_modes) @ np.linalg.inv(self.s)

    def to_dict(self):
        return {"s": self.s.tolist(), "k_normal": self.k_normal.tolist(),
                "blocks": [b.to_dict() for b in self.blocks]}


@dataclass(frozen=True)
class ChevalleySplit:
    k_imag: np.ndarray
    k_rest: np.ndarray


@dataclass(frozen=True)
class AdaptedReference:
    j_tilde: np.ndarray
    k_imag: np.ndarray
    k_rest: np.ndarray
    normal_form: NormalFormResult
    epsilon: float


def assemble(blocks, n):
    oi, orr, ol = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    for b in blocks:
        idx = np.array(b.index_range, int)
        ii, ir, il = b.table_blocks()
        oi[np.ix_(idx, idx)] = ii
        orr[np.ix_(idx, idx)] = ir
        ol[np.ix_(idx, idx)] = il
    return np.block([[oi, orr], [ol, -oi.T]])


def _k(k):
    return np.asarray(getattr(k, "k", k), float)


def _omega(kahler, n2):
    if kahler is None:
        return np.linalg.inv(block_form(n2 // 2))
    return kahler.omega_inv


# --- spectral data ----------------------------------------------------------

def _clusters(lam, tol):
    """Group eigenvalues closer than tol (transitively); returns list of index arrays."""
    n = len(lam)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(lam[i] - lam[j]) < tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def spectral_clusters(k):
    """List of (centre, multiplicity, orthonormal basis of the generalized eigenspace, spread)."""
    k = _k(k)
    lam = np.linalg.eigvals(k)
    scale = max(1.0, np.linalg.norm(k, 2))
    out = []
    for idx in _clusters(lam, CLUSTER_TOL * scale):
        c = complex(np.mean(lam[idx]))
        if abs(c.imag) < CLUSTER_TOL * scale:
            c = complex(c.real, 0.0)
        if abs(c.real) < CLUSTER_TOL * scale:
            c = complex(0.0, c.imag)
        m = len(idx)
        a = np.linalg.matrix_power(k - c * np.eye(len(k)), m)
        if c.imag == 0:
            a = a.real
        _, _, vh = np.linalg.svd(a)
        v = vh[-m:].conj().T
        spread = float(np.max(np.abs(lam[idx] - c))) if m > 1 else 0.0
        out.append((c, m, v, spread))
    return out


def jordan_chevalley(k):
    """K = K_I + K' with K_I the imaginary part of the semisimple part of K.

    Built from spectral projectors onto generalized eigenspaces; K_I has purely
    imaginary spectrum, commutes with K and K' has no nonzero imaginary eigenvalues.
    """
    k = _k(k)
    cl = spectral_clusters(k)
    basis = np.hstack([v for _, _, v, _ in cl])
    if np.linalg.cond(basis) > COND_MAX:
        raise IllConditioned("generalized eigenbasis is ill-conditioned")
    dual = np.linalg.inv(basis)
    k_imag = np.zeros(k.shape, complex)
    col = 0
    for c, m, v, _ in cl:
        k_imag += 1j * c.imag * (v @ dual[col:col + m])
        col += m
    if np.linalg.norm(k_imag.imag) > 1e-9 * max(1.0, np.linalg.norm(k)):
        raise IllConditioned("imaginary part of K_I not negligible")
    k_imag = k_imag.real
    return ChevalleySplit(k_imag=k_imag, k_rest=k - k_imag)


# --- Jordan chains ----------------------------------------------------------

def _orth_complement_vectors(cand, sub, count, tol):
    """count orthonormal-ish directions of span(cand) outside span(sub)."""
    if sub.shape[1]:
        qs, _ = np.linalg.qr(sub)
        cand = cand - qs @ (qs.conj().T @ cand)
    u, s, _ = np.linalg.svd(cand, full_matrices=False)
    if count > len(s) or (count and s[count - 1] < tol):
        raise IllConditioned("Jordan chain extraction failed")
    return u[:, :count]


def _null(a, tol):
    """Orthonormal basis of the numerical kernel, singular values below an absolute tol."""
    u, s, vh = np.linalg.svd(a)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def jordan_chains(nil, tol):
    """Chains (g, N g, N^2 g, ...) spanning the space of a nilpotent matrix N."""
    n = len(nil)
    if n == 0:
        return []
    powers = [np.eye(n, dtype=nil.dtype)]
    ranks = [n]
    while ranks[-1] > 0:
        powers.append(powers[-1] @ nil)
        s = np.linalg.svd(powers[-1], compute_uv=False)
        ranks.append(int(np.sum(s > tol)))
        if len(ranks) > n + 1:
            raise IllConditioned("matrix is not nilpotent at tolerance")
    ranks.append(0)
    chains = []
    for length in range(len(ranks) - 2, 0, -1):
        n_new = (ranks[length - 1] - ranks[length]) - (ranks[length] - ranks[length + 1])
        if n_new <= 0:
            continue
        ker = _null(powers[length], tol)
        ker_lo = _null(powers[length - 1], tol)
        existing = [ker_lo]
        for ch in chains:
            if len(ch) > length:
                existing.append(ch[len(ch) - length][:, None])
        sub = np.hstack(existing) if existing else np.zeros((n, 0))
        gens = _orth_complement_vectors(ker, sub, n_new, tol)
        for g in gens.T:
            ch = [g]
            for _ in range(length - 1):
                ch.append(nil @ ch[-1])
            chains.append(ch)
    return chains


# --- symplectic constructions -----------------------------------------------

def _w(x, y, om):
    return x @ om @ y


def symplectic_gram_schmidt(vecs, om):
    """Symplectic basis pairs (q, p) with q^T om p = -1 spanning the columns of vecs."""
    rest = [v for v in vecs.T]
    pairs = []
    while rest:
        q = rest.pop(0)
        vals = [abs(_w(q, y, om)) for y in rest]
        if not vals or max(vals) < RANK_TOL:
            raise IllConditioned("subspace is not symplectic")
        i = int(np.argmax(vals))
        y = rest.pop(i)
        p = -y / _w(q, y, om)
        new = []
        for z in rest:
            b = _w(z, q, om) / _w(p, q, om)
            a = _w(z, p, om) / _w(q, p, om)
            new.append(z - a * q - b * p)
        rest = new
        pairs.append((q, p))
    return pairs


def _real_span(v):
    r = np.hstack([v.real, v.imag])
    u, s, _ = np.linalg.svd(r, full_matrices=False)
    dim = 2 * v.shape[1]
    return u[:, :dim]


def _restrict(k, basis):
    return np.linalg.lstsq(basis, k @ basis, rcond=None)[0]


def _pair_family(k, plus, minus, lam, om, tol):
    """Classes 1/2: Jordan basis E of the mu > 0 part and its omega-dual F."""
    a = _restrict(k, plus)
    nil = a - lam * np.eye(len(a))
    chains = jordan_chains(nil, tol)
    cols, blocks, spans = [], [], []
    for ch in chains:
        vs = [plus @ c for c in ch]
        start = len(cols)
        if lam.imag == 0:
            cols += [v.real for v in vs]
            blocks.append((1, lam.real + 0j, len(ch), len(vs)))
        else:
            # a common phase making Re v and Im v orthogonal keeps S well conditioned
            rot = np.exp(-0.5j * np.angle(vs[0] @ vs[0]))
            for v in vs:
                cols += [(rot * v).real, (rot * v).imag]
            blocks.append((2, lam, len(ch), 2 * len(vs)))
        spans.append(slice(start, len(cols)))
    e = np.array(cols).T
    fm = minus
    if np.iscomplexobj(fm):
        fm = _real_span(fm)
    y = -np.linalg.inv(e.T @ om @ fm)
    f = fm @ y
    for sl in spans:
        c = np.sqrt(np.linalg.norm(f[:, sl]) / np.linalg.norm(e[:, sl]))
        e[:, sl] *= c
        f[:, sl] /= c
    return e, f, blocks


def _zero_family(k, v0, om, tol):
    """Classes 3 (D = 2) and 4 (D = 1) on the generalized kernel."""
    v0 = v0.real
    scale = max(1.0, np.linalg.norm(k, 2))
    if np.linalg.norm(k @ k @ v0) > tol * scale * 10:
        raise IllConditioned("nilpotent chains longer than 2 at eigenvalue 0 are not supported")
    q = v0.T @ om @ k @ v0
    q = (q + q.T) / 2
    ev, x = np.linalg.eigh(q)
    keep = np.abs(ev) > np.sqrt(tol) * scale
    us = [v0 @ x[:, i] / np.sqrt(abs(ev[i])) for i in np.where(keep)[0]]
    sig = [float(np.sign(ev[i])) for i in np.where(keep)[0]]
    ws = [k @ u for u in us]
    r = len(us)
    if r:
        wmat = np.array([[_w(us[i], us[j], om) for j in range(r)] for i in range(r)])
        us = [us[i] + sum(0.5 * wmat[i, j] * sig[j] * ws[j] for j in range(r)) for i in range(r)]
    qs, ps, blocks = [], [], []
    for u, w, s in zip(us, ws, sig):
        qs.append(-s * u)
        ps.append(w)
        blocks.append((3, 0j, 2, s))
    if v0.shape[1] > 2 * r:
        cons = np.array([om @ z for z in us + ws]).reshape(-1, len(k)) if r else np.zeros((0, len(k)))
        if r:
            comp = v0 @ null_space(cons @ v0)
        else:
            comp = v0
        for qq, pp in symplectic_gram_schmidt(comp, om):
            qs.append(qq)
            ps.append(pp)
            blocks.append((4, 0j, 1, 1.0))
    return qs, ps, blocks


def _class6(v, nu, om):
    h = -1j * (v.conj().T @ om @ v)
    h = (h + h.conj().T) / 2
    hv, u = np.linalg.eigh(h)
    qs, ps, blocks = [], [], []
    for i in range(len(hv)):
        if abs(hv[i]) < RANK_TOL:
            raise IllConditioned("degenerate Hermitian form on imaginary eigenspace")
        vec = v @ u[:, i] * np.sqrt(2 / abs(hv[i]))
        q, p = vec.real, vec.imag
        if _w(q, p, om) < 0:
            qs.append(q), ps.append(p), blocks.append((6, 1j * nu, 1, 1.0))
        else:
            qs.append(q), ps.append(-p), blocks.append((6, 1j * nu, 1, -1.0))
    return qs, ps, blocks


def _class5(k, v, nu, om):
    """Single class-5 block with D = 2, solved as a small constrained Sylvester problem."""
    if v.shape[1] != 2:
        raise IllConditioned("only a single class-5 block of Jordan size 2 is supported per eigenvalue")
    w = _real_span(v)
    pairs = symplectic_gram_schmidt(w, om)
    b = np.array([pairs[0][0], pairs[1][0], pairs[0][1], pairs[1][1]]).T
    kl = _restrict(k, b)
    om4 = np.linalg.inv(block_form(2))
    for s in (1.0, -1.0):
        desc = BlockDescriptor(5, 1j * nu, 2, s, (0, 1))
        tgt = assemble([desc], 2)
        lin = np.kron(np.eye(4), kl) - np.kron(tgt.T, np.eye(4))
        basis = null_space(lin, rcond=1e-9)
        if basis.shape[1] == 0:
            continue

        def resid(c):
            sm = (basis @ c).reshape(4, 4, order="F")
            return (sm.T @ om4 @ sm - om4).ravel()

        rng = np.random.default_rng(0)
        for _ in range(20):
            sol = least_squares(resid, rng.normal(size=basis.shape[1]), xtol=1e-15, ftol=1e-15, gtol=1e-15)
            if np.max(np.abs(sol.fun)) < 1e-10:
                sm = (basis @ sol.x).reshape(4, 4, order="F")
                full = b @ sm
                return [full[:, 0], full[:, 1]], [full[:, 2], full[:, 3]], [(5, 1j * nu, 2, s)]
    raise IllConditioned("no symplectic class-5 basis found")


def symplectic_normal_form(k, kahler=None):
    """Symplectic S with S^{-1} K S a direct sum of normal-form blocks."""
    k = _k(k)
    n2 = len(k)
    n = n2 // 2
    if kahler is not None and not kahler.is_boson:
        raise InvariantViolation("normal form applies to bosonic generators")
    om = _omega(kahler, n2)
    scale = max(1.0, np.linalg.norm(k, 2))
    if np.allclose(k, 0, atol=RANK_TOL * scale):
        s = np.eye(n2) if kahler is None else _std_basis(om)
        blocks = [BlockDescriptor(4, 0j, 1, 1.0, (i,)) for i in range(n)]
        return NormalFormResult(s=s, blocks=blocks, k_normal=np.linalg.solve(s, k @ s))
    cl = spectral_clusters(k)
    qs, ps, raw = [], [], []

    def tol_for(spread):
        return max(RANK_TOL * scale, 100 * spread)

    used = set()
    for i, (c, m, v, spread) in enumerate(cl):
        if i in used:
            continue
        if c == 0:
            used.add(i)
            q_, p_, b_ = _zero_family(k, v, om, tol_for(spread))
            qs += q_
            ps += p_
            raw += [(b, 1) for b in b_]
            continue
        if c.real == 0:
            partner = _find(cl, -c, used | {i})
            used |= {i, partner}
            if c.imag < 0:
                c, v = cl[partner][0], cl[partner][2]
            a = v.conj().T @ k @ v
            nil = a - c * np.eye(m)
            s_ = np.linalg.svd(nil, compute_uv=False)
            if s_[0] < tol_for(spread):
                q_, p_, b_ = _class6(v, c.imag, om)
            else:
                q_, p_, b_ = _class5(k, v, c.imag, om)
            qs += q_
            ps += p_
            raw += [(b, 1) for b in b_]
            continue
        # paired family: choose the member with mu > 0 (and nu >= 0)
        fam = {i}
        members = [i]
        for target in (-c, np.conj(c), -np.conj(c)):
            j = _find(cl, target, used | fam, optional=True)
            if j is not None:
                fam.add(j)
                members.append(j)
        used |= fam
        pos = [j for j in members if cl[j][0].real > 0]
        neg = [j for j in members if cl[j][0].real < 0]
        lead = max(pos, key=lambda j: cl[j][0].imag)
        lam, mplus, vplus, sp = cl[lead]
        if lam.imag == 0:
            plus = vplus.real
            minus = cl[neg[0]][2].real
        else:
            plus = vplus
            minus = cl[neg[0]][2]
        e, f, b_ = _pair_family(k, plus, minus, lam, om, tol_for(sp))
        qs += list(e.T)
        ps += list(f.T)
        raw += [(b, 0) for b in b_]
    if len(qs) != n:
        raise IllConditioned("normal form does not cover phase space")
    s = np.array(qs + ps).T
    blocks = []
    mode = 0
    for b, kind in raw:
        if kind == 0:
            cls, lam, d, nm = b
            desc = BlockDescriptor(cls, lam, d, 1.0, tuple(range(mode, mode + (d if cls == 1 else 2 * d))))
        else:
            cls, lam, d, sig = b
            desc = BlockDescriptor(cls, lam, d, sig, ())
            desc = replace(desc, index_range=tuple(range(mode, mode + desc.n_modes)))
        blocks.append(desc)
        mode += desc.n_modes
    sinv = np.linalg.solve(s, np.eye(n2))
    return NormalFormResult(s=s, blocks=blocks, k_normal=sinv @ k @ s)


def _std_basis(om):
    n2 = len(om)
    pairs = symplectic_gram_schmidt(np.eye(n2), om)
    return np.array([q for q, _ in pairs] + [p for _, p in pairs]).T


def _find(cl, target, exclude, optional=False):
    best, bi = np.inf, None
    for j, (c, _, _, _) in enumerate(cl):
        if j in exclude:
            continue
        d = abs(c - target)
        if d < best:
            best, bi = d, j
    if bi is None or best > 1e-4 * max(1.0, abs(target)):
        if optional:
            return None
        raise IllConditioned(f"no spectral partner for eigenvalue {target}")
    return bi


# --- rescaling and continuity ----------------------------------------------

def rescale_c3_blocks(nf, epsilon):
    """Conjugate class-3 blocks so their entries scale by epsilon (S stays symplectic)."""
    if not 0 < epsilon <= 1:
        raise InvariantViolation("epsilon must lie in (0, 1]")
    n = nf.n_modes
    diag = np.ones(2 * n)
    blocks = []
    for b in nf.blocks:
        if b.class_c == 3:
            d = b.n_modes
            for j, i in enumerate(b.index_range):
                e = epsilon ** ((d - 1) / 2 - j) if d > 1 else 1.0
                x = np.sqrt(epsilon) * e
                diag[i] *= x
                diag[n + i] /= x
            b = replace(b, scale=b.scale * epsilon)
        blocks.append(b)
    s = nf.s * diag
    return NormalFormResult(s=s, blocks=blocks, k_normal=(nf.k_normal * diag) / diag[:, None])


@dataclass(frozen=True)
class ContinuityReport:
    min_branch_distance: float
    crossings: int
    unpaired_crossings: int
    min_real_part: float
    needs_smaller_epsilon: bool


def _branch_distance(z):
    return np.where(z.real >= 0, np.abs(z), np.abs(z.imag))


def continuity_certificate(k_rest, j_tilde, n_grid=1000):
    """Sweep exp(t K') for t in [0, 1] and track eigenvalues of C relative to J~."""
    k_rest = _k(k_rest)
    j_tilde = np.asarray(j_tilde, float)
    ts = np.linspace(0.0, 1.0, n_grid)
    step = expm(k_rest / (n_grid - 1))
    m = np.eye(len(k_rest))
    prev = None
    dmin, rmin = np.inf, np.inf
    crossings = unpaired = 0
    for _ in ts:
        c = (m - j_tilde @ m @ j_tilde) / 2
        lam = np.linalg.eigvals(complex_matrix(c, j_tilde, check=False))
        dmin = min(dmin, float(np.min(_branch_distance(lam))))
        rmin = min(rmin, float(np.min(lam.real)))
        if prev is not None:
            order = _match(prev, lam)
            lam = lam[order]
            hits = 0
            for a, b in zip(prev, lam):
                if a.real < 0 and b.real < 0 and np.sign(a.imag) != np.sign(b.imag) and (a.imag != 0 or b.imag != 0):
                    hits += 1
            crossings += hits
            unpaired += hits % 2
        prev = lam
        m = m @ step
    return ContinuityReport(min_branch_distance=dmin, crossings=crossings, unpaired_crossings=unpaired,
                            min_real_part=rmin, needs_smaller_epsilon=dmin <= BRANCH_DISTANCE and rmin <= 0)


def _match(a, b):
    from scipy.optimize import linear_sum_assignment

    cost = np.abs(a[:, None] - b[None, :])
    _, col = linear_sum_assignment(cost)
    return col


def adapted_reference_boson(k, kahler=None, epsilon=None):
    """J~ standard in the (rescaled) normal-form basis of K, plus K = K_I + K'."""
    k = _k(k)
    nf = symplectic_normal_form(k, kahler)
    split = jordan_chevalley(k)
    eps = 1.0
    if any(b.class_c == 3 for b in nf.blocks):
        eps = EPS_START if epsilon is None else epsilon
        while True:
            cand = rescale_c3_blocks(nf, eps)
            rep = continuity_certificate(split.k_rest, cand.j_tilde(), n_grid=200)
            if epsilon is not None or rep.min_real_part > 0 and rep.min_branch_distance > BRANCH_DISTANCE or eps < EPS_MIN:
                break
            eps /= 2
        nf = cand
    return AdaptedReference(j_tilde=nf.j_tilde(), k_imag=split.k_imag, k_rest=split.k_rest, normal_form=nf, epsilon=eps)
