"""Double-cover elements (M, psi) with psi^2 = phi(M) relative to a reference J.

Multiplication twists the product of the psi's by exp(i eta/2); a change of
reference J -> J~ = T J T^{-1} conjugates by (T, psi_T). For fermions some
elements have no representative for a given J (the quasi-boundary), so
repair_reference searches for a reference where a whole batch is interior.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .cartan import boundary_margin, delta_function
from .circle_cocycle import branch_arg, circle, cocycle
from .errors import (DegeneratePair, FermionBoundary, InvalidTarget, InvariantViolation,
                     ReferenceMismatch, RepairFailed)
from .io import matrix_from_json, matrix_to_json
from .phase_space import KahlerStructure, compatible_j, group_inverse, project_to_group

PSI_TOL = 1e-9
REPAIR_THRESHOLD = 1e-6
REPAIR_STEP = 0.3
MAX_RETRIES = 25


def _mat(x):
    return np.asarray(getattr(x, "m", x), float)


@dataclass(frozen=True)
class CoverElement:
    m: np.ndarray
    psi: complex
    reference: KahlerStructure

    def __post_init__(self):
        m = _mat(self.m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "psi", complex(self.psi))
        phi = circle(m, self.reference)
        if abs(self.psi ** 2 - phi) > PSI_TOL * 10 or abs(abs(self.psi) - 1) > PSI_TOL * 10:
            raise InvariantViolation(f"psi^2 = {self.psi ** 2:.12g} differs from phi(M) = {phi:.12g}")

    @property
    def statistics(self):
        return self.reference.statistics

    def to_dict(self):
        st = self.reference.statistics
        return {"matrix": matrix_to_json(self.m, st), "psi": [self.psi.real, self.psi.imag],
                "reference_j": matrix_to_json(self.reference.j, st)}

    @classmethod
    def from_dict(cls, obj, kinematic=None):
        m, st = matrix_from_json(obj["matrix"])
        j, _ = matrix_from_json(obj["reference_j"])
        kah = KahlerStructure.from_j(j, st, kinematic)
        return cls(m, complex(*obj["psi"]), kah)


def sqrt_phase(z):
    """Principal root of a unit number e^{i t}, t in (-pi, pi]."""
    return np.exp(0.5j * branch_arg(z))


def lift(m, sheet, kahler):
    """(M, sheet * sqrt(phi(M)))."""
    if sheet not in (1, -1):
        raise InvariantViolation("sheet must be +1 or -1")
    return CoverElement(_mat(m), sheet * sqrt_phase(circle(_mat(m), kahler)), kahler)


def identity(kahler, sheet=1):
    return CoverElement(np.eye(kahler.dim), complex(sheet), kahler)


def lift_generator(k, kahler, steps=None):
    """The element exp(K^) itself: the sheet is fixed by continuation along exp(t K),
    multiplying lift(exp(K/steps)) steps times (small factors sit on the principal sheet)."""
    k = np.asarray(getattr(k, "k", k), float)
    if steps is None:
        steps = max(1, int(np.ceil(np.linalg.norm(k, 2) / 0.25)))
    small = lift(expm(k / steps), 1, kahler)
    out = small
    for _ in range(steps - 1):
        out = multiply(out, small)
    return out


def _check_same(a, b):
    if not a.reference.same_reference(b.reference):
        raise ReferenceMismatch("elements are anchored to different reference complex structures")


def multiply(a, b):
    """(M1 M2, psi1 psi2 exp(i eta(M1, M2)/2))."""
    _check_same(a, b)
    kah = a.reference
    eta = cocycle(a.m, b.m, kah).eta
    m = project_to_group(a.m @ b.m, kah)
    psi = a.psi * b.psi * np.exp(0.5j * eta)
    return CoverElement(m, psi / abs(psi), kah)


def inverse(a):
    return CoverElement(group_inverse(a.m, a.reference), np.conj(a.psi), a.reference)


def _as_kahler(new_j, old):
    if isinstance(new_j, KahlerStructure):
        if new_j.statistics is not old.statistics or not np.allclose(new_j.kinematic, old.kinematic, atol=1e-12):
            raise InvalidTarget("target reference has a different kinematic form or statistics")
        return new_j
    j = np.asarray(new_j, float)
    if not compatible_j(j, old):
        raise InvalidTarget("target J is not a complex structure compatible with the kinematic form")
    return old.with_j(j)


def _transfer(old, new):
    """(T, T^{-1}) with T = sqrt(-J~ J) so that J~ = T J T^{-1}."""
    delta = -new.j @ old.j
    if not old.is_boson and boundary_margin(None, old, delta=delta) < 1e-12:
        raise DegeneratePair("det(1 - J~ J) = 0: no principal square root connects the references")
    t, t_inv = delta_function(delta, old, [np.sqrt, lambda w: 1 / np.sqrt(w)])
    return t, t_inv


def migration_phase(m, old, new, order="left"):
    """exp(i (eta(T^-1, M) + eta(T^-1 M, T))/2), or the reverse-order form."""
    t, t_inv = _transfer(old, new)
    if order == "left":
        eta = cocycle(t_inv, m, old).eta + cocycle(t_inv @ m, t, old).eta
    else:
        eta = cocycle(m, t, old).eta + cocycle(t_inv, m @ t, old).eta
    return np.exp(0.5j * eta)


def migrate_reference(a, new_j, order="left"):
    """Re-express a over the reference J~; M is unchanged, psi picks up the switch phase."""
    old = a.reference
    new = _as_kahler(new_j, old)
    if new.same_reference(old):
        return a
    psi = a.psi * migration_phase(a.m, old, new, order)
    return CoverElement(a.m, psi, new)


# --- reference repair -------------------------------------------------------

def _orth_conjugate(j, a):
    r = expm(a)
    return r @ j @ r.T


def _perturbation(m, kahler, rng, step):
    """J~ = e^A J e^-A with A = -dJ J / 2 and dJ the block direction on the -1 eigenspace of Delta_M."""
    j = kahler.j
    delta = -m @ j @ m.T @ j
    n2 = len(j)
    w, v = np.linalg.eig(delta)
    sel = np.abs(w + 1) < 1e-4
    if np.sum(sel) < 4:
        sel = np.argsort(np.abs(w + 1))[:4]
    sub = v[:, sel]
    basis = np.linalg.qr(np.hstack([sub.real, sub.imag]))[0]
    u, s, _ = np.linalg.svd(basis, full_matrices=False)
    e_space = u[:, s > 1e-8][:, : max(4, int(np.sum(sel)))]
    e1 = e_space @ rng.normal(size=e_space.shape[1])
    e1 /= np.linalg.norm(e1)
    e3 = -j @ e1
    rest = e_space - np.outer(e1, e1 @ e_space) - np.outer(e3, e3 @ e_space)
    e2 = rest @ rng.normal(size=rest.shape[1])
    e2 /= np.linalg.norm(e2)
    e4 = -j @ e2
    b = np.array([e1, e2, e3, e4]).T
    blk = np.zeros((4, 4))
    blk[0, 1], blk[1, 0], blk[2, 3], blk[3, 2] = step, -step, -step, step
    dj = b @ blk @ b.T
    dj = (dj + j @ dj @ j) / 2
    gen = -0.5 * dj @ j
    gen = (gen - gen.T) / 2
    return _orth_conjugate(j, gen)


def _margins(mats, kahler):
    return [boundary_margin(m, kahler) for m in mats]


def _random_nearby(j, rng, size=0.05):
    a = rng.normal(size=j.shape) * size
    a = (a + j @ a @ j) / 2
    gen = -0.5 * (a - a.T) @ j
    gen = (gen - gen.T) / 2
    return _orth_conjugate(j, gen)


def _path(old, new, hops):
    """References along T^s J T^{-s}, s = 1/hops, ..., 1."""
    delta = -new.j @ old.j
    out = []
    for i in range(1, hops + 1):
        s = i / hops
        ts, ts_inv = delta_function(delta, old, [lambda w, s=s: w ** (s / 2), lambda w, s=s: w ** (-s / 2)])
        out.append(old.with_j(ts @ old.j @ ts_inv) if i < hops else new)
    return out


def migrate_along_path(a, new, threshold=REPAIR_THRESHOLD, max_hops=64):
    """migrate_reference through a sequence of nearby references."""
    hops = 1
    last = None
    while hops <= max_hops:
        try:
            cur = a
            for ref in _path(a.reference, new, hops):
                if not a.reference.is_boson and boundary_margin(cur.m, ref) < threshold:
                    raise FermionBoundary(boundary_margin(cur.m, ref))
                cur = migrate_reference(cur, ref)
            return cur
        except (DegeneratePair, FermionBoundary) as exc:
            last = exc
            hops *= 2
    raise RepairFailed(f"could not migrate along a path of references: {last}")


def repair_reference(elements, seed=0, kahler=None, products=(), threshold=REPAIR_THRESHOLD,
                     step=REPAIR_STEP, max_retries=MAX_RETRIES):
    """A reference where every element (and every requested pairwise product) is interior.

    products: index pairs (i, j) whose products M_i M_j must also be interior.
    Returns (new KahlerStructure, migrated elements).
    """
    if not elements:
        raise InvariantViolation("no elements to repair")
    start = kahler or elements[0].reference
    if start.is_boson:
        return start, [migrate_reference(e, start) for e in elements]
    rng = np.random.default_rng(seed)
    mats = [e.m for e in elements] + [elements[i].m @ elements[j].m for i, j in products]
    j = start.j
    for attempt in range(max_retries):
        ref = start.with_j(j)
        for _ in range(4 * len(mats)):
            margins = _margins(mats, ref)
            bad = [i for i, mg in enumerate(margins) if mg < threshold]
            if not bad:
                break
            ref = ref.with_j(_perturbation(mats[bad[0]], ref, rng, step))
        if min(_margins(mats, ref)) >= threshold:
            try:
                moved = [e if e.reference.same_reference(ref) else migrate_along_path(e, ref, threshold)
                         for e in elements]
                return ref, moved
            except RepairFailed:
                pass
        j = _random_nearby(start.j, rng, size=0.05 * (attempt + 1))
    raise RepairFailed(f"no admissible reference found after {max_retries} retries")
