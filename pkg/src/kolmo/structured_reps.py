"""Representations carried by structured kernels.

* GNS representations of the matrix algebra M_n from a density matrix.
* Unitary representations of finite groups from left-invariant kernels.
* Gabor type unitary pairs (UV = lambda VU) from kernels on the torus
  Z_q x Z_q, for lambda a q-th root of unity.
* Intertwiners that respect the group or Gabor structure.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import numlin
from .errors import (
    IncompatibleKernel,
    NonPeriodic,
    NotGroupKernel,
    NotInvariant,
    NotPositiveDefinite,
    ValidationError,
)
from .kernel import (
    BiKernel,
    FiniteKernel,
    KernelOperator,
    intertwiner,
    is_positive_definite,
    kernel_from_vectors,
    kolmogorov_decompose,
)

INVARIANCE_TOL = 1e-10


# --------------------------------------------------------------------- groups

@dataclass(frozen=True)
class FiniteGroup:
    cayley: np.ndarray  # cayley[a, b] = index of a*b

    def __post_init__(self):
        table = np.asarray(self.cayley, dtype=int)
        n = table.shape[0]
        if table.shape != (n, n) or n == 0:
            raise ValidationError("Cayley table must be a non-empty square")
        if table.min() < 0 or table.max() >= n:
            raise ValidationError("Cayley entries out of range")
        ident = [e for e in range(n)
                 if np.array_equal(table[e], np.arange(n))
                 and np.array_equal(table[:, e], np.arange(n))]
        if len(ident) != 1:
            raise ValidationError("Cayley table has no unique identity")
        e = ident[0]
        inv = np.full(n, -1)
        for a in range(n):
            hits = np.nonzero(table[a] == e)[0]
            if len(hits) != 1 or table[hits[0], a] != e:
                raise ValidationError("element %d has no two-sided inverse" % a)
            inv[a] = hits[0]
        # associativity, exhaustively
        lhs = table[table[:, :, None], np.arange(n)[None, None, :]]  # (ab)c
        rhs = table[np.arange(n)[:, None, None], table[None, :, :]]  # a(bc)
        if not np.array_equal(lhs, rhs):
            raise ValidationError("Cayley table is not associative")
        table.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "cayley", table)
        object.__setattr__(self, "identity", e)
        object.__setattr__(self, "inverse", inv)

    @property
    def order(self):
        return self.cayley.shape[0]

    def mul(self, a, b):
        return int(self.cayley[a, b])

    def labels(self):
        return tuple(str(g) for g in range(self.order))


def cyclic_group(n):
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n)


def symmetric_group(k):
    perms = list(itertools.permutations(range(k)))
    pos = {p: i for i, p in enumerate(perms)}
    table = [[pos[tuple(a[b[i]] for i in range(k))] for b in perms] for a in perms]
    return FiniteGroup(np.array(table))


@dataclass(frozen=True)
class GroupRep:
    group: FiniteGroup
    dim: int
    matrices: tuple
    cyclic: np.ndarray

    def check(self, tol=1e-9):
        """Max defect over unitarity, homomorphism and cyclicity."""
        g = self.group
        eye = np.eye(self.dim)
        defect = 0.0
        for m in self.matrices:
            defect = max(defect, numlin.max_abs(m.conj().T @ m - eye))
        for a in range(g.order):
            for b in range(g.order):
                prod = self.matrices[a] @ self.matrices[b]
                defect = max(defect, numlin.max_abs(prod - self.matrices[g.mul(a, b)]))
        if self.dim:
            orbit = np.column_stack([m @ self.cyclic for m in self.matrices])
            if numlin.rank(orbit, 1e-9) != self.dim:
                defect = max(defect, 1.0)
        return defect


def check_group_kernel(g: FiniteGroup, k: FiniteKernel, tol=1e-12) -> bool:
    """Left invariance K(zx, zy) = K(x, y) plus positive definiteness."""
    if len(k) != g.order:
        return False
    gram = k.gram
    scale = max(1.0, numlin.max_abs(gram))
    for z in range(g.order):
        perm = g.cayley[z]
        if numlin.max_abs(gram[np.ix_(perm, perm)] - gram) > tol * scale:
            return False
    return is_positive_definite(k)


def positive_type_function(g: FiniteGroup, k: FiniteKernel):
    if not check_group_kernel(g, k):
        raise NotGroupKernel("kernel is not a left-invariant positive definite map")
    return k.gram[:, g.identity].copy()


def _left_regular_matrices(g: FiniteGroup):
    n = g.order
    mats = []
    for x in range(n):
        m = np.zeros((n, n), dtype=np.complex128)
        m[g.cayley[x], np.arange(n)] = 1.0
        mats.append(m)
    return mats


def group_representation(g: FiniteGroup, k: FiniteKernel) -> GroupRep:
    """pi_K(x) v_K(y) = v_K(xy) on the Kolmogorov space of K."""
    if not check_group_kernel(g, k, INVARIANCE_TOL):
        raise NotGroupKernel("kernel is not a left-invariant positive definite map")
    d = kolmogorov_decompose(k)
    v = d.vectors
    vp = numlin.pinv(v)
    mats = tuple(v[:, g.cayley[x]] @ vp for x in range(g.order))
    return GroupRep(g, d.rank, mats, v[:, g.identity].copy())


def left_regular_rep(g: FiniteGroup) -> GroupRep:
    xi = np.zeros(g.order, dtype=np.complex128)
    xi[g.identity] = 1.0
    return GroupRep(g, g.order, tuple(_left_regular_matrices(g)), xi)


def orbit_kernel(rep: GroupRep, eta) -> FiniteKernel:
    """K(x, y) = <pi(x) eta, pi(y) eta>."""
    eta = np.asarray(eta, dtype=np.complex128)
    vecs = np.column_stack([m @ eta for m in rep.matrices])
    return kernel_from_vectors(rep.group.labels(), vecs)


def group_intertwiner(l: BiKernel, k: FiniteKernel, kprime: FiniteKernel,
                      g: FiniteGroup, tol=1e-8) -> KernelOperator:
    """Intertwiner of pi_K and pi_K' built from an invariant L.

    After construction the commutation S pi_K(x) = pi_K'(x) S is verified
    for every x.
    """
    vals = l.values
    scale = max(1.0, numlin.max_abs(vals))
    for z in range(g.order):
        p = g.cayley[z]
        if numlin.max_abs(vals[np.ix_(p, p)] - vals) > INVARIANCE_TOL * scale:
            raise NotInvariant("L(zx, zy) != L(x, y) for z = %d" % z)
    s = intertwiner(l, k, kprime)
    rk = group_representation(g, k)
    rkp = group_representation(g, kprime)
    for x in range(g.order):
        lhs = s.matrix @ rk.matrices[x]
        rhs = rkp.matrices[x] @ s.matrix
        if lhs.size and numlin.max_abs(lhs - rhs) > tol:
            raise NotInvariant("intertwiner fails to commute at x = %d" % x)
    return s


# ------------------------------------------------------------------------ GNS

@dataclass(frozen=True)
class StateFunctional:
    rho: np.ndarray

    def __post_init__(self):
        rho = numlin.as_matrix(self.rho)
        if not numlin.is_hermitian(rho, 1e-12):
            raise ValidationError("density matrix must be Hermitian")
        w, _ = numlin.hermitian_eigen(rho)
        if w.size and w[-1] < -1e-12:
            raise NotPositiveDefinite("density matrix has eigenvalue %.3g" % w[-1])
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def n(self):
        return self.rho.shape[0]

    def __call__(self, x):
        return complex(np.trace(self.rho @ x))


def matrix_unit(n, p, q):
    e = np.zeros((n, n), dtype=np.complex128)
    e[p, q] = 1.0
    return e


@dataclass(frozen=True)
class GNSRep:
    n: int
    dim: int
    unit_ops: dict  # (p, q) -> pi(E_pq)
    xi0: np.ndarray
    kernel: FiniteKernel

    def pi(self, x):
        x = np.asarray(x, dtype=np.complex128)
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for (p, q), op in self.unit_ops.items():
            if x[p, q] != 0:
                out = out + x[p, q] * op
        return out


def gns_construct(phi: StateFunctional) -> GNSRep:
    """GNS triple of phi(x) = tr(rho x) built over the matrix units.

    K(E_ij, E_kl) = phi(E_kl^* E_ij) = delta_ki rho_jl, and pi(E_ab) acts
    by pi(E_ab) v(E_ij) = delta_bi v(E_aj).
    """
    n = phi.n
    units = [(i, j) for i in range(n) for j in range(n)]
    labels = ["E%d%d" % u for u in units]
    pos = {u: s for s, u in enumerate(units)}
    gram = np.zeros((n * n, n * n), dtype=np.complex128)
    for (i, j), s in pos.items():
        for (k, l), t in pos.items():
            if k == i:
                gram[s, t] = phi.rho[j, l]
    kern = FiniteKernel(labels, gram)
    try:
        dec = kolmogorov_decompose(kern)
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite("functional is not positive") from exc
    v = dec.vectors
    vp = numlin.pinv(v) if dec.rank else np.zeros((n * n, 0))
    ops = {}
    for a, b in units:
        m = np.zeros((n * n, n * n), dtype=np.complex128)
        for j in range(n):
            m[pos[(a, j)], pos[(b, j)]] = 1.0
        ops[(a, b)] = v @ m @ vp
    xi0 = sum((v[:, pos[(p, p)]] for p in range(n)),
              np.zeros(dec.rank, dtype=np.complex128))
    rep = GNSRep(n, dec.rank, ops, xi0, kern)
    _verify_gns(rep, phi)
    return rep


def _verify_gns(rep: GNSRep, phi: StateFunctional, tol=1e-9):
    from .errors import NumericalError

    n = rep.n
    for (p, q), op in rep.unit_ops.items():
        val = np.vdot(rep.xi0, op @ rep.xi0)
        if abs(val - phi.rho[q, p]) > tol:
            raise NumericalError("<pi(E_%d%d) xi0, xi0> != phi(E_%d%d)" % (p, q, p, q))
        for (r, s), op2 in rep.unit_ops.items():
            prod = matrix_unit(n, p, q) @ matrix_unit(n, r, s)
            if rep.dim and numlin.max_abs(op @ op2 - rep.pi(prod)) > tol:
                raise NumericalError("pi is not multiplicative on matrix units")


# ---------------------------------------------------------------------- Gabor

@dataclass(frozen=True)
class GaborSystem:
    lam: complex
    dim: int
    U: np.ndarray
    V: np.ndarray
    xi0: np.ndarray

    def commutation_defect(self):
        if self.dim == 0:
            return 0.0
        return numlin.max_abs(self.U @ self.V - self.lam * self.V @ self.U)

    def unitarity_defect(self):
        if self.dim == 0:
            return 0.0
        eye = np.eye(self.dim)
        return max(numlin.max_abs(self.U.conj().T @ self.U - eye),
                   numlin.max_abs(self.V.conj().T @ self.V - eye))

    def orbit(self, m, n, vec=None):
        vec = self.xi0 if vec is None else vec
        return (np.linalg.matrix_power(self.U, m)
                @ np.linalg.matrix_power(self.V, n) @ vec)


def torus_labels(q):
    return tuple("%d,%d" % (m, n) for m in range(q) for n in range(q))


def torus_size(k: FiniteKernel):
    q = int(round(np.sqrt(len(k))))
    if q * q != len(k) or k.points != torus_labels(q):
        raise ValidationError("kernel points must be the torus labels 'm,n' for Z_q x Z_q")
    return q


def root_order(lam, qmax, tol=1e-10):
    """Smallest q <= qmax with lam**q == 1, else None."""
    for q in range(1, qmax + 1):
        if abs(lam ** q - 1.0) <= tol:
            return q
    return None


def gabor_relation_defect(values, q, lam):
    """Max violation of the two torus covariance relations for a q^2 x q^2 array."""
    idx = np.arange(q * q).reshape(q, q)
    ms = np.repeat(np.arange(q), q)
    shift_m = np.roll(idx, -1, axis=0).ravel()  # (m+1, n)
    shift_n = np.roll(idx, -1, axis=1).ravel()  # (m, n+1)
    d1 = numlin.max_abs(values[np.ix_(shift_m, shift_m)] - values)
    phase = lam ** (ms[:, None] - ms[None, :])
    d2 = numlin.max_abs(values[np.ix_(shift_n, shift_n)] - phase * values)
    return max(d1, d2)


def _check_lambda(lam, q):
    if abs(abs(lam) - 1.0) > 1e-12:
        raise NonPeriodic("lambda must be unimodular")
    if root_order(lam, q) is None or abs(lam ** q - 1.0) > 1e-10:
        raise NonPeriodic("lambda is not a root of unity of order dividing %d" % q)


def gabor_from_kernel(k: FiniteKernel, lam) -> GaborSystem:
    """Unitaries U v(m,n) = v(m+1,n), V v(m,n) = lam^-m v(m,n+1) on H_K."""
    lam = complex(lam)
    q = torus_size(k)
    _check_lambda(lam, q)
    scale = max(1.0, numlin.max_abs(k.gram))
    if gabor_relation_defect(k.gram, q, lam) > INVARIANCE_TOL * scale:
        raise IncompatibleKernel("kernel violates the Gabor covariance relations")
    dec = kolmogorov_decompose(k)
    v = dec.vectors
    if dec.rank == 0:
        z = np.zeros((0, 0), dtype=np.complex128)
        return GaborSystem(lam, 0, z, z, np.zeros(0, dtype=np.complex128))
    idx = np.arange(q * q).reshape(q, q)
    shift_m = np.roll(idx, -1, axis=0).ravel()
    shift_n = np.roll(idx, -1, axis=1).ravel()
    ms = np.repeat(np.arange(q), q)
    vp = numlin.pinv(v)
    u_op = v[:, shift_m] @ vp
    v_op = (v[:, shift_n] * lam ** (-ms)) @ vp
    return GaborSystem(lam, dec.rank, u_op, v_op, v[:, 0].copy())


def kernel_from_gabor(s: GaborSystem, q) -> FiniteKernel:
    """K((m,n),(m',n')) = <U^m V^n xi0, U^m' V^n' xi0> over Z_q x Z_q."""
    if s.dim == 0:
        return FiniteKernel(torus_labels(q), np.zeros((q * q, q * q)))
    vecs = np.column_stack([s.orbit(m, n) for m in range(q) for n in range(q)])
    return kernel_from_vectors(torus_labels(q), vecs)


def delta_gabor(lam, q) -> GaborSystem:
    return gabor_from_kernel(FiniteKernel(torus_labels(q), np.eye(q * q)), lam)


def gabor_intertwiner(l: BiKernel, k: FiniteKernel, kprime: FiniteKernel,
                      lam, tol=1e-8) -> KernelOperator:
    """Intertwiner commuting with both Gabor pairs, built from a covariant L."""
    lam = complex(lam)
    q = torus_size(k)
    torus_size(kprime)
    scale = max(1.0, numlin.max_abs(l.values))
    if gabor_relation_defect(l.values, q, lam) > INVARIANCE_TOL * scale:
        raise NotInvariant("L violates the Gabor covariance relations")
    s = intertwiner(l, k, kprime)
    gk = gabor_from_kernel(k, lam)
    gkp = gabor_from_kernel(kprime, lam)
    if s.matrix.size:
        du = numlin.max_abs(s.matrix @ gk.U - gkp.U @ s.matrix)
        dv = numlin.max_abs(s.matrix @ gk.V - gkp.V @ s.matrix)
        if max(du, dv) > tol:
            raise NotInvariant("intertwiner fails to commute with U, V")
    return s
