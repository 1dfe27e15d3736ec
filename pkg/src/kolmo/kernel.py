"""Positive-definite kernels on finite point sets.

Conventions: ``gram[i, j] = K(x_i, x_j)`` and the inner product is linear
in its first slot, ``<a, b> = b^H a``.  A decomposition stores the vectors
``v_K(x_i)`` as the columns of ``V`` so that ``K(x_i, x_j) = v_j^H v_i``,
i.e. ``gram = V^T conj(V)``.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import numlin
from .errors import (
    DimensionMismatch,
    LabelMismatch,
    NotDominated,
    NotPositiveDefinite,
    PointMismatch,
    Unbounded,
    ValidationError,
)

DEFAULT_TOL = numlin.DEFAULT_TOL


@dataclass(frozen=True)
class FiniteKernel:
    points: tuple
    gram: np.ndarray

    def __post_init__(self):
        pts = tuple(str(p) for p in self.points)
        g = numlin.as_matrix(self.gram)
        if len(set(pts)) != len(pts):
            raise ValidationError("kernel labels must be unique")
        if g.shape != (len(pts), len(pts)):
            raise DimensionMismatch(
                "gram shape %r does not match %d points" % (g.shape, len(pts)))
        if not numlin.is_hermitian(g, 1e-12):
            raise ValidationError("gram matrix is not Hermitian within 1e-12")
        g.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "gram", g)

    def __len__(self):
        return len(self.points)

    def index(self, label):
        return self.points.index(str(label))


@dataclass(frozen=True)
class Decomposition:
    points: tuple
    rank: int
    vectors: np.ndarray  # r x n, column i is v_K(points[i])

    def gram(self):
        v = self.vectors
        return v.T @ v.conj()

    def vector(self, label):
        return self.vectors[:, self.points.index(str(label))]


@dataclass(frozen=True)
class BiKernel:
    left_points: tuple
    right_points: tuple
    values: np.ndarray

    def __post_init__(self):
        lp = tuple(str(p) for p in self.left_points)
        rp = tuple(str(p) for p in self.right_points)
        vals = numlin.as_matrix(self.values)
        if vals.shape != (len(lp), len(rp)):
            raise DimensionMismatch(
                "values shape %r does not match %d x %d points"
                % (vals.shape, len(lp), len(rp)))
        vals.setflags(write=False)
        object.__setattr__(self, "left_points", lp)
        object.__setattr__(self, "right_points", rp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_kernel(cls, k: FiniteKernel):
        return cls(k.points, k.points, k.gram)


@dataclass(frozen=True)
class KernelOperator:
    source: Decomposition
    target: Decomposition
    matrix: np.ndarray  # r_target x r_source

    def __post_init__(self):
        shape = (self.target.rank, self.source.rank)
        if self.matrix.shape != shape:
            raise DimensionMismatch("operator shape %r, expected %r"
                                    % (self.matrix.shape, shape))


def delta_gram(n):
    return np.eye(n, dtype=np.complex128)


def _eigen(gram):
    return numlin.hermitian_eigen(gram, 1e-12)


def is_positive_definite(k: FiniteKernel, tol=DEFAULT_TOL) -> bool:
    if len(k) == 0:
        return True
    w, _ = _eigen(k.gram)
    return bool(w[-1] >= -tol * max(1.0, w[0]))


def kolmogorov_decompose(k: FiniteKernel, tol=DEFAULT_TOL) -> Decomposition:
    """Minimal-rank vectors v_K(x) with <v_K(x), v_K(y)> = K(x, y).

    Eigenpairs with eigenvalue above ``tol * lambda_max`` are kept; the
    coordinates of v_K(x_i) are sqrt(lambda_r) * q_r[i].
    """
    n = len(k)
    if n == 0:
        return Decomposition((), 0, np.zeros((0, 0), dtype=np.complex128))
    w, q = _eigen(k.gram)
    if w[-1] < -tol * max(1.0, w[0]):
        raise NotPositiveDefinite(
            "smallest Gram eigenvalue %.3g is negative" % w[-1])
    if w[0] <= 0.0:
        return Decomposition(k.points, 0, np.zeros((0, n), dtype=np.complex128))
    keep = w > tol * w[0]
    vectors = np.sqrt(w[keep])[:, None] * q[:, keep].T
    return Decomposition(k.points, int(keep.sum()), vectors)


def unitary_equivalence(d1: Decomposition, d2: Decomposition,
                        tol=1e-9) -> Optional[np.ndarray]:
    """Unitary W with W v1(x) = v2(x) for every x, or None if the Grams differ.

    The map is pinned down on span{v1(x)}, which is all of C^r for minimal
    decompositions.  Ranks must agree for a unitary to exist.
    """
    if d1.points != d2.points:
        raise LabelMismatch("decompositions are over different point lists")
    g1, g2 = d1.gram(), d2.gram()
    if g1.size and numlin.max_abs(g1 - g2) > tol:
        return None
    if d1.rank != d2.rank:
        return None
    if d1.rank == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    w = d2.vectors @ numlin.pinv(d1.vectors)
    return w


def _check_same_points(a: FiniteKernel, b: FiniteKernel):
    if a.points != b.points:
        raise PointMismatch("kernels are over different point lists")


def _whitener(gram, tol):
    """pinv(sqrt(gram)) together with an orthonormal basis of null(gram).

    Both come from one eigendecomposition with one rank cutoff; taking the
    square root first would lift roundoff eigenvalues above the cutoff.
    """
    w, q = _eigen(gram)
    if w.size == 0 or w[0] <= 0:
        n = len(gram)
        return np.zeros((n, n), dtype=np.complex128), np.eye(n, dtype=np.complex128)
    keep = w > tol * w[0]
    qk = q[:, keep]
    white = (qk / np.sqrt(w[keep])) @ qk.conj().T
    return white, q[:, ~keep]


def dominance_constant(kprime: FiniteKernel, k: FiniteKernel,
                       tol=DEFAULT_TOL) -> Optional[float]:
    """Least c >= 0 with c*K - K' positive semidefinite; None if none exists."""
    _check_same_points(kprime, k)
    if len(k) == 0:
        return 0.0
    white, null = _whitener(k.gram, tol)
    gp = kprime.gram
    scale = max(1.0, numlin.max_abs(gp))
    if null.shape[1]:
        # K' must vanish on null(K): for PSD K', z^H K' z = 0 iff K' z = 0
        if numlin.max_abs(gp @ null) > 1e-8 * scale:
            return None
    m = white @ gp @ white
    m = 0.5 * (m + m.conj().T)
    if not np.any(m):
        return 0.0
    w, _ = _eigen(m)
    return max(0.0, float(w[0]))


def bound_constant(l: BiKernel, k: FiniteKernel, kprime: FiniteKernel,
                   tol=DEFAULT_TOL) -> Optional[float]:
    """Least c with |a^H L b|^2 <= c (a^H K a)(b^H K' b); None when unbounded.

    Rows of L are indexed by k.points and columns by kprime.points.
    """
    vals = l.values
    if vals.shape != (len(k), len(kprime)):
        raise DimensionMismatch("bikernel %r vs kernels %d x %d"
                                % (vals.shape, len(k), len(kprime)))
    if l.left_points != k.points or l.right_points != kprime.points:
        raise DimensionMismatch("bikernel labels do not match the kernels")
    if vals.size == 0:
        return 0.0
    wk, nk = _whitener(k.gram, tol)
    wkp, nkp = _whitener(kprime.gram, tol)
    scale = max(1.0, numlin.max_abs(vals))
    if nk.shape[1] and numlin.max_abs(nk.conj().T @ vals) > 1e-8 * scale:
        return None
    if nkp.shape[1] and numlin.max_abs(vals @ nkp) > 1e-8 * scale:
        return None
    p = wk @ vals @ wkp
    return numlin.op_norm(p) ** 2


def _operator_from_bikernel(values, dk: Decomposition, dkp: Decomposition):
    # v'(y)^H S v(x) = L(x, y)  <=>  V'^H S V = L^T
    if dk.rank == 0 or dkp.rank == 0:
        return np.zeros((dkp.rank, dk.rank), dtype=np.complex128)
    return numlin.pinv(dkp.vectors.conj().T) @ values.T @ numlin.pinv(dk.vectors)


def intertwiner(l: BiKernel, k: FiniteKernel, kprime: FiniteKernel,
                tol=DEFAULT_TOL) -> KernelOperator:
    """The bounded S: H_K -> H_K' with <S v_K(x), v_K'(y)> = L(x, y)."""
    c = bound_constant(l, k, kprime, tol)
    if c is None:
        raise Unbounded("L does not vanish on the null spaces of K, K'")
    dk = kolmogorov_decompose(k, tol)
    dkp = kolmogorov_decompose(kprime, tol)
    s = _operator_from_bikernel(l.values, dk, dkp)
    return KernelOperator(dk, dkp, s)


def operator_to_kernel(s: KernelOperator) -> BiKernel:
    """L(x, y) = <S v_K(x), v_K'(y)>."""
    src, tgt = s.source, s.target
    values = (tgt.vectors.conj().T @ s.matrix @ src.vectors).T
    return BiKernel(src.points, tgt.points, values)


def positive_intertwiner(kprime: FiniteKernel, k: FiniteKernel,
                         tol=DEFAULT_TOL) -> KernelOperator:
    """The positive S on H_K with <S v_K(x), v_K(y)> = K'(x, y)."""
    c = dominance_constant(kprime, k, tol)
    if c is None:
        raise NotDominated("K' is not dominated by any multiple of K")
    dk = kolmogorov_decompose(k, tol)
    s = _operator_from_bikernel(kprime.gram, dk, dk)
    s = 0.5 * (s + s.conj().T)
    return KernelOperator(dk, dk, s)


def kernel_from_vectors(points: Sequence, vectors) -> FiniteKernel:
    """Gram kernel K(x_i, x_j) = <v_i, v_j> of the columns of ``vectors``."""
    v = numlin.as_matrix(vectors)
    g = v.T @ v.conj()
    return FiniteKernel(tuple(points), 0.5 * (g + g.conj().T))
