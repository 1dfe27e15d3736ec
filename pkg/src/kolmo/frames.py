"""Frame bounds, normalized tight frames and their dilations.

A finite normalized tight frame (NTF) is exactly a family whose Gram
matrix is idempotent.  The dilations below embed such a family isometrically
into the Kolmogorov space of the Kronecker kernel, where it becomes the
compression of an orthonormal basis, and for group and Gabor systems the
embedding intertwines the structure.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numlin
from .errors import (
    DimensionMismatch,
    NonPeriodic,
    NotDominated,
    NotNTF,
    NotNTFVector,
    NotPositiveDefinite,
    NumericalError,
)
from .kernel import (
    FiniteKernel,
    dominance_constant,
    is_positive_definite,
    kolmogorov_decompose,
    positive_intertwiner,
)
from .structured_reps import (
    FiniteGroup,
    GaborSystem,
    GroupRep,
    delta_gabor,
    kernel_from_gabor,
    left_regular_rep,
    orbit_kernel,
    root_order,
)

CHECK_TOL = 1e-8


@dataclass(frozen=True)
class VectorFamily:
    dim: int
    vectors: tuple
    labels: tuple = ()

    def __post_init__(self):
        vecs = tuple(np.asarray(v, dtype=np.complex128).ravel() for v in self.vectors)
        for v in vecs:
            if v.shape != (self.dim,):
                raise DimensionMismatch("vector of length %d in C^%d" % (v.shape[0], self.dim))
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(vecs)))
        if len(labels) != len(vecs):
            raise DimensionMismatch("label count differs from vector count")
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "labels", labels)

    def matrix(self):
        if not self.vectors:
            return np.zeros((self.dim, 0), dtype=np.complex128)
        return np.column_stack(self.vectors)

    def kernel(self):
        m = self.matrix()
        g = m.T @ m.conj()
        return FiniteKernel(self.labels, 0.5 * (g + g.conj().T))


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    is_frame: bool


@dataclass(frozen=True)
class DilationResult:
    W: np.ndarray
    P: np.ndarray


def frame_bounds(f: VectorFamily) -> FrameBounds:
    """Extreme eigenvalues of the frame operator sum_i x_i x_i^*."""
    if f.dim == 0:
        return FrameBounds(0.0, 0.0, True)
    m = f.matrix()
    w, _ = numlin.hermitian_eigen(m @ m.conj().T)
    lower = max(0.0, float(w[-1]))
    upper = max(0.0, float(w[0]))
    is_frame = lower > 1e-10 * max(1.0, upper)
    return FrameBounds(lower if is_frame else 0.0, upper, is_frame)


def idempotency_defect(gram):
    g = np.asarray(gram)
    if g.size == 0:
        return 0.0
    return numlin.max_abs(g @ g - g)


def is_ntf_kernel(k: FiniteKernel, tol=1e-9) -> bool:
    """True iff the Gram matrix is idempotent, max|G^2 - G| <= tol*max(1, max|G|)."""
    if not is_positive_definite(k):
        raise NotPositiveDefinite("NTF test needs a positive definite kernel")
    scale = max(1.0, numlin.max_abs(k.gram))
    return idempotency_defect(k.gram) <= tol * scale


def delta_kernel(labels: Sequence) -> FiniteKernel:
    labels = tuple(labels)
    return FiniteKernel(labels, np.eye(len(labels), dtype=np.complex128))


def check_delta_domination(k: FiniteKernel) -> bool:
    """Executable witness that an NTF kernel is dominated by the delta kernel."""
    if not is_ntf_kernel(k):
        raise NotNTF("kernel Gram is not idempotent")
    w, _ = numlin.hermitian_eigen(np.eye(len(k)) - k.gram)
    return bool(w.size == 0 or w[-1] >= -1e-10)


def dilate_ntf(k: FiniteKernel, kprime: FiniteKernel) -> DilationResult:
    """Isometric dilation of H_K into H_K' for NTF kernels with K <= c K'.

    S is the positive intertwiner of K relative to K'; for NTF kernels it is
    a projection, so S = S^(1/2) = P and W v_K(x) = P v_K'(x) is isometric.
    """
    for kern in (k, kprime):
        if not is_ntf_kernel(kern):
            raise NotNTF("kernel Gram is not idempotent")
    if dominance_constant(k, kprime) is None:
        raise NotDominated("K is not dominated by K'")
    s = positive_intertwiner(k, kprime).matrix
    if s.size:
        root = numlin.psd_sqrt(s)
        if numlin.max_abs(s @ s - s) > CHECK_TOL or numlin.max_abs(root - s) > CHECK_TOL:
            raise NumericalError("positive intertwiner is not a projection")
    dk = kolmogorov_decompose(k)
    dkp = kolmogorov_decompose(kprime)
    p = s
    if dk.rank == 0:
        w = np.zeros((dkp.rank, 0), dtype=np.complex128)
    else:
        w = p @ dkp.vectors @ numlin.pinv(dk.vectors)
    return DilationResult(w, p)


def dilation_defects(k: FiniteKernel, kprime: FiniteKernel, res: DilationResult):
    """Named defects of the dilation postconditions."""
    dk = kolmogorov_decompose(k)
    dkp = kolmogorov_decompose(kprime)
    w, p = res.W, res.P
    vk, vkp = dk.vectors, dkp.vectors
    out = {
        "isometry": numlin.max_abs(w.conj().T @ w - np.eye(w.shape[1])),
        "idempotent": numlin.max_abs(p @ p - p),
        "selfadjoint": numlin.max_abs(p - p.conj().T),
        "compatibility": numlin.max_abs(p @ vkp - w @ vk),
        # <W v_K(x), v_K'(y)> = K(x, y)
        "reproduces_w": numlin.max_abs((vkp.conj().T @ w @ vk).T - k.gram),
        "reproduces_p": numlin.max_abs((vkp.conj().T @ p @ vkp).T - k.gram),
        "range": numlin.max_abs(p @ w - w),
    }
    return out


@dataclass(frozen=True)
class GroupDilation:
    bigger: GroupRep
    W: np.ndarray
    P: np.ndarray
    xi: np.ndarray


def _compose_with_orbit(orbit, dk, w_dil):
    """W_total = W_dil J where J maps the orbit vector x_i to v_K(x_i)."""
    j = dk.vectors @ numlin.pinv(orbit)
    return w_dil @ j


def dilate_group_ntf(g: FiniteGroup, rep: GroupRep, eta) -> GroupDilation:
    """Dilate an NTF orbit {pi(x) eta} to the wandering vector of l^2(G)."""
    eta = np.asarray(eta, dtype=np.complex128)
    k = orbit_kernel(rep, eta)
    orbit = np.column_stack([m @ eta for m in rep.matrices])
    if not np.any(eta) or not is_ntf_kernel(k) or numlin.rank(orbit) != rep.dim:
        raise NotNTFVector("{pi(x) eta} is not a normalized tight frame")
    kd = delta_kernel(g.labels())
    res = dilate_ntf(k, kd)
    dk = kolmogorov_decompose(k)
    # the Kolmogorov space of delta is C^|G| with v_delta(x) = e_x only up to
    # a unitary; map it onto the standard basis of l^2(G)
    ddelta = kolmogorov_decompose(kd)
    basis = ddelta.vectors  # column x is v_delta(x)
    w = basis.conj().T @ _compose_with_orbit(orbit, dk, res.W)
    p = basis.conj().T @ res.P @ basis
    bigger = left_regular_rep(g)
    return GroupDilation(bigger, w, p, bigger.cyclic.copy())


def group_dilation_defects(rep: GroupRep, eta, dil: GroupDilation):
    eta = np.asarray(eta, dtype=np.complex128)
    w, p, xi = dil.W, dil.P, dil.xi
    out = {
        "isometry": numlin.max_abs(w.conj().T @ w - np.eye(w.shape[1])),
        "projection": max(numlin.max_abs(p @ p - p), numlin.max_abs(p - p.conj().T)),
        "p_xi": numlin.max_abs(p @ xi - w @ eta),
        "commutes": max(numlin.max_abs(p @ b - b @ p) for b in dil.bigger.matrices),
        "intertwines": max(numlin.max_abs(w @ s - b @ w)
                           for s, b in zip(rep.matrices, dil.bigger.matrices)),
        "restriction": max(numlin.max_abs(p @ b @ p @ w - w @ s)
                           for s, b in zip(rep.matrices, dil.bigger.matrices)),
    }
    return out


@dataclass(frozen=True)
class GaborDilation:
    bigger: GaborSystem
    W: np.ndarray
    P: np.ndarray
    xi: np.ndarray


def dilate_gabor_ntf(s: GaborSystem, eta, q=None) -> GaborDilation:
    """Dilate an NTF Gabor orbit to the delta system on C^(q^2)."""
    eta = np.asarray(eta, dtype=np.complex128)
    lam = complex(s.lam)
    if q is None:
        q = root_order(lam, 64)
        if q is None:
            raise NonPeriodic("lambda is not a root of unity of small order")
    if abs(lam ** q - 1.0) > 1e-10:
        raise NonPeriodic("lambda^q != 1")
    probe = GaborSystem(lam, s.dim, s.U, s.V, eta)
    k = kernel_from_gabor(probe, q)
    orbit = np.column_stack([probe.orbit(m, n) for m in range(q) for n in range(q)])
    if not np.any(eta) or not is_ntf_kernel(k) or numlin.rank(orbit) != s.dim:
        raise NotNTFVector("{U^m V^n eta} is not a normalized tight frame")
    kd = FiniteKernel(k.points, np.eye(q * q))
    res = dilate_ntf(k, kd)
    dk = kolmogorov_decompose(k)
    w = _compose_with_orbit(orbit, dk, res.W)
    bigger = delta_gabor(lam, q)
    return GaborDilation(bigger, w, res.P, bigger.xi0.copy())


def gabor_dilation_defects(s: GaborSystem, eta, dil: GaborDilation):
    eta = np.asarray(eta, dtype=np.complex128)
    w, p, xi, big = dil.W, dil.P, dil.xi, dil.bigger
    return {
        "isometry": numlin.max_abs(w.conj().T @ w - np.eye(w.shape[1])),
        "projection": max(numlin.max_abs(p @ p - p), numlin.max_abs(p - p.conj().T)),
        "p_xi": numlin.max_abs(p @ xi - w @ eta),
        "commutes": max(numlin.max_abs(p @ big.U - big.U @ p),
                        numlin.max_abs(p @ big.V - big.V @ p)),
        "intertwines": max(numlin.max_abs(w @ s.U - big.U @ w),
                           numlin.max_abs(w @ s.V - big.V @ w)),
    }
