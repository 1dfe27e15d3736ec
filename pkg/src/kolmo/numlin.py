"""Dense complex linear algebra built on cyclic Jacobi rotations.

Matrices are plain complex128 numpy arrays.  Every routine is a pure
function: inputs are copied before being rotated in place.
"""

import numpy as np

from .errors import NotHermitian, NotPSD

DEFAULT_TOL = 1e-10
_MAX_SWEEPS = 100


def as_matrix(m):
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError("expected a 2-d array, got shape %r" % (a.shape,))
    return a


def is_hermitian(m, tol=1e-12):
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    if a.size == 0:
        return True
    scale = max(1.0, float(np.abs(a).max()))
    return float(np.abs(a - a.conj().T).max()) <= tol * scale


def _rotation(app, aqq, apq):
    """Unitary 2x2 G with G* [[app, apq], [conj(apq), aqq]] G diagonal.

    app, aqq are real.  Returns (g00, g01, g10, g11, t, r) where r = |apq|
    and t is the real Jacobi tangent, so the new diagonal entries are
    app - t*r and aqq + t*r.
    """
    r = abs(apq)
    phase = apq / r
    tau = (aqq - app) / (2.0 * r)
    if abs(tau) > 1e150:
        # tiny off-diagonal entry: t ~ 1/(2 tau), avoid squaring tau
        t = 0.5 / tau
    elif tau >= 0:
        t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
    else:
        t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    # G = diag(1, conj(phase)) @ [[c, s], [-s, c]]
    ph = np.conj(phase)
    return c, s, -s * ph, c * ph, t, r


def hermitian_eigen(m, tol=1e-12):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi sweeps.

    Returns ``(eigenvalues, Q)`` with eigenvalues real and sorted in
    descending order and the columns of ``Q`` the matching orthonormal
    eigenvectors, so that ``m = Q @ diag(w) @ Q^H``.

    Raises NotHermitian if ``m`` fails the symmetry check at ``tol``
    (relative to ``max(1, max|m|)``).
    """
    a = as_matrix(m)
    n = a.shape[0]
    if a.shape[1] != n or not is_hermitian(a, tol):
        raise NotHermitian("matrix is not Hermitian within %g" % tol)
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=np.complex128)
    a = 0.5 * (a + a.conj().T)
    q = np.eye(n, dtype=np.complex128)
    frob = np.linalg.norm(a)
    if frob == 0.0:
        return np.zeros(n), q
    thresh = 1e-16 * frob
    for _ in range(_MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= thresh:
            break
        for p in range(n - 1):
            for r_ in range(p + 1, n):
                apq = a[p, r_]
                if abs(apq) <= 1e-300 or abs(apq) < 1e-18 * frob:
                    a[p, r_] = a[r_, p] = 0.0
                    continue
                app = a[p, p].real
                aqq = a[r_, r_].real
                g00, g01, g10, g11, t, r = _rotation(app, aqq, apq)
                idx = [p, r_]
                g = np.array([[g00, g01], [g10, g11]])
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = g.conj().T @ a[idx, :]
                a[p, p] = app - t * r
                a[r_, r_] = aqq + t * r
                a[p, r_] = a[r_, p] = 0.0
                q[:, idx] = q[:, idx] @ g
    w = np.real(np.diag(a)).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], q[:, order]


def svd(m):
    """One-sided (Hestenes) Jacobi SVD.

    Returns ``(u, s, vh)`` with ``m = u @ diag(s) @ vh``, singular values
    descending.  ``vh`` is square unitary of size ``cols``; ``u`` has
    ``min(rows, cols)`` columns and the columns belonging to zero singular
    values are zero vectors.
    """
    a = as_matrix(m)
    rows, cols = a.shape
    if rows < cols:
        u, s, vh = svd(a.conj().T)
        # a = (u s vh)^H = vh^H s u^H ; pad to a square right factor
        k = len(s)
        full_v = _complete_columns(u)
        return vh.conj().T[:, :k], s, full_v.conj().T
    work = a.copy()
    v = np.eye(cols, dtype=np.complex128)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros((rows, cols), dtype=np.complex128), np.zeros(cols), v
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for i in range(cols - 1):
            for j in range(i + 1, cols):
                ci = work[:, i]
                cj = work[:, j]
                alpha = float(np.vdot(ci, ci).real)
                beta = float(np.vdot(cj, cj).real)
                gamma = np.vdot(ci, cj)
                if abs(gamma) <= 1e-15 * np.sqrt(alpha * beta) or abs(gamma) < 1e-300:
                    continue
                rotated = True
                g00, g01, g10, g11, _, _ = _rotation(alpha, beta, gamma)
                g = np.array([[g00, g01], [g10, g11]])
                idx = [i, j]
                work[:, idx] = work[:, idx] @ g
                v[:, idx] = v[:, idx] @ g
        if not rotated:
            break
    s = np.linalg.norm(work, axis=0)
    order = np.argsort(-s, kind="stable")
    s = s[order]
    work = work[:, order]
    v = v[:, order]
    u = np.zeros_like(work)
    nz = s > 1e-300
    u[:, nz] = work[:, nz] / s[nz]
    return u, s, v.conj().T


def _complete_columns(u):
    """Extend orthonormal (or zero) columns of ``u`` to a unitary matrix."""
    n = u.shape[0]
    keep = [u[:, k] for k in range(u.shape[1]) if np.linalg.norm(u[:, k]) > 0.5]
    basis = list(keep)
    for e in np.eye(n, dtype=np.complex128):
        if len(basis) == n:
            break
        w = e.copy()
        for _ in range(2):
            for b in basis:
                w = w - np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-8:
            basis.append(w / nrm)
    return np.column_stack(basis) if basis else np.zeros((n, 0), dtype=np.complex128)


def psd_sqrt(m, tol=DEFAULT_TOL):
    """Positive square root; eigenvalues in [-tol*max(1, lam_max), 0) are clipped."""
    w, q = hermitian_eigen(m, 1e-12 if tol < 1e-12 else tol)
    if w.size == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    floor = -tol * max(1.0, float(w[0]))
    if w[-1] < floor:
        raise NotPSD("eigenvalue %.3g below -tol" % w[-1])
    root = np.sqrt(np.clip(w, 0.0, None))
    return (q * root) @ q.conj().T


def pinv(m, tol=DEFAULT_TOL):
    """Moore-Penrose inverse; singular values <= tol * sigma_max are dropped."""
    a = as_matrix(m)
    if a.size == 0 or not np.any(a):
        return np.zeros(a.shape[::-1], dtype=np.complex128)
    u, s, vh = svd(a)
    keep = s > tol * s[0]
    return (vh[: len(s)][keep].conj().T / s[keep]) @ u[:, keep].conj().T


def op_norm(m):
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    _, s, _ = svd(a)
    return float(s[0]) if len(s) else 0.0


def rank(m, tol=DEFAULT_TOL):
    a = as_matrix(m)
    if a.size == 0:
        return 0
    _, s, _ = svd(a)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def null_space(m, tol=DEFAULT_TOL):
    """Orthonormal basis (as columns) of ker(m), relative cutoff tol*sigma_max."""
    a = as_matrix(m)
    rows, cols = a.shape
    if rows < cols:
        a = np.vstack([a, np.zeros((cols - rows, cols), dtype=np.complex128)])
    _, s, vh = svd(a)
    if s.size and s[0] > 0:
        small = s <= tol * s[0]
    else:
        small = np.ones(len(s), dtype=bool)
    return vh.conj().T[:, small]


def range_projector(m, tol=DEFAULT_TOL):
    """Orthogonal projection onto the column space of m."""
    a = as_matrix(m)
    if a.size == 0 or not np.any(a):
        return np.zeros((a.shape[0], a.shape[0]), dtype=np.complex128)
    u, s, _ = svd(a)
    keep = s > tol * s[0]
    uk = u[:, keep]
    return uk @ uk.conj().T


def max_abs(m):
    a = np.asarray(m)
    return float(np.abs(a).max()) if a.size else 0.0
