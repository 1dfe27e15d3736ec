"""Trigonometric-polynomial filters and the objects built from them.

Conventions
-----------
A filter is a Laurent polynomial ``m(z) = sum_k a_k z^k``.  On the real line
it is read through ``z = exp(-i theta)``, so ``eval_at(m, theta)`` returns
``sum_k a_k exp(-i k theta)`` and the Fourier transform is
``fhat(x) = int f(t) exp(-i x t) dt``.  Under this convention the integer
shift ``f(t - 1)`` is multiplication of ``fhat`` by ``z``.

Circle integrals of polynomials are never done by quadrature: the Haar
integral of a Laurent polynomial is its constant coefficient.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import numlin
from .errors import (
    ConvergenceError,
    GridMismatch,
    NotHarmonic,
    NotNonnegative,
    NotQMF,
    ValidationError,
)
from .kernel import FiniteKernel

TRIM_TOL = 1e-14
SAMPLE_COUNT = 4096


# ---------------------------------------------------------------- polynomials

@dataclass(frozen=True)
class LaurentPoly:
    """Coefficients a_kmin, ..., a_kmax of sum_k a_k z^k."""

    kmin: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=np.complex128)).copy()
        if c.ndim != 1:
            raise ValidationError("coefficients must be one-dimensional")
        if c.size == 0:
            c = np.zeros(1, dtype=np.complex128)
        c.setflags(write=False)
        object.__setattr__(self, "kmin", int(self.kmin))
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, mapping):
        if not mapping:
            return cls.zero()
        lo, hi = min(mapping), max(mapping)
        c = np.zeros(hi - lo + 1, dtype=np.complex128)
        for k, v in mapping.items():
            c[k - lo] += v
        return cls(lo, c)

    @classmethod
    def constant(cls, value=1.0):
        return cls(0, [value])

    @classmethod
    def monomial(cls, k, value=1.0):
        return cls(k, [value])

    @classmethod
    def zero(cls):
        return cls(0, [0.0])

    @property
    def kmax(self):
        return self.kmin + len(self.coeffs) - 1

    def items(self):
        return [(self.kmin + j, c) for j, c in enumerate(self.coeffs)]

    def coeff(self, k):
        j = k - self.kmin
        if 0 <= j < len(self.coeffs):
            return complex(self.coeffs[j])
        return 0j

    def trim(self, tol=TRIM_TOL):
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if nz.size == 0:
            return LaurentPoly.zero()
        return LaurentPoly(self.kmin + nz[0], self.coeffs[nz[0]:nz[-1] + 1])

    def is_zero(self, tol=TRIM_TOL):
        return bool(np.all(np.abs(self.coeffs) <= tol))

    def degree_span(self, tol=TRIM_TOL):
        """(lowest, highest) exponent carrying a coefficient above tol."""
        t = self.trim(tol)
        return t.kmin, t.kmax

    def __call__(self, z):
        """Evaluate at complex point(s) z on the circle."""
        z = np.asarray(z, dtype=np.complex128)
        ks = np.arange(self.kmin, self.kmax + 1)
        out = np.tensordot(z[..., None] ** ks, self.coeffs, axes=([-1], [0]))
        return out if out.ndim else complex(out)

    def __add__(self, other):
        other = _as_poly(other)
        lo = min(self.kmin, other.kmin)
        hi = max(self.kmax, other.kmax)
        c = np.zeros(hi - lo + 1, dtype=np.complex128)
        c[self.kmin - lo:self.kmax - lo + 1] += self.coeffs
        c[other.kmin - lo:other.kmax - lo + 1] += other.coeffs
        return LaurentPoly(lo, c)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly(self.kmin, -self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __mul__(self, other):
        if np.isscalar(other):
            return LaurentPoly(self.kmin, self.coeffs * other)
        other = _as_poly(other)
        return LaurentPoly(self.kmin + other.kmin, np.convolve(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def conj(self):
        """The circle conjugate: conj(m(z)) = sum conj(a_k) z^-k."""
        return LaurentPoly(-self.kmax, np.conj(self.coeffs[::-1]))

    def upsample(self, factor):
        """m(z^factor)."""
        factor = int(factor)
        if factor == 1:
            return self
        c = np.zeros((len(self.coeffs) - 1) * factor + 1, dtype=np.complex128)
        c[::factor] = self.coeffs
        return LaurentPoly(self.kmin * factor, c)

    def rotate(self, z0):
        """alpha_z0(m)(z) = m(z z0)."""
        ks = np.arange(self.kmin, self.kmax + 1)
        return LaurentPoly(self.kmin, self.coeffs * np.asarray(z0, dtype=np.complex128) ** ks)

    def constant_term(self):
        return self.coeff(0)

    def vector(self, d):
        """Coefficient vector on the window z^-d .. z^d."""
        out = np.zeros(2 * d + 1, dtype=np.complex128)
        for k, c in self.items():
            if abs(k) > d:
                if abs(c) > TRIM_TOL:
                    raise ValidationError("coefficient z^%d outside window %d" % (k, d))
                continue
            out[k + d] += c
        return out

    @classmethod
    def from_vector(cls, vec, d):
        return cls(-d, np.asarray(vec, dtype=np.complex128))

    def allclose(self, other, tol=1e-12):
        diff = (self - _as_poly(other))
        return bool(np.all(np.abs(diff.coeffs) <= tol))


def _as_poly(x):
    if isinstance(x, LaurentPoly):
        return x
    return LaurentPoly.constant(complex(x))


def eval_at(p: LaurentPoly, theta):
    """sum_k a_k exp(-i k theta), vectorised over theta."""
    theta = np.asarray(theta, dtype=float)
    return p(np.exp(-1j * theta))


evaluate = eval_at


def circle_integral(p: LaurentPoly) -> complex:
    """Haar integral over the circle, exactly: the constant coefficient."""
    return p.constant_term()


SQRT2 = math.sqrt(2.0)
HAAR = LaurentPoly(0, [1 / SQRT2, 1 / SQRT2])
STRETCHED_HAAR = LaurentPoly(0, [1 / SQRT2, 0, 0, 1 / SQRT2])
_R3 = math.sqrt(3.0)
DAUBECHIES4 = LaurentPoly(0, np.array([1 + _R3, 3 + _R3, 3 - _R3, 1 - _R3]) / (4 * SQRT2))
# (1 - z^3)/sqrt(2): the completion whose wavelet is phi(2x) - phi(2x - 3)
STRETCHED_HAAR_HIGH = LaurentPoly(0, [1 / SQRT2, 0, 0, -1 / SQRT2])
BUNDLED = {"haar": HAAR, "stretched_haar": STRETCHED_HAAR, "daubechies4": DAUBECHIES4}


# --------------------------------------------------------------- filter checks

def autocorrelation(m0: LaurentPoly) -> LaurentPoly:
    """|m0|^2 on the circle, i.e. c_j = sum_k a_k conj(a_{k-j})."""
    return m0 * m0.conj()


def qmf_check(m0: LaurentPoly, N=2, tol=1e-10) -> bool:
    """Coefficient form of (1/N) sum_{w^N=z} |m0(w)|^2 = 1."""
    if N < 2:
        raise ValidationError("scale N must be >= 2")
    c = autocorrelation(m0)
    for k, v in c.items():
        if k % N:
            continue
        target = 1.0 if k == 0 else 0.0
        if abs(v - target) > tol:
            return False
    return abs(c.coeff(0) - 1.0) <= tol


def lowpass_check(m0: LaurentPoly, N=2, tol=1e-10) -> bool:
    return abs(eval_at(m0, 0.0) - math.sqrt(N)) <= tol


def nonsingular_check(m0: LaurentPoly, grid_size=SAMPLE_COUNT) -> bool:
    """Nonzero (so finitely many zeros) and |m0| not identically 1."""
    if m0.is_zero():
        return False
    theta = 2 * np.pi * np.arange(grid_size) / grid_size
    return bool(np.max(np.abs(np.abs(eval_at(m0, theta)) - 1.0)) > 1e-8)


def m0_power(m0: LaurentPoly, n, N=2) -> LaurentPoly:
    """m0(z) m0(z^N) ... m0(z^(N^(n-1))); the empty product is 1."""
    if n < 0:
        raise ValidationError("power must be >= 0")
    out = LaurentPoly.constant(1.0)
    for j in range(n):
        out = out * m0.upsample(N ** j)
    return out


# ----------------------------------------------------------- transfer operator

def apply_transfer(m0: LaurentPoly, m0prime: LaurentPoly, N, f: LaurentPoly) -> LaurentPoly:
    """R f(z) = (1/N) sum_{w^N=z} m0(w) conj(m0'(w)) f(w), exactly.

    Coefficient j of m0 conj(m0') f survives iff N | j and lands on z^(j/N).
    """
    prod = m0 * m0prime.conj() * f
    out = {}
    for j, c in prod.items():
        if j % N == 0:
            out[j // N] = out.get(j // N, 0) + c
    return LaurentPoly.from_dict(out)


@dataclass(frozen=True)
class TransferMatrix:
    d: int
    N: int
    matrix: np.ndarray  # columns: R applied to z^-d .. z^d

    def apply(self, f: LaurentPoly) -> LaurentPoly:
        return LaurentPoly.from_vector(self.matrix @ f.vector(self.d), self.d)


def transfer_matrix(m0: LaurentPoly, m0prime: LaurentPoly, N=2) -> TransferMatrix:
    if N < 2:
        raise ValidationError("scale N must be >= 2")
    lo, hi = (m0 * m0prime.conj()).degree_span()
    big = max(abs(lo), abs(hi))
    d = -(-big // (N - 1))
    size = 2 * d + 1
    mat = np.zeros((size, size), dtype=np.complex128)
    for col, k in enumerate(range(-d, d + 1)):
        mat[:, col] = apply_transfer(m0, m0prime, N, LaurentPoly.monomial(k)).vector(d)
    return TransferMatrix(d, N, mat)


@dataclass(frozen=True)
class FixedPoint:
    poly: LaurentPoly
    real_valued: bool
    min_value: Optional[float]  # sampled minimum, for real-valued candidates
    nonnegative: Optional[bool]


def _sample_circle(p: LaurentPoly, count=SAMPLE_COUNT):
    theta = 2 * np.pi * np.arange(count) / count
    return eval_at(p, theta)


def _is_hermitian_vector(v, tol=1e-12):
    return numlin.max_abs(v - np.conj(v[::-1])) <= tol * max(1.0, numlin.max_abs(v))


def _realify(basis):
    """Re-express a conjugation-closed span with real-valued (Hermitian) vectors."""
    cands = []
    for b in basis.T:
        flip = np.conj(b[::-1])
        cands.append(0.5 * (b + flip))
        cands.append(-0.5j * (b - flip))
    stack = np.column_stack(cands)
    # keep the combined span only if it equals the original span
    if numlin.rank(stack, 1e-9) != basis.shape[1]:
        return basis
    u, s, _ = numlin.svd(stack)
    out = u[:, : basis.shape[1]]
    # the left singular vectors need not be Hermitian; rebuild them
    real_cols = []
    for c in out.T:
        flip = np.conj(c[::-1])
        for w in (0.5 * (c + flip), -0.5j * (c - flip)):
            for r in real_cols:
                w = w - np.vdot(r, w).real * r
            nrm = np.linalg.norm(w)
            if nrm > 1e-8 and len(real_cols) < basis.shape[1]:
                real_cols.append(w / nrm)
    return np.column_stack(real_cols) if len(real_cols) == basis.shape[1] else basis


def _normalise_sign(v):
    """Scale so the largest-magnitude coefficient is real positive (ties: first)."""
    j = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-9)))
    return v * (abs(v[j]) / v[j]) if v[j] != 0 else v


def harmonic_fixed_points(t: TransferMatrix, tol=1e-9) -> List[FixedPoint]:
    """Basis of the eigenvalue-1 eigenspace of the transfer matrix."""
    size = t.matrix.shape[0]
    basis = numlin.null_space(t.matrix - np.eye(size), tol)
    if basis.shape[1] == 0:
        return []
    basis = _realify(basis)
    out = []
    for v in basis.T:
        v = _normalise_sign(v)
        poly = LaurentPoly.from_vector(v, t.d)
        if _is_hermitian_vector(v, 1e-9):
            vals = _sample_circle(poly).real
            lo = float(vals.min())
            out.append(FixedPoint(poly, True, lo, lo >= -1e-10))
        else:
            out.append(FixedPoint(poly, False, None, None))
    return out


@dataclass(frozen=True)
class JointFixedPoints:
    basis: List[LaurentPoly]
    bounds: List[Optional[float]] = field(default_factory=list)  # None = unbounded


def joint_fixed_points(m0: LaurentPoly, m0prime: LaurentPoly, N=2,
                       h: Optional[LaurentPoly] = None,
                       hprime: Optional[LaurentPoly] = None,
                       tol=1e-9) -> JointFixedPoints:
    """Fixed points h0 of R_{m0,m0'} and, given h, h', the least c with
    |h0|^2 <= c h h' on a 4096-point grid (None where h h' vanishes but h0
    does not)."""
    t = transfer_matrix(m0, m0prime, N)
    size = t.matrix.shape[0]
    null = numlin.null_space(t.matrix - np.eye(size), tol)
    basis = [LaurentPoly.from_vector(_normalise_sign(v), t.d).trim() for v in null.T]
    bounds = []
    if h is not None and hprime is not None:
        hh = (_sample_circle(h) * _sample_circle(hprime)).real
        for b in basis:
            a2 = np.abs(_sample_circle(b)) ** 2
            small = hh <= 1e-12
            if np.any(a2[small] > 1e-10):
                bounds.append(None)
                continue
            ok = ~small
            bounds.append(float(np.max(a2[ok] / hh[ok])) if np.any(ok) else 0.0)
    return JointFixedPoints(basis, bounds)


# ---------------------------------------------------------------------- cycles

@dataclass(frozen=True)
class Cycle:
    angles: Tuple[Fraction, ...]  # z_k = exp(2 pi i angle_k)
    phases: Tuple[float, ...]     # m0(z_k) = sqrt(N) exp(i phase_k)

    @property
    def length(self):
        return len(self.angles)

    @property
    def total_phase(self):
        return float(sum(self.phases))

    @property
    def points(self):
        return tuple(root_of_unity(a) for a in self.angles)

    @property
    def trivial(self):
        return self.angles == (Fraction(0),)


@dataclass(frozen=True)
class CycleSet:
    N: int
    cycles: Tuple[Cycle, ...]

    def __len__(self):
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def trivial(self):
        for c in self.cycles:
            if c.trivial:
                return c
        return None


def root_of_unity(angle: Fraction) -> complex:
    """exp(2 pi i angle) with exact values at multiples of 1/4."""
    a = Fraction(angle) % 1
    exact = {Fraction(0): 1 + 0j, Fraction(1, 4): 1j,
             Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}
    if a in exact:
        return exact[a]
    return complex(np.exp(2j * np.pi * float(a)))


def _snap(theta, tol=1e-12):
    return 0.0 if abs(theta) <= tol else theta


def find_cycles(m0: LaurentPoly, N=2, p_max=6, tol=1e-9) -> CycleSet:
    """All m0-cycles of length <= p_max.

    Candidates are the points fixed by z -> z^(N^p): the roots of unity
    k / (N^p - 1).  Orbits under multiplication of the angle by N are
    kept when |m0| = sqrt(N) at every point.
    """
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    root_n = math.sqrt(N)
    seen = set()
    found = []
    for p in range(1, p_max + 1):
        q = N ** p - 1
        for k in range(q):
            a = Fraction(k, q)
            if a in seen:
                continue
            orbit = [a]
            nxt = (a * N) % 1
            while nxt != a:
                orbit.append(nxt)
                nxt = (nxt * N) % 1
            seen.update(orbit)
            vals = [m0(root_of_unity(x)) for x in orbit]
            if all(abs(abs(v) - root_n) <= tol for v in vals):
                start = orbit.index(min(orbit))
                orbit = orbit[start:] + orbit[:start]
                vals = vals[start:] + vals[:start]
                phases = tuple(_snap(float(np.angle(v / root_n))) for v in vals)
                found.append(Cycle(tuple(orbit), phases))
    found.sort(key=lambda c: (c.length, c.angles))
    return CycleSet(N, tuple(found))


# ----------------------------------------------------------------- filter bank

@dataclass(frozen=True)
class FilterBank:
    N: int
    filters: Tuple[LaurentPoly, ...]

    def __post_init__(self):
        object.__setattr__(self, "filters", tuple(self.filters))
        if len(self.filters) != self.N:
            raise ValidationError("a scale-%d bank needs %d filters" % (self.N, self.N))

    @property
    def lowpass(self):
        return self.filters[0]

    @property
    def highpass(self):
        return self.filters[1:]


def highpass_complete(m0: LaurentPoly) -> FilterBank:
    """Scale-2 bank with m1(z) = z conj(m0(-z)), i.e. b_k = conj(a_{1-k}) (-1)^(1-k)."""
    if not qmf_check(m0, 2):
        raise NotQMF("low-pass filter fails the quadrature mirror condition")
    out = {}
    for k, a in m0.items():
        out[1 - k] = np.conj(a) * (-1) ** (k % 2)
    bank = FilterBank(2, (m0, LaurentPoly.from_dict(out)))
    if unitarity_defect(bank) > 1e-10:  # pragma: no cover - guarded by qmf_check
        raise NotQMF("completed bank is not unitary")
    return bank


def bundled_bank(name: str) -> FilterBank:
    """Scale-2 bank for a bundled low-pass filter."""
    if name == "stretched_haar":
        return FilterBank(2, (STRETCHED_HAAR, STRETCHED_HAAR_HIGH))
    if name not in BUNDLED:
        raise ValidationError("unknown filter %r" % name)
    return highpass_complete(BUNDLED[name])


def modulation_matrix(bank: FilterBank, z):
    n = bank.N
    rho = np.exp(2j * np.pi / n)
    return np.array([[f(rho ** j * z) for j in range(n)] for f in bank.filters]) / math.sqrt(n)


def unitarity_defect(bank: FilterBank, samples=256) -> float:
    """max over sampled z of max|M(z) M(z)^* - I|."""
    n = bank.N
    worst = 0.0
    for j in range(samples):
        z = np.exp(-2j * np.pi * (j + 0.5) / samples)
        m = modulation_matrix(bank, z)
        worst = max(worst, numlin.max_abs(m @ m.conj().T - np.eye(n)))
    return worst


# ---------------------------------------------------------- sampled functions

@dataclass(frozen=True)
class Grid:
    start: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("grid step must be positive")
        if self.count < 2:
            raise ValidationError("grid needs at least two points")

    @property
    def points(self):
        return self.start + self.step * np.arange(self.count)

    @property
    def stop(self):
        return self.start + self.step * self.count

    def origin_index(self):
        """start / step as an exact integer, or None."""
        o = self.start / self.step
        r = round(o)
        return int(r) if abs(o - r) <= 1e-9 * max(1.0, abs(o)) else None

    def refinement_level(self, N):
        """J with step == N^-J exactly, or None."""
        j = -math.log(self.step) / math.log(N)
        r = round(j)
        return int(r) if r >= 0 and abs(N ** -r - self.step) <= 1e-15 * self.step else None


def default_frequency_grid():
    count = 2 ** 14
    return Grid(-64 * np.pi, 128 * np.pi / count, count)


def default_time_grid():
    return Grid(-16.0, 2.0 ** -8, 2 ** 14)


@dataclass(frozen=True)
class SampledFunction:
    """Samples on a uniform grid.

    Time-domain samples are cell averages: ``values[i]`` is the mean of the
    function over ``[t_i, t_i + step)``.  Frequency-domain samples are point
    values.
    """

    grid: Grid
    values: np.ndarray
    domain: str = "time"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.grid.count,):
            raise GridMismatch("values do not match the grid")
        if self.domain not in ("time", "frequency"):
            raise ValidationError("domain must be 'time' or 'frequency'")
        object.__setattr__(self, "values", v)

    def inner(self, other):
        if other.grid != self.grid:
            raise GridMismatch("functions live on different grids")
        return complex(np.vdot(other.values, self.values) * self.grid.step)

    def norm(self):
        return math.sqrt(max(self.inner(self).real, 0.0))


# ------------------------------------------------------- the scaling function

def _freq_product(polys, norms, scale_exps, x):
    out = np.ones_like(x, dtype=np.complex128)
    for poly, c, e in zip(polys, norms, scale_exps):
        out *= eval_at(poly, x / e) / c
    # every factor is m0(1)/m0(1) at the origin; pin it against summation-order noise
    out[x == 0] = 1.0
    return out


def cascade_hat(m0: LaurentPoly, N=2, terms=40, grid: Optional[Grid] = None) -> SampledFunction:
    """Truncated infinite product prod_{k=1}^{terms} m0(x / N^k) / sqrt(N)."""
    if terms < 1:
        raise ValidationError("terms must be >= 1")
    if not lowpass_check(m0, N):
        raise ValidationError("m0(1) != sqrt(N)")
    grid = grid or default_frequency_grid()
    x = grid.points
    # m0(1) equals sqrt(N) up to rounding of the coefficients
    val = _freq_product([m0] * terms, [complex(eval_at(m0, 0.0))] * terms,
                        [float(N) ** k for k in range(1, terms + 1)], x)
    return SampledFunction(grid, val, "frequency")


def _level0_system(masks, phase_factors, N):
    """Integer-cell averages of a cyclic family of refinable functions.

    Component k+1 satisfies f_{k+1}(t) = sqrt(N) c_k sum_s b^k_s f_k(N t - s),
    so the integrals A^k[n] over [n, n+1) obey
    A^{k+1}[n] = c_k / sqrt(N) sum_s b^k_s sum_{r<N} A^k[N n + r - s].
    The fixed point is the limit of the cascade started from the unit box.
    """
    p = len(masks)
    lo = min(b.kmin for b in masks)
    hi = max(b.kmax for b in masks)
    nlo = math.floor(lo / (N - 1)) - 1
    nhi = math.ceil(hi / (N - 1)) + 1
    size = nhi - nlo + 1
    big = np.zeros((p * size, p * size), dtype=np.complex128)
    for k in range(p):
        b, c = masks[k], phase_factors[k]
        dst = ((k + 1) % p) * size
        src = k * size
        for i, n in enumerate(range(nlo, nhi + 1)):
            for s, coef in b.items():
                for r in range(N):
                    j = N * n + r - s - nlo
                    if 0 <= j < size:
                        big[dst + i, src + j] += c * coef / math.sqrt(N)
    start = np.zeros(p * size, dtype=np.complex128)
    for k in range(p):
        start[k * size - nlo] = 1.0
    # square the p-step map until it settles on its spectral projector
    step = np.linalg.matrix_power(big, p)
    for _ in range(40):
        nxt = step @ step
        if numlin.max_abs(nxt - step) <= 1e-13:
            step = nxt
            break
        step = nxt
    else:
        raise ConvergenceError("cell-average cascade did not converge")
    vec = step @ start
    return nlo, [vec[k * size:(k + 1) * size] for k in range(p)]


def refinable_cell_averages(masks: Sequence[LaurentPoly], phase_factors, N,
                            grid: Grid) -> List[np.ndarray]:
    """Cell averages on ``grid`` of a cyclic family of refinable functions.

    Exact refinement from integer cells down to cells of width N^-J (the
    grid step); when the grid is not N-adic the finest level is linearly
    interpolated onto it.
    """
    p = len(masks)
    nlo, arrays = _level0_system(masks, phase_factors, N)
    level = grid.refinement_level(N)
    if level is None:
        level = max(0, math.ceil(-math.log(grid.step) / math.log(N)) + 1)
    lo = min(b.kmin for b in masks)
    hi = max(b.kmax for b in masks)
    root = math.sqrt(N)
    offset = nlo  # arrays[k][i] is the average over level-j cell offset + i
    for j in range(level):
        # level-(j+1) cell n maps onto level-j cell n - s N^j under t -> N t - s
        shift = N ** j
        length = len(arrays[0])
        new_len = length + (hi - lo) * shift
        out = [None] * p
        for k in range(p):
            acc = np.zeros(new_len, dtype=np.complex128)
            for s, coef in masks[k].items():
                if coef == 0:
                    continue
                at = (s - lo) * shift
                acc[at:at + length] += coef * arrays[k]
            out[(k + 1) % p] = root * phase_factors[k] * acc
        arrays = out
        offset = offset + lo * shift
    return _place_on_grid(arrays, offset, level, N, grid)


def _place_on_grid(arrays, offset, level, N, grid: Grid):
    step = float(N) ** -level
    positions = (offset + np.arange(len(arrays[0]))) * step
    res = []
    exact = grid.refinement_level(N) == level and grid.origin_index() is not None
    for arr in arrays:
        out = np.zeros(grid.count, dtype=np.complex128)
        if exact:
            o = grid.origin_index()
            idx = offset + np.arange(len(arr)) - o
            ok = (idx >= 0) & (idx < grid.count)
            out[idx[ok]] = arr[ok]
        else:
            mids = positions + step / 2
            t = grid.points + grid.step / 2
            out = (np.interp(t, mids, arr.real, left=0, right=0)
                   + 1j * np.interp(t, mids, arr.imag, left=0, right=0))
        res.append(out)
    return res


# ------------------------------------------------------ time-domain operators

def _adic_params(grid: Grid, N):
    o = grid.origin_index()
    level = grid.refinement_level(N)
    if o is None or level is None:
        raise GridMismatch("time grid must have step N^-J and start on a grid point")
    return o, level


def dilate_translate(values, grid: Grid, N, m=0, n=0):
    """Cell averages of U^m T^n f, i.e. N^(-m/2) f(t / N^m - n).

    ``values`` are the cell averages of f on ``grid``; f is taken to vanish
    off the grid.  Exact for functions constant on grid cells.
    """
    o, level = _adic_params(grid, N)
    v = np.asarray(values, dtype=np.complex128)
    count = grid.count
    i = np.arange(count)
    cells = n * N ** level
    out = np.zeros(count, dtype=np.complex128)
    if m >= 0:
        big = N ** m
        j = (o + i) // big - o - cells
        ok = (j >= 0) & (j < count)
        out[ok] = v[j[ok]]
        return out * N ** (-m / 2)
    big = N ** (-m)
    # average of big consecutive source cells starting at j0
    prefix = np.concatenate([[0], np.cumsum(v)])
    j0 = big * (o + i) - o - cells
    a = np.clip(j0, 0, count)
    b = np.clip(j0 + big, 0, count)
    out = (prefix[b] - prefix[a]) / big
    return out * N ** (-m / 2)


def shift_cells(values, k_cells):
    """f(t - k h) on the same grid, zero fill."""
    v = np.asarray(values, dtype=np.complex128)
    out = np.zeros_like(v)
    if k_cells >= 0:
        out[k_cells:] = v[:len(v) - k_cells] if k_cells < len(v) else out[k_cells:]
    else:
        out[:k_cells] = v[-k_cells:]
    return out


def apply_poly(p: LaurentPoly, values, grid: Grid, N=2):
    """pi(p) f = sum_k a_k f(t - k)."""
    _, level = _adic_params(grid, N)
    out = np.zeros(grid.count, dtype=np.complex128)
    for k, a in p.items():
        if a != 0:
            out += a * shift_cells(values, k * N ** level)
    return out


# ------------------------------------------------------ scaling functions

@dataclass(frozen=True)
class CascadeResult:
    phi_hat: SampledFunction
    phi: Optional[SampledFunction]


def scaling_function(m0: LaurentPoly, N=2, grid: Optional[Grid] = None) -> SampledFunction:
    """Cell averages of the refinable function with mask m0 and unit integral."""
    if not lowpass_check(m0, N):
        raise ValidationError("m0(1) != sqrt(N)")
    grid = grid or default_time_grid()
    vals = refinable_cell_averages([m0], [1.0], N, grid)[0]
    return SampledFunction(grid, vals, "time")


def cascade(m0: LaurentPoly, N=2, terms=40, freq_grid: Optional[Grid] = None,
            time_grid: Optional[Grid] = None, time_domain=True) -> CascadeResult:
    """The scaling function in frequency (truncated product) and in time."""
    hat = cascade_hat(m0, N, terms, freq_grid)
    phi = scaling_function(m0, N, time_grid) if time_domain else None
    return CascadeResult(hat, phi)


def inverse_fourier(fhat: SampledFunction, time_grid: Grid, chunk=512) -> SampledFunction:
    """(1/2pi) int fhat(x) exp(i x t) dx by the rectangle rule.

    Returns point values at the time grid; a cross-check only, since the
    truncated transform rings near jumps.
    """
    if fhat.domain != "frequency":
        raise GridMismatch("expected frequency-domain samples")
    x = fhat.grid.points
    w = fhat.values * fhat.grid.step / (2 * np.pi)
    t = time_grid.points
    out = np.empty(time_grid.count, dtype=np.complex128)
    for a in range(0, len(t), chunk):
        out[a:a + chunk] = np.exp(1j * np.outer(t[a:a + chunk], x)) @ w
    return SampledFunction(time_grid, out, "time")


def piecewise_constant_transform(f: SampledFunction, x):
    """Exact Fourier transform of the step function with the given cell values."""
    x = np.asarray(x, dtype=float)
    h = f.grid.step
    t = f.grid.points
    nz = np.nonzero(f.values)[0]
    out = np.empty(x.shape, dtype=np.complex128)
    for idx, xv in np.ndenumerate(x):
        if xv == 0:
            cell = h
        else:
            cell = (1 - np.exp(-1j * xv * h)) / (1j * xv)
        out[idx] = np.sum(f.values[nz] * np.exp(-1j * xv * t[nz])) * cell
    return out


def wavelet_from_filters(bank: FilterBank, phi_hat: SampledFunction) -> List[SampledFunction]:
    """psi_i-hat(x) = m_i(x / N) phi-hat(x / N) / sqrt(N), for each filter.

    The output lives on the input grid stretched by N, so no interpolation
    is needed; filter 0 gives back phi-hat itself.
    """
    if phi_hat.domain != "frequency":
        raise GridMismatch("wavelets are built from frequency samples")
    g = phi_hat.grid
    out_grid = Grid(g.start * bank.N, g.step * bank.N, g.count)
    x = g.points
    return [SampledFunction(out_grid, eval_at(m, x) * phi_hat.values / math.sqrt(bank.N),
                            "frequency") for m in bank.filters]


def wavelet_time(bank: FilterBank, phi: SampledFunction) -> List[SampledFunction]:
    """Cell averages of psi_i = U^-1 pi(m_i) phi."""
    if phi.domain != "time":
        raise GridMismatch("expected time-domain samples")
    return [SampledFunction(phi.grid, dilate_translate(apply_poly(m, phi.values, phi.grid, bank.N),
                                                       phi.grid, bank.N, -1, 0), "time")
            for m in bank.filters]


# ------------------------------------------------ harmonic functions, kernels

def harmonic_defect(m0: LaurentPoly, h: LaurentPoly, N=2) -> float:
    diff = apply_transfer(m0, m0, N, h) - h
    return numlin.max_abs(diff.coeffs)


def autocorrelation_harmonic(phi: SampledFunction, kmax: int) -> LaurentPoly:
    """h(z) = sum_k <T^-k phi, phi> z^k for |k| <= kmax."""
    inv = 1.0 / phi.grid.step
    cells = round(inv)
    if abs(inv - cells) > 1e-9:
        raise GridMismatch("integer shifts need 1/step to be an integer")
    v = phi.values
    out = {}
    for k in range(-kmax, kmax + 1):
        shifted = shift_cells(v, -k * cells)  # phi(t + k)
        out[k] = np.vdot(v, shifted) * phi.grid.step
    return LaurentPoly.from_dict(out)


def wavelet_rep_kernel(m0: LaurentPoly, h: LaurentPoly, items, N=2, quad_points=None,
                       labels=None, tol=1e-8) -> FiniteKernel:
    """Kernel of the wavelet representation on pairs (f, n).

    K((f, n), (g, m)) is the circle integral of
    f(z^(N^m)) m0^(m)(z) conj(g(z^(N^n)) m0^(n)(z)) h(z).
    The integral is the exact constant coefficient; ``quad_points`` only
    sets the sample count of the nonnegativity test on h.
    """
    if harmonic_defect(m0, h, N) > tol:
        raise NotHarmonic("R h != h")
    hs = _sample_circle(h, quad_points or SAMPLE_COUNT)
    if hs.real.min() < -1e-10 or numlin.max_abs(hs.imag) > 1e-9:
        raise NotNonnegative("h is not nonnegative on the circle")
    items = list(items)
    if labels is None:
        labels = tuple("item%d" % i for i in range(len(items)))
    levels = {n for _, n in items}
    powers = {n: m0_power(m0, n, N) for n in levels}
    size = len(items)
    gram = np.zeros((size, size), dtype=np.complex128)
    for i, (f, n) in enumerate(items):
        for j, (g, m) in enumerate(items):
            left = f.upsample(N ** m) * powers[m]
            right = (g.upsample(N ** n) * powers[n]).conj()
            gram[i, j] = circle_integral(left * right * h)
    gram = 0.5 * (gram + gram.conj().T)
    return FiniteKernel(labels, gram)
