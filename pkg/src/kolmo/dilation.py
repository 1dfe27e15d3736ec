"""The wavelet dilation space H0 = sum over cycles of L^2(R)^p.

Each m0-cycle (z_0, ..., z_{p-1}) with m0(z_k) = sqrt(N) exp(i theta_k)
contributes a block of p copies of L^2(R).  On a block

    (U0 xi)_k = exp(i theta_k) U xi_{k+1}
    (T0 xi)_k = z_k T xi_k
    (pi0(f) xi)_k = pi(alpha_{z_k}(f)) xi_k

with indices mod p, U xi(t) = N^(-1/2) xi(t / N) and T xi(t) = xi(t - 1).
The scaling vector phi0 solves U0 phi0 = pi0(m0) phi0; componentwise this is
a cyclic refinement equation, solved exactly on cell averages.

Functions of t are stored as cell averages on a shared grid (see
``filters.SampledFunction``), so the operators above act by exact index
arithmetic whenever the inputs are constant on grid cells.
"""

import math
from fractions import Fraction
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from . import numlin
from ._parallel import ordered_map
from .errors import InvalidCycle, NoTrivialCycle, NotHarmonic, NotQMF, ValidationError
from .filters import (
    Cycle,
    CycleSet,
    FilterBank,
    Grid,
    LaurentPoly,
    SampledFunction,
    apply_poly,
    default_frequency_grid,
    default_time_grid,
    dilate_translate,
    eval_at,
    harmonic_defect,
    lowpass_check,
    m0_power,
    nonsingular_check,
    qmf_check,
    refinable_cell_averages,
    root_of_unity,
    scaling_function,
    wavelet_rep_kernel,
    wavelet_time,
)

CYCLE_TOL = 1e-9


def alpha_rotate(f: LaurentPoly, z0) -> LaurentPoly:
    """alpha_z0(f)(z) = f(z z0).

    z0 is a rational angle (z0 = exp(2 pi i angle), powers taken exactly on
    the angle) or a complex number.
    """
    if isinstance(z0, (complex, np.complexfloating)):
        return f.rotate(z0)
    angle = Fraction(z0)
    return LaurentPoly.from_dict({k: a * root_of_unity(angle * k) for k, a in f.items()})


@dataclass(frozen=True)
class CycleComponent:
    cycle: Cycle
    scaling: tuple                   # p time-domain SampledFunction
    scaling_hat: Optional[tuple] = None

    def __post_init__(self):
        if len(self.scaling) != self.cycle.length:
            raise ValidationError("need one scaling function per cycle point")


def _check_cycle(m0: LaurentPoly, cycle: Cycle, N):
    pts = cycle.points
    for k, z in enumerate(pts):
        if abs(abs(m0(z)) - math.sqrt(N)) > CYCLE_TOL:
            raise InvalidCycle("|m0| != sqrt(N) at cycle point %s" % cycle.angles[k])
        nxt = (cycle.angles[k] * N) % 1
        if nxt != cycle.angles[(k + 1) % len(pts)]:
            raise InvalidCycle("cycle points are not an orbit of z -> z^N")


def cycle_scaling_hat(m0: LaurentPoly, cycle: Cycle, N=2, terms=40,
                      freq_grid: Optional[Grid] = None) -> List[SampledFunction]:
    """Truncated block products for each point of a cycle.

    phi_k-hat(x) = prod_l exp(-i theta) alpha_{z_k}(m0^(p))(x / N^(l p)) / N^(p/2),
    with theta the total phase; ``terms`` single steps, rounded up to whole blocks.
    """
    _check_cycle(m0, cycle, N)
    grid = freq_grid or default_frequency_grid()
    p = cycle.length
    blocks = -(-terms // p)
    x = grid.points
    mp = m0_power(m0, p, N)
    theta = cycle.total_phase
    out = []
    for a in cycle.angles:
        g = alpha_rotate(mp, a)
        val = np.ones_like(x, dtype=np.complex128)
        for l in range(1, blocks + 1):
            val *= np.exp(-1j * theta) * eval_at(g, x / float(N) ** (l * p)) / N ** (p / 2)
        out.append(SampledFunction(grid, val, "frequency"))
    return out


def cycle_scaling_functions(m0: LaurentPoly, cycle: Cycle, N=2, terms=40,
                            freq_grid: Optional[Grid] = None,
                            time_grid: Optional[Grid] = None,
                            with_hat=True) -> CycleComponent:
    """Scaling functions phi_k of one cycle, in time and (optionally) frequency.

    Time-domain values solve
    phi_{k+1}(t) = sqrt(N) exp(-i theta_k) sum_s a_s z_k^s phi_k(N t - s).
    """
    _check_cycle(m0, cycle, N)
    grid = time_grid or default_time_grid()
    masks = [alpha_rotate(m0, a) for a in cycle.angles]
    phases = [np.exp(-1j * th) for th in cycle.phases]
    vals = refinable_cell_averages(masks, phases, N, grid)
    scaling = tuple(SampledFunction(grid, v, "time") for v in vals)
    hat = tuple(cycle_scaling_hat(m0, cycle, N, terms, freq_grid)) if with_hat else None
    return CycleComponent(cycle, scaling, hat)


# ----------------------------------------------------------- vectors in H0

@dataclass(frozen=True)
class DilatedVector:
    grid: Grid
    blocks: tuple  # one (p_j, count) complex array per cycle

    def __post_init__(self):
        blocks = tuple(np.atleast_2d(np.asarray(b, dtype=np.complex128)) for b in self.blocks)
        for b in blocks:
            if b.shape[1] != self.grid.count:
                raise ValidationError("block does not match the grid")
        object.__setattr__(self, "blocks", blocks)

    @property
    def sizes(self):
        return tuple(b.shape[0] for b in self.blocks)

    def inner(self, other: "DilatedVector") -> complex:
        if self.sizes != other.sizes or self.grid != other.grid:
            raise ValidationError("vectors live in different spaces")
        return complex(sum(np.vdot(b, a) for a, b in zip(self.blocks, other.blocks))
                       * self.grid.step)

    def norm(self):
        return math.sqrt(max(self.inner(self).real, 0.0))

    def __add__(self, other):
        return DilatedVector(self.grid, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other):
        return DilatedVector(self.grid, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __mul__(self, c):
        return DilatedVector(self.grid, tuple(c * a for a in self.blocks))

    __rmul__ = __mul__

    def zeros_like(self):
        return DilatedVector(self.grid, tuple(np.zeros_like(a) for a in self.blocks))

    def flat(self):
        return np.concatenate([b.ravel() for b in self.blocks])


class DilatedOperators:
    """U0, T0 and pi0 on H0 for the given cycles."""

    def __init__(self, m0: LaurentPoly, cycles: CycleSet, grid: Grid,
                 components: Sequence[CycleComponent] = ()):
        self.m0 = m0
        self.N = cycles.N
        self.cycles = cycles
        self.grid = grid
        self.components = tuple(components)
        self._points = [np.array(c.points, dtype=np.complex128) for c in cycles]
        self._phases = [np.array(c.phases) for c in cycles]

    @property
    def sizes(self):
        return tuple(c.length for c in self.cycles)

    def trivial_index(self):
        for j, c in enumerate(self.cycles):
            if c.trivial:
                return j
        return None

    def zero(self):
        return DilatedVector(self.grid, tuple(np.zeros((p, self.grid.count), dtype=np.complex128)
                                              for p in self.sizes))

    def orbit(self, v: DilatedVector, m=0, n=0) -> DilatedVector:
        """U0^m T0^n v, with the dilation and translation done in one step."""
        out = []
        for j, block in enumerate(v.blocks):
            p = block.shape[0]
            pts, th = self._points[j], self._phases[j]
            new = np.empty_like(block)
            for k in range(p):
                if m >= 0:
                    src = (k + m) % p
                    phase = np.exp(1j * sum(th[(k + t) % p] for t in range(m)))
                else:
                    src = (k + m) % p
                    phase = np.exp(-1j * sum(th[(k - t) % p] for t in range(1, -m + 1)))
                coef = phase * pts[src] ** n
                new[k] = coef * dilate_translate(block[src], self.grid, self.N, m, n)
            out.append(new)
        return DilatedVector(self.grid, tuple(out))

    def U(self, v, power=1):
        return self.orbit(v, power, 0)

    def U_inv(self, v):
        return self.orbit(v, -1, 0)

    def T(self, v, power=1):
        return self.orbit(v, 0, power)

    def pi(self, f: LaurentPoly, v: DilatedVector) -> DilatedVector:
        out = []
        for j, block in enumerate(v.blocks):
            new = np.empty_like(block)
            for k in range(block.shape[0]):
                new[k] = apply_poly(alpha_rotate(f, self.cycles.cycles[j].angles[k]),
                                    block[k], self.grid, self.N)
            out.append(new)
        return DilatedVector(self.grid, tuple(out))

    def P1(self, v: DilatedVector) -> DilatedVector:
        """Coordinate projection onto the trivial-cycle block."""
        j = self.trivial_index()
        if j is None:
            raise NoTrivialCycle("no trivial cycle, so no L^2(R) block")
        return DilatedVector(v.grid, tuple(b if i == j else np.zeros_like(b)
                                           for i, b in enumerate(v.blocks)))

    def block(self, v: DilatedVector, j, k=0) -> SampledFunction:
        return SampledFunction(v.grid, v.blocks[j][k], "time")


def build_dilated_rep(m0: LaurentPoly, cycles: CycleSet, N=2, grid: Optional[Grid] = None,
                      terms=40, freq_grid: Optional[Grid] = None, with_hat=False):
    """(ops, phi0) for the cyclic representation of the constant function 1."""
    if cycles.N != N:
        raise ValidationError("cycles were computed for a different scale")
    if not qmf_check(m0, N):
        raise NotQMF("m0 fails the quadrature mirror condition")
    if not lowpass_check(m0, N):
        raise ValidationError("m0(1) != sqrt(N)")
    if not nonsingular_check(m0):
        raise ValidationError("m0 is singular")
    if len(cycles) == 0:
        raise InvalidCycle("no cycles supplied")
    grid = grid or default_time_grid()
    comps = ordered_map(lambda c: cycle_scaling_functions(m0, c, N, terms, freq_grid, grid,
                                                          with_hat), list(cycles))
    ops = DilatedOperators(m0, cycles, grid, comps)
    phi0 = DilatedVector(grid, tuple(np.array([f.values for f in c.scaling]) for c in comps))
    return ops, phi0


# ---------------------------------------------------------------- checks

def refinement_defect(ops: DilatedOperators, phi0: DilatedVector) -> float:
    """||phi0 - U0^-1 pi0(m0) phi0|| / ||phi0||, i.e. U0 phi0 = pi0(m0) phi0."""
    diff = phi0 - ops.U_inv(ops.pi(ops.m0, phi0))
    return diff.norm() / max(phi0.norm(), 1e-300)


def orthonormality_check(phi0: DilatedVector, ops: DilatedOperators, krange=12) -> float:
    worst = 0.0
    for k in range(-krange, krange + 1):
        val = ops.T(phi0, k).inner(phi0)
        worst = max(worst, abs(val - (1.0 if k == 0 else 0.0)))
    return worst


def window_gram(vectors: Sequence[DilatedVector]):
    mat = np.array([v.flat() for v in vectors])
    step = vectors[0].grid.step
    return (mat.conj() @ mat.T).T * step  # gram[a, b] = <v_a, v_b>


def dilated_wavelets(bank: FilterBank, ops: DilatedOperators, phi0: DilatedVector,
                     window_m=2, window_n=4):
    """psi_i0 = U0^-1 pi0(m_i) phi0 for i >= 1, and the windowed ONB defect."""
    psis = [ops.U_inv(ops.pi(m, phi0)) for m in bank.highpass]
    family = [ops.orbit(psi, m, n) for psi in psis
              for m in range(-window_m, window_m + 1)
              for n in range(-window_n, window_n + 1)]
    defect = 0.0
    if family:
        g = window_gram(family)
        defect = numlin.max_abs(g - np.eye(len(family)))
    return psis, defect


def gaussian_tests(count=10, seed=0, omega=(2.0, 3.0), sigma=(0.8, 1.5), centre=(-1.0, 1.0)):
    """Parameters of windowed cosines cos(w (t - c) + ph) exp(-(t - c)^2 / 2 s^2)."""
    rng = np.random.default_rng(seed)
    return [dict(omega=rng.uniform(*omega), sigma=rng.uniform(*sigma),
                 centre=rng.uniform(*centre), phase=rng.uniform(0, 2 * np.pi))
            for _ in range(count)]


def sample_test(grid: Grid, omega, sigma, centre, phase):
    t = grid.points + grid.step / 2
    return np.cos(omega * (t - centre) + phase) * np.exp(-(t - centre) ** 2 / (2 * sigma ** 2))


def parseval_sums(fs, psis: Sequence[SampledFunction], N, window_m=6, window_n=32):
    """sum over the window of |<f, U^m T^n psi>|^2, for each row of fs."""
    fs = np.atleast_2d(np.asarray(fs, dtype=np.complex128))
    if not psis:
        return np.zeros(fs.shape[0])
    grid = psis[0].grid

    def one_scale(m):
        acc = np.zeros(fs.shape[0])
        for psi in psis:
            for n in range(-window_n, window_n + 1):
                g = dilate_translate(psi.values, grid, N, m, n)
                acc += np.abs(fs.conj() @ g * grid.step) ** 2
        return acc

    if window_m < 0:
        return np.zeros(fs.shape[0])
    parts = ordered_map(one_scale, range(-window_m, window_m + 1))
    return np.sum(parts, axis=0)


def parseval_defect(fs, psis, N, window_m=6, window_n=32):
    fs = np.atleast_2d(np.asarray(fs, dtype=np.complex128))
    step = psis[0].grid.step if psis else 1.0
    norms = np.sum(np.abs(fs) ** 2, axis=1) * step
    sums = parseval_sums(fs, psis, N, window_m, window_n)
    return float(np.max(np.abs(sums - norms) / norms))


def projection_checks(phi0: DilatedVector, psi0: Sequence[DilatedVector], bank: FilterBank,
                      ops: DilatedOperators, window_m=6, window_n=32, tests=10, seed=0):
    """Report on P1, the projection onto the trivial-cycle block."""
    j = ops.trivial_index()
    if j is None:
        raise NoTrivialCycle("no trivial cycle, so no L^2(R) block")
    N = bank.N
    grid = phi0.grid
    rng = np.random.default_rng(seed)
    comm = 0.0
    for _ in range(4):
        v = random_step_vector(ops, rng)
        for a, b in ((ops.P1(ops.U(v)), ops.U(ops.P1(v))),
                     (ops.P1(ops.T(v)), ops.T(ops.P1(v)))):
            comm = max(comm, (a - b).norm() / v.norm())
    phi1 = scaling_function(ops.m0, N, grid)
    psi1 = wavelet_time(bank, phi1)[1:]
    p_phi = numlin.max_abs(ops.P1(phi0).blocks[j][0] - phi1.values)
    p_psi = max((numlin.max_abs(ops.P1(p).blocks[j][0] - q.values) for p, q in zip(psi0, psi1)),
                default=0.0)
    params = gaussian_tests(tests, seed)
    fs = np.array([sample_test(grid, **p) for p in params])
    block_psis = [SampledFunction(grid, p.blocks[j][0], "time") for p in psi0]
    defect = parseval_defect(fs, block_psis, N, window_m, window_n)
    return {
        "p1_commutation_defect": comm,
        "p1_phi_defect": p_phi,
        "p1_psi_defect": p_psi,
        "parseval_defect": defect,
    }


def random_step_vector(ops: DilatedOperators, rng, width_cells=None, lo=-4.0, hi=4.0):
    """Random vector constant on cells of width N*step, supported in [lo, hi).

    Such vectors are represented exactly, so U0, T0 and their inverses act
    on them without quadrature error.
    """
    grid = ops.grid
    width = width_cells or ops.N ** 2
    t = grid.points
    inside = (t >= lo) & (t < hi)
    blocks = []
    for p in ops.sizes:
        b = np.zeros((p, grid.count), dtype=np.complex128)
        for k in range(p):
            coarse = rng.normal(size=grid.count // width + 1) + 1j * rng.normal(size=grid.count // width + 1)
            b[k] = np.repeat(coarse, width)[:grid.count] * inside
        blocks.append(b)
    return DilatedVector(grid, tuple(blocks))


def operator_defects(ops: DilatedOperators, count=10, seed=1):
    """Unitarity of U0, T0 and the covariance U0 T0 U0^-1 = T0^N on test vectors."""
    rng = np.random.default_rng(seed)
    out = {"unitarity_defect": 0.0, "covariance_defect": 0.0}
    for _ in range(count):
        v = random_step_vector(ops, rng)
        nv = v.norm()
        out["unitarity_defect"] = max(out["unitarity_defect"],
                                      abs(ops.U(v).norm() - nv) / nv,
                                      abs(ops.T(v).norm() - nv) / nv)
        lhs = ops.U(ops.T(ops.U_inv(v)))
        rhs = ops.T(v, ops.N)
        out["covariance_defect"] = max(out["covariance_defect"], (lhs - rhs).norm() / nv)
    return out


def ntf_consistency_defect(psi: SampledFunction, N, window_m=4, window_n=16,
                           inner_m=1, inner_n=2):
    """Idempotency defect of the Gram of {U^m T^n psi}, read on interior rows.

    A normalized tight frame has an idempotent Gram.  The Gram is formed over
    |m| <= window_m, |n| <= window_n and G^2 - G is inspected only on the
    rows and columns with |m| <= inner_m, |n| <= inner_n, where truncating
    the frame to the window matters least.
    """
    idx = [(m, n) for m in range(-window_m, window_m + 1) for n in range(-window_n, window_n + 1)]
    vecs = np.array([dilate_translate(psi.values, psi.grid, N, m, n) for m, n in idx])
    g = (vecs.conj() @ vecs.T).T * psi.grid.step
    keep = [i for i, (m, n) in enumerate(idx) if abs(m) <= inner_m and abs(n) <= inner_n]
    return numlin.max_abs((g @ g - g)[np.ix_(keep, keep)])


# ---------------------------------------------------- multiresolution slices

def _label_U(item, m0, N):
    f, n = item
    if n >= 1:
        return (f, n - 1)
    return (f.upsample(N) * m0, 0)


def _label_T(item, N, power=1):
    f, n = item
    return (LaurentPoly.monomial(power * N ** n) * f, n)


def _label_U_inv(item):
    f, n = item
    return (f, n + 1)


def multiresolution_check(m0: LaurentPoly, h: LaurentPoly, N=2, kmax=2, nmax=2,
                          bank: Optional[FilterBank] = None, tol=1e-8):
    """Finite-slice checks of the nested spaces V_n spanned by (z^k, n).

    Item (f, n) stands for U^-n pi(f) phi.  Reports the worst relative
    residual of projecting V_n-slice vectors onto the V_{n+1} slice, the
    covariance U T U^-1 = T^N and isometry of U, T on kernel entries and,
    given a bank, the orthonormality of {(z^(N k) m_i, 1)} and their
    orthogonality to the V_0 slice.
    """
    if harmonic_defect(m0, h, N) > tol:
        raise NotHarmonic("R h != h")
    lo, hi = m0.degree_span()
    spread = max(abs(lo), abs(hi))
    ranges = [kmax]
    for _ in range(nmax + 1):
        ranges.append(N * ranges[-1] + spread)

    def gram(a, b):
        k = wavelet_rep_kernel(m0, h, list(a) + list(b), N)
        g = k.gram
        return g[:len(a), :len(a)], g[:len(a), len(a):], g[len(a):, len(a):]

    residual = 0.0
    for n in range(nmax + 1):
        xs = [(LaurentPoly.monomial(k), n) for k in range(-ranges[n], ranges[n] + 1)]
        ys = [(LaurentPoly.monomial(k), n + 1) for k in range(-ranges[n + 1], ranges[n + 1] + 1)]
        gxx, gxy, gyy = gram(xs, ys)
        proj = gxy @ numlin.pinv(gyy, 1e-12) @ gxy.conj().T
        diag = np.real(np.diag(gxx))
        res = np.real(np.diag(gxx - proj))
        scale = np.where(diag > 0, diag, 1.0)
        residual = max(residual, float(np.max(np.abs(res) / scale)))

    items = [(LaurentPoly.monomial(k), n) for n in range(nmax + 1) for k in range(-kmax, kmax + 1)]
    cov = iso = 0.0
    for x in items:
        lhs = _label_U(_label_T(_label_U_inv(x), N), m0, N)
        rhs = _label_T(x, N, N)
        for y in items:
            pair = wavelet_rep_kernel(m0, h, [lhs, rhs, y, x, _label_U(x, m0, N), _label_U(y, m0, N),
                                              _label_T(x, N), _label_T(y, N)], N).gram
            cov = max(cov, abs(pair[0, 2] - pair[1, 2]))
            iso = max(iso, abs(pair[4, 5] - pair[3, 2]), abs(pair[6, 7] - pair[3, 2]))
    report = {
        "inclusion_residual": residual,
        "covariance_defect": cov,
        "isometry_defect": iso,
    }
    if bank is not None:
        ws = [(LaurentPoly.monomial(N * k) * m, 1) for m in bank.highpass
              for k in range(-kmax, kmax + 1)]
        v0 = [(LaurentPoly.monomial(k), 0) for k in range(-kmax, kmax + 1)]
        gww, gwv, _ = gram(ws, v0)
        report["wavelet_orthonormality_defect"] = numlin.max_abs(gww - np.eye(len(ws)))
        report["wavelet_v0_overlap"] = numlin.max_abs(gwv)
    return report
