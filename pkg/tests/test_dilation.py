from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kolmo.dilation import (
    DilatedVector,
    alpha_rotate,
    build_dilated_rep,
    cycle_scaling_functions,
    cycle_scaling_hat,
    dilated_wavelets,
    multiresolution_check,
    ntf_consistency_defect,
    operator_defects,
    orthonormality_check,
    parseval_sums,
    projection_checks,
    random_step_vector,
    refinement_defect,
)
from kolmo.errors import GridMismatch, InvalidCycle, NoTrivialCycle, NotHarmonic
from kolmo.filters import (
    DAUBECHIES4,
    HAAR,
    STRETCHED_HAAR,
    Cycle,
    CycleSet,
    FilterBank,
    Grid,
    LaurentPoly,
    SampledFunction,
    bundled_bank,
    dilate_translate,
    find_cycles,
    scaling_function,
)

SMALL = Grid(-8.0, 2.0 ** -5, 2 ** 9)
WIDE = Grid(-32.0, 2.0 ** -4, 2 ** 10)
THIRD = Fraction(1, 3)


def box(grid, a, b):
    t = grid.points
    return ((t >= a) & (t < b)).astype(float)


@pytest.fixture(scope="module")
def stretched():
    cs = find_cycles(STRETCHED_HAAR, 2, 6)
    return build_dilated_rep(STRETCHED_HAAR, cs, 2, SMALL)


@pytest.fixture(scope="module")
def haar():
    cs = find_cycles(HAAR, 2, 6)
    return build_dilated_rep(HAAR, cs, 2, SMALL)


@pytest.fixture(scope="module")
def stretched_wide():
    cs = find_cycles(STRETCHED_HAAR, 2, 6)
    return build_dilated_rep(STRETCHED_HAAR, cs, 2, WIDE)


@pytest.fixture(scope="module")
def haar_wide():
    return build_dilated_rep(HAAR, find_cycles(HAAR, 2, 6), 2, WIDE)


class TestAlpha:
    def test_identity(self):
        assert alpha_rotate(DAUBECHIES4, Fraction(0)).allclose(DAUBECHIES4, 0)

    def test_monomial(self):
        got = alpha_rotate(LaurentPoly.monomial(1), THIRD)
        assert got.coeff(1) == pytest.approx(np.exp(2j * np.pi / 3), abs=1e-15)

    def test_stretched_invariant(self):
        assert alpha_rotate(STRETCHED_HAAR, THIRD).allclose(STRETCHED_HAAR, 1e-15)
        assert alpha_rotate(STRETCHED_HAAR, 2 * THIRD).allclose(STRETCHED_HAAR, 1e-15)

    def test_complex_argument(self):
        z0 = np.exp(0.4j)
        got = alpha_rotate(DAUBECHIES4, complex(z0))
        assert got(np.exp(0.3j)) == pytest.approx(DAUBECHIES4(np.exp(0.3j) * z0))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 11), st.floats(-3, 3))
    def test_evaluation(self, num, th):
        a = Fraction(num, 12)
        z = np.exp(1j * th)
        got = alpha_rotate(DAUBECHIES4, a)(z)
        assert got == pytest.approx(DAUBECHIES4(z * np.exp(2j * np.pi * num / 12)), abs=1e-12)


class TestCycleScaling:
    def test_trivial_cycle_is_phi(self):
        c = find_cycles(HAAR, 2, 3).trivial()
        comp = cycle_scaling_functions(HAAR, c, 2, time_grid=SMALL, with_hat=False)
        assert np.abs(comp.scaling[0].values - scaling_function(HAAR, 2, SMALL).values).max() < 1e-14

    def test_stretched_c2(self):
        c = Cycle((THIRD, 2 * THIRD), (0.0, 0.0))
        comp = cycle_scaling_functions(STRETCHED_HAAR, c, 2, time_grid=SMALL,
                                       freq_grid=Grid(-4.0, 0.5, 16))
        ref = box(SMALL, 0, 3) / 3
        for f in comp.scaling:
            assert np.abs(f.values - ref).max() < 1e-12
        for fh in comp.scaling_hat:
            assert fh.values[8] == pytest.approx(1, abs=1e-14)

    def test_hat_at_zero(self):
        g = Grid(-1.0, 0.25, 8)
        for m in (HAAR, STRETCHED_HAAR, DAUBECHIES4):
            for c in find_cycles(m, 2, 4):
                for fh in cycle_scaling_hat(m, c, 2, 40, g):
                    assert abs(fh.values[4] - 1) < 1e-12

    def test_hat_closed_form(self):
        c = Cycle((THIRD, 2 * THIRD), (0.0, 0.0))
        g = Grid(-20.0, 0.125, 320)
        x = g.points
        with np.errstate(invalid="ignore", divide="ignore"):
            ref = np.exp(-1.5j * x) * np.where(x == 0, 1, np.sin(1.5 * x) / (1.5 * x))
        for fh in cycle_scaling_hat(STRETCHED_HAAR, c, 2, 40, g):
            assert np.abs(fh.values - ref).max() < 1e-6

    def test_invalid_cycle(self):
        bad = Cycle((Fraction(1, 2),), (0.0,))
        with pytest.raises(InvalidCycle):
            cycle_scaling_functions(HAAR, bad, 2, time_grid=SMALL, with_hat=False)
        not_orbit = Cycle((THIRD, THIRD), (0.0, 0.0))
        with pytest.raises(InvalidCycle):
            cycle_scaling_functions(STRETCHED_HAAR, not_orbit, 2, time_grid=SMALL, with_hat=False)


class TestOperators:
    def test_block_sizes(self, stretched, haar):
        assert stretched[0].sizes == (1, 2) and sum(stretched[0].sizes) == 3
        assert haar[0].sizes == (1,)

    def test_stretched_u0(self, stretched):
        ops, _ = stretched
        rng = np.random.default_rng(0)
        v = random_step_vector(ops, rng)
        u = ops.U(v)
        g = SMALL
        # U0(x1, x2, x3) = (U x1, U x3, U x2)
        assert np.allclose(u.blocks[0][0], dilate_translate(v.blocks[0][0], g, 2, 1, 0))
        assert np.allclose(u.blocks[1][0], dilate_translate(v.blocks[1][1], g, 2, 1, 0))
        assert np.allclose(u.blocks[1][1], dilate_translate(v.blocks[1][0], g, 2, 1, 0))

    def test_stretched_t0(self, stretched):
        ops, _ = stretched
        v = random_step_vector(ops, np.random.default_rng(1))
        t = ops.T(v)
        w = np.exp(2j * np.pi / 3)
        shift = lambda a: dilate_translate(a, SMALL, 2, 0, 1)
        assert np.allclose(t.blocks[0][0], shift(v.blocks[0][0]))
        assert np.allclose(t.blocks[1][0], w * shift(v.blocks[1][0]))
        assert np.allclose(t.blocks[1][1], w ** 2 * shift(v.blocks[1][1]))

    def test_unitary_and_covariant(self, stretched, haar):
        for ops, _ in (stretched, haar):
            d = operator_defects(ops, count=5)
            assert d["unitarity_defect"] < 1e-6 and d["covariance_defect"] < 1e-6

    def test_inverse(self, stretched_wide):
        # U expands supports by N, so this needs the wide grid
        ops, _ = stretched_wide
        v = random_step_vector(ops, np.random.default_rng(2), lo=-2.0, hi=2.0)
        for m, n in ((1, 0), (2, 3), (-1, -2)):
            back = ops.orbit(ops.orbit(v, 0, n), m, 0)
            back = ops.orbit(ops.orbit(back, -m, 0), 0, -n)
            assert (back - v).norm() < 1e-12 * v.norm()

    def test_phases_enter_u0(self):
        # z times stretched Haar: m0(w) = sqrt(2) w on the 3-cycle
        m = LaurentPoly(1, [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)])
        cs = find_cycles(m, 2, 3)
        c2 = [c for c in cs if not c.trivial][0]
        assert c2.phases == pytest.approx((2 * np.pi / 3, -2 * np.pi / 3))
        ops, phi0 = build_dilated_rep(m, cs, 2, SMALL)
        assert refinement_defect(ops, phi0) < 1e-12
        assert orthonormality_check(phi0, ops, 6) < 1e-12
        v = random_step_vector(ops, np.random.default_rng(4), lo=-2.0, hi=2.0)
        u = ops.U(v)
        up = lambda a: dilate_translate(a, SMALL, 2, 1, 0)
        assert np.allclose(u.blocks[1][0], np.exp(2j * np.pi / 3) * up(v.blocks[1][1]))
        assert np.allclose(u.blocks[1][1], np.exp(-2j * np.pi / 3) * up(v.blocks[1][0]))
        assert operator_defects(ops, count=3)["covariance_defect"] < 1e-12

    def test_p1(self, stretched):
        ops, phi0 = stretched
        p = ops.P1(phi0)
        assert np.all(p.blocks[1] == 0) and np.array_equal(p.blocks[0], phi0.blocks[0])

    def test_no_trivial_cycle(self, stretched):
        ops, phi0 = stretched
        cs = CycleSet(2, (Cycle((THIRD, 2 * THIRD), (0.0, 0.0)),))
        ops2, phi2 = build_dilated_rep(STRETCHED_HAAR, cs, 2, SMALL)
        with pytest.raises(NoTrivialCycle):
            ops2.P1(phi2)

    def test_grid_must_be_adic(self):
        g = Grid(-8.0, 0.03, 512)
        with pytest.raises(GridMismatch):
            dilate_translate(np.zeros(512), g, 2, 1, 0)


class TestScalingChecks:
    def test_refinement(self, stretched, haar):
        for ops, phi0 in (stretched, haar):
            assert refinement_defect(ops, phi0) < 1e-4

    def test_refinement_d4(self):
        ops, phi0 = build_dilated_rep(DAUBECHIES4, find_cycles(DAUBECHIES4, 2, 6), 2, SMALL)
        assert refinement_defect(ops, phi0) < 1e-4

    def test_norms(self, stretched):
        _, phi0 = stretched
        assert phi0.norm() == pytest.approx(1, abs=1e-12)
        assert SampledFunction(SMALL, phi0.blocks[0][0]).norm() ** 2 == pytest.approx(1 / 3)

    def test_orthonormality(self, stretched, haar):
        for ops, phi0 in (stretched, haar):
            assert orthonormality_check(phi0, ops, 12) <= 1e-6

    def test_zero_vector(self, haar):
        ops, _ = haar
        assert orthonormality_check(ops.zero(), ops, 3) == pytest.approx(1)


class TestWavelets:
    def test_stretched_psi(self, stretched_wide):
        ops, phi0 = stretched_wide
        psis, defect = dilated_wavelets(bundled_bank("stretched_haar"), ops, phi0)
        ref = (box(WIDE, 0, 1.5) - box(WIDE, 1.5, 3)) / 3
        for block in psis[0].blocks:
            for row in block:
                assert np.abs(row - ref).max() < 1e-12
        assert defect <= 1e-4

    def test_haar_onb(self, haar_wide):
        ops, phi0 = haar_wide
        _, defect = dilated_wavelets(bundled_bank("haar"), ops, phi0)
        assert defect <= 1e-5

    def test_duplicated_bank(self, haar):
        ops, phi0 = haar
        _, defect = dilated_wavelets(FilterBank(2, (HAAR, HAAR)), ops, phi0, 1, 2)
        assert defect > 0.1


class TestProjection:
    def test_stretched(self, stretched):
        ops, phi0 = stretched
        bank = bundled_bank("stretched_haar")
        psis, _ = dilated_wavelets(bank, ops, phi0, 0, 0)
        rep = projection_checks(phi0, psis, bank, ops, window_m=4, window_n=12, tests=3)
        assert rep["p1_commutation_defect"] < 1e-6
        assert rep["p1_phi_defect"] < 1e-12 and rep["p1_psi_defect"] < 1e-12

    def test_haar_p1_identity(self, haar):
        ops, phi0 = haar
        v = random_step_vector(ops, np.random.default_rng(5))
        assert (ops.P1(v) - v).norm() == 0

    def test_empty_window(self):
        f = np.ones((1, 8))
        psi = SampledFunction(Grid(0.0, 0.125, 8), np.ones(8))
        assert parseval_sums(f, [psi], 2, window_m=-1)[0] == 0


class TestNTFConsistency:
    def test_haar_wavelet_orthonormal(self):
        grid = Grid(-16.0, 2.0 ** -4, 2 ** 9)
        psi = SampledFunction(grid, box(grid, 0, 0.5) - box(grid, 0.5, 1))
        assert ntf_consistency_defect(psi, 2, 2, 4, 1, 2) < 1e-12


class TestMultiresolution:
    @pytest.mark.parametrize("name", ["haar", "stretched_haar", "daubechies4"])
    def test_h_one(self, name):
        bank = bundled_bank(name)
        rep = multiresolution_check(bank.lowpass, LaurentPoly.constant(1), 2, 2, 2, bank)
        assert rep["inclusion_residual"] <= 1e-8
        assert rep["covariance_defect"] <= 1e-12
        assert rep["wavelet_orthonormality_defect"] <= 1e-12
        assert rep["wavelet_v0_overlap"] <= 1e-12

    def test_not_harmonic(self):
        with pytest.raises(NotHarmonic):
            multiresolution_check(HAAR, LaurentPoly.from_dict({0: 1, 1: 0.2, -1: 0.2}))

    def test_stretched_ntf_h(self):
        h = LaurentPoly.from_dict({-2: 1 / 9, -1: 2 / 9, 0: 1 / 3, 1: 2 / 9, 2: 1 / 9})
        rep = multiresolution_check(STRETCHED_HAAR, h, 2, 2, 2)
        assert rep["inclusion_residual"] <= 1e-8


def test_dilated_vector_algebra():
    a = DilatedVector(SMALL, (np.ones((1, 512)), np.ones((2, 512))))
    b = a * 2
    assert (b - a).inner(a) == pytest.approx(3 * 512 * SMALL.step)
    assert a.norm() == pytest.approx(np.sqrt(3 * 16))
