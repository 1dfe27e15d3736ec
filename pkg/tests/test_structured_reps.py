import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kolmo.errors import (
    IncompatibleKernel,
    NonPeriodic,
    NotGroupKernel,
    NotInvariant,
    NotPositiveDefinite,
    ValidationError,
)
from kolmo.kernel import BiKernel, FiniteKernel, positive_intertwiner
from kolmo.structured_reps import (
    FiniteGroup,
    GaborSystem,
    StateFunctional,
    check_group_kernel,
    cyclic_group,
    delta_gabor,
    gabor_from_kernel,
    gabor_intertwiner,
    gabor_relation_defect,
    gns_construct,
    group_intertwiner,
    group_representation,
    kernel_from_gabor,
    left_regular_rep,
    matrix_unit,
    orbit_kernel,
    positive_type_function,
    symmetric_group,
    torus_labels,
)

from conftest import random_complex, random_psd

SIGN = np.array([[1, -1], [-1, 1]], dtype=complex)


def gkern(g, gram):
    return FiniteKernel(g.labels(), np.asarray(gram, dtype=complex))


class TestFiniteGroup:
    def test_cyclic(self):
        g = cyclic_group(5)
        assert g.order == 5 and g.identity == 0
        assert list(g.inverse) == [0, 4, 3, 2, 1]

    def test_symmetric_nonabelian(self):
        g = symmetric_group(3)
        assert g.order == 6
        assert not np.array_equal(g.cayley, g.cayley.T)

    def test_rejects_non_associative(self):
        # a Latin square with identity 0 that is not a group
        t = np.array([[0, 1, 2, 3, 4], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3],
                      [3, 2, 4, 0, 1], [4, 3, 1, 2, 0]])
        with pytest.raises(ValidationError):
            FiniteGroup(t)

    def test_rejects_missing_identity(self):
        with pytest.raises(ValidationError):
            FiniteGroup(np.array([[1, 1], [1, 1]]))

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            FiniteGroup(np.array([[0, 2], [1, 0]]))


class TestGroupKernel:
    def test_delta(self):
        g = symmetric_group(3)
        assert check_group_kernel(g, gkern(g, np.eye(6)))

    def test_constant(self):
        g = cyclic_group(4)
        assert check_group_kernel(g, gkern(g, np.ones((4, 4))))

    def test_non_constant_diagonal(self):
        g = cyclic_group(2)
        assert not check_group_kernel(g, gkern(g, [[1, -1], [-1, 2]]))

    def test_positive_type_examples(self):
        g = cyclic_group(2)
        assert np.allclose(positive_type_function(g, gkern(g, np.eye(2))), [1, 0])
        assert np.allclose(positive_type_function(g, gkern(g, np.ones((2, 2)))), [1, 1])
        assert np.allclose(positive_type_function(g, gkern(g, SIGN)), [1, -1])

    def test_positive_type_rejects(self):
        g = cyclic_group(2)
        with pytest.raises(NotGroupKernel):
            positive_type_function(g, gkern(g, [[1, -1], [-1, 2]]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_positive_type_reconstructs(self, seed):
        rng = np.random.default_rng(seed)
        g = symmetric_group(3)
        rep = left_regular_rep(g)
        k = orbit_kernel(rep, random_complex(rng, 6))
        phi = positive_type_function(g, k)
        rebuilt = np.array([[phi[g.mul(g.inverse[y], x)] for y in range(6)] for x in range(6)])
        assert np.abs(rebuilt - k.gram).max() < 1e-12


class TestGroupRepresentation:
    def test_regular_z2(self):
        g = cyclic_group(2)
        rep = group_representation(g, gkern(g, np.eye(2)))
        assert rep.dim == 2
        m = rep.matrices[1]
        assert np.allclose(m @ m, np.eye(2)) and abs(np.trace(m)) < 1e-12

    def test_sign_rep(self):
        g = cyclic_group(2)
        rep = group_representation(g, gkern(g, SIGN))
        assert rep.dim == 1 and np.allclose(rep.matrices[1], [[-1]])

    def test_trivial_z3(self):
        g = cyclic_group(3)
        rep = group_representation(g, gkern(g, np.ones((3, 3))))
        assert rep.dim == 1 and all(np.allclose(m, [[1]]) for m in rep.matrices)

    def test_rejects(self):
        g = cyclic_group(2)
        with pytest.raises(NotGroupKernel):
            group_representation(g, gkern(g, [[1, -1], [-1, 2]]))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_invariants_random(self, seed):
        rng = np.random.default_rng(seed)
        g = symmetric_group(3)
        k = orbit_kernel(left_regular_rep(g), random_complex(rng, 6))
        rep = group_representation(g, k)
        assert rep.check() < 1e-9
        vecs = np.column_stack([m @ rep.cyclic for m in rep.matrices])
        assert np.abs((vecs.T @ vecs.conj()) - k.gram).max() < 1e-9


class TestGNS:
    def test_pure_state(self):
        rep = gns_construct(StateFunctional(np.diag([1.0, 0.0])))
        assert rep.dim == 2

    def test_trace(self):
        rep = gns_construct(StateFunctional(np.eye(2)))
        assert rep.dim == 4
        assert np.vdot(rep.xi0, rep.xi0).real == pytest.approx(2.0)

    def test_zero(self):
        rep = gns_construct(StateFunctional(np.zeros((2, 2))))
        assert rep.dim == 0 and all(op.size == 0 for op in rep.unit_ops.values())

    def test_rejects_negative(self):
        with pytest.raises(NotPositiveDefinite):
            StateFunctional(np.diag([1.0, -1.0]))

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValidationError):
            StateFunctional(np.array([[1, 1], [0, 1]]))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(1, 3), st.integers(0, 2 ** 32 - 1))
    def test_state_values(self, n, seed):
        rng = np.random.default_rng(seed)
        phi = StateFunctional(random_psd(rng, n))
        rep = gns_construct(phi)
        for _ in range(20):
            x = random_complex(rng, (n, n))
            val = np.vdot(rep.xi0, rep.pi(x) @ rep.xi0)
            assert abs(val - phi(x)) < 1e-9

    def test_multiplicative(self, rng):
        phi = StateFunctional(random_psd(rng, 3))
        rep = gns_construct(phi)
        x, y = random_complex(rng, (3, 3)), random_complex(rng, (3, 3))
        assert np.allclose(rep.pi(x @ y), rep.pi(x) @ rep.pi(y), atol=1e-9)
        assert np.allclose(rep.pi(x.conj().T), rep.pi(x).conj().T, atol=1e-9)

    def test_matrix_unit(self):
        assert matrix_unit(2, 0, 1).tolist() == [[0, 1], [0, 0]]


def pauli_system():
    return GaborSystem(-1, 2, np.diag([1, -1]).astype(complex),
                       np.array([[0, 1], [1, 0]], dtype=complex), np.array([1, 0], dtype=complex))


class TestGabor:
    def test_pauli_round_trip(self):
        s = pauli_system()
        k = kernel_from_gabor(s, 2)
        assert k.gram[torus_labels(2).index("1,1"), torus_labels(2).index("0,1")] == pytest.approx(-1)
        s2 = gabor_from_kernel(k, -1)
        assert s2.dim == 2
        assert np.abs(kernel_from_gabor(s2, 2).gram - k.gram).max() < 1e-9
        assert s2.commutation_defect() < 1e-9 and s2.unitarity_defect() < 1e-9

    def test_commutative(self):
        s = gabor_from_kernel(FiniteKernel(torus_labels(1), np.ones((1, 1))), 1)
        assert s.dim == 1 and np.allclose(s.U, 1) and np.allclose(s.V, 1)

    def test_delta_z4(self):
        s = delta_gabor(1j, 4)
        assert s.dim == 16
        assert s.commutation_defect() < 1e-12
        k = kernel_from_gabor(s, 4)
        assert np.abs(k.gram - np.eye(16)).max() < 1e-9

    def test_periodicity(self):
        s = delta_gabor(np.exp(2j * np.pi / 3), 3)
        for m in (s.U, s.V):
            cube = np.linalg.matrix_power(m, 3)
            assert np.allclose(cube, cube[0, 0] * np.eye(9), atol=1e-9)
            assert abs(abs(cube[0, 0]) - 1) < 1e-9

    def test_zero_vector(self):
        s = pauli_system()
        s0 = GaborSystem(s.lam, 2, s.U, s.V, np.zeros(2, dtype=complex))
        assert np.allclose(kernel_from_gabor(s0, 2).gram, 0)

    def test_trivial_system(self):
        s = GaborSystem(1, 1, np.eye(1), np.eye(1), np.ones(1))
        assert np.allclose(kernel_from_gabor(s, 3).gram, 1)

    def test_non_root(self):
        with pytest.raises(NonPeriodic):
            gabor_from_kernel(FiniteKernel(torus_labels(2), np.eye(4)), np.exp(1j))

    def test_incompatible(self):
        g = np.eye(4)
        g[0, 0] = 2
        with pytest.raises(IncompatibleKernel):
            gabor_from_kernel(FiniteKernel(torus_labels(2), g), -1)

    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from([2, 3, 4]), st.integers(0, 2 ** 32 - 1))
    def test_random_round_trip(self, q, seed):
        rng = np.random.default_rng(seed)
        lam = np.exp(2j * np.pi * rng.integers(q) / q)
        base = delta_gabor(lam, q)
        s = GaborSystem(lam, base.dim, base.U, base.V, random_complex(rng, base.dim))
        k = kernel_from_gabor(s, q)
        assert gabor_relation_defect(k.gram, q, lam) < 1e-10
        s2 = gabor_from_kernel(k, lam)
        assert np.abs(kernel_from_gabor(s2, q).gram - k.gram).max() < 1e-9
        assert s2.commutation_defect() < 1e-9


class TestIntertwiners:
    def test_group_identity(self, rng):
        g = cyclic_group(3)
        k = orbit_kernel(left_regular_rep(g), random_complex(rng, 3))
        s = group_intertwiner(BiKernel.from_kernel(k), k, k, g)
        assert np.allclose(s.matrix, np.eye(s.matrix.shape[0]), atol=1e-8)

    def test_group_regular_to_sign(self):
        g = cyclic_group(2)
        k, kp = gkern(g, np.eye(2)), gkern(g, SIGN)
        s = group_intertwiner(BiKernel(k.points, kp.points, SIGN), k, kp, g)
        assert s.matrix.shape == (1, 2)
        # e_0 -> u, e_1 -> -u with |u| = 1, so S S* = 2 and S*/sqrt(2) is an isometry
        assert np.allclose(s.matrix @ s.matrix.conj().T, [[2]], atol=1e-9)

    def test_group_not_invariant(self):
        g = cyclic_group(2)
        k = gkern(g, np.eye(2))
        vals = np.eye(2)
        vals[0, 1] = 0.5
        with pytest.raises(NotInvariant):
            group_intertwiner(BiKernel(k.points, k.points, vals), k, k, g)

    def test_group_commutant(self, rng):
        g = symmetric_group(3)
        rep = left_regular_rep(g)
        k = orbit_kernel(rep, random_complex(rng, 6))
        kp = FiniteKernel(k.points, 0.5 * k.gram)
        s = positive_intertwiner(kp, k)
        krep = group_representation(g, k)
        for m in krep.matrices:
            assert np.abs(s.matrix @ m - m @ s.matrix).max() < 1e-8

    def test_gabor_identity(self):
        k = kernel_from_gabor(pauli_system(), 2)
        s = gabor_intertwiner(BiKernel.from_kernel(k), k, k, -1)
        assert np.allclose(s.matrix, np.eye(2), atol=1e-8)

    def test_gabor_zero(self):
        k = kernel_from_gabor(pauli_system(), 2)
        s = gabor_intertwiner(BiKernel(k.points, k.points, np.zeros((4, 4))), k, k, -1)
        assert np.allclose(s.matrix, 0)

    def test_gabor_half(self):
        k = FiniteKernel(torus_labels(2), np.eye(4))
        s = gabor_intertwiner(BiKernel(k.points, k.points, 0.5 * np.eye(4)), k, k, -1)
        assert np.allclose(s.matrix, 0.5 * np.eye(4), atol=1e-8)

    def test_gabor_not_invariant(self):
        k = FiniteKernel(torus_labels(2), np.eye(4))
        vals = np.eye(4)
        vals[0, 1] = 1
        with pytest.raises(NotInvariant):
            gabor_intertwiner(BiKernel(k.points, k.points, vals), k, k, -1)

    def test_gabor_commutant(self, rng):
        base = delta_gabor(1j, 4)
        s = GaborSystem(1j, 16, base.U, base.V, random_complex(rng, 16))
        k = kernel_from_gabor(s, 4)
        kp = FiniteKernel(k.points, 0.25 * k.gram)
        t = positive_intertwiner(kp, k).matrix
        sk = gabor_from_kernel(k, 1j)
        assert np.abs(t @ sk.U - sk.U @ t).max() < 1e-8
        assert np.abs(t @ sk.V - sk.V @ t).max() < 1e-8
