import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsirkit.discrete import (
    FiniteSpace,
    HilbertSubspace,
    JointModel,
    Partition,
    central_partition,
    check_norm_domination,
    check_range_inclusion,
    is_complete,
    population_operators,
    population_regression_operator,
)
from gsirkit.discrete.randgen import random_pmf, random_space, random_subspace
from gsirkit.errors import AssumptionViolation
from gsirkit.linalg import null_space
from gsirkit.suite import _dense_subspace


def full(jm):
    return HilbertSubspace.full(jm.space_x), HilbertSubspace.full(jm.space_y)


def random_joint(rng):
    P = rng.dirichlet(np.ones(int(rng.integers(2, 7)) * 3)).reshape(-1, 3) + 1e-3
    return JointModel(P / P.sum())


class TestPopulationOperators:
    def test_independent_has_zero_cross_covariance(self):
        jm = JointModel(np.outer([0.2, 0.3, 0.5], [0.6, 0.4]))
        ops = population_operators(jm, *full(jm))
        assert np.abs(ops.sxy).max() < 1e-15

    def test_cross_covariance_of_example_joint(self, joint_4x2):
        # with H = L2 the coordinates are P(Y|X=x) - P(Y): rows +-(0.35, -0.35)
        ops = population_operators(joint_4x2, *full(joint_4x2))
        expected = np.array([[0.35, -0.35], [0.35, -0.35], [-0.35, 0.35], [-0.35, 0.35]])
        np.testing.assert_allclose(ops.sxy, expected, atol=1e-14)
        np.testing.assert_allclose(ops.sxx, np.eye(4) - 0.25, atol=1e-14)
        np.testing.assert_allclose(ops.mu_x, np.ones(4), atol=1e-14)

    def test_y_equals_x_uniform(self):
        jm = JointModel(np.diag([0.5, 0.5]))
        ops = population_operators(jm, *full(jm))
        np.testing.assert_allclose(ops.sxy, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)
        np.testing.assert_allclose(ops.sxy, ops.sxx, atol=1e-15)

    def test_constant_in_kernel(self):
        rng = np.random.default_rng(0)
        jm = random_joint(rng)
        sp = jm.space_x
        hx = HilbertSubspace(np.column_stack([np.ones(sp.m), rng.standard_normal((sp.m, 2))]), np.diag([1.0, 2.0, 3.0]))
        ops = population_operators(jm, hx, HilbertSubspace.full(jm.space_y))
        np.testing.assert_allclose(ops.sxx @ np.array([1.0, 0.0, 0.0]), 0.0, atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_self_adjoint_psd_and_adjoint_pair(self, seed):
        rng = np.random.default_rng(seed)
        jm = random_joint(rng)
        hx = random_subspace(rng, jm.space_x, int(rng.integers(1, jm.m_x + 1)))
        hy = random_subspace(rng, jm.space_y, int(rng.integers(1, jm.m_y + 1)))
        ops = population_operators(jm, hx, hy)
        Mx, My = np.asarray(hx.metric), np.asarray(hy.metric)
        Cxx = Mx @ ops.sxx
        np.testing.assert_allclose(Cxx, Cxx.T, atol=1e-12)
        assert np.linalg.eigvalsh(0.5 * (Cxx + Cxx.T)).min() > -1e-12
        np.testing.assert_allclose(Mx @ ops.sxy, (My @ ops.syx).T, atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kernel_of_sxx_is_constants(self, seed):
        rng = np.random.default_rng(seed)
        jm = random_joint(rng)
        ops = population_operators(jm, *full(jm))
        N = null_space(ops.sxx, 1e-10)
        assert N.shape[1] == 1
        np.testing.assert_allclose(np.abs(N[:, 0]), 1 / np.sqrt(jm.m_x), atol=1e-10)


class TestRegressionOperator:
    def test_zero_cross_covariance(self):
        jm = JointModel(np.outer([0.2, 0.3, 0.5], [0.6, 0.4]))
        R = population_regression_operator(population_operators(jm, *full(jm)))
        assert np.abs(R).max() < 1e-12

    def test_y_equals_x_gives_projection(self):
        jm = JointModel(np.diag([0.2, 0.3, 0.5]))
        R = population_regression_operator(population_operators(jm, *full(jm)))
        np.testing.assert_allclose(R @ R, R, atol=1e-12)
        np.testing.assert_allclose(R @ np.ones(3), 0.0, atol=1e-12)
        # centred functions are fixed: P f = f - E f
        f = np.array([1.0, -2.0, 0.5])
        np.testing.assert_allclose(R @ f, f - jm.p_x @ f, atol=1e-12)

    def test_range_violation_raises(self):
        jm = JointModel(np.diag([0.5, 0.5]))
        ops = population_operators(jm, *full(jm))
        bad = type(ops)(ops.hx, ops.hy, np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), ops.syx, ops.syy, ops.mu_x, ops.mu_y)
        with pytest.raises(AssumptionViolation, match="ran\\(Sigma_XY\\)"):
            population_regression_operator(bad)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_columns_in_closure_of_range(self, seed):
        rng = np.random.default_rng(seed)
        jm = random_joint(rng)
        hx = _dense_subspace(rng, jm.space_x)
        ops = population_operators(jm, hx, HilbertSubspace.full(jm.space_y))
        R = population_regression_operator(ops)
        assert check_range_inclusion(R, ops.sxx)


class TestRangeInclusion:
    def test_identity(self):
        A = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert check_range_inclusion(A, A)

    def test_zero(self):
        assert check_range_inclusion(np.zeros((2, 2)), np.diag([1.0, 0.0]))

    def test_orthogonal_rank_one(self):
        assert not check_range_inclusion(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))


class TestCentralPartition:
    def test_independent_is_one_block(self):
        jm = JointModel(np.outer([0.2, 0.3, 0.5], [0.6, 0.4]))
        assert central_partition(jm) == Partition.trivial(3)

    def test_injective_is_singletons(self):
        assert central_partition(JointModel(np.diag([0.2, 0.3, 0.5]))) == Partition.singletons(3)

    def test_example_rows(self, joint_4x2):
        assert central_partition(joint_4x2) == Partition([[0, 1], [2, 3]])

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_conditional_independence_and_minimality(self, seed):
        rng = np.random.default_rng(seed)
        labels = rng.integers(0, 3, size=6)
        rows = rng.dirichlet(np.ones(3), size=3)
        P = random_pmf(rng, 6)[:, None] * rows[labels]
        jm = JointModel(P / P.sum())
        G = central_partition(jm)
        cond = jm.y_given_x()
        for b in G.blocks:
            assert np.abs(cond[list(b)] - cond[b[0]]).max() <= 1e-10
        reps = [cond[b[0]] for b in G.blocks]
        for i in range(len(reps)):
            for j in range(i + 1, len(reps)):
                assert np.abs(reps[i] - reps[j]).max() > 1e-10


class TestCompleteness:
    def test_one_block(self, joint_4x2):
        assert is_complete(joint_4x2, Partition.trivial(4))

    def test_independent_two_blocks(self):
        jm = JointModel(np.outer([0.25] * 4, [0.6, 0.4]))
        assert not is_complete(jm, Partition([[0, 1], [2, 3]]))

    def test_example_joint(self, joint_4x2, halves):
        assert is_complete(joint_4x2, halves)

    def test_too_few_y_atoms(self):
        rows = np.array([[0.9, 0.1], [0.5, 0.5], [0.2, 0.8]])
        assert not is_complete(JointModel(rows / 3), Partition.singletons(3))


class TestNormDomination:
    def test_isometry(self):
        sp = FiniteSpace.from_pmf([0.2, 0.3, 0.5])
        B = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]])
        assert check_norm_domination(HilbertSubspace(B, sp.l2_gram(B)), sp) == pytest.approx(1.0)

    def test_scaled_metric(self):
        sp = FiniteSpace.from_pmf([0.2, 0.3, 0.5])
        B = np.array([[1.0, 0.0], [1.0, 1.0], [0.0, 2.0]])
        assert check_norm_domination(HilbertSubspace(B, 4 * sp.l2_gram(B)), sp) == pytest.approx(0.5)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kernel_bound(self, seed):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(2, 10))
        pts = rng.standard_normal((m, 2))
        K = np.exp(-((pts[:, None] - pts[None]) ** 2).sum(-1)) + 1e-8 * np.eye(m)
        sp = FiniteSpace.uniform(m)
        C = check_norm_domination(HilbertSubspace.from_kernel(K), sp)
        assert C <= np.sqrt(np.mean(np.diag(K))) + 1e-9


def test_random_space_sizes():
    rng = np.random.default_rng(0)
    sizes = {random_space(rng).m for _ in range(300)}
    assert min(sizes) == 2 and max(sizes) == 12
