import numpy as np
import pytest

from gsirkit.discrete import FiniteSpace, HilbertSubspace, JointModel, Partition
from gsirkit.discrete.space import load_joint, load_space, save_json
from gsirkit.errors import InvalidInput


class TestFiniteSpace:
    def test_rejects_zero_probability(self):
        with pytest.raises(InvalidInput):
            FiniteSpace.from_pmf([0.5, 0.5, 0.0])

    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidInput):
            FiniteSpace.from_pmf([0.5, 0.6])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InvalidInput):
            FiniteSpace(("a", "a"), np.array([0.5, 0.5]))

    def test_mean_var_cov(self):
        sp = FiniteSpace.from_pmf([0.25, 0.75])
        f = np.array([0.0, 4.0])
        assert sp.mean(f) == pytest.approx(3.0)
        assert sp.var(f) == pytest.approx(3.0)
        assert sp.cov(f, f) == pytest.approx(3.0)

    def test_pmf_is_read_only(self):
        sp = FiniteSpace.uniform(3)
        with pytest.raises(ValueError):
            sp.pmf[0] = 1.0

    def test_json_round_trip(self, tmp_path):
        sp = FiniteSpace(("a", "b", "c"), np.array([0.2, 0.3, 0.5]))
        save_json(sp, tmp_path / "sp.json")
        back = load_space(tmp_path / "sp.json")
        assert back.points == sp.points
        np.testing.assert_array_equal(back.pmf, sp.pmf)


class TestPartition:
    def test_canonical_order(self):
        assert Partition([[3, 2], [1, 0]]) == Partition([[0, 1], [2, 3]])

    def test_from_labels(self):
        assert Partition.from_labels([1, 1, 0, 0]).blocks == ((0, 1), (2, 3))

    @pytest.mark.parametrize("blocks", [[[0, 1], [1, 2]], [[0], [2]], [[0, 1], []]])
    def test_invalid(self, blocks):
        with pytest.raises(InvalidInput):
            Partition(blocks)

    def test_coarser(self):
        assert Partition.trivial(4).is_coarser_than(Partition([[0, 1], [2, 3]]))
        assert not Partition.singletons(4).is_coarser_than(Partition([[0, 1], [2, 3]]))


class TestHilbertSubspace:
    def test_dependent_basis_rejected(self):
        with pytest.raises(InvalidInput):
            HilbertSubspace(np.array([[1.0, 2.0], [1.0, 2.0]]), np.eye(2))

    def test_metric_must_be_positive_definite(self):
        with pytest.raises(InvalidInput):
            HilbertSubspace(np.eye(2), np.diag([1.0, 0.0]))

    def test_metric_must_be_symmetric(self):
        with pytest.raises(InvalidInput):
            HilbertSubspace(np.eye(2), np.array([[1.0, 0.5], [0.0, 1.0]]))

    def test_zero(self):
        assert HilbertSubspace.zero(3).dim == 0

    def test_span_is_l2_orthonormal(self):
        sp = FiniteSpace.from_pmf([0.1, 0.2, 0.3, 0.4])
        H = HilbertSubspace.span(np.array([[1.0, 2, 3, 4], [1, 1, 1, 1]]).T, sp)
        np.testing.assert_allclose(sp.l2_gram(H.basis), np.eye(2), atol=1e-12)


class TestJointModel:
    def test_marginals(self, joint_4x2):
        np.testing.assert_allclose(joint_4x2.p_x, np.full(4, 0.25))
        np.testing.assert_allclose(joint_4x2.p_y, [0.55, 0.45])

    def test_rejects_empty_marginal(self):
        with pytest.raises(InvalidInput):
            JointModel(np.array([[0.5, 0.0], [0.5, 0.0]]))

    def test_rejects_negative(self):
        with pytest.raises(InvalidInput):
            JointModel(np.array([[0.6, -0.1], [0.25, 0.25]]))

    def test_json_round_trip(self, tmp_path, joint_4x2):
        save_json(joint_4x2, tmp_path / "j.json")
        np.testing.assert_array_equal(load_joint(tmp_path / "j.json").joint, joint_4x2.joint)
