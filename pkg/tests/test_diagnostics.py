import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gsirkit import Dataset, ScenarioSpec, gen_continuous, gsir_fit
from gsirkit.diagnostics import (
    DegenerateConditioning,
    DiagnosticsConfig,
    alignment,
    alignment_detail,
    default_k,
    default_slices,
    default_slices_2d,
    knn_cond_variance,
    knn_cond_variance_detail,
    sliced_cond_variance,
    sliced_cond_variance_detail,
    unbiasedness_report,
)
from gsirkit.errors import InvalidInput


class TestDefaults:
    def test_values(self):
        assert default_slices(500) == 11
        assert default_slices(40) == 5
        assert default_slices_2d(500) == 4
        assert default_k(500) == 10
        assert default_k(2000) == 40


class TestSliced:
    def test_function_of_g_is_zero_within_slices(self):
        g = np.repeat(np.arange(5.0), 20)
        assert sliced_cond_variance(g**2, g, 5) == pytest.approx(0.0, abs=1e-15)

    def test_monotone_bounded_g(self):
        g = np.random.default_rng(0).uniform(size=1000)
        f = np.exp(g)
        assert sliced_cond_variance(f, g, 10) < 0.02 * f.var()

    def test_independent_close_to_variance(self):
        rng = np.random.default_rng(1)
        f = rng.standard_normal(2000)
        assert sliced_cond_variance(f, rng.standard_normal(2000), 10) == pytest.approx(f.var(), rel=0.05)

    def test_hand_example(self):
        # two slices {0,1} and {2,3}: within-slice variances 1 and 1
        f = np.array([1.0, 3.0, 5.0, 7.0])
        assert sliced_cond_variance(f, np.arange(4.0), 2) == pytest.approx(1.0)

    def test_ties_reduce_slices(self):
        g = np.array([0.0] * 8 + [1.0] * 2)
        st_ = sliced_cond_variance_detail(np.arange(10.0), g, 5)
        assert st_.reduced
        assert np.all(st_.counts > 0)

    def test_two_dimensional(self):
        rng = np.random.default_rng(2)
        g = rng.uniform(size=(900, 2))
        f = g[:, 0] + g[:, 1]
        assert sliced_cond_variance(f, g, 5) < 0.05 * f.var()

    def test_validation(self):
        with pytest.raises(InvalidInput):
            sliced_cond_variance(np.ones(5), np.ones(5), 3)
        with pytest.raises(InvalidInput):
            sliced_cond_variance(np.ones(10), np.ones((10, 3)), 2)
        with pytest.raises(InvalidInput):
            sliced_cond_variance(np.ones(10), np.ones(9), 2)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 8))
    def test_bounded_by_variance(self, seed, s):
        rng = np.random.default_rng(seed)
        f, g = rng.standard_normal(60), rng.standard_normal(60)
        assert 0 <= sliced_cond_variance(f, g, s) <= f.var() + 1e-12


class TestKnn:
    def test_low_dimensional_truth(self):
        rng = np.random.default_rng(3)
        g = rng.standard_normal((2000, 2))
        f = np.sin(g[:, 0]) + g[:, 1]
        assert knn_cond_variance(f, g, 10) < 0.05 * f.var()

    def test_independent(self):
        rng = np.random.default_rng(4)
        f = rng.standard_normal(1000)
        assert knn_cond_variance(f, rng.standard_normal((1000, 3)), 5) == pytest.approx(f.var(ddof=1), rel=0.1)

    def test_degenerate_conditioning(self):
        f = np.arange(20.0)
        with pytest.warns(DegenerateConditioning):
            st_ = knn_cond_variance_detail(f, np.ones((20, 2)), 3)
        assert st_.degenerate and st_.value == pytest.approx(f.var())

    def test_k_range(self):
        with pytest.raises(InvalidInput):
            knn_cond_variance(np.ones(10), np.arange(10.0), 6)
        with pytest.raises(InvalidInput):
            knn_cond_variance(np.ones(10), np.arange(10.0), 1)


class TestAlignment:
    def test_same_span(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((50, 2))
        np.testing.assert_allclose(alignment(A @ [[1.0, 2.0], [0.5, -1.0]] + 3.0, A), [1.0, 1.0], atol=1e-10)

    def test_partial_overlap(self):
        rng = np.random.default_rng(6)
        A = rng.standard_normal((2000, 2))
        cc = alignment(A, np.column_stack([A[:, 0], rng.standard_normal(2000)]))
        assert cc[0] == pytest.approx(1.0)
        assert cc[1] < 0.1

    def test_independent(self):
        rng = np.random.default_rng(7)
        assert alignment(rng.standard_normal(5000), rng.standard_normal(5000))[0] < 0.05

    def test_rank_deficiency_flag(self):
        x = np.arange(10.0)
        res = alignment_detail(np.column_stack([x, 2 * x]), x)
        assert res.rank_deficient and res.rank_est == 1

    def test_too_few_rows(self):
        with pytest.raises(InvalidInput):
            alignment(np.ones((3, 2)), np.ones((3, 1)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_in_unit_interval_and_invariant(self, seed):
        rng = np.random.default_rng(seed)
        A, B = rng.standard_normal((30, 2)), rng.standard_normal((30, 3))
        cc = alignment(A, B)
        assert np.all((cc >= 0) & (cc <= 1)) and np.all(np.diff(cc) <= 1e-12)
        M = rng.standard_normal((2, 2)) + 3 * np.eye(2)
        np.testing.assert_allclose(alignment(A @ M, B), cc, atol=1e-8)


class TestReport:
    def test_identity_scenario_recovered_in_top_two(self):
        # the eigenvalue order puts a rougher direction first on this link;
        # x1 is the second component
        sc = gen_continuous(ScenarioSpec(link="identity", n=300, seed=1))
        rep = unbiasedness_report(gsir_fit(sc.data, d=2), sc.data, sc.true_reduction)
        assert rep.alignment[0] > 0.95
        assert rep.verdicts["aligned"] is True
        assert rep.method == "sliced" and rep.method_params == {"slices": default_slices(300)}
        assert rep.verdicts["spectrum_null"] is False

    def test_null_scenario_withholds_verdicts(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((200, 3))
        data = Dataset(X, rng.standard_normal(200))
        rep = unbiasedness_report(gsir_fit(data), data, X[:, 0])
        assert rep.verdicts == {"spectrum_null": True, "unbiased_at_sample_scale": None, "aligned": None}
        assert not rep.passed
        assert any("noise" in n for n in rep.notes)

    def test_knn_path_and_json(self):
        sc = gen_continuous(ScenarioSpec(link="identity", n=200, seed=2))
        truth = sc.data.X[:, :3]
        rep = unbiasedness_report(gsir_fit(sc.data), sc.data, truth)
        assert rep.method == "knn" and rep.method_params == {"k": 10}
        js = rep.to_json()
        assert js["thresholds"]["alignment_threshold"] == 0.9
        assert rep.slices_csv().splitlines() == ["predictor,cell,count,mean,variance"]

    def test_slices_csv_rows(self):
        sc = gen_continuous(ScenarioSpec(link="identity", n=100, seed=3))
        rep = unbiasedness_report(gsir_fit(sc.data), sc.data, sc.true_reduction, DiagnosticsConfig(slices=5))
        lines = rep.slices_csv().splitlines()
        assert len(lines) == 1 + 5
        assert sum(int(l.split(",")[2]) for l in lines[1:]) == 100

    def test_row_mismatch(self):
        sc = gen_continuous(ScenarioSpec(n=50))
        with pytest.raises(InvalidInput):
            unbiasedness_report(gsir_fit(sc.data), sc.data, np.ones(49))

    @pytest.mark.parametrize("kw", [{"ratio_threshold": 0.0}, {"alignment_threshold": 1.5}, {"null_threshold": -0.1}])
    def test_config_validation(self, kw):
        with pytest.raises(InvalidInput):
            DiagnosticsConfig(**kw)

    def test_config_json(self):
        cfg = DiagnosticsConfig(ratio_threshold=0.3, slices=7)
        assert DiagnosticsConfig.from_json(cfg.to_json()) == cfg
