"""End-to-end acceptance checks; one pass/fail line each in the terminal summary."""
import re
import time

import numpy as np
import pytest

from gsirkit import Dataset, KernelSpec, ScenarioSpec, evaluate_predictors, gen_continuous, gen_discrete_joint, gsir_fit
from gsirkit.cli import main
from gsirkit.diagnostics import alignment, unbiasedness_report
from gsirkit.discrete import HilbertSubspace
from gsirkit.discrete.verifiers import verify_exhaustiveness
from gsirkit.files import read_json
from gsirkit.suite import STATEMENTS, pinv_report

pytestmark = pytest.mark.acceptance


@pytest.mark.criterion(1, "verify suite: 500 instances per statement, zero violations, < 60 s")
def test_verify_suite(tmp_path, record_property):
    t0 = time.perf_counter()
    code = main(["verify", "--instances", "500", "--seed", "42", "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    rep = read_json(tmp_path / "verify_report.json")
    worst = max(s["worst_residual"] for s in rep["statements"])
    failed = sum(s["failed"] for s in rep["statements"])
    record_property("seconds", round(elapsed, 1))
    record_property("violations", failed)
    record_property("worst_residual", f"{worst:.1e}")
    assert code == 0 and rep["ok"]
    assert [s["statement"] for s in rep["statements"]] == list(STATEMENTS)
    assert all(s["instances"] == 500 for s in rep["statements"])
    assert failed == 0
    assert worst <= 1e-9
    assert elapsed < 60


@pytest.mark.criterion(2, "pseudoinverse: Penrose identities and projection on 200 matrices within 1e-9")
def test_pseudoinverse(record_property):
    worst = 0.0
    ranks = set()
    for i in range(200):
        rng = np.random.default_rng([2, i])
        rows, cols = rng.integers(1, 21, size=2)
        rank = int(rng.integers(0, min(rows, cols) + 1))
        scale = 10.0 ** rng.integers(-3, 4)
        A = scale * rng.standard_normal((rows, rank)) @ rng.standard_normal((rank, cols))
        rep = pinv_report(A, 1e-9)
        ranks.add(rank)
        worst = max(worst, rep.max_residual)
        assert rep.verdict == "pass", rep.to_json()
    record_property("worst_residual", f"{worst:.1e}")
    record_property("distinct_ranks", len(ranks))
    assert worst <= 1e-9


@pytest.mark.criterion(3, "population Fisher consistency on 200 complete joints within 1e-8")
def test_population_fisher_consistency(record_property):
    worst = 0.0
    for i in range(200):
        rng = np.random.default_rng([3, i])
        m_y = int(rng.integers(2, 6))
        m_x = int(rng.integers(2, 10))
        blocks = int(rng.integers(1, min(m_x, m_y) + 1))
        inst = gen_discrete_joint(m_x, m_y, blocks, seed=1000 + i)
        assert inst.complete
        jm = inst.joint
        rep = verify_exhaustiveness(jm, HilbertSubspace.full(jm.space_x), HilbertSubspace.full(jm.space_y), 1e-8)
        assert rep.verdict == "pass" and rep.witnesses["fisher_consistent"], rep.to_json()
        worst = max(worst, rep.max_residual)
    record_property("worst_residual", f"{worst:.1e}")
    assert worst <= 1e-8


@pytest.mark.criterion(4, "exp scenario, 20 seeds: mean alignment >= 0.9, mean eps-ratio <= 0.2, < 30 s")
def test_sample_recovery(record_property):
    t0 = time.perf_counter()
    aligns, ratios = [], []
    for seed in range(20):
        sc = gen_continuous(ScenarioSpec(link="exp", n=500, noise_sd=0.2, seed=seed))
        model = gsir_fit(sc.data, KernelSpec.gaussian(), KernelSpec.gaussian(), 1e-2, 1e-2, d=1)
        rep = unbiasedness_report(model, sc.data, sc.true_reduction)
        aligns.append(rep.alignment[0])
        ratios.append(rep.eps_ratios[0])
    elapsed = time.perf_counter() - t0
    record_property("mean_alignment", round(float(np.mean(aligns)), 4))
    record_property("mean_eps_ratio", round(float(np.mean(ratios)), 4))
    record_property("seconds", round(elapsed, 1))
    assert elapsed < 30
    assert np.mean(ratios) <= 0.2
    assert np.mean(aligns) >= 0.9


@pytest.mark.criterion(5, "null: leading eigenvalue < 3x permutation median, no recovery verdicts")
def test_null_behaviour(record_property):
    worst_ratio = 0.0
    for seed in range(20):
        rng = np.random.default_rng([5, seed])
        X = rng.standard_normal((500, 5))
        data = Dataset(X, rng.standard_normal(500))
        model = gsir_fit(data)
        perm_lams = [gsir_fit(Dataset(X, data.Y[rng.permutation(500)])).eigenvalues[0] for _ in range(20)]
        ratio = model.eigenvalues[0] / np.median(perm_lams)
        worst_ratio = max(worst_ratio, ratio)
        rep = unbiasedness_report(model, data, X[:, 0])
        assert rep.verdicts["spectrum_null"] is True
        assert rep.verdicts["unbiased_at_sample_scale"] is None and rep.verdicts["aligned"] is None
        assert ratio < 3
    record_property("worst_ratio_to_perm_median", round(worst_ratio, 3))


def _brute_force_span(X, Y, d):
    Xc, Yc = X - X.mean(axis=0), Y - Y.mean(axis=0)
    n = X.shape[0]
    sxx, syy, sxy = Xc.T @ Xc / n, Yc.T @ Yc / n, Xc.T @ Yc / n
    sxx_p = np.linalg.pinv(sxx)
    M = sxx_p @ sxy @ np.linalg.pinv(syy) @ sxy.T @ sxx_p
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return Xc @ V[:, np.argsort(w)[::-1][:d]]


@pytest.mark.criterion(6, "brute-force equivalence, n <= 8, linear kernels: deficit <= 1e-6 on 50 instances")
def test_brute_force_equivalence(record_property):
    worst = 0.0
    for i in range(50):
        rng = np.random.default_rng([6, i])
        n = int(rng.integers(5, 9))
        p = int(rng.integers(1, 4))
        q = int(rng.integers(1, 3))
        X = rng.standard_normal((n, p))
        Y = X @ rng.standard_normal((p, q)) + 0.5 * rng.standard_normal((n, q))
        d = min(p, q)
        model = gsir_fit(Dataset(X, Y), KernelSpec.linear(), KernelSpec.linear(), 1e-9, 1e-9, d=d, jitter=1e-12)
        cc = alignment(evaluate_predictors(model, X), _brute_force_span(X, Y, d))
        worst = max(worst, float(np.max(1.0 - cc)))
    record_property("worst_deficit", f"{worst:.1e}")
    assert worst <= 1e-6


_STAMP = re.compile(rb'"generated_at": "[^"]*"')


def _snapshot(out):
    return {p.name: _STAMP.sub(b"", p.read_bytes()) for p in sorted(out.iterdir())}


@pytest.mark.criterion(7, "identical configs and seeds give byte-identical reports modulo timestamp")
def test_reproducibility(tmp_path, record_property):
    commands = {
        "verify": ["verify", "--instances", "20", "--seed", "7"],
        "simulate": ["simulate", "--n", "200", "--seed", "7"],
    }
    compared = 0
    for name, argv in commands.items():
        out = tmp_path / name
        snaps = []
        for _ in range(2):
            main(argv + ["--out", str(out)])
            snaps.append(_snapshot(out))
        assert snaps[0] == snaps[1]
        compared += len(snaps[0])
    fit_out = tmp_path / "fit"
    snaps = []
    for _ in range(2):
        main(["fit", "--data", str(tmp_path / "simulate" / "dataset.csv"), "--eta-grid", "0.01,0.1", "--out", str(fit_out)])
        snaps.append(_snapshot(fit_out))
    assert snaps[0] == snaps[1]
    compared += len(snaps[0])
    record_property("files_compared", compared)
