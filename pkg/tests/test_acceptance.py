"""Acceptance criteria, one test each.

Every test appends a PASS/FAIL line (with runtime against its budget) to
the report printed at the end of the pytest run.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest
import scipy.stats

from cornerpd.cli import main as cli_main
from cornerpd.definiteness import Verdict, cpd_exact, cpd_theorem3, lattice_positive_exact
from cornerpd.membership import (
    Membership,
    lattice_membership_test,
    mcmillan_test,
    verify_decomposition,
    verify_witness,
)
from cornerpd.pointproc import (
    UniformInterval,
    acf_estimate,
    calibrate_ks_null,
    ctmc_simulate_competing,
    ctmc_simulate_embedded,
    extract_sojourns,
    sparse_superposition_experiment,
    telegraph_simulate,
    transient_distribution,
    uniformize,
    uniformized_simulate,
)
from cornerpd.quadform import build_toeplitz, qf_value
from cornerpd.rng import substream
from cornerpd.search import flip_gain, is_anti_stable, run_anti_stable

from conftest import ACCEPTANCE_LINES

MEMBER = Membership.MEMBER_UP_TO_ORDER_N


@contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        in_time = elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        note = "" if in_time else " over budget"
        ACCEPTANCE_LINES.append(f"[{status}] {number:>2}. {title} ({elapsed:.1f}s, budget {budget}s{note})")
    assert in_time, f"criterion {number} took {elapsed:.1f}s, budget {budget}s"


def random_acf(rng, n):
    """Half uniform draws (often non-members), half mixtures of geometric acfs (members)."""
    if rng.random() < 0.5:
        return np.concatenate([[1.0], rng.uniform(-1, 1, n - 1)])
    w = rng.dirichlet(np.ones(3))
    return sum(wi * rng.uniform(-1, 1) ** np.arange(n) for wi in w)


def random_generator(rng, n):
    q = rng.uniform(0.2, 2.0, size=(n, n)) * (rng.random((n, n)) < 0.8)
    np.fill_diagonal(q, 0)
    for i in range(n):
        if q[i].sum() == 0:
            q[i, (i + 1) % n] = 1.0
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def certificate_ok(v, rho, m_bound=1):
    R = build_toeplitz(rho)
    if v.member:
        chk = verify_decomposition(R, v.decomposition)
        return v.witness is None and chk.residual <= 1e-8 and (m_bound > 1 or abs(chk.weight_sum - 1) <= 1e-8)
    chk = verify_witness(R, v.witness, m_bound)
    return v.decomposition is None and chk.is_positive_on_set and chk.trace_value <= -1e-8


def test_criterion_01_theorem3_equivalence():
    with criterion(1, "anti-stable restricted check equals exhaustive check", 60):
        rng = np.random.default_rng(101)
        for n in range(2, 11):
            for _ in range(500):
                c = rng.uniform(-2, 2, size=(n, n))
                c = 0.5 * (c + c.T)
                a, b = cpd_theorem3(c), cpd_exact(c)
                assert a.verdict is b.verdict, (n, c)
                assert abs(a.margin - b.margin) <= 1e-9
        # uniform entries are almost never corner positive; shifting the
        # diagonal moves the margin by n*s and puts cases on both sides
        seen = set()
        for n in range(2, 11):
            for _ in range(100):
                c = rng.uniform(-2, 2, size=(n, n))
                c = 0.5 * (c + c.T)
                s = -cpd_exact(c).margin / n + rng.uniform(-0.05, 0.05)
                c = c + s * np.eye(n)
                a, b = cpd_theorem3(c), cpd_exact(c)
                assert a.verdict is b.verdict and abs(a.margin - b.margin) <= 1e-9
                seen.add(b.verdict)
        assert seen == {Verdict.POSITIVE, Verdict.NOT_POSITIVE}


def test_criterion_02_psd_cpd():
    with criterion(2, "PSD matrices are corner positive; diag(2,-0.5) is CPD not PSD", 30):
        rng = np.random.default_rng(102)
        for _ in range(500):
            n = int(rng.integers(2, 13))
            a = rng.normal(size=(n, n))
            assert cpd_exact(a.T @ a).verdict is Verdict.POSITIVE
        c = np.diag([2.0, -0.5])
        v = cpd_exact(c)
        assert v.verdict is Verdict.POSITIVE and v.margin == 1.5
        assert np.linalg.eigvalsh(c).min() < 0


def test_criterion_03_anti_stable_dynamics():
    with criterion(3, "anti-stable dynamics: exact gains, <= 50 sweeps, fixed points", 60):
        rng = np.random.default_rng(103)
        for k in range(1000):
            n = int(rng.integers(2, 65))
            e = rng.integers(-5, 6, size=(n, n)).astype(float)
            e = np.triu(e, 1)
            e = e + e.T
            x = np.where(rng.random(n) < 0.5, 1, -1)
            r = run_anti_stable(e, x, max_sweeps=50)
            prev = r.initial_value
            assert prev == qf_value(e, x)
            for (i, v), val in zip(r.moves, r.energy_trace):
                g = flip_gain(e, x, i)
                assert g < 0 and val - prev == g and v == -x[i]
                x[i] = v
                prev = val
            assert x.tolist() == r.best_point.tolist() and r.best_value == prev
            assert r.sweeps_used <= 50
            assert is_anti_stable(e, r.best_point)


def test_criterion_04_mcmillan_membership():
    with criterion(4, "unit-class membership, separating witness, column generation", 120):
        for a in np.round(np.arange(-0.9, 0.91, 0.1), 10):
            rho = a ** np.arange(8)
            v = mcmillan_test(rho)
            assert v.verdict is MEMBER and v.residual <= 1e-8 and certificate_ok(v, rho)
        rho = [1, -0.6, 0]
        v = mcmillan_test(rho)
        assert v.verdict is Membership.NON_MEMBER
        chk = verify_witness(build_toeplitz(rho), v.witness)
        assert chk.is_positive_on_set and chk.trace_value <= -1e-8
        rng = np.random.default_rng(104)
        for _ in range(100):
            n = int(rng.integers(3, 11))
            rho = random_acf(rng, n)
            full = mcmillan_test(rho, method="full")
            cg = mcmillan_test(rho, method="colgen", seed=int(rng.integers(1 << 30)))
            assert full.verdict is cg.verdict
            assert certificate_ok(full, rho) and certificate_ok(cg, rho)


def test_criterion_05_lattice():
    with criterion(5, "lattice class reduces to unit class at M=1; M=2 cases", 60):
        rng = np.random.default_rng(105)
        for _ in range(100):
            rho = random_acf(rng, int(rng.integers(2, 9)))
            assert lattice_membership_test(rho, 1).verdict is mcmillan_test(rho).verdict
        v = lattice_membership_test([2.5, 2.5], 2)
        assert v.verdict is MEMBER and v.residual == 0
        assert verify_decomposition([2.5, 2.5], [(0.5, (1, 1)), (0.5, (2, 2))]).residual == 0
        b = np.diag([1.0, -0.3])
        assert lattice_positive_exact(b, 1).verdict is Verdict.POSITIVE
        assert lattice_positive_exact(b, 2).verdict is Verdict.NOT_POSITIVE


def test_criterion_06_telegraph_loop():
    with criterion(6, "telegraph chain -> acf estimate -> member at N=6", 60):
        for seed in range(5):
            x = telegraph_simulate(0.25, 10**6, seed=substream(106, seed))
            est = acf_estimate(x, 6)
            assert np.all(np.abs(est.normalized - 0.5 ** np.arange(7)) <= 0.01)
            assert mcmillan_test(est.to_acf().truncate(6)).verdict is MEMBER


def test_criterion_07_sparse_superposition():
    with criterion(7, "sparse superpositions approach Poisson", 120):
        rows = sparse_superposition_experiment([1, 5, 25, 125], UniformInterval(0.5, 1.5), 1.0, 1e4, seeds=20, seed=107)
        medians = [r.median_ks for r in rows]
        threshold = calibrate_ks_null(1.0, 1e4, replicates=200, alpha=0.05, seed=207)
        print("median KS", medians, "null 95%", threshold, "dispersion", [r.median_dispersion for r in rows])
        assert all(b <= a for a, b in zip(medians, medians[1:]))
        assert rows[-1].median_ks < threshold
        assert 0.9 <= rows[-1].median_dispersion <= 1.1


def test_criterion_08_uniformization():
    with criterion(8, "uniformization series and simulation", 120):
        g = np.array([[-1.0, 1.0], [1.0, -1.0]])
        v = transient_distribution(g, 1.0, 0)
        want = np.array([0.5 + 0.5 * np.exp(-2), 0.5 - 0.5 * np.exp(-2)])
        assert np.max(np.abs(v - want)) <= 1e-6
        rng = np.random.default_rng(108)
        for _ in range(20):
            q = random_generator(rng, 4)
            top = float(np.max(-np.diag(q)))
            t = float(rng.uniform(0.1, 3.0))
            a = transient_distribution(q, t, 0, lambda_u=top)
            b = transient_distribution(q, t, 0, lambda_u=10 * top)
            assert np.max(np.abs(a - b)) <= 1e-8
        p, lam = uniformize(g, 2.0)
        runs = 10**5
        gen = substream(208)
        hits = sum(int(uniformized_simulate(p, lam, 0, 1.0, seed=gen).state_at(1.0)) for _ in range(runs))
        sigma = np.sqrt(want[1] * (1 - want[1]) / runs)
        assert abs(hits / runs - want[1]) <= 3 * sigma


def test_criterion_09_competing_vs_embedded():
    with criterion(9, "competing clocks and embedded chain agree in distribution", 120):
        rng = np.random.default_rng(109)
        for k in range(10):
            n = int(rng.integers(2, 6))
            q = random_generator(rng, n)
            a = ctmc_simulate_competing(q, 0, 1e12, seed=substream(109, k, 0), max_jumps=10**5)
            b = ctmc_simulate_embedded(q, 0, 1e12, seed=substream(109, k, 1), max_jumps=10**5)
            da, db = extract_sojourns(a)[0], extract_sojourns(b)[0]
            for s in range(n):
                if len(da.get(s, [])) > 20 and len(db.get(s, [])) > 20:
                    assert scipy.stats.ks_2samp(da[s], db[s]).pvalue > 0.001
            ca, cb = np.zeros((n, n)), np.zeros((n, n))
            np.add.at(ca, (a.states[:-1], a.states[1:]), 1)
            np.add.at(cb, (b.states[:-1], b.states[1:]), 1)
            for s in range(n):
                cols = (ca[s] + cb[s]) > 0
                if cols.sum() > 1:
                    table = np.vstack([ca[s, cols], cb[s, cols]])
                    assert scipy.stats.chi2_contingency(table).pvalue > 0.001


def test_criterion_10_certificate_round_trips(tmp_path):
    with criterion(10, "certificates re-verify in process and via --verify; outputs byte-identical", 30):
        rng = np.random.default_rng(110)
        for _ in range(40):
            rho = random_acf(rng, int(rng.integers(2, 8)))
            assert certificate_ok(mcmillan_test(rho), rho)
        for _ in range(15):
            rho = np.concatenate([[2.5], rng.uniform(-2.5, 2.5, int(rng.integers(1, 4)))])
            assert certificate_ok(lattice_membership_test(rho, 2), rho, 2)

        mat = tmp_path / "m.json"
        c = rng.normal(size=(8, 8))
        mat.write_text(json.dumps({"n": 8, "data": (c + c.T).tolist()}))
        lat = tmp_path / "l.json"
        lat.write_text(json.dumps({"n": 2, "data": [[1, 0], [0, -0.3]]}))
        commands = [
            ["cpd-check", "--matrix", str(mat)],
            ["cpd-check", "--matrix", str(mat), "--method", "theorem3"],
            ["cpd-refute", "--matrix", str(mat), "--starts", "5"],
            ["lattice-check", "--matrix", str(lat), "--m", "2"],
            ["acf-test", "--rho", "1,-0.6,0"],
            ["acf-test", "--rho", "1,0.5,0.25,0.125"],
            ["acf-lattice-test", "--rho", "2.5,2.5", "--m", "2"],
            ["acf-lattice-test", "--rho", "2.5,-2.5,-2.5", "--m", "2"],
        ]
        for k, argv in enumerate(commands):
            outs = [tmp_path / f"r{k}_{i}.json" for i in range(2)]
            codes = [cli_main(argv + ["--seed", "42", "--out", str(o)]) for o in outs]
            assert codes[0] == codes[1] and codes[0] in (0, 1, 2)
            assert outs[0].read_bytes() == outs[1].read_bytes()
            ver = tmp_path / f"v{k}.json"
            assert cli_main(argv + ["--verify", str(outs[0]), "--out", str(ver)]) == codes[0]
            doc = json.loads(ver.read_text())
            assert doc["verified"] is True
            assert doc["verdict"] == json.loads(outs[0].read_text())["verdict"]
