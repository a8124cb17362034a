import numpy as np
import pytest
import scipy.stats

from cornerpd.errors import DimensionError, ValidationError
from cornerpd.pointproc import (
    Deterministic,
    Exponential,
    Trajectory,
    ctmc_simulate_competing,
    ctmc_simulate_embedded,
    extract_sojourns,
    semi_markov_simulate,
    transient_distribution,
    uniformize,
    uniformized_simulate,
)

SYM = np.array([[-1.0, 1.0], [1.0, -1.0]])
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


def random_generator(rng, n):
    q = rng.uniform(0.2, 2.0, size=(n, n)) * (rng.random((n, n)) < 0.8)
    np.fill_diagonal(q, 0)
    for i in range(n):
        if q[i].sum() == 0:
            q[i, (i + 1) % n] = 1.0
    np.fill_diagonal(q, -q.sum(axis=1))
    return q


def sojourns_of(traj, state):
    return np.asarray(extract_sojourns(traj)[0].get(state, []))


class TestTrajectory:
    def test_invariants(self):
        with pytest.raises(ValidationError):
            Trajectory([0.5, 1.0], [0, 1], 2.0)
        with pytest.raises(ValidationError):
            Trajectory([0.0, 1.0], [0, 0], 2.0)
        with pytest.raises(ValidationError):
            Trajectory([0.0, 1.0, 1.0], [0, 1, 0], 2.0)

    def test_state_at(self):
        t = Trajectory([0.0, 1.5, 2.0], ["A", "B", "A"], 3.7)
        assert t.state_at([0.0, 1.49, 1.5, 3.7]).tolist() == ["A", "A", "B", "A"]


class TestExtractSojourns:
    def test_example(self):
        d, censored = extract_sojourns(Trajectory([0.0, 1.5, 2.0], ["A", "B", "A"], 3.7))
        assert d == {"A": [1.5], "B": [0.5]}
        assert censored[0] == "A" and censored[1] == pytest.approx(1.7, abs=1e-15)

    def test_single_segment(self):
        d, censored = extract_sojourns(Trajectory([0.0], [2], 5.0))
        assert d == {} and censored == (2, 5.0)

    def test_durations_sum_to_horizon(self, rng):
        traj = ctmc_simulate_embedded(random_generator(rng, 4), 0, 300.0, seed=1)
        d, censored = extract_sojourns(traj)
        assert sum(sum(v) for v in d.values()) + censored[1] == pytest.approx(300.0, rel=1e-12)


class TestSemiMarkov:
    def test_deterministic_alternation(self):
        t = semi_markov_simulate(SWAP, [Deterministic(1.0)] * 2, 0, 5.5, seed=0)
        assert t.times.tolist() == [0, 1, 2, 3, 4, 5]
        assert t.states.tolist() == [0, 1, 0, 1, 0, 1]
        d, _ = extract_sojourns(t)
        assert all(x == 1.0 for v in d.values() for x in v)

    def test_exponential_means(self):
        t = semi_markov_simulate(SWAP, [Exponential(1.0), Exponential(2.0)], 0, 1e9,
                                 seed=2, max_jumps=10_000)
        for state, mean in ((0, 1.0), (1, 0.5)):
            s = sojourns_of(t, state)
            assert abs(s.mean() - mean) <= 3 * mean / np.sqrt(s.size)

    def test_matches_embedded_ctmc(self):
        q = np.array([[-2.0, 1.5, 0.5], [1.0, -1.0, 0.0], [0.3, 0.7, -1.0]])
        p = np.array([[0, 0.75, 0.25], [1, 0, 0], [0.3, 0.7, 0]])
        a = semi_markov_simulate(p, [Exponential(2.0), Exponential(1.0), Exponential(1.0)], 0, 1e9, seed=3,
                                 max_jumps=20_000)
        b = ctmc_simulate_embedded(q, 0, 1e9, seed=4, max_jumps=20_000)
        for s in range(3):
            assert scipy.stats.ks_2samp(sojourns_of(a, s), sojourns_of(b, s)).pvalue > 0.001

    def test_invalid(self):
        with pytest.raises(ValidationError):
            semi_markov_simulate([[0.5, 0.5], [1, 0]], [Deterministic(1)] * 2, 0, 3)
        with pytest.raises(DimensionError):
            semi_markov_simulate(SWAP, [Deterministic(1)], 0, 3)
        with pytest.raises(ValidationError):
            semi_markov_simulate(SWAP, [Deterministic(1)] * 2, 2, 3)


class TestCtmc:
    def test_generator_validation(self):
        for bad in ([[-1, 1], [1, -2]], [[1, -1], [1, -1]], [[0]], [[-1, 1, 0], [0, 0, 0]]):
            with pytest.raises((ValidationError, DimensionError)):
                ctmc_simulate_competing(bad, 0, 1.0)

    @pytest.mark.parametrize("sim", [ctmc_simulate_competing, ctmc_simulate_embedded])
    def test_symmetric_mean_sojourn(self, sim):
        t = sim(SYM, 0, 1e9, seed=5, max_jumps=10_000)
        s = np.concatenate([sojourns_of(t, 0), sojourns_of(t, 1)])
        assert abs(s.mean() - 1.0) <= 3 / np.sqrt(s.size)

    @pytest.mark.parametrize("sim", [ctmc_simulate_competing, ctmc_simulate_embedded])
    def test_absorbing(self, sim):
        t = sim([[-2.0, 2.0], [0.0, 0.0]], 0, 100.0, seed=1)
        assert t.absorbed and t.states.tolist() == [0, 1] and t.horizon == 100.0

    def test_three_cycle_uniform_successors(self):
        q = np.ones((3, 3))
        np.fill_diagonal(q, -2)
        t = ctmc_simulate_competing(q, 0, 1e9, seed=6, max_jumps=30_000)
        s = t.states
        counts = np.zeros((3, 3))
        np.add.at(counts, (s[:-1], s[1:]), 1)
        for i in range(3):
            row = counts[i, [j for j in range(3) if j != i]]
            assert scipy.stats.chisquare(row).pvalue > 0.001

    def test_embedded_means_four_state(self, rng):
        q = random_generator(rng, 4)
        t = ctmc_simulate_embedded(q, 0, 1e9, seed=7, max_jumps=400_000)
        for i in range(4):
            s = sojourns_of(t, i)
            assert s.mean() == pytest.approx(1 / -q[i, i], rel=0.01)

    def test_determinism(self, rng):
        q = random_generator(rng, 3)
        a = ctmc_simulate_competing(q, 1, 200.0, seed=9)
        b = ctmc_simulate_competing(q, 1, 200.0, seed=9)
        assert np.array_equal(a.times, b.times) and np.array_equal(a.states, b.states)


class TestUniformize:
    def test_examples(self):
        p, lam = uniformize(SYM, 2)
        np.testing.assert_array_equal(p, [[0.5, 0.5], [0.5, 0.5]])
        assert lam == 2
        p, lam = uniformize(SYM)
        np.testing.assert_array_equal(p, [[0, 1], [1, 0]])
        assert lam == 1
        with pytest.raises(ValidationError):
            uniformize(SYM, 0.5)

    def test_rows_stochastic(self, rng):
        for _ in range(20):
            q = random_generator(rng, 5)
            p, _ = uniformize(q, rng.uniform(1, 3) * np.max(-np.diag(q)))
            assert np.all(p >= 0) and np.allclose(p.sum(axis=1), 1, atol=1e-12, rtol=0)

    def test_identity_is_constant(self):
        t = uniformized_simulate(np.eye(3), 5.0, 1, 100.0, seed=0)
        assert t.states.tolist() == [1] and t.n_jumps == 0

    def test_no_self_loop_segments(self):
        p, lam = uniformize(SYM, 2)
        t = uniformized_simulate(p, lam, 0, 500.0, seed=1)
        assert np.all(t.states[1:] != t.states[:-1])

    def test_lambda_invariance(self):
        g = np.array([[-1.0, 0.6, 0.4], [0.5, -2.0, 1.5], [1.0, 1.0, -2.0]])
        top = 2.0
        trajs = [uniformized_simulate(*uniformize(g, lam), 0, 1e9, seed=11, max_jumps=20_000) for lam in (top, 10 * top)]
        for s in range(3):
            a, b = (sojourns_of(t, s) for t in trajs)
            assert scipy.stats.ks_2samp(a, b).pvalue > 0.001

    def test_marginal_at_t1(self):
        p, lam = uniformize(SYM, 2)
        runs = 20_000
        hits = sum(int(uniformized_simulate(p, lam, 0, 1.0, seed=k).state_at(1.0)) for k in range(runs))
        want = transient_distribution(SYM, 1.0, 0)[1]
        assert abs(hits / runs - want) <= 3 * np.sqrt(want * (1 - want) / runs)


class TestTransient:
    def test_t0(self):
        np.testing.assert_array_equal(transient_distribution(SYM, 0.0, 1), [0, 1])

    def test_two_state_closed_form(self):
        v = transient_distribution(SYM, 1.0, 0)
        np.testing.assert_allclose(v, [0.5 + 0.5 * np.exp(-2), 0.5 - 0.5 * np.exp(-2)], atol=1e-6, rtol=0)
        assert v[0] == pytest.approx(0.56767, abs=1e-5)

    def test_long_time(self):
        v = transient_distribution(SYM, 40.0, 0)
        np.testing.assert_allclose(v, [0.5, 0.5], atol=1e-10)

    def test_matches_expm(self, rng):
        from scipy.linalg import expm

        for _ in range(10):
            q = random_generator(rng, 4)
            t = rng.uniform(0.1, 3)
            np.testing.assert_allclose(transient_distribution(q, t, 2), expm(q * t)[2], atol=1e-10)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            transient_distribution(SYM, -1.0, 0)
        with pytest.raises(ValidationError):
            transient_distribution(SYM, 1.0, 0, tol=0)
