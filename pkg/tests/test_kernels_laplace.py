import numpy as np
import pytest

from mixedhmc import (
    ChainRng,
    LaplaceKernelParams,
    MixedPoint,
    ModelSpec,
    get_step_sizes_n_steps,
    laplace_step,
    run_chain,
)
from mixedhmc.diagnostics import ks_two_sample
from mixedhmc.models import (
    binary_quadratic_enumerate,
    gmm1d_preset,
    random_binary_quadratic,
)


def schedule_oracle(epsilon, T, L, n_sites, n_d, rng):
    """Literal transliteration of the schedule pseudocode, one line per line,
    with the 1-based cyclic index mapped to 0-based positions."""
    phi = rng.dirichlet_ones(n_sites + 1)
    phi = phi.copy()
    phi[1 - 1] = phi[1 - 1] + phi[n_sites + 1 - 1]
    eta = np.zeros(L)
    for t in range(1, L + 1):
        acc = 0.0
        for s in range(1, n_d + 1):
            acc += phi[((t - 1) * n_d + s - 1) % n_sites]
        eta[t - 1] = acc
    eta[1 - 1] = eta[1 - 1] - phi[n_sites + 1 - 1]
    eta = T * eta / eta.sum()
    m = np.ceil(eta / epsilon).astype(np.int64)
    eta = eta / m
    return eta, m


class FlatModel(ModelSpec):
    """Constant potential; optionally with binary sites."""

    def __init__(self, n_discrete=0, n_continuous=2):
        self._nd = n_discrete
        self._nc = n_continuous

    @property
    def n_discrete(self):
        return self._nd

    @property
    def n_continuous(self):
        return self._nc

    def site_cardinality(self, j):
        return 2

    def potential(self, x, q):
        return 7.0

    def grad_q(self, x, q):
        return np.zeros(self._nc)


class BlowUpModel(ModelSpec):
    """Gradient degenerates outside |q| < 2; drives trajectories non-finite."""

    @property
    def n_discrete(self):
        return 1

    @property
    def n_continuous(self):
        return 1

    def site_cardinality(self, j):
        return 3

    def potential(self, x, q):
        if abs(q[0]) > 2.0:
            return np.inf
        return -10.0 * q[0]

    def grad_q(self, x, q):
        if abs(q[0]) > 2.0:
            return np.array([np.nan])
        return np.array([-10.0])


class TestStepSchedule:
    def test_single_site_single_round(self):
        params = LaplaceKernelParams(epsilon=0.25, T=1.0, L=1, n_D=1)
        sched = get_step_sizes_n_steps(params, 1, ChainRng(0, 0))
        assert sched.n_steps.tolist() == [4]
        assert sched.eta[0] == pytest.approx(0.25, abs=1e-15)
        assert float(sched.eta @ sched.n_steps) == pytest.approx(1.0, rel=1e-12)

    def test_forced_invariants(self):
        rng = ChainRng(1, 0)
        for _ in range(500):
            n_sites = 1 + int(rng.uniform() * 6)
            n_d = 1 + int(rng.uniform() * n_sites)
            L = 1 + int(rng.uniform() * 40)
            T = 0.2 + 10.0 * float(rng.uniform())
            eps = 0.05 + float(rng.uniform())
            params = LaplaceKernelParams(epsilon=eps, T=T, L=L, n_D=n_d)
            sched = get_step_sizes_n_steps(params, n_sites, rng)
            assert float(sched.eta @ sched.n_steps) == pytest.approx(
                T, rel=1e-9)
            assert sched.eta.max() <= eps
            assert np.all(sched.n_steps >= 1)
            assert np.all(sched.eta > 0)

    def test_matches_line_by_line_oracle(self):
        for draw in range(10_000):
            a = ChainRng(2, draw)
            b = ChainRng(2, draw)
            params = LaplaceKernelParams(epsilon=0.3, T=2.5, L=3, n_D=1)
            sched = get_step_sizes_n_steps(params, 3, a)
            eta, m = schedule_oracle(0.3, 2.5, 3, 3, 1, b)
            assert np.abs(sched.eta - eta).max() < 1e-12
            assert np.array_equal(sched.n_steps, m)

    def test_matches_oracle_with_wraparound(self):
        # L * n_D exceeds the site count, exercising the cyclic fold.
        for draw in range(2_000):
            a = ChainRng(3, draw)
            b = ChainRng(3, draw)
            params = LaplaceKernelParams(epsilon=0.2, T=4.0, L=7, n_D=2)
            sched = get_step_sizes_n_steps(params, 5, a)
            eta, m = schedule_oracle(0.2, 4.0, 7, 5, 2, b)
            assert np.abs(sched.eta - eta).max() < 1e-12
            assert np.array_equal(sched.n_steps, m)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            LaplaceKernelParams(epsilon=0.0, T=1.0, L=1)
        with pytest.raises(ValueError):
            LaplaceKernelParams(epsilon=0.1, T=-1.0, L=1)
        with pytest.raises(ValueError):
            LaplaceKernelParams(epsilon=0.1, T=1.0, L=0)
        params = LaplaceKernelParams(epsilon=0.1, T=1.0, L=2, n_D=4)
        with pytest.raises(ValueError):
            params.validate_for(2)


class TestLaplaceStep:
    def test_flat_potential_free_flight(self):
        """No discrete sites, constant potential: exact free flight q + T p
        and zero energy error."""
        model = FlatModel(n_discrete=0, n_continuous=3)
        params = LaplaceKernelParams(epsilon=0.13, T=2.0, L=5)
        pt = MixedPoint(np.zeros(0, dtype=np.int64), np.array([1.0, -2.0, 0.5]))
        rng = ChainRng(4, 0)
        clone = ChainRng(4, 0)
        p = clone.normal(3)
        new_pt, stats = laplace_step(pt, params, model, rng)
        assert stats.accepted
        assert abs(stats.energy_error) <= 1e-12
        assert np.abs(new_pt.q - (pt.q + 2.0 * p)).max() < 1e-12

    def test_flat_mass_matrix_free_flight(self):
        mass = np.array([4.0, 0.25])
        model = FlatModel(n_discrete=0, n_continuous=2)
        params = LaplaceKernelParams(epsilon=0.1, T=1.5, L=3, mass_diag=mass)
        pt = MixedPoint(np.zeros(0, dtype=np.int64), np.array([0.0, 0.0]))
        clone = ChainRng(5, 0)
        p = clone.normal(2) * np.sqrt(mass)
        new_pt, stats = laplace_step(pt, params, model, ChainRng(5, 0))
        assert stats.accepted
        assert np.abs(new_pt.q - 1.5 * p / mass).max() < 1e-12

    def test_flat_binary_sites_always_accept_discrete(self):
        """Zero move cost means the kinetic test always passes and the total
        energy is conserved exactly."""
        model = FlatModel(n_discrete=4, n_continuous=2)
        params = LaplaceKernelParams(epsilon=0.2, T=1.0, L=6, n_D=2)
        pt = MixedPoint(np.array([0, 1, 0, 1]), np.zeros(2))
        rng = ChainRng(6, 0)
        for _ in range(25):
            pt, stats = laplace_step(pt, params, model, rng)
            assert stats.n_discrete_accepts == 12  # L * n_D
            assert abs(stats.energy_error) <= 1e-12
            assert stats.accepted

    def test_grad_budget(self):
        """Gradient evaluations stay within 2 * sum(M_t) + 1 per step."""
        model = gmm1d_preset()
        params = LaplaceKernelParams(epsilon=0.2, T=2.0, L=5)
        rng = ChainRng(7, 0)
        pt = model.initial_point(rng)
        clone = ChainRng(7, 0)
        for _ in range(20):
            pt, stats = laplace_step(pt, params, model, rng)
            # reproduce this step's schedule: k, p, perm, then the schedule
            clone.exponential(1)
            clone.normal(1)
            clone.permutation(1)
            sched = get_step_sizes_n_steps(params, 1, clone)
            # remaining draws of the step: proposals + MH test
            for _ in range(params.L):
                clone.uniform()
            clone.uniform()
            assert stats.n_grad_evals <= 2 * int(sched.n_steps.sum()) + 1

    def test_binary_quadratic_marginals_vs_enumeration(self):
        """Purely discrete target: kernel marginals against full enumeration."""
        model = random_binary_quadratic(6, ChainRng(8, 0))
        exact, _ = binary_quadratic_enumerate(model.spec)
        params = LaplaceKernelParams(epsilon=1.0, T=1.0, L=6, n_D=1)
        rng = ChainRng(9, 0)
        pt = model.initial_point(rng)
        n = 100_000
        out = run_chain(pt, params, model, 500, n, rng)
        err = np.abs(out.samples.mean(axis=0) - exact).max()
        assert err < 0.01

    def test_divergence_flagged_and_state_restored(self):
        model = BlowUpModel()
        params = LaplaceKernelParams(epsilon=0.5, T=10.0, L=4)
        pt = MixedPoint(np.array([0]), np.array([1.5]))
        rng = ChainRng(10, 0)
        saw_divergence = False
        for _ in range(50):
            new_pt, stats = laplace_step(pt, params, model, rng)
            if stats.divergent:
                saw_divergence = True
                assert not stats.accepted
                assert np.array_equal(new_pt.x, pt.x)
                assert np.array_equal(new_pt.q, pt.q)
        assert saw_divergence


class TestRunChain:
    def test_empty_run(self):
        model = gmm1d_preset()
        params = LaplaceKernelParams(epsilon=0.2, T=1.0, L=2)
        rng = ChainRng(11, 0)
        out = run_chain(model.initial_point(rng), params, model, 0, 0, rng)
        assert out.samples.shape == (0, 2)
        assert out.accept_trace.shape == (0,)
        assert out.wall_time >= 0.0

    def test_deterministic_given_seed_and_stream(self):
        model = gmm1d_preset()
        params = LaplaceKernelParams(epsilon=0.2, T=1.0, L=4)
        runs = []
        for _ in range(2):
            rng = ChainRng(12, 3)
            out = run_chain(model.initial_point(rng), params, model, 50, 200,
                            rng)
            runs.append(out)
        assert np.array_equal(runs[0].samples, runs[1].samples)
        assert np.array_equal(runs[0].accept_trace, runs[1].accept_trace)
        assert runs[0].divergence_count == runs[1].divergence_count

    def test_divergences_counted_not_raised(self):
        model = BlowUpModel()
        params = LaplaceKernelParams(epsilon=0.5, T=10.0, L=4)
        rng = ChainRng(13, 0)
        out = run_chain(MixedPoint(np.array([0]), np.array([1.5])), params,
                        model, 0, 100, rng)
        assert out.divergence_count > 0
        assert out.samples.shape == (100, 2)


class TestStationarity:
    def test_exact_start_stays_exact(self):
        """Chains started from exact draws remain indistinguishable from the
        exact sampler after 50 steps (two-sample K-S at alpha=0.01)."""
        model = gmm1d_preset()
        params = LaplaceKernelParams(epsilon=0.45, T=4.0, L=20)
        n_points = 300
        steps = 50
        rng_init = ChainRng(14, 0)
        init_rows = model.exact_sample(rng_init, n_points)
        finals = np.empty(n_points)
        for i in range(n_points):
            pt = MixedPoint(np.array([int(init_rows[i, 0])]), init_rows[i, 1:])
            rng = ChainRng(15, i)
            for _ in range(steps):
                pt, _ = laplace_step(pt, params, model, rng)
            finals[i] = pt.q[0]
        ref = model.exact_sample(ChainRng(16, 0), 20_000)[:, 1]
        crit = 1.628 * np.sqrt((n_points + ref.size) / (n_points * ref.size))
        d_init = ks_two_sample(init_rows[:, 1], ref)
        d_final = ks_two_sample(finals, ref)
        assert d_init < crit
        assert d_final < crit
