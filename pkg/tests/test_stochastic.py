"""Trajectory sampling: streams, norms, replay, ensemble convergence."""

from __future__ import annotations

import math

import numpy as np
import pytest

from spinnet.lindblad import complete_network_liouvillian, evolve, initial_network_state
from spinnet.network import complete_graph, single_excitation_hamiltonian, standard_noise_spec
from spinnet.propagator import BlochInput
from spinnet.stochastic import (
    TrajectoryPlan,
    ensemble_average,
    evolve_trajectory,
    sample_step_hamiltonian,
)

PROBE = BlochInput(math.pi / 2, 0.0)


def _setup(n=4, m=2, eta=1.0):
    h = single_excitation_hamiltonian(complete_graph(n))
    spec = standard_noise_spec(n, m, eta)
    a, b = PROBE.amplitudes()
    psi = np.zeros(n + 1, dtype=complex)
    psi[0], psi[1] = a, b
    return h, spec, psi


class TestTrajectoryPlan:
    def test_validation(self):
        _, spec, _ = _setup()
        with pytest.raises(ValueError):
            TrajectoryPlan(0, 1e-3, 1.0, 0, spec)
        with pytest.raises(ValueError):
            TrajectoryPlan(10, -1e-3, 1.0, 0, spec)
        with pytest.raises(ValueError):
            TrajectoryPlan(10, 1e-3, -1.0, 0, spec)
        with pytest.raises(ValueError):
            TrajectoryPlan(10, 1e-3, 1.0, 2**64, spec)

    def test_valid_plan_accepted(self):
        _, spec, _ = _setup()
        plan = TrajectoryPlan(10, 1e-3, 1.0, 7, spec)
        assert plan.n_traj == 10


class TestStepSampling:
    def test_sample_perturbs_only_noisy_pairs(self):
        h, spec, _ = _setup(5, 2, 1.0)
        rng = np.random.default_rng(3)
        sample = sample_step_hamiltonian(h, spec, 1e-3, rng)
        diff = sample - h
        nz = {tuple(ix) for ix in np.argwhere(np.abs(diff) > 0)}
        assert nz <= {(4, 5), (5, 4)}
        assert np.max(np.abs(diff - diff.conj().T)) == 0.0

    def test_sample_variance_scales_inversely_with_dt(self):
        h, spec, _ = _setup(4, 2, 2.0)
        rng = np.random.default_rng(5)
        dt = 1e-3
        draws = np.array(
            [sample_step_hamiltonian(h, spec, dt, rng)[3, 4] - h[3, 4] for _ in range(4000)]
        )
        # couplings are N(0, 2 eta / dt)
        assert draws.var() == pytest.approx(2 * 2.0 / dt, rel=0.1)


class TestSingleTrajectory:
    def test_norm_preserved(self):
        h, spec, psi = _setup()
        out = evolve_trajectory(h, spec, psi, 1.0, 1e-3, 42)
        assert np.vdot(out, out).real == pytest.approx(1.0, abs=1e-9)

    def test_deterministic_replay(self):
        h, spec, psi = _setup()
        a = evolve_trajectory(h, spec, psi, 0.8, 1e-3, 42, stream_index=3)
        b = evolve_trajectory(h, spec, psi, 0.8, 1e-3, 42, stream_index=3)
        assert np.array_equal(a, b)

    def test_streams_differ_by_index(self):
        h, spec, psi = _setup()
        a = evolve_trajectory(h, spec, psi, 0.8, 1e-3, 42, stream_index=0)
        b = evolve_trajectory(h, spec, psi, 0.8, 1e-3, 42, stream_index=1)
        assert np.max(np.abs(a - b)) > 1e-6

    def test_zero_time_is_identity(self):
        h, spec, psi = _setup()
        out = evolve_trajectory(h, spec, psi, 0.0, 1e-3, 0)
        assert np.array_equal(out, psi)

    def test_zero_noise_matches_unitary(self):
        h, spec, psi = _setup(4, 2, 0.0)
        out = evolve_trajectory(h, spec, psi, 1.0, 1e-4, 0)
        from spinnet.propagator import propagator_matrix

        want = propagator_matrix(h, 1.0) @ psi
        assert np.max(np.abs(out - want)) < 1e-8

    def test_unnormalized_start_rejected(self):
        h, spec, psi = _setup()
        with pytest.raises(ValueError):
            evolve_trajectory(h, spec, 2.0 * psi, 1.0, 1e-3, 0)

    def test_step_load_guard(self):
        # eta dt and ||H|| dt are both capped; a huge rate at the
        # default step must be rejected, not silently integrated
        h, spec, psi = _setup(4, 2, 1000.0)
        with pytest.raises(ValueError):
            evolve_trajectory(h, spec, psi, 1.0, 1e-3, 0)


class TestEnsemble:
    def test_threads_do_not_change_bytes(self):
        h, spec, psi = _setup()
        plan = TrajectoryPlan(300, 1e-3, 0.7, 42, spec)
        r1 = ensemble_average(plan, h, psi, threads=1)
        r3 = ensemble_average(plan, h, psi, threads=3)
        assert np.array_equal(r1.rho_mean.rho, r3.rho_mean.rho)
        assert np.array_equal(r1.std_err, r3.std_err)

    def test_mean_is_valid_state(self):
        h, spec, psi = _setup()
        plan = TrajectoryPlan(50, 1e-3, 0.5, 9, spec)
        r = ensemble_average(plan, h, psi)
        rho = r.rho_mean.rho
        assert abs(np.trace(rho).real - 1.0) < 1e-9
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10

    def test_ensemble_contains_replayable_trajectories(self):
        # trajectory j of a run is exactly evolve_trajectory with
        # stream index j; averaging the replays reproduces the mean
        h, spec, psi = _setup()
        plan = TrajectoryPlan(5, 1e-3, 0.4, 77, spec)
        r = ensemble_average(plan, h, psi)
        acc = np.zeros((len(psi), len(psi)), dtype=complex)
        for j in range(plan.n_traj):
            v = evolve_trajectory(h, spec, psi, plan.t_final, plan.dt, 77, stream_index=j)
            acc += np.outer(v, v.conj())
        assert np.max(np.abs(acc / plan.n_traj - r.rho_mean.rho)) < 1e-12

    def test_converges_to_master_equation(self):
        h, spec, psi = _setup(4, 2, 1.0)
        plan = TrajectoryPlan(800, 1e-3, 1.0, 1234, spec)
        r = ensemble_average(plan, h, psi)
        liou = complete_network_liouvillian(4, 2, 1.0)
        want = evolve(liou, initial_network_state(4, 1, PROBE), 1.0, method="exact").rho
        diff = np.abs(r.rho_mean.rho - want)
        assert np.all(diff <= 4.0 * np.maximum(r.std_err, 1e-12))

    def test_std_err_shrinks_with_ensemble_size(self):
        h, spec, psi = _setup()
        small = ensemble_average(TrajectoryPlan(100, 1e-3, 0.5, 5, spec), h, psi)
        large = ensemble_average(TrajectoryPlan(900, 1e-3, 0.5, 5, spec), h, psi)
        # 9x the samples cuts the error about 3x on the big entries
        ratio = small.std_err[1, 1] / large.std_err[1, 1]
        assert 2.0 < ratio < 4.5

    def test_fractional_final_step(self):
        # horizon not divisible by dt lands exactly on t_final with a
        # shortened last step at matching variance
        h, spec, psi = _setup()
        plan = TrajectoryPlan(20, 1e-3, 0.5005, 3, spec)
        r = ensemble_average(plan, h, psi)
        assert abs(np.trace(r.rho_mean.rho).real - 1.0) < 1e-9
