"""Acceptance gate: eight release criteria, one scoreboard line each.

Every test registers its measured numbers with the scoreboard before
asserting, so the terminal summary shows the values even for a red
criterion. Two checks are currently red by measurement, not by bug:
the fidelity at the resonance time dips slightly between the two
smallest nonzero rates in the scanned ladder, and the strong-noise
best fidelity saturates just below the 0.99 bar. Both margins are
stable under step refinement and engine cross-checks; the tests state
the required property as written and report the shortfall.
"""

from __future__ import annotations

import math
import subprocess
import sys

import numpy as np
import pytest

import spinnet as sn
from spinnet import lindblad

PROBE = sn.BlochInput(math.pi / 2, 0.0)
SEED = 20240817


def _channel_fidelity(state) -> float:
    f, _ = sn.optimal_avg_fidelity(sn.extract_channel(state, PROBE, 1, 2))
    return f


def _lindblad_fidelity(n: int, m: int, eta: float, times) -> list[float]:
    liou = sn.complete_network_liouvillian(n, m, eta)
    start = sn.initial_network_state(n, 1, PROBE)
    return [_channel_fidelity(st) for st in lindblad.evolve_at_times(liou, start, times)]


class TestCriterion1NoPerfectTransfer:
    def test_peak_fidelity_matches_closed_form(self, criterion_log):
        worst = 0.0
        for n in range(2, 13):
            grid = np.linspace(0.0, 2 * math.pi, 1 + 32 * n)
            engine = sn.baseline_max_fidelity(n, t_grid=grid)
            formula = 0.5 + (2.0 / n) / 3.0 + (4.0 / n**2) / 6.0
            worst = max(worst, abs(engine - formula))
            if n == 2:
                worst = max(worst, abs(engine - 1.0))
        passed = worst < 1e-6
        criterion_log(
            "1 peak-fidelity closed form (n=2..12)",
            passed,
            f"worst |engine - formula| = {worst:.3e} (tol 1e-6)",
        )
        assert passed


class TestCriterion2OracleTriple:
    CELLS = [(eta, t) for eta in (0.25, 1.0, 4.0) for t in (0.5, 1.0, 1.5 * math.pi)]

    def test_three_engines_agree(self, criterion_log):
        h = sn.single_excitation_hamiltonian(sn.complete_graph(4))
        start = sn.initial_network_state(4, 1, PROBE)
        a, b = PROBE.amplitudes()
        psi = np.zeros(5, dtype=complex)
        psi[0], psi[1] = a, b

        worst_sigma = 0.0
        for eta, t in self.CELLS:
            spec = sn.standard_noise_spec(4, 2, eta)
            plan = sn.TrajectoryPlan(
                n_traj=20000, dt=1e-3, t_final=t, master_seed=SEED, noise=spec
            )
            ensemble = sn.ensemble_average(plan, h, psi, threads=1)
            exact = lindblad.evolve(
                sn.complete_network_liouvillian(4, 2, eta), start, t, method="exact"
            )
            sigma = np.maximum(ensemble.std_err, 1e-30)
            worst_sigma = max(
                worst_sigma, float((np.abs(ensemble.rho_mean.rho - exact.rho) / sigma).max())
            )

        # noiseless master equation is the unitary engine
        worst_unitary = 0.0
        liou0 = sn.complete_network_liouvillian(4, 2, 0.0)
        for t in (0.5, 1.0, 1.5 * math.pi):
            st = lindblad.evolve(liou0, start, t, method="exact")
            z_master = sn.extract_channel(st, PROBE, 1, 2).amplitude
            z_unitary = sn.transfer_amplitude(h, t, 1, 2)
            worst_unitary = max(worst_unitary, abs(z_master - z_unitary))

        # halving the master-equation step must not move the state
        liou = sn.complete_network_liouvillian(4, 2, 1.0)
        coarse = lindblad.evolve(liou, start, 1.5 * math.pi, dt=1e-3, method="rk4")
        fine = lindblad.evolve(liou, start, 1.5 * math.pi, dt=5e-4, method="rk4")
        drift = float(np.max(np.abs(coarse.rho - fine.rho)))

        passed = worst_sigma <= 3.0 and worst_unitary < 1e-8 and drift <= 1e-8
        criterion_log(
            "2 oracle triple agreement (9 noisy cells)",
            passed,
            f"max |diff|/std_err = {worst_sigma:.2f} (<= 3), unitary limit "
            f"{worst_unitary:.1e}, dt-halving drift {drift:.1e} (<= 1e-8)",
        )
        assert passed


class TestCriterion3NoiseBenefit:
    RESONANCE = 1.5 * math.pi

    def test_3a_fidelity_nondecreasing_in_rate(self, criterion_log):
        etas = list(range(0, 65, 2))
        fids = [
            _lindblad_fidelity(4, 2, float(eta), [self.RESONANCE])[0] for eta in etas
        ]
        diffs = np.diff(fids)
        worst = float(diffs.min())
        where = etas[int(diffs.argmin())]
        passed = worst >= -1e-12
        criterion_log(
            "3a resonance fidelity non-decreasing over rate ladder",
            passed,
            f"min adjacent gain = {worst:.3e} at eta = {where} -> {where + 2} "
            f"(F spans {min(fids):.6f}..{max(fids):.6f})",
        )
        assert passed, (
            "fidelity at the resonance time is not monotone in the rate: "
            f"F(eta={where}) = {fids[etas.index(where)]:.8f} exceeds "
            f"F(eta={where + 2}) = {fids[etas.index(where) + 1]:.8f}"
        )

    def test_3b_strong_noise_beats_099(self, criterion_log):
        coarse = np.linspace(0.0, 2 * math.pi, 2001)
        fids = _lindblad_fidelity(4, 2, 200.0, coarse)
        k = int(np.argmax(fids))
        window = np.linspace(coarse[max(k - 1, 0)], coarse[min(k + 1, len(coarse) - 1)], 81)
        refined = _lindblad_fidelity(4, 2, 200.0, window)
        best = max(refined)
        t_best = float(window[int(np.argmax(refined))])
        passed = best > 0.99
        criterion_log(
            "3b strong-noise best fidelity above 0.99",
            passed,
            f"max F(eta=200) = {best:.8f} at t = {t_best:.6f} (need > 0.99)",
        )
        assert passed, f"best strong-noise fidelity {best:.8f} does not clear 0.99"


class TestCriterion4NetworkReduction:
    @pytest.mark.parametrize("n,m", [(4, 2), (6, 2), (6, 4)])
    def test_strong_noise_removes_noisy_vertices(self, n, m, criterion_log):
        times = np.linspace(0.0, 2 * math.pi, 129)
        lind = _lindblad_fidelity(n, m, 1000.0, times)
        spec = sn.standard_noise_spec(n, m, 1.0)
        h_eff = sn.zeno_effective_hamiltonian(n, spec)
        eff = []
        for t in times:
            z = sn.propagator_matrix(h_eff, float(t))[2, 1]
            f, _ = sn.optimal_avg_fidelity(sn.ChannelParams(z, 1.0))
            eff.append(f)
        dev = float(np.max(np.abs(np.array(lind) - np.array(eff))))
        passed = dev <= 0.02
        criterion_log(
            f"4 strong-noise reduction (n={n}, m={m})",
            passed,
            f"max |F_master - F_reduced| = {dev:.5f} (tol 0.02)",
        )
        assert passed


class TestCriterion5FirstOrderScaling:
    def test_residual_scales_quadratically(self, criterion_log):
        def residual(eta: float) -> float:
            full = _lindblad_fidelity(4, 2, eta, [1.0])[0]
            first = sn.first_order_numeric(4, 2, eta, 1.0).fidelity()
            return abs(full - first)

        cache = {eta: residual(eta) for eta in (1e-2, 5e-3, 2.5e-3, 1.25e-3)}
        ratios = [cache[eta] / cache[eta / 2] for eta in (1e-2, 5e-3, 2.5e-3)]
        passed = all(2.6 <= r <= 5.4 for r in ratios)
        criterion_log(
            "5 first-order residual halving ratio",
            passed,
            "ratios " + ", ".join(f"{r:.3f}" for r in ratios) + " (window [2.6, 5.4], target 4)",
        )
        assert passed


class TestCriterion6EnhancementWindows:
    def test_windows_exist_across_sizes(self, criterion_log):
        times = np.arange(1, 2001) * (4 * math.pi / 2000)
        missing = []
        for n in range(4, 13):
            prof = np.array(sn.delta_profile(n, n - 2, 0.01, times))
            if not np.any(prof > 0):
                missing.append(n)
        passed = missing == []
        criterion_log(
            "6a enhancement window exists for n=4..12 (m=n-2)",
            passed,
            "all sizes show a gain window" if passed else f"no window at n in {missing}",
        )
        assert passed

    def test_window_width_grows_with_noisy_set(self, criterion_log):
        steps = 16000
        times = np.arange(1, steps + 1) * (4 * math.pi / steps)
        dt = 4 * math.pi / steps
        widths = []
        for m in range(2, 9):
            prof = np.array(sn.delta_profile(10, m, 0.01, times))
            assert np.any(prof > 0), f"no enhancement window at n=10, m={m}"
            widths.append(sn.longest_positive_run(prof) * dt)
        gaps = np.diff(widths)
        passed = bool(np.all(gaps >= -1e-12))
        criterion_log(
            "6b widest window non-decreasing in m (n=10, m=2..8)",
            passed,
            "widths " + ", ".join(f"{w:.4f}" for w in widths),
        )
        assert passed


class TestCriterion7Conservation:
    def test_randomized_invariant_sweep(self, criterion_log):
        rng = np.random.default_rng(SEED)
        worst = {"trace": 0.0, "herm": 0.0, "vacuum": 0.0}
        min_eig = 0.0
        for _ in range(100):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(0, n - 1))
            eta = float(rng.choice([0.0, 0.05, 0.5, 5.0, 40.0]))
            theta = float(rng.uniform(0.2, math.pi - 0.2))
            phi = float(rng.uniform(0.0, 2 * math.pi))
            probe = sn.BlochInput(theta, phi)
            liou = sn.complete_network_liouvillian(n, m, eta)
            start = sn.initial_network_state(n, 1, probe)
            vac0 = start.rho[0, 0].real
            times = rng.uniform(0.1, 6.0, size=6)
            for st in lindblad.evolve_at_times(liou, start, np.sort(times)):
                rho = st.rho
                worst["trace"] = max(worst["trace"], abs(np.trace(rho).real - 1.0))
                worst["herm"] = max(worst["herm"], float(np.max(np.abs(rho - rho.conj().T))))
                worst["vacuum"] = max(worst["vacuum"], abs(rho[0, 0].real - vac0))
                min_eig = min(min_eig, float(np.linalg.eigvalsh(rho).min()))
        passed = all(v < 1e-9 for v in worst.values()) and min_eig >= -1e-8
        criterion_log(
            "7 conservation suite (100 randomized configs, n<=8)",
            passed,
            f"trace {worst['trace']:.1e}, herm {worst['herm']:.1e}, "
            f"vacuum {worst['vacuum']:.1e} (< 1e-9), min eig {min_eig:.1e} (>= -1e-8)",
        )
        assert passed


class TestCriterion8Determinism:
    @staticmethod
    def _run(args, config_text, tmp_path, threads=None, tag="cfg"):
        import os

        path = tmp_path / f"{tag}.json"
        path.write_text(config_text)
        cmd = [sys.executable, "-m", "spinnet.cli", *args, "--config", str(path)]
        if threads is not None:
            cmd += ["--threads", str(threads)]
        env = dict(os.environ)
        env.pop("SPINNET_THREADS", None)
        return subprocess.run(cmd, capture_output=True, env=env)

    def test_byte_identical_output(self, criterion_log, tmp_path):
        sim = (
            '{"n": 4, "m": 2, "eta": 1.0, "t_min": 0.4, "t_max": 0.8, "t_steps": 2, '
            '"method": "trajectories", "n_traj": 60, "master_seed": 7}'
        )
        runs = [
            self._run(["simulate"], sim, tmp_path, threads=k, tag="sim") for k in (1, 3, 1)
        ]
        sim_ok = (
            runs[0].stdout == runs[1].stdout == runs[2].stdout and runs[0].returncode == 0
        )

        fig = '{"eta_values": [0, 8], "t_steps": 16}'
        f1 = self._run(["fig1"], fig, tmp_path, tag="fig")
        f2 = self._run(["fig1"], fig, tmp_path, tag="fig")
        fig_ok = f1.stdout == f2.stdout and f1.returncode == 0

        rep = '{"n_traj": 200}'
        r1 = self._run(["report"], rep, tmp_path, threads=1, tag="rep")
        r2 = self._run(["report"], rep, tmp_path, threads=2, tag="rep")
        rep_ok = r1.stdout == r2.stdout and r1.returncode == 0

        passed = sim_ok and fig_ok and rep_ok
        criterion_log(
            "8 byte-identical CLI output at any thread count",
            passed,
            f"simulate {'ok' if sim_ok else 'DIFFERS'}, fig1 {'ok' if fig_ok else 'DIFFERS'}, "
            f"report {'ok' if rep_ok else 'DIFFERS'}",
        )
        assert passed
