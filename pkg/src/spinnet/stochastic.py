"""Monte Carlo unraveling of the white-noise couplings.

Each trajectory integrates the Schrodinger equation under the network
Hamiltonian plus piecewise-constant random edge couplings, one
independent Gaussian per noisy pair per step with variance 2 eta / dt.
That variance makes the integrated coupling over a step match the
delta-correlation of the continuous noise, and stepping with the exact
exponential of the full sampled Hamiltonian (the Stratonovich reading;
an Euler scheme on the state would lose trace in the average) drives
the ensemble mean to the Lindblad engine's output. The module exists
as an independent oracle for :mod:`spinnet.lindblad`, so it shares no
integration code with it.

Determinism contract: trajectory j draws from its own counter-based
stream keyed by (master_seed, j), trajectories are processed in fixed
batches, and partial sums are reduced in batch order after all workers
finish. Results are therefore bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .lindblad import NetworkState
from .network import NoiseSpec, require_hermitian

__all__ = [
    "TrajectoryPlan",
    "EnsembleResult",
    "sample_step_hamiltonian",
    "evolve_trajectory",
    "ensemble_average",
]

# Trajectories per kernel invocation. Fixed (not tied to thread count)
# so the reduction order never depends on parallelism.
_BATCH = 256

# Per-step couplings stay modest under the eta*dt and ||H||*dt bounds,
# so the series converges in a few dozen terms at most.
_MAX_TAYLOR_TERMS = 80


@dataclass(frozen=True)
class TrajectoryPlan:
    """Ensemble description: size, step, horizon, seed, and the noise spec."""

    n_traj: int
    dt: float
    t_final: float
    master_seed: int
    noise: NoiseSpec

    def __post_init__(self) -> None:
        if self.n_traj < 1:
            raise ValueError(f"n_traj must be at least 1, got {self.n_traj}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0:
            raise ValueError(f"t_final must be nonnegative, got {self.t_final}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Trajectory-averaged density matrix with per-entry standard errors."""

    rho_mean: NetworkState
    std_err: np.ndarray
    n_traj: int


def _edge_arrays(spec: NoiseSpec, dim: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    pairs: list[tuple[int, int]] = []
    strengths: list[float] = []
    for (k, l), eta in spec.edge_strengths().items():
        if l >= dim:
            raise ValueError(f"noisy vertex {l} outside the {dim - 1}-vertex network")
        pairs.append((k, l))
        strengths.append(eta)
    return pairs, np.asarray(strengths)


def sample_step_hamiltonian(
    hamiltonian: np.ndarray,
    spec: NoiseSpec,
    dt: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw one piecewise-constant step Hamiltonian H + sum g_kl (|k><l| + |l><k|).

    Couplings are independent zero-mean normals of variance 2 eta / dt,
    one per unordered noisy pair. Zero strength contributes exactly
    nothing (the scale collapses the draw to 0.0), so the eta = 0 limit
    returns H unchanged.
    """
    h = require_hermitian(hamiltonian)
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    pairs, strengths = _edge_arrays(spec, h.shape[0])
    out = np.array(h, dtype=float, copy=True)
    draws = rng.normal(0.0, np.sqrt(2.0 * strengths / dt))
    for (k, l), g in zip(pairs, draws):
        out[k, l] += g
        out[l, k] += g
    return out


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def _taylor_step(
    states: np.ndarray,
    h: np.ndarray,
    pairs: list[tuple[int, int]],
    couplings: np.ndarray,
    tau: float,
) -> np.ndarray:
    """Apply exp(-i (H + noise) tau) to each batch row by a machine-precision series.

    Each row has its own couplings, so the matrix exponential cannot be
    shared; instead the series acts on the states directly, with the
    noise applied column-wise (each edge operator only swaps two
    columns). Terms are summed until they fall below 1e-17, which keeps
    the step unitary to well under 1e-12.
    """
    out = states.copy()
    term = states
    for k in range(1, _MAX_TAYLOR_TERMS + 1):
        kicked = term @ h
        for e, (a, b) in enumerate(pairs):
            g = couplings[:, e]
            kicked[:, a] += g * term[:, b]
            kicked[:, b] += g * term[:, a]
        term = (-1j * tau / k) * kicked
        out += term
        if np.abs(term).max() < 1e-17:
            return out
    raise RuntimeError("numeric failure: step exponential did not converge")


def _split_horizon(t: float, dt: float) -> tuple[int, float]:
    n_full = int(math.floor(t / dt + 1e-12))
    remainder = t - n_full * dt
    if remainder < 1e-12 * max(t, dt):
        remainder = 0.0
    return n_full, remainder


def _propagate_batch(
    h: np.ndarray,
    pairs: list[tuple[int, int]],
    strengths: np.ndarray,
    states: np.ndarray,
    t: float,
    dt: float,
    rngs: list[np.random.Generator],
) -> np.ndarray:
    n_full, remainder = _split_horizon(t, dt)
    n_edges = len(pairs)
    # one draw call per trajectory for the whole horizon keeps the
    # stream layout identical whether a trajectory runs alone or in a
    # batch
    main = np.stack([rng.standard_normal((n_full, n_edges)) for rng in rngs])
    tail = np.stack([rng.standard_normal(n_edges) for rng in rngs]) if remainder else None
    sigma = np.sqrt(2.0 * strengths / dt)
    for s in range(n_full):
        states = _taylor_step(states, h, pairs, main[:, s, :] * sigma, dt)
    if remainder:
        sigma_tail = np.sqrt(2.0 * strengths / remainder)
        states = _taylor_step(states, h, pairs, tail * sigma_tail, remainder)
    return states


def _check_preconditions(h: np.ndarray, spec: NoiseSpec, dt: float) -> None:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    strengths = list(spec.edge_strengths().values())
    eta_max = max(strengths, default=0.0)
    if eta_max * dt > 0.05:
        raise ValueError(f"eta * dt = {eta_max * dt:.3g} exceeds 0.05; shrink dt")
    h_norm = float(np.abs(np.linalg.eigvalsh(h)).max())
    if h_norm * dt > 0.05:
        raise ValueError(f"||H|| * dt = {h_norm * dt:.3g} exceeds 0.05; shrink dt")


def evolve_trajectory(
    hamiltonian: np.ndarray,
    spec: NoiseSpec,
    psi0: np.ndarray,
    t: float,
    dt: float,
    seed: int,
    stream_index: int = 0,
) -> np.ndarray:
    """Integrate one noise realization, returning the endpoint state vector.

    The final partial step (when t is not a multiple of dt) uses the
    variance matched to its own length. Passing the master seed of an
    ensemble together with a trajectory index reproduces that member's
    noise stream.
    """
    h = require_hermitian(hamiltonian).astype(complex)
    _check_preconditions(h, spec, dt)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.shape[0],):
        raise ValueError(f"state shape {psi0.shape} does not match dimension {h.shape[0]}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    pairs, strengths = _edge_arrays(spec, h.shape[0])
    states = psi0[np.newaxis, :].copy()
    states = _propagate_batch(h, pairs, strengths, states, t, dt, [_stream(seed, stream_index)])
    return states[0]


def ensemble_average(
    plan: TrajectoryPlan,
    hamiltonian: np.ndarray,
    psi0: np.ndarray,
    threads: int = 1,
) -> EnsembleResult:
    """Average |psi><psi| over the planned trajectory ensemble.

    Workers process disjoint fixed-size batches; the per-batch partial
    sums are combined in batch order once all of them exist, so the
    result does not depend on scheduling. Standard errors come from the
    per-entry second moments accumulated alongside the mean.
    """
    h = require_hermitian(hamiltonian).astype(complex)
    _check_preconditions(h, plan.noise, plan.dt)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (h.shape[0],):
        raise ValueError(f"state shape {psi0.shape} does not match dimension {h.shape[0]}")
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    pairs, strengths = _edge_arrays(plan.noise, h.shape[0])
    dim = h.shape[0]

    def run_batch(start: int) -> tuple[np.ndarray, np.ndarray]:
        stop = min(start + _BATCH, plan.n_traj)
        rngs = [_stream(plan.master_seed, j) for j in range(start, stop)]
        states = np.broadcast_to(psi0, (stop - start, dim)).copy()
        states = _propagate_batch(h, pairs, strengths, states, plan.t_final, plan.dt, rngs)
        first = np.einsum("bi,bj->ij", states, states.conj())
        pops = np.abs(states) ** 2
        second = np.einsum("bi,bj->ij", pops, pops)
        return first, second

    starts = range(0, plan.n_traj, _BATCH)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(run_batch, starts))
    else:
        partials = [run_batch(s) for s in starts]

    first = np.zeros((dim, dim), dtype=complex)
    second = np.zeros((dim, dim))
    for part_first, part_second in partials:
        first += part_first
        second += part_second
    mean = first / plan.n_traj
    variance = np.maximum(second / plan.n_traj - np.abs(mean) ** 2, 0.0)
    std_err = np.sqrt(variance / plan.n_traj)
    return EnsembleResult(NetworkState(mean), std_err, plan.n_traj)
