"""Noise-averaged master equation: generator, integrators, channel readout.

Averaging the white-noise edge couplings gives a Lindblad equation
d rho/dt = -i[H, rho] + sum_edges r (L rho L - {L^2, rho}/2) with one
Hermitian hopping operator L per noisy pair and generator rate r from
:func:`spinnet.network.lindblad_edge_operators`. Everything here works
on the column-stacked form vec(rho), where the equation is linear with
a fixed (n+1)^2 x (n+1)^2 generator matrix, so integration is either a
fixed-step 4th-order polynomial map (reproducible scans) or one
eigendecomposition of the generator (stiff, strong-noise regimes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from .network import (
    INPUT_VERTEX,
    OUTPUT_VERTEX,
    complete_graph,
    lindblad_edge_operators,
    require_hermitian,
    single_excitation_hamiltonian,
    standard_noise_spec,
)
from .propagator import BlochInput, ChannelParams

__all__ = [
    "NetworkState",
    "Liouvillian",
    "initial_network_state",
    "build_liouvillian",
    "complete_network_liouvillian",
    "evolve",
    "evolve_at_times",
    "extract_channel",
]

# Tolerances of the state invariants; evolve() re-checks them per step.
HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-8


def _vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def _unvec(v: np.ndarray, dim: int) -> np.ndarray:
    return v.reshape((dim, dim), order="F")


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Density matrix of the network in the vacuum + single-excitation basis.

    Construction validates Hermiticity, unit trace, and positivity (the
    smallest eigenvalue may sit slightly below zero from rounding, but
    no further than 1e-8).
    """

    rho: np.ndarray

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho, dtype=complex)
        object.__setattr__(self, "rho", rho)
        problem = state_defect(rho)
        if problem is not None:
            raise ValueError(f"invalid network state: {problem}")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def vertex_population(self, vertex: int) -> float:
        if not 0 <= vertex < self.dim:
            raise ValueError(f"vertex {vertex} outside 0..{self.dim - 1}")
        return float(self.rho[vertex, vertex].real)

    @property
    def vacuum_population(self) -> float:
        return float(self.rho[0, 0].real)


def state_defect(rho: np.ndarray) -> str | None:
    """Describe the worst violated density-matrix invariant, or None if clean."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return f"shape {rho.shape} is not square"
    herm = np.abs(rho - rho.conj().T).max()
    if herm > HERMITICITY_ATOL:
        return f"Hermiticity defect {herm:.3e}"
    trace_err = abs(rho.trace() - 1.0)
    if trace_err > TRACE_ATOL:
        return f"trace defect {trace_err:.3e}"
    low = np.linalg.eigvalsh(rho).min()
    if low < EIGENVALUE_FLOOR:
        return f"negative eigenvalue {low:.3e}"
    return None


def initial_network_state(n: int, input_vertex: int, state: BlochInput) -> NetworkState:
    """Pure product start a|vacuum> + b|input vertex| as a rank-1 density matrix."""
    if not 1 <= input_vertex <= n:
        raise ValueError(f"input vertex {input_vertex} outside 1..{n}")
    a, b = state.amplitudes()
    psi = np.zeros(n + 1, dtype=complex)
    psi[0] = a
    psi[input_vertex] = b
    return NetworkState(np.outer(psi, psi.conj()))


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Vectorized generator of the master equation, with its two parts.

    ``generator`` equals ``hamiltonian_part + dissipator_part`` and acts
    on column-stacked density matrices. Immutable; reuse one instance
    across an entire parameter-scan series.
    """

    generator: np.ndarray
    hamiltonian_part: np.ndarray
    dissipator_part: np.ndarray

    @property
    def dim(self) -> int:
        return int(round(math.sqrt(self.generator.shape[0])))

    @cached_property
    def norm_estimate(self) -> float:
        """Spectral-norm estimate of the generator by power iteration on G*G."""
        g = self.generator
        size = g.shape[0]
        # deterministic non-symmetric start so no eigenvector is missed
        # by accident of symmetry
        v = np.ones(size) + np.arange(size) / size
        v /= np.linalg.norm(v)
        est = 0.0
        for _ in range(60):
            w = g.conj().T @ (g @ v)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                return 0.0
            v = w / norm
            est = math.sqrt(norm)
        return est

    @cached_property
    def _spectral(self) -> tuple[np.ndarray, np.ndarray, bool]:
        """Eigendecomposition of the generator, flagged unusable if ill-conditioned.

        Returns (eigenvalues, eigenvectors, ok). The generator is not
        normal, so the decomposition is trusted only when the residual
        max_k ||G v_k - w_k v_k||_inf stays below 1e-8; otherwise exact
        stepping falls back to a dense matrix exponential.
        """
        w, v = np.linalg.eig(self.generator)
        residual = np.abs(self.generator @ v - v * w).max()
        return w, v, bool(residual < 1e-8)


def build_liouvillian(
    hamiltonian: np.ndarray,
    operators: Iterable[tuple[np.ndarray, float]] = (),
) -> Liouvillian:
    """Assemble the vectorized generator from H and (operator, rate) pairs.

    Uses vec(A rho B) = kron(B^T, A) vec(rho) for column stacking. The
    dissipator enters with the physically damping sign: each pair
    contributes rate * (L rho L^dag - {L^dag L, rho}/2), so populations
    mix and coherences decay, never grow.
    """
    h = require_hermitian(hamiltonian)
    dim = h.shape[0]
    eye = np.eye(dim)
    ham_part = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    dis_part = np.zeros_like(ham_part)
    for op, rate in operators:
        op = np.asarray(op, dtype=complex)
        if op.shape != (dim, dim):
            raise ValueError(f"operator shape {op.shape} does not match dimension {dim}")
        if rate < 0:
            raise ValueError(f"negative rate {rate}")
        opsq = op.conj().T @ op
        dis_part += rate * (
            np.kron(op.conj(), op)
            - 0.5 * np.kron(eye, opsq)
            - 0.5 * np.kron(opsq.T, eye)
        )
    return Liouvillian(ham_part + dis_part, ham_part, dis_part)


def complete_network_liouvillian(n: int, m: int, eta: float) -> Liouvillian:
    """Generator for the complete graph with noise on the m last vertices.

    Convenience wrapper over the standard placement (transfer pair
    (1, 2), noisy set {n-m+1, ..., n}) used by every scan in the
    package; heterogeneous strengths or exotic noisy sets go through
    build_liouvillian directly.
    """
    graph = complete_graph(n)
    spec = standard_noise_spec(n, m, eta)
    ops = lindblad_edge_operators(graph, spec, INPUT_VERTEX, OUTPUT_VERTEX)
    return build_liouvillian(single_excitation_hamiltonian(graph), ops)


def _rk4_step_matrix(generator: np.ndarray, dt: float) -> np.ndarray:
    # classical RK4 on a linear autonomous system collapses to the
    # degree-4 Taylor polynomial of exp(dt G)
    a = dt * generator
    size = a.shape[0]
    out = np.eye(size, dtype=complex) + a
    power = a
    for k in (2, 3, 4):
        power = power @ a / k
        out += power
    return out


def _evolve_rk4(liouvillian: Liouvillian, state: NetworkState, t: float, dt: float) -> NetworkState:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    load = dt * liouvillian.norm_estimate
    if load > 0.1:
        raise ValueError(
            f"dt * ||generator|| = {load:.3f} exceeds 0.1; shrink dt or use exact stepping"
        )
    dim = state.dim
    n_steps = max(int(math.ceil(t / dt - 1e-12)), 1)
    step = _rk4_step_matrix(liouvillian.generator, dt)
    v = _vec(state.rho).astype(complex)
    for k in range(n_steps):
        if k == n_steps - 1:
            # land exactly on t; the remainder never exceeds dt
            last = t - (n_steps - 1) * dt
            v = _rk4_step_matrix(liouvillian.generator, last) @ v
        else:
            v = step @ v
        problem = state_defect(_unvec(v, dim))
        if problem is not None:
            raise RuntimeError(f"numeric failure at step {k + 1}/{n_steps}: {problem}")
    return NetworkState(_unvec(v, dim))


def _evolve_exact(
    liouvillian: Liouvillian, state: NetworkState, times: Sequence[float]
) -> list[NetworkState]:
    dim = state.dim
    v0 = _vec(state.rho).astype(complex)
    w, vecs, ok = liouvillian._spectral
    coeffs = np.linalg.solve(vecs, v0) if ok else None
    states = []
    for t in times:
        if ok:
            vt = vecs @ (np.exp(w * t) * coeffs)
        else:
            vt = scipy.linalg.expm(liouvillian.generator * t) @ v0
        rho = _unvec(vt, dim)
        # exact stepping has no per-step trail; symmetrize away the
        # rounding noise of the non-normal eigenbasis before validating
        rho = 0.5 * (rho + rho.conj().T)
        problem = state_defect(rho)
        if problem is not None and ok:
            # the eigenbasis degrades near exceptional points of the
            # generator even when the residual guard passes; retry with
            # the (slower, unconditionally stable) Pade route
            vt = scipy.linalg.expm(liouvillian.generator * t) @ v0
            rho = 0.5 * ((m := _unvec(vt, dim)) + m.conj().T)
            problem = state_defect(rho)
        if problem is not None:
            raise RuntimeError(f"numeric failure at t={t}: {problem}")
        states.append(NetworkState(rho))
    return states


def evolve(
    liouvillian: Liouvillian,
    state: NetworkState,
    t: float,
    dt: float | None = None,
    method: str = "auto",
) -> NetworkState:
    """Propagate a state for time t under the master equation.

    method="rk4" runs the fixed-step 4th-order map and requires dt with
    dt * ||generator|| <= 0.1 (the final step is shortened to land on t
    exactly). method="exact" diagonalizes the generator once, which is
    the right tool for stiff strong-noise runs; an ill-conditioned
    eigenbasis triggers a dense-exponential fallback. method="auto"
    picks rk4 when a dt satisfying the load bound was given and exact
    otherwise. Invariant violations raise RuntimeError naming the step.
    """
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if liouvillian.generator.shape[0] != state.dim**2:
        raise ValueError("generator and state dimensions do not match")
    if t == 0.0:
        return state
    if method not in ("auto", "rk4", "exact"):
        raise ValueError(f"unsupported method {method!r}")
    if method == "auto":
        wants_rk4 = dt is not None and dt * liouvillian.norm_estimate <= 0.1
        method = "rk4" if wants_rk4 else "exact"
    if method == "rk4":
        if dt is None:
            raise ValueError("rk4 stepping needs an explicit dt")
        return _evolve_rk4(liouvillian, state, t, dt)
    return _evolve_exact(liouvillian, state, [t])[0]


def evolve_at_times(
    liouvillian: Liouvillian,
    state: NetworkState,
    times: Sequence[float],
) -> list[NetworkState]:
    """Exact-stepping evolution sampled at many times with one diagonalization.

    The time grid need not be sorted or uniform; each entry must be
    nonnegative.
    """
    times = [float(t) for t in times]
    if any(t < 0 for t in times):
        raise ValueError("times must be nonnegative")
    if liouvillian.generator.shape[0] != state.dim**2:
        raise ValueError("generator and state dimensions do not match")
    return _evolve_exact(liouvillian, state, times)


def extract_channel(
    state: NetworkState | np.ndarray,
    probe: BlochInput,
    input_vertex: int,
    output_vertex: int,
) -> ChannelParams:
    """Read the effective qubit channel (z, lambda) off an evolved state.

    With probe amplitudes a, b the evolved state stores |z|^2 in the
    output population <o|rho|o> / |b|^2 and the product lambda*z in the
    coherence <o|rho|0> / (b a*). Splitting the product needs |z| above
    1e-12; below that the channel carries no amplitude information and
    the convention z = 0, lambda = 1 applies. Probes at either pole are
    rejected: theta = 0 sends no excitation, and theta = pi leaves no
    vacuum component against which the coherence could be read.

    A raw density matrix is also accepted, skipping the NetworkState
    invariant checks; perturbative constructions need that, since their
    states are positive only to the order of the expansion.
    """
    rho = state.rho if isinstance(state, NetworkState) else np.asarray(state, dtype=complex)
    dim = rho.shape[0]
    if input_vertex == output_vertex:
        raise ValueError("input and output vertices must differ")
    for v in (input_vertex, output_vertex):
        if not 1 <= v < dim:
            raise ValueError(f"vertex {v} outside 1..{dim - 1}")
    a, b = probe.amplitudes()
    if abs(b) < 1e-12:
        raise ValueError("probe carries no excitation (theta = 0)")
    if abs(a) < 1e-12:
        raise ValueError("probe has no vacuum component (theta = pi); coherence readout needs one")
    prob = rho[output_vertex, output_vertex].real / abs(b) ** 2
    if prob < -1e-10:
        raise RuntimeError(f"numeric failure: output population {prob:.3e} below zero")
    prob = max(prob, 0.0)
    lam_z = rho[output_vertex, 0] / (b * a.conjugate())
    mod = math.sqrt(prob)
    if mod > 1e-12:
        lam = abs(lam_z) / mod
        z = lam_z / lam if lam > 0.0 else complex(mod)
    else:
        z, lam = 0j, 1.0
    return ChannelParams(complex(z), float(lam))
