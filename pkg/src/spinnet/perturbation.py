"""Weak-noise expansion and the noise-benefit statistic.

Two independent first-order routes live here. The closed-form route
assembles the published-style expressions built from the free
amplitudes beta (transfer) and beta' (return) and the eight time
integrals b1..b8; it is evaluated literally, defects included, and is
treated as a claim under test. The numeric route integrates the
interaction-picture dissipator applied to the frozen zeroth-order
state, which cannot suffer from convention or transcription slips, and
serves as the ground truth the closed forms are compared against.

The noise-benefit statistic Delta(t) = max[F(t; eta) - max_t F(t; 0), 0]
is always computed from the full master-equation engine, not from
either first-order route: the interesting windows sit at eta*t of
order one, where a truncated expansion has no business being trusted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.optimize

from . import lindblad
from .network import (
    INPUT_VERTEX,
    OUTPUT_VERTEX,
    complete_graph,
    lindblad_edge_operators,
    single_excitation_hamiltonian,
    standard_noise_spec,
)
from .propagator import BlochInput, optimal_avg_fidelity

__all__ = [
    "WeakNoiseIntegrals",
    "WeakNoiseChannel",
    "DeltaStatistic",
    "beta",
    "beta_prime",
    "b_coefficients",
    "printed_weak_noise_channel",
    "first_order_numeric",
    "baseline_max_fidelity",
    "delta_statistic",
    "delta_profile",
    "longest_positive_run",
]

_PROBE = BlochInput(math.pi / 2.0, 0.0)


def beta(n: int, t: float) -> complex:
    """Free transfer amplitude between two distinct complete-graph vertices.

    beta = (e^{it}/n)(e^{-int} - 1); vanishes at t = 0 and peaks in
    modulus at 2/n. Equals the propagator matrix element exactly in
    this package's time unit.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return cmath.exp(1j * t) / n * (cmath.exp(-1j * n * t) - 1.0)


def beta_prime(n: int, t: float) -> complex:
    """Free return amplitude of a complete-graph vertex: (e^{it}/n)(e^{-int} + n - 1)."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return cmath.exp(1j * t) / n * (cmath.exp(-1j * n * t) + n - 1.0)


@dataclass(frozen=True)
class WeakNoiseIntegrals:
    """The eight time integrals b1..b8 entering the first-order coefficients.

    b2, b5, b6, b8 are real by construction; they are stored complex
    anyway so the assembly below is uniform.
    """

    b1: complex
    b2: complex
    b3: complex
    b4: complex
    b5: complex
    b6: complex
    b7: complex
    b8: complex


def b_coefficients(n: int, t: float, step: float = 1e-3) -> WeakNoiseIntegrals:
    """Evaluate the b1..b8 integrals by composite Simpson quadrature.

    The integrands are products of beta and beta' over [0, t], all
    carrying the common prefactor (n-3)^2, so n = 3 short-circuits to
    zeros. The step is capped at 1e-3; halving it moves the values by
    less than one part in 1e8, which the test suite asserts.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    if not 0 < step <= 1e-3:
        raise ValueError(f"step must lie in (0, 1e-3], got {step}")
    if t == 0.0 or n == 3:
        zero = 0j
        return WeakNoiseIntegrals(zero, zero, zero, zero, zero, zero, zero, zero)
    num = max(int(math.ceil(t / step)), 2)
    if num % 2:
        num += 1
    tau = np.linspace(0.0, t, num + 1)
    b = np.exp(1j * tau) / n * (np.exp(-1j * n * tau) - 1.0)
    bp = np.exp(1j * tau) / n * (np.exp(-1j * n * tau) + n - 1.0)
    ab2 = np.abs(b) ** 2
    abp2 = np.abs(bp) ** 2
    pref = (n - 3) ** 2

    def integral(values: np.ndarray) -> complex:
        return complex(pref * scipy.integrate.simpson(values, x=tau))

    return WeakNoiseIntegrals(
        b1=integral(b * bp.conj()),
        b2=integral(ab2),
        b3=integral(b * bp.conj() * abp2),
        b4=integral(b**2 * bp.conj() ** 2 + abp2 * ab2),
        b5=integral(ab2 * abp2),
        b6=integral(2.0 * (b * bp.conj()).real * ab2),
        b7=integral(b * ab2 * bp.conj()),
        b8=integral(ab2**2),
    )


@dataclass(frozen=True)
class WeakNoiseChannel:
    """First-order channel data: zeroth-order |z|^2 plus the two eta slopes.

    Assembles |z|^2 = z_sq_0 + eta * xi1 and the coherence product
    lambda*z = z_sq_0 + eta * xi2, whose zeroth order is the real
    number |beta|^2; the dephasing factor is therefore read out as
    |lambda z| / |z|^2, which is exactly 1 when eta = 0.
    """

    z_sq_0: float
    xi1: float
    xi2: complex
    eta: float

    @property
    def z_sq(self) -> float:
        return self.z_sq_0 + self.eta * self.xi1

    @property
    def lambda_z(self) -> complex:
        return self.z_sq_0 + self.eta * self.xi2

    @property
    def abs_z(self) -> float:
        return math.sqrt(max(self.z_sq, 0.0))

    @property
    def dephasing(self) -> float:
        if self.z_sq > 1e-12:
            return abs(self.lambda_z) / self.z_sq
        return 1.0

    def fidelity(self) -> float:
        mod = self.abs_z
        return 0.5 + self.dephasing * mod / 3.0 + mod * mod / 6.0


def _require_noise_geometry(n: int, m: int) -> None:
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0 <= m <= n - 2:
        raise ValueError(f"m must lie in 0..n-2 = {n - 2}, got {m}")


def printed_weak_noise_channel(n: int, m: int, eta: float, t: float) -> WeakNoiseChannel:
    """Literal assembly of the closed-form first-order coefficients.

    xi1 is the long b-combination plus its complex conjugate; xi2 is
    m (b1 beta + b2 beta' + b2 beta m). Both are transcribed verbatim,
    bracket groupings included, and carry known defects: the m = 1
    case yields nonzero xi even though one noisy vertex spans no edge,
    and one b8 grouping is ambiguous in the source. The numeric route
    is the arbiter; see the consistency report. Meaningful only while
    eta * t stays well under 1.
    """
    _require_noise_geometry(n, m)
    if eta < 0:
        raise ValueError(f"need eta >= 0, got {eta}")
    co = b_coefficients(n, t)
    b = beta(n, t)
    bp = beta_prime(n, t)
    ab2 = abs(b) ** 2
    abp2 = abs(bp) ** 2
    inner = (
        co.b3 * ab2
        + co.b4 * (bp.conjugate() * b + ab2 * m)
        + co.b5 * (bp * b.conjugate() + ab2 * m)
        + co.b6 * (abp2 + abp2 * ab2 * m**2 + ab2 * m**2)
        + co.b7 * (bp.conjugate() + ab2 * (m**2 + n - 1))
        + co.b8 * (abp2 + abp2 * ab2 * (m**2 + n - 1) * m**2 * (n - 2) + ab2 * m * (m**2 + n - 1))
    )
    xi1 = 2.0 * (m * inner).real
    xi2 = m * (co.b1 * b + co.b2 * bp + co.b2 * b * m)
    return WeakNoiseChannel(z_sq_0=ab2, xi1=xi1, xi2=xi2, eta=eta)


def first_order_numeric(
    n: int,
    m: int,
    eta: float,
    t: float,
    quadrature_step: float = 1e-3,
) -> WeakNoiseChannel:
    """First-order channel by direct interaction-picture quadrature.

    Integrates the unit-strength dissipator conjugated into the
    interaction picture and applied to the frozen zeroth-order state,
    rho(t) = U(t) [rho0 + eta * integral] U(t)^dag, then reads the
    channel off rho(t) with the standard extraction. Shares no
    closed-form input with printed_weak_noise_channel, so agreement
    between the two is evidence, not tautology. The correction is
    exactly linear in eta by construction.
    """
    _require_noise_geometry(n, m)
    if eta < 0:
        raise ValueError(f"need eta >= 0, got {eta}")
    if t < 0:
        raise ValueError(f"need t >= 0, got {t}")
    graph = complete_graph(n)
    h = single_excitation_hamiltonian(graph)
    w, vecs = np.linalg.eigh(h)

    def propagator(s: float) -> np.ndarray:
        return (vecs * np.exp(-1j * w * s)) @ vecs.conj().T

    a, b = _PROBE.amplitudes()
    psi = np.zeros(n + 1, dtype=complex)
    psi[0] = a
    psi[INPUT_VERTEX] = b
    rho0 = np.outer(psi, psi.conj())
    u_final = propagator(t)
    z0 = u_final[OUTPUT_VERTEX, INPUT_VERTEX]
    z_sq_0 = abs(z0) ** 2
    if eta == 0.0 or m < 2 or t == 0.0:
        return WeakNoiseChannel(z_sq_0=z_sq_0, xi1=0.0, xi2=0j, eta=0.0)

    # unit-strength operators; the generator rate per unit eta is 2
    ops = [
        op
        for op, _ in lindblad_edge_operators(
            graph, standard_noise_spec(n, m, 1.0), INPUT_VERTEX, OUTPUT_VERTEX
        )
    ]

    def unit_dissipator(x: np.ndarray) -> np.ndarray:
        out = np.zeros_like(x)
        for op in ops:
            opsq = op @ op
            out += 2.0 * (op @ x @ op - 0.5 * (opsq @ x + x @ opsq))
        return out

    num = max(int(math.ceil(t / quadrature_step)), 2)
    if num % 2:
        num += 1
    h_step = t / num
    acc = np.zeros_like(rho0)
    for k in range(num + 1):
        s = k * h_step
        u = propagator(s)
        inner = u.conj().T @ unit_dissipator(u @ rho0 @ u.conj().T) @ u
        weight = 1.0 if k in (0, num) else (4.0 if k % 2 else 2.0)
        acc += weight * inner
    acc *= h_step / 3.0

    rho_t = u_final @ (rho0 + eta * acc) @ u_final.conj().T
    params = lindblad.extract_channel(rho_t, _PROBE, INPUT_VERTEX, OUTPUT_VERTEX)
    z_sq = abs(params.amplitude) ** 2
    lam_z_mod = params.dephasing * z_sq
    return WeakNoiseChannel(
        z_sq_0=z_sq_0,
        xi1=(z_sq - z_sq_0) / eta,
        xi2=complex((lam_z_mod - z_sq_0) / eta),
        eta=eta,
    )


@dataclass(frozen=True)
class DeltaStatistic:
    """Noise benefit at one point: excess fidelity over the best noiseless value."""

    value: float
    t: float
    n: int
    m: int
    eta: float

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError(f"delta must be nonnegative, got {self.value}")


def baseline_max_fidelity(n: int, t_grid: np.ndarray | None = None) -> float:
    """Best noiseless average fidelity over all times on the complete graph.

    Without a grid the analytic maximum |z| = 2/n is used directly.
    Passing a grid switches to a search (grid scan plus one bounded
    Brent refinement around the best point), which must resolve the
    maximum: the step may not exceed pi/(8n).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if t_grid is None:
        peak = 2.0 / n
        return 0.5 + peak / 3.0 + peak**2 / 6.0
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size < 3:
        raise ValueError("baseline grid needs at least 3 points")
    if np.diff(t_grid).max() > math.pi / (8 * n) + 1e-12:
        raise ValueError(f"baseline grid step exceeds pi/(8n) = {math.pi / (8 * n):.4g}")

    def fid(t: float) -> float:
        prob = (2.0 / n**2) * (1.0 - math.cos(n * t))
        mod = math.sqrt(max(prob, 0.0))
        return 0.5 + mod / 3.0 + prob / 6.0

    values = [fid(t) for t in t_grid]
    best = int(np.argmax(values))
    lo = t_grid[max(best - 1, 0)]
    hi = t_grid[min(best + 1, t_grid.size - 1)]
    refined = scipy.optimize.minimize_scalar(
        lambda s: -fid(s), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
    )
    return max(float(values[best]), float(-refined.fun))


def delta_profile(
    n: int,
    m: int,
    eta: float,
    times: np.ndarray,
    t_grid_for_baseline: np.ndarray | None = None,
) -> np.ndarray:
    """Delta over a whole time grid with a single generator diagonalization."""
    _require_noise_geometry(n, m)
    times = np.asarray(times, dtype=float)
    baseline = baseline_max_fidelity(n, t_grid_for_baseline)
    liouville = lindblad.complete_network_liouvillian(n, m, eta)
    start = lindblad.initial_network_state(n, INPUT_VERTEX, _PROBE)
    states = lindblad.evolve_at_times(liouville, start, times)
    out = np.empty(times.size)
    for k, state in enumerate(states):
        params = lindblad.extract_channel(state, _PROBE, INPUT_VERTEX, OUTPUT_VERTEX)
        fidelity, _ = optimal_avg_fidelity(params)
        out[k] = max(fidelity - baseline, 0.0)
    return out


def delta_statistic(
    n: int,
    m: int,
    eta: float,
    t: float,
    t_grid_for_baseline: np.ndarray | None = None,
) -> DeltaStatistic:
    """Noise benefit Delta = max[F(t; eta) - max_t F(t; 0), 0] at a single time.

    F(t; eta) always comes from the full master-equation engine; the
    noiseless baseline is analytic by default or grid-searched when a
    grid is supplied (see :func:`baseline_max_fidelity`).
    """
    value = float(delta_profile(n, m, eta, np.array([t]), t_grid_for_baseline)[0])
    return DeltaStatistic(value=value, t=t, n=n, m=m, eta=eta)


def longest_positive_run(values: np.ndarray) -> int:
    """Length in grid cells of the longest consecutive strictly-positive run."""
    best = current = 0
    for positive in np.asarray(values) > 0.0:
        current = current + 1 if positive else 0
        best = max(best, current)
    return int(best)
