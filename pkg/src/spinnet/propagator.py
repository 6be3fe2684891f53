"""Unitary dynamics and average-fidelity bookkeeping.

The sender prepares an arbitrary qubit state a|0> + b|1> encoded as
a|vacuum> + b|input vertex>; after evolution the receiver holds a qubit
whose quality is summarized by two channel numbers: the transfer
amplitude z (matrix element of the propagator between input and output
vertices) and a dephasing factor lambda multiplying the coherence.
Averaging the decoded fidelity over the Bloch sphere gives

    F(u) = 1/2 + lambda * Re(z u^2) / 3 + |z|^2 (2|u|^2 - 1) / 6

for a decoding rotation parameterized by u, and the receiver does best
with the phase u = exp(-i arg(z) / 2). Both the closed form and a direct
spherical quadrature of it live here so each can audit the other.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .network import require_hermitian

__all__ = [
    "ChannelParams",
    "BlochInput",
    "propagator_matrix",
    "transfer_amplitude",
    "complete_graph_transfer_prob",
    "avg_fidelity_given_decode",
    "optimal_avg_fidelity",
    "bloch_sphere_average",
]


@dataclass(frozen=True)
class ChannelParams:
    """Transfer amplitude and dephasing factor of an effective qubit channel."""

    amplitude: complex
    dephasing: float = 1.0

    def validate(self, atol: float = 1e-9) -> None:
        """Reject parameters outside the physical region (up to ``atol`` slack)."""
        if abs(self.amplitude) > 1.0 + atol:
            raise ValueError(f"|amplitude| = {abs(self.amplitude):.6f} exceeds 1")
        if not -atol <= self.dephasing <= 1.0 + atol:
            raise ValueError(f"dephasing = {self.dephasing:.6f} outside [0, 1]")

    @property
    def transfer_prob(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class BlochInput:
    """Input qubit state by Bloch angles: a = cos(theta/2), b = e^{i phi} sin(theta/2)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")

    def amplitudes(self) -> tuple[complex, complex]:
        a = math.cos(self.theta / 2.0)
        b = cmath.exp(1j * self.phi) * math.sin(self.theta / 2.0)
        return complex(a), b


def propagator_matrix(hamiltonian: np.ndarray, t: float) -> np.ndarray:
    """Evolution operator exp(-i H t) through the eigendecomposition of H.

    Diagonalizing keeps long times cheap and exactly unitary up to
    rounding; the result is still checked against U U^dag = 1 and a
    defect above 1e-10 raises RuntimeError rather than returning a
    silently non-unitary matrix.
    """
    h = require_hermitian(hamiltonian)
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    defect = np.abs(u @ u.conj().T - np.eye(h.shape[0])).max()
    if defect > 1e-10:
        raise RuntimeError(f"numeric failure: propagator unitarity defect {defect:.3e}")
    return u


def transfer_amplitude(
    hamiltonian: np.ndarray,
    t: float,
    input_vertex: int,
    output_vertex: int,
) -> complex:
    """Matrix element <output| exp(-i H t) |input> in the single-excitation basis.

    Vertices are 1-based; index 0 is the vacuum and is not a valid
    endpoint. Identical endpoints are rejected because a return
    amplitude is not a transfer.
    """
    if input_vertex == output_vertex:
        raise ValueError("input and output vertices must differ")
    dim = hamiltonian.shape[0]
    for v in (input_vertex, output_vertex):
        if not 1 <= v < dim:
            raise ValueError(f"vertex {v} outside 1..{dim - 1}")
    u = propagator_matrix(hamiltonian, t)
    return complex(u[output_vertex, input_vertex])


def complete_graph_transfer_prob(n: int, t: float) -> float:
    """Transfer probability |z|^2 between any two vertices of a complete graph.

    The spectrum {n-1, -1} gives |z(t)|^2 = (2/n^2)(1 - cos(n t)), with
    maxima 4/n^2 at odd multiples of pi/n. Needs at least two vertices.
    """
    if n < 2:
        raise ValueError(f"transfer needs n >= 2 vertices, got {n}")
    return (2.0 / n**2) * (1.0 - math.cos(n * t))


def _decode_matrix(u: complex) -> np.ndarray:
    # v is fixed real and nonnegative; the physically free phase of the
    # rotation sits entirely in u.
    mod = abs(u)
    if mod > 1.0 + 1e-12:
        raise ValueError(f"|u| = {mod:.6f} exceeds 1")
    v = math.sqrt(max(1.0 - mod * mod, 0.0))
    return np.array([[u.conjugate(), -v], [v, u]])


def avg_fidelity_given_decode(params: ChannelParams, u: complex = 1.0 + 0j) -> float:
    """Bloch-sphere averaged fidelity for a fixed decoding rotation u.

    Closed form of the spherical average; ``bloch_sphere_average``
    evaluates the same quantity by quadrature.
    """
    z = params.amplitude
    lam = params.dephasing
    mod2 = abs(u) ** 2
    return 0.5 + lam * (z * u * u).real / 3.0 + abs(z) ** 2 * (2.0 * mod2 - 1.0) / 6.0


def optimal_avg_fidelity(params: ChannelParams) -> tuple[float, complex]:
    """Best average fidelity over decoding rotations, with the optimizing u.

    The phase choice u = exp(-i arg(z)/2) aligns the coherence term,
    giving F = 1/2 + lambda |z|/3 + |z|^2/6. A vanishing amplitude makes
    every phase equivalent and u defaults to 1.
    """
    z = params.amplitude
    u = cmath.exp(-0.5j * cmath.phase(z)) if abs(z) > 0.0 else 1.0 + 0j
    return avg_fidelity_given_decode(params, u), u


def _pointwise_fidelity(params: ChannelParams, state: BlochInput, decode: np.ndarray) -> float:
    a, b = state.amplitudes()
    p = abs(b) ** 2 * params.transfer_prob
    coh = params.dephasing * params.amplitude * b * a.conjugate()
    rho = np.array([[1.0 - p, coh.conjugate()], [coh, p]])
    psi = np.array([a, b])
    decoded = decode @ rho @ decode.conj().T
    return float((psi.conj() @ decoded @ psi).real)


def bloch_sphere_average(
    params: ChannelParams,
    u: complex = 1.0 + 0j,
    n_polar: int = 32,
    n_azimuth: int = 64,
) -> float:
    """Average the decoded fidelity over input states by direct quadrature.

    Gauss-Legendre in cos(theta) crossed with a trapezoid rule in phi
    (exact for the low azimuthal harmonics that appear). Kept separate
    from the closed form on purpose, as an independent route to the same
    number.
    """
    nodes, weights = np.polynomial.legendre.leggauss(n_polar)
    phis = np.linspace(0.0, 2.0 * math.pi, n_azimuth, endpoint=False)
    decode = _decode_matrix(u)
    total = 0.0
    for mu, w in zip(nodes, weights):
        theta = math.acos(float(mu))
        row = sum(_pointwise_fidelity(params, BlochInput(theta, phi), decode) for phi in phis)
        total += w * row / n_azimuth
    # leggauss weights integrate d(cos theta) over [-1, 1]; halving
    # normalizes the solid angle.
    return total / 2.0
