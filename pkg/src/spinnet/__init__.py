"""Qubit state transfer through fully connected spin networks with edge noise.

The package follows one experiment end to end: build the network and
its single-excitation Hamiltonian (`network`), evolve unitarily or
under the noise-averaged master equation (`propagator`, `lindblad`),
cross-check against stochastic trajectories (`stochastic`), compare
with closed forms and limits (`analytics`, `perturbation`), and drive
everything reproducibly from the command line (`cli`).
"""

from __future__ import annotations

from .analytics import (
    ConsistencyCheck,
    ConsistencyReport,
    FourNodeClosedForm,
    ReportConfig,
    complete_graph_peak_fidelity,
    consistency_report,
    four_node_closed_form,
    network_reduction_check,
    zeno_effective_hamiltonian,
    zeno_limit_channel,
)
from .lindblad import (
    Liouvillian,
    NetworkState,
    build_liouvillian,
    complete_network_liouvillian,
    evolve,
    evolve_at_times,
    extract_channel,
    initial_network_state,
)
from .network import (
    INPUT_VERTEX,
    OUTPUT_VERTEX,
    Graph,
    NoiseSpec,
    complete_graph,
    lindblad_edge_operators,
    single_excitation_hamiltonian,
    standard_noise_spec,
)
from .perturbation import (
    DeltaStatistic,
    WeakNoiseChannel,
    WeakNoiseIntegrals,
    b_coefficients,
    baseline_max_fidelity,
    beta,
    beta_prime,
    delta_profile,
    delta_statistic,
    first_order_numeric,
    longest_positive_run,
    printed_weak_noise_channel,
)
from .propagator import (
    BlochInput,
    ChannelParams,
    bloch_sphere_average,
    complete_graph_transfer_prob,
    optimal_avg_fidelity,
    propagator_matrix,
    transfer_amplitude,
)
from .stochastic import (
    EnsembleResult,
    TrajectoryPlan,
    ensemble_average,
    evolve_trajectory,
    sample_step_hamiltonian,
)

__all__ = [
    "INPUT_VERTEX",
    "OUTPUT_VERTEX",
    "BlochInput",
    "ChannelParams",
    "ConsistencyCheck",
    "ConsistencyReport",
    "DeltaStatistic",
    "EnsembleResult",
    "FourNodeClosedForm",
    "Graph",
    "Liouvillian",
    "NetworkState",
    "NoiseSpec",
    "ReportConfig",
    "TrajectoryPlan",
    "WeakNoiseChannel",
    "WeakNoiseIntegrals",
    "b_coefficients",
    "baseline_max_fidelity",
    "beta",
    "beta_prime",
    "bloch_sphere_average",
    "build_liouvillian",
    "complete_graph",
    "complete_graph_peak_fidelity",
    "complete_graph_transfer_prob",
    "complete_network_liouvillian",
    "consistency_report",
    "delta_profile",
    "delta_statistic",
    "ensemble_average",
    "evolve",
    "evolve_at_times",
    "evolve_trajectory",
    "extract_channel",
    "first_order_numeric",
    "four_node_closed_form",
    "initial_network_state",
    "lindblad_edge_operators",
    "longest_positive_run",
    "network_reduction_check",
    "optimal_avg_fidelity",
    "printed_weak_noise_channel",
    "propagator_matrix",
    "sample_step_hamiltonian",
    "single_excitation_hamiltonian",
    "standard_noise_spec",
    "transfer_amplitude",
    "zeno_effective_hamiltonian",
    "zeno_limit_channel",
]

__version__ = "0.1.0"
