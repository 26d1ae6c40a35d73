"""Quantum-walk simulation toolkit.

Coined and continuous-time walks on lines, lattices, arbitrary graphs
and their percolated versions; exact density-matrix and stochastic
trajectory decoherence; several interacting walkers; measurement
statistics, resource estimates, and a batch experiment runner.
"""

__version__ = "0.1.0"

from .analysis import (
    DEFAULT_AMPLITUDE_BUDGET,
    Distribution,
    Moments,
    SampleSet,
    amplitude_capacity,
    classical_binomial,
    density_basis_capacity,
    displacement_labels,
    inverse_participation_ratio,
    joint_distribution,
    moments,
    position_distribution,
    qubits_needed,
    read_distribution,
    relabel,
    sample,
    total_variation,
    write_distribution,
    write_samples,
)
from .coined import (
    InitialCoinSpec,
    WalkState,
    evolve,
    initial_state,
    shift_permutation,
    step,
    step_adjoint,
)
from .coins import CoinOperator, dft_coin, grover_coin, hadamard_coin
from .config import (
    Diagnostic,
    ExperimentConfig,
    parse_config,
    parse_config_text,
    validate,
)
from .continuous import (
    ContinuousState,
    Hamiltonian,
    auto_line_size,
    build_hamiltonian,
    edge_leakage,
    evolve_ct,
    vertex_state,
)
from .decoherence import (
    DensityState,
    EnsembleResult,
    NoiseKind,
    NoiseModel,
    density_from_state,
    ensemble_average,
    evolve_density,
    evolve_trajectory,
)
from .errors import (
    DimensionMismatchError,
    IncompatibleDistributionsError,
    InvalidEdgeError,
    InvalidParameterError,
    InvalidSizeError,
    NumericalFailureError,
    OutOfRangeError,
    QwalkError,
    ResourceLimitError,
    UnsupportedMetricError,
)
from .multiwalker import (
    InteractionKind,
    InteractionSpec,
    MultiWalkKind,
    MultiWalkerState,
    Statistics,
    dimension_guard,
    exchange_defect,
    multi_evolve_ct,
    multi_evolve_dt,
    multi_initial_state,
)
from .rng import make_rng, run_key
from .substrate import (
    Boundary,
    PercolationMode,
    PercolationSpec,
    Substrate,
    from_adjacency,
    make_lattice,
    make_line,
    percolate,
    read_adjacency,
    write_adjacency,
)
from . import runner
