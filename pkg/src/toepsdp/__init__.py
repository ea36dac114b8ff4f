"""2D spectral compressed sensing via a Toeplitz-block SDP solved with ADMM.

Recovers a spectrally sparse n-by-n signal from a subset of its entries by
trace minimization over a 2n-by-2n positive semidefinite block matrix whose
diagonal blocks are constrained to be Toeplitz. The package bundles the
signal synthesis protocol, the structure-enforcing projections, the ADMM
loop (plain and accelerated), a Monte Carlo experiment harness, and a CLI.
"""

from .admm import (
    AdmmState,
    DivergenceError,
    RecoveryResult,
    SolverConfig,
    admm_step,
    check_stop,
    init_state,
    solve,
    toeplitz_rank_estimate,
    write_trace_csv,
)
from .experiments import (
    DEFAULT_BENCH_SIZES,
    SUCCESS_THRESHOLD,
    BenchRow,
    PhaseGridResult,
    PhaseGridSpec,
    emit_phase_plot,
    instance_from_seed,
    run_bench,
    run_phase_grid,
    run_trial,
    trial_seed,
    write_bench_csv,
    write_manifest,
)
from .projections import (
    BlockMatrix2n,
    data_consistency,
    feasible_project,
    psd_trace_prox,
    symmetrize,
    toeplitz_project,
)
from .signal_model import (
    FrequencyPair,
    ObservationSet,
    SpectralSignal,
    evaluate_signal,
    min_separation,
    relative_error,
    sample_observations,
    synth_random,
    write_dense_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmState",
    "BenchRow",
    "BlockMatrix2n",
    "DEFAULT_BENCH_SIZES",
    "DivergenceError",
    "FrequencyPair",
    "ObservationSet",
    "PhaseGridResult",
    "PhaseGridSpec",
    "RecoveryResult",
    "SUCCESS_THRESHOLD",
    "SolverConfig",
    "SpectralSignal",
    "admm_step",
    "check_stop",
    "data_consistency",
    "emit_phase_plot",
    "evaluate_signal",
    "feasible_project",
    "init_state",
    "instance_from_seed",
    "min_separation",
    "psd_trace_prox",
    "relative_error",
    "run_bench",
    "run_phase_grid",
    "run_trial",
    "sample_observations",
    "solve",
    "symmetrize",
    "synth_random",
    "toeplitz_project",
    "toeplitz_rank_estimate",
    "trial_seed",
    "write_bench_csv",
    "write_dense_csv",
    "write_manifest",
    "write_trace_csv",
    "__version__",
]
