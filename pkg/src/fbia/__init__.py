"""Feedback interference alignment for the 3-user static Gaussian interference channel.

With one round of local channel-output feedback, three interfering
transmitter/receiver pairs can align all interference exactly over two time
slots using only linear processing. The package provides the alignment
algebra, slot-2 power constraints, two-slot MMSE rates, the two finite-SNR
coefficient designs (exact-alignment SVD scaling and a max-SINR angle
search), and a deterministic Monte Carlo harness comparing them against
time-sharing, treat-as-noise and ergodic-alignment references.
"""

from .alignment import (
    AlignmentSolution,
    AlignmentSystem,
    CoefficientVector,
    SValues,
    alignment_residual,
    build_system,
    closed_form_nullspace,
    coefficient_array,
    combined_response,
    compute_s_values,
    numerical_nullspace,
    orthonormal_bases,
    residual_scale,
    solve_exact_alignment,
)
from .channel import (
    ChannelDistribution,
    NondegeneracyReport,
    as_channel_matrix,
    check_nondegeneracy,
    sample_channel,
)
from .errors import (
    ConfigError,
    DegenerateChannel,
    DegenerateNullspace,
    IllConditionedWarning,
    NonpositivePower,
    ZeroDenominator,
)
from .optimizer import (
    DirectionPair,
    OptimizerResult,
    alignment_direction,
    direction_pair,
    exact_ia_svd,
    line_search_theta,
    max_sinr_direction,
    max_sinr_feedback,
)
from .power import FeasibleRegion, constraint_matrices, is_feasible, max_scale
from .rates import (
    BaselineRates,
    EquivalentChannel,
    RateBreakdown,
    baseline_rates,
    equivalent_channel,
    sum_rate,
)
from .simulator import (
    SCHEMES,
    SweepConfig,
    SweepResult,
    SweepRow,
    TrialRecord,
    cli_main,
    derive_trial_seed,
    emit_csv,
    emit_json,
    render_csv,
    render_json,
    run_sweep,
)

__version__ = "0.1.0"
