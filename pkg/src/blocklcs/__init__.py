"""Simulation lab for the LCS fluctuation of random binary block strings."""

__version__ = "0.1.0"

from .blocks import (
    BlockCounts,
    BlockString,
    ModelParams,
    TzrStats,
    build_string,
    compute_tzr,
    counts_from_tzr,
    enumerate_xi,
    joint_prob_tzr,
    joint_prob_tzr_exact,
    rest_length_pmf,
    sample_block_lengths,
    sample_conditional,
    survival_factor,
    try_counts,
    xi_support_size,
)
from .errors import (
    BlockLcsError,
    EmptyDomain,
    InputTooLarge,
    InvalidTzr,
    MisalignedInput,
    NoAdmissibleZ,
    NoModifiableBlocks,
    SpecViolation,
    TooLarge,
)
from .lcs import lcs_csv, lcs_len, lcs_len_batch
from .modify import (
    DriftEstimate,
    ModStep,
    drift_exact,
    drift_sampled,
    half_tilde,
    tilde,
    tilde_enumerate,
)
from .ladder import (
    LadderDiagnostics,
    LadderRung,
    LcsLadder,
    SlopeEvent,
    build_ladder,
    martingale_diagnostics,
    repair_ladder,
    slope_event_check,
)
from .analysis import (
    DomainD,
    SlopeMapSpec,
    VarianceRow,
    VarianceTable,
    calibrate_c,
    check_bonetto_refined,
    hoeffding_tail_check,
    linear_fit,
    make_domain,
    min_prob_over_D,
    ratio_check,
    validate_slope_map,
    variance_scan,
)
from .seeding import child_seed
