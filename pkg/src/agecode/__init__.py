"""Peak-age-optimal prefix-free coding for randomly arriving symbols.

Build codebooks that keep a receiver's view of a streaming source fresh,
evaluate the closed-form peak-age formulas for the slotted Geo/G/1 bit
pipe, frame the stream under four empty-buffer protocols, and check
everything against a bit-exact simulator.
"""

from .analysis import (
    AnalyticReport,
    OptimalRate,
    expected_waiting,
    is_stable,
    optimal_arrival_rate,
    paoi_ideal,
    paoi_naive,
    report,
)
from .coding import (
    Codebook,
    CodeMoments,
    PenaltyWeights,
    age_optimal_code,
    age_optimal_lengths,
    boundary_codes,
    brute_force_optimal_lengths,
    canonical_assign,
    format_codebook,
    huffman_lengths,
    kraft_sum,
    min_linear_penalty_lengths,
    moments,
    parse_codebook,
)
from .errors import (
    AgecodeError,
    AlignmentError,
    ConfigError,
    DegenerateLoadError,
    EmptySampleError,
    FormatError,
    InfeasibleLengthsError,
    InvalidSourceError,
    OracleSizeError,
    StabilityError,
)
from .schemes import (
    SchemeKind,
    SchemeSpec,
    augmented_pmf,
    build_adaptive,
    build_ideal,
    build_naive,
    build_predictive,
    build_scheme,
    format_scheme,
    parse_scheme,
)
from .simulator import (
    SimConfig,
    SimStats,
    Trace,
    decode_stream,
    empirical_moments,
    idle_fraction,
    run,
    run_trace,
)
from .source import (
    NULL_SYMBOL,
    ArrivalSpec,
    SourcePMF,
    entropy,
    format_source,
    parse_source,
    uniform_pmf,
    zipf_pmf,
)

__version__ = "0.1.0"
