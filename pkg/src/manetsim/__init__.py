"""Delay-constrained throughput simulation for MANETs under 2D i.i.d. mobility."""

from .config import (
    FastParams,
    RegimeReport,
    SimConfig,
    SlowParams,
    decode_threshold,
    fast_params,
    slow_params,
    validate_regime,
)
from .fast import SuperSlotReport, run_super_slot_fast
from .fountain import (
    CodedPacketId,
    PeelingDecoder,
    SourceBlock,
    decode,
    encode,
    overhead_profile,
    robust_soliton,
)
from .geometry import CellGrid, build_grid, distance, hit_probability, reshuffle
from .harness import (
    CSV_COLUMNS,
    FitResult,
    RunResult,
    fit_scaling,
    generator_for,
    run,
    seed_for_run,
    sweep,
)
from .mcverify import (
    LemmaCheckResult,
    check_balls_bins_broadcast,
    check_balls_bins_trashcan,
    check_chernoff,
)
from .phymac import (
    CellSchedule,
    TransmissionAttempt,
    classify_good_cells,
    color_cells,
    good_cell_bounds,
    highway_capacity,
    protocol_check,
    slow_packet_size,
)
from .slow import run_super_slot_slow
from .theory import (
    BoundReport,
    bound_report,
    grid_search_hitting_distance,
    heuristic_fast,
    heuristic_slow,
    upper_bound_fast,
    upper_bound_slow,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_COLUMNS", "BoundReport", "CellGrid", "CellSchedule", "CodedPacketId",
    "FastParams", "FitResult", "LemmaCheckResult", "PeelingDecoder",
    "RegimeReport", "RunResult", "SimConfig", "SlowParams", "SourceBlock",
    "SuperSlotReport", "TransmissionAttempt", "bound_report", "build_grid",
    "check_balls_bins_broadcast", "check_balls_bins_trashcan", "check_chernoff",
    "classify_good_cells", "color_cells", "decode", "decode_threshold",
    "distance", "encode", "fast_params", "fit_scaling", "generator_for",
    "good_cell_bounds", "grid_search_hitting_distance", "heuristic_fast",
    "heuristic_slow", "highway_capacity", "hit_probability", "overhead_profile",
    "protocol_check", "reshuffle", "robust_soliton", "run", "run_super_slot_fast",
    "run_super_slot_slow", "seed_for_run", "slow_packet_size", "slow_params",
    "sweep", "upper_bound_fast", "upper_bound_slow", "validate_regime",
]
