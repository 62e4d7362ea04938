"""Closed forms, exhaustive enumeration and Monte Carlo for block-withholding mining."""

from .analytics import (
    ATTACK_STRATEGIES,
    CycleLaw,
    HashrateBreakdown,
    MinerParams,
    Strategy,
    apparent_hashrate,
    cycle_length_pmf,
    dominant_strategy,
    expected_attacker_blocks,
    expected_cycle_length,
    profitability_threshold,
    qtilde,
)
from .catalan import catalan_gf, catalan_number, enumerate_dyck_words, is_dyck_word
from .errors import DomainError, NumericError, RangeError
from .oracle import WeightedCycle, enumerate_cycles, exact_conditional_z, exact_pmf
from .regions import RegionMap, compute_region_map, write_region_csv, write_region_image
from .simulator import (
    CycleOutcome,
    RngStream,
    ScriptedDraws,
    SimulationReport,
    run_simulation,
    sample_cycles,
    simulate_cycle,
)

__version__ = "0.1.0"
