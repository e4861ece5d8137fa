"""Two-sided matching with one-sided uncertainty: DA, structure checks, equilibria, constructions."""

from matchlab.economy import (
    Economy,
    PreferenceCycle,
    check_assortative,
    check_spc,
    check_spc_economy,
    check_spc_star,
    find_preference_cycles,
    has_spc,
    stable_outcome_map,
    top_top_pairs,
    validate_augmented,
)
from matchlab.errors import (
    BudgetExceededError,
    ConstructionError,
    MatchlabError,
    NotUniquelyStableError,
    PreferenceError,
    SchemaError,
    SizeBoundError,
    StrictnessError,
)
from matchlab.game import (
    StrategyClass,
    Verdict,
    best_responses,
    compare_outcomes,
    enumerate_bne,
    enumerate_reports,
    expected_utility,
    is_bne,
    is_dominated_exact,
    is_weakly_undominated,
    play,
    rank_stats,
    truthful_profile,
    unique_stable_for_reported,
    verify_top_top_matched,
)
from matchlab.market import (
    AgentId,
    Market,
    Matching,
    Preferences,
    Side,
    blocking_pairs,
    deferred_acceptance,
    enumerate_stable_matchings,
    is_stable,
    is_unique_stable,
    matched_set,
    utilities_to_ordinal,
)

__version__ = "0.1.0"
