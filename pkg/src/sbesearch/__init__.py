"""Evidence-guided search on grids: instances, searchers, tuning and benchmarks."""

from .bench import CampaignConfig, CampaignStats, ComparisonTable, multi_start_table, run_campaign
from .core import (
    Coord,
    Instance,
    chebyshev,
    expected_exhaustive_visits,
    generate_instance,
    probability_bounds,
    validate_instance,
)
from .oracle import Oracle, VisitOutcome
from .search import (
    ALGORITHMS,
    ExhaustiveParams,
    FtsParams,
    IlsParams,
    SearchOutcome,
    TabuParams,
    Vns1Params,
    Vns2Params,
    Vns3Params,
    get_searcher,
    search,
)
from .tuner import EaConfig, TuneResult, ea_tune

__all__ = [
    "ALGORITHMS",
    "CampaignConfig",
    "CampaignStats",
    "ComparisonTable",
    "Coord",
    "EaConfig",
    "ExhaustiveParams",
    "FtsParams",
    "IlsParams",
    "Instance",
    "Oracle",
    "SearchOutcome",
    "TabuParams",
    "TuneResult",
    "VisitOutcome",
    "Vns1Params",
    "Vns2Params",
    "Vns3Params",
    "chebyshev",
    "ea_tune",
    "expected_exhaustive_visits",
    "generate_instance",
    "get_searcher",
    "multi_start_table",
    "probability_bounds",
    "run_campaign",
    "search",
    "validate_instance",
]
