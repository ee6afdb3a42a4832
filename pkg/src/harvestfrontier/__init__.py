"""Production-possibilities-frontier efficiency analysis of two-guild harvests."""

from .efficiency import (EfficiencyDecomposition, Frontier, RegionYearSummary, TakeoffPoint,
                         analyze, batch_summarize, build_frontier, decompose_day, optimal_point,
                         radial_project, revenue)
from .errors import HarvestError
from .market_data import (DailyTakeoff, HarvestRecord, PriceSystem, SpeciesProfile, aggregate_daily,
                          deflate_revenue, parse_records, regional_share, weighted_price_ratio)
from .production_model import (HarvestRates, PopulationPath, ProductionParams, is_sustainable, mrt,
                               parametric_tangency, population_path, ppf_ground)
from .sustainability import SustainabilityInputs, excess_percent, nmfs_pbr, rr_sustainable_harvest

__version__ = "0.1.0"
