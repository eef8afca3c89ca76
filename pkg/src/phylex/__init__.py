"""Phylogeny-informed fitness estimation for lexicase-based evolutionary
search, with diagnostic benchmarks and linear-GP problems."""

from .core import (ESTIMATED, EVALUATED, UNKNOWN, NumericGenome, RngStream,
                   ScoreRecord, aggregate_score, mutate_gaussian)
from .engine import (BudgetLedger, ConfigError, Engine, ExperimentConfig,
                     ExperimentResult, run_experiment)
from .estimation import EstimatorConfig, Mode, complete_scores, estimate_case
from .phylogeny import Phylogeny, PhylogenyError, Taxon
from .selection import (PlanKind, SelectionPlan, lexicase_select_one,
                        make_cohort_plan, make_downsample_plan, make_full_plan,
                        select_parents)

__version__ = "0.1.0"

__all__ = [
    "ESTIMATED", "EVALUATED", "UNKNOWN", "NumericGenome", "RngStream",
    "ScoreRecord", "aggregate_score", "mutate_gaussian",
    "BudgetLedger", "ConfigError", "Engine", "ExperimentConfig",
    "ExperimentResult", "run_experiment",
    "EstimatorConfig", "Mode", "complete_scores", "estimate_case",
    "Phylogeny", "PhylogenyError", "Taxon",
    "PlanKind", "SelectionPlan", "lexicase_select_one", "make_cohort_plan",
    "make_downsample_plan", "make_full_plan", "select_parents",
    "__version__",
]
