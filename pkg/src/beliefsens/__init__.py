"""Sensitivity of single-fault diagnostic belief networks to CPT perturbation."""

from .harness import (
    ExperimentPlan,
    ExperimentReport,
    SyntheticSpec,
    baseline_run,
    generate_synthetic_network,
    run_experiment,
    sample_cases,
)
from .metrics import CaseOutcome, ComparisonSummary, RunSummary, case_outcome, compare, summarize
from .model import (
    CaseRecord,
    ConditionalRow,
    DiagnosticNetwork,
    Disease,
    FindingVariable,
    InconsistentCase,
    Posterior,
    PriorMode,
    infer_posterior,
    leading_disease,
    top_two,
    validate_network,
)
from .perturb import (
    AdditiveRenormalize,
    DegenerateRow,
    LogOddsPreserveCertainty,
    Normal,
    RandomReplace,
    SeedSpec,
    Uniform,
    perturb_network,
)

__version__ = "0.1.0"
