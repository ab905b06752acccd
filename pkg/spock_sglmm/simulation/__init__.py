"""Simulation study of spatial confounding."""

from .effects import (
    IntrinsicGmrfEffects,
    rhz_precision,
    sample_icar_effect,
    sample_rhz_effect,
)
from .scenarios import (
    PRECISION_SETTINGS,
    SCENARIOS,
    Replicate,
    ScenarioConfig,
    compute_beta_star,
    generate_replicate,
)
from .study import ReplicateResult, StudySummary, run_study
