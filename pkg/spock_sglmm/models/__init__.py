"""Samplers and fitting functions of the competing spatial models."""

from .config import McmcConfig, ModelSpec, PriorConfig
from .fit import ModelFit, posterior_summary, spatial_effect_summary, summarize_draws
from .fitting import fit_hh, fit_icar, fit_lm, fit_model, fit_rhz, fit_spock
from .latent import LatentEffect, spock_graph
