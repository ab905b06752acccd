"""Running the competing models over simulated replicates and summarizing them."""

import logging

import numpy as np
import pandas as pd
from joblib import Parallel, delayed, effective_n_jobs

from spock_sglmm.exceptions import InvalidParameter, SpockException
from spock_sglmm.geometry import INTERCEPT_NAME
from spock_sglmm.models import McmcConfig, ModelSpec, fit_model, posterior_summary
from spock_sglmm.models.config import METHODS
from spock_sglmm.simulation.scenarios import (
    COVARIATE_NAMES,
    ScenarioConfig,
    ScenarioGenerator,
    compute_beta_star,
)
from spock_sglmm.typechecks import substream_seed

logger = logging.getLogger(__name__)

#: Statistics of the posterior means reported per model and parameter.
STATISTICS = ("median", "q025", "q975", "mean")


class ReplicateResult(object):
    """Estimates of all models on one simulated data set.

    Parameters
    ----------
    replicate_id : int
        Index of the replicate.
    theta_true : (n,) array_like
        Realized spatial effect.
    beta_star : (q,) array_like
        Coefficients the confounding-corrected models target.
    estimates : dict
        Per model a dict with the posterior ``"mean"``, ``"q025"`` and
        ``"q975"`` of the fixed effects.
    wall_times : dict
        Per model the fitting time in seconds.
    failures : dict, optional
        Per failed model the error message.
    """

    def __init__(
        self, replicate_id, theta_true, beta_star, estimates, wall_times, failures=None
    ):
        self.replicate_id = int(replicate_id)
        self.theta_true = np.asarray(theta_true, dtype=float)
        self.beta_star = np.asarray(beta_star, dtype=float)
        if not np.all(np.isfinite(self.beta_star)):
            raise InvalidParameter(
                "beta_star must be finite.", attr="beta_star", obj=self
            )
        self.estimates = {
            model: {k: np.asarray(v, dtype=float) for k, v in stats.items()}
            for model, stats in estimates.items()
        }
        self.wall_times = {model: float(t) for model, t in wall_times.items()}
        self.failures = {} if failures is None else dict(failures)

    def succeeded(self, model):
        return model in self.estimates

    def ratios(self, model):
        r"""Ratios :math:`\hat\beta_j / \beta^*_j` of the posterior means."""
        return self.estimates[model]["mean"] / self.beta_star

    def __repr__(self):
        return "ReplicateResult(replicate_id={}, models={}, failed={})".format(
            self.replicate_id, sorted(self.estimates), sorted(self.failures)
        )


def _fit_replicate(generator, replicate_id, model_specs):
    data = generator.replicate(replicate_id)
    beta_star = compute_beta_star(generator.cfg.beta, data.X, data.theta)
    estimates = {}
    wall_times = {}
    failures = {}
    for model, spec in model_specs:
        seed = substream_seed(generator.cfg.seed, replicate_id, METHODS.index(model))
        spec = spec.replace(mcmc=spec.mcmc.with_seed(seed))
        try:
            fit = fit_model(data.y, data.X, generator.area_map, spec)
            summary = posterior_summary(fit)
        except SpockException as e:
            logger.warning(
                "Replicate %d: %s failed with %s: %s",
                replicate_id,
                model,
                type(e).__name__,
                e,
            )
            failures[model] = "{}: {}".format(type(e).__name__, e)
            continue
        estimates[model] = {
            stat: np.array([summary[name][stat] for name in data.X.names])
            for stat in ("mean", "q025", "q975")
        }
        wall_times[model] = fit.wall_time
    logger.info(
        "Replicate %d done (%s)",
        replicate_id,
        ", ".join("{} {:.2f} s".format(m, t) for m, t in wall_times.items()),
    )
    return ReplicateResult(
        replicate_id, data.theta, beta_star, estimates, wall_times, failures
    )


def _run_chunk(cfg_dict, area_map, replicate_ids, spec_dicts):
    generator = ScenarioGenerator(ScenarioConfig.from_dict(cfg_dict), area_map)
    model_specs = [(d["method"], ModelSpec.from_dict(d)) for d in spec_dicts]
    return [_fit_replicate(generator, rid, model_specs) for rid in replicate_ids]


class StudySummary(object):
    """Estimates of a simulation study aggregated over replicates.

    Parameters
    ----------
    cfg : ScenarioConfig
        Scenario of the study.
    models : sequence of str
        Fitted models in reporting order.
    parameter_names : sequence of str
        Names of the fixed effects.
    results : list of ReplicateResult
        Per-replicate results; sorted by replicate id.
    mcmc : McmcConfig, optional
        Chain settings of the fits.
    """

    def __init__(self, cfg, models, parameter_names, results, mcmc=None):
        self.cfg = cfg
        self.models = tuple(models)
        self.parameter_names = tuple(parameter_names)
        self.results = sorted(results, key=lambda r: r.replicate_id)
        self.mcmc = mcmc

    @property
    def n_replicates(self):
        return len(self.results)

    def successes(self, model):
        return [r for r in self.results if r.succeeded(model)]

    def n_failed(self, model):
        return self.n_replicates - len(self.successes(model))

    def estimates(self, model):
        """Posterior means of the successful replicates, one row each."""
        rows = [r.estimates[model]["mean"] for r in self.successes(model)]
        return np.array(rows).reshape(len(rows), len(self.parameter_names))

    def ratios(self, model):
        rows = [r.ratios(model) for r in self.successes(model)]
        return np.array(rows).reshape(len(rows), len(self.parameter_names))

    def wall_times(self, model):
        return np.array([r.wall_times[model] for r in self.successes(model)])

    def statistics(self, model):
        """Median, 2.5 % and 97.5 % quantile and mean of the posterior means."""
        est = self.estimates(model)
        if len(est) == 0:
            return None
        q025, median, q975 = np.percentile(est, [2.5, 50.0, 97.5], axis=0)
        return {"median": median, "q025": q025, "q975": q975, "mean": est.mean(0)}

    def iqr_ratio(self, model, parameter):
        """Interquartile range of the ratios of *parameter*."""
        j = self.parameter_names.index(parameter)
        q25, q75 = np.percentile(self.ratios(model)[:, j], [25.0, 75.0])
        return q75 - q25

    def median_wall_time(self, model):
        return float(np.median(self.wall_times(model)))

    def summary_frame(self):
        """One row per model, parameter and statistic."""
        rows = []
        for model in self.models:
            stats = self.statistics(model)
            if stats is None:
                continue
            for j, name in enumerate(self.parameter_names):
                for stat in STATISTICS:
                    rows.append((model, name, stat, float(stats[stat][j])))
        return pd.DataFrame(rows, columns=["model", "parameter", "statistic", "value"])

    def ratio_frame(self):
        """One row per replicate, model and parameter."""
        rows = []
        for r in self.results:
            for model in self.models:
                if not r.succeeded(model):
                    continue
                ratios = r.ratios(model)
                for j, name in enumerate(self.parameter_names):
                    rows.append((r.replicate_id, model, name, float(ratios[j])))
        return pd.DataFrame(rows, columns=["replicate", "model", "parameter", "ratio"])

    def timing_frame(self):
        rows = []
        for model in self.models:
            times = self.wall_times(model)
            median = float(np.median(times)) if len(times) > 0 else None
            sd = float(np.std(times, ddof=1)) if len(times) > 1 else 0.0
            rows.append((model, median, sd, len(times), self.n_failed(model)))
        return pd.DataFrame(
            rows, columns=["model", "median", "sd", "n_success", "n_failed"]
        )

    def __repr__(self):
        return "StudySummary(scenario={!r}, models={}, n_replicates={})".format(
            self.cfg.scenario, self.models, self.n_replicates
        )


def run_study(cfg, models=METHODS, mcmc=None, spec=None, n_jobs=1, area_map=None):
    """Fit every model in *models* to every replicate of the scenario *cfg*.

    Parameters
    ----------
    cfg : ScenarioConfig or dict
        The scenario.
    models : sequence of str, optional
        Methods to fit (Default: all five).
    mcmc : McmcConfig or dict, optional
        Chain settings; the seed is replaced by a seed derived from
        ``(cfg.seed, replicate_id, model)``.
    spec : ModelSpec or dict, optional
        Template for priors and spatial family of all models.
    n_jobs : int, optional
        Number of worker processes (joblib semantics).
    area_map : AreaMap, optional
        Map of the study; built from *cfg* if omitted.

    Returns
    -------
    StudySummary
        Results do not depend on *n_jobs*. Failed fits are counted, not
        raised.
    """
    if isinstance(cfg, dict):
        cfg = ScenarioConfig.from_dict(cfg)
    if mcmc is None:
        mcmc = McmcConfig()
    elif isinstance(mcmc, dict):
        mcmc = McmcConfig.from_dict(mcmc)
    if spec is None:
        spec = ModelSpec()
    elif isinstance(spec, dict):
        spec = ModelSpec.from_dict(spec)
    models = tuple(models)
    unknown = [m for m in models if m not in METHODS]
    if len(models) == 0 or unknown:
        raise InvalidParameter(
            "Models must be a non-empty subset of {}, got {}.".format(
                METHODS, list(models)
            ),
            attr="models",
        )
    if area_map is None:
        area_map = cfg.build_map()

    spec_dicts = []
    for model in models:
        fields = {"method": model, "mcmc": mcmc}
        if model not in ("icar", "spock"):
            fields["learn_spatial_parameter"] = False
        if model in ("rhz", "hh"):
            fields["spatial_family"] = "icar"
        spec_dicts.append(spec.replace(**fields).to_dict())

    ids = np.arange(cfg.n_replicates)
    chunks = np.array_split(ids, max(1, min(effective_n_jobs(n_jobs), len(ids))))
    logger.info(
        "Running %d replicates of scenario %r with models %s on %d chunk(s)",
        cfg.n_replicates,
        cfg.scenario,
        ", ".join(models),
        len(chunks),
    )
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_run_chunk)(cfg.to_dict(), area_map, chunk.tolist(), spec_dicts)
        for chunk in chunks
    )
    results = [result for part in parts for result in part]
    names = (INTERCEPT_NAME,) + COVARIATE_NAMES
    return StudySummary(cfg, models, names, results, mcmc=mcmc)
