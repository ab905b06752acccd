import numpy as np

from spock_sglmm.exceptions import DimensionMismatch, InsufficientDraws

#: Fewest retained draws that can be summarized.
MIN_DRAWS = 100

#: Percentiles reported for every parameter.
INTERVAL = (2.5, 97.5)


def summarize_draws(draws):
    """Mean, median and central 95% interval of every column of *draws*.

    Quantiles use linear interpolation between order statistics: the
    *p*-th percentile of *N* sorted draws is found at (0-based) position
    ``p / 100 * (N - 1)``.

    Parameters
    ----------
    draws : (N,) or (N, d) array_like
        Posterior draws.

    Returns
    -------
    dict
        Arrays under ``"mean"``, ``"median"``, ``"q025"`` and ``"q975"``.
    """
    draws = np.asarray(draws, dtype=float)
    if len(draws) < MIN_DRAWS:
        raise InsufficientDraws(
            "Need at least {} draws to summarize, got {}.".format(
                MIN_DRAWS, len(draws)
            )
        )
    lower, median, upper = np.percentile(
        draws, (INTERVAL[0], 50.0, INTERVAL[1]), axis=0
    )
    return {
        "mean": draws.mean(axis=0),
        "median": median,
        "q025": lower,
        "q975": upper,
    }


class ModelFit(object):
    """Posterior draws of a fitted model.

    Parameters
    ----------
    spec : ModelSpec
        Specification of the fitted model.
    beta_draws : (N, q) array_like
        Draws of the fixed effects.
    beta_names : sequence of str
        Names of the fixed effects.
    theta_draws : (N, m) array_like, optional
        Draws of the spatial coefficients.
    tau_e_draws : (N,) array_like, optional
        Draws of the observation precision (Gaussian models).
    tau_theta_draws : (N,) array_like, optional
        Draws of the spatial precision (spatial models).
    spatial_parameter_draws : (N,) array_like, optional
        Draws of the proper CAR or Leroux parameter, if it was learned.
    basis : (n, m) array_like, optional
        Map from the spatial coefficients to the per-area spatial effect.
        The identity if not given.
    wall_time : float, optional
        Seconds spent in the sampler.
    info : dict, optional
        Sampler diagnostics such as acceptance rates.
    area_ids : sequence of str, optional
        Labels of the areas.

    Attributes
    ----------
    n_draws : int
        Number of retained draws.
    """

    def __init__(
        self,
        spec,
        beta_draws,
        beta_names,
        theta_draws=None,
        tau_e_draws=None,
        tau_theta_draws=None,
        spatial_parameter_draws=None,
        basis=None,
        wall_time=0.0,
        info=None,
        area_ids=None,
    ):
        self.spec = spec
        self.beta_draws = self._readonly(beta_draws, ndim=2)
        self.beta_names = tuple(beta_names)
        if self.beta_draws.shape[1] != len(self.beta_names):
            raise DimensionMismatch(
                "Got {} names for {} fixed effects.".format(
                    len(self.beta_names), self.beta_draws.shape[1]
                )
            )
        self.theta_draws = self._readonly(theta_draws, ndim=2)
        self.tau_e_draws = self._readonly(tau_e_draws, ndim=1)
        self.tau_theta_draws = self._readonly(tau_theta_draws, ndim=1)
        self.spatial_parameter_draws = self._readonly(spatial_parameter_draws, ndim=1)
        self.basis = self._readonly(basis, ndim=2)
        self.wall_time = float(wall_time)
        self.info = {} if info is None else dict(info)
        self.area_ids = None if area_ids is None else tuple(area_ids)

        for name in ("theta_draws", "tau_e_draws", "tau_theta_draws"):
            draws = getattr(self, name)
            if draws is not None and len(draws) != self.n_draws:
                raise DimensionMismatch(
                    "{} has {} draws, expected {}.".format(
                        name, len(draws), self.n_draws
                    )
                )

    @staticmethod
    def _readonly(draws, ndim):
        if draws is None:
            return None
        draws = np.array(draws, dtype=float)
        if draws.ndim == 1 and ndim == 2:
            draws = draws[:, np.newaxis]
        draws.setflags(write=False)
        return draws

    @property
    def method(self):
        return self.spec.method

    @property
    def family(self):
        return self.spec.family

    @property
    def n_draws(self):
        return len(self.beta_draws)

    def spatial_effect_draws(self):
        """Per-area spatial effect of every draw, ``theta Z^T``."""
        if self.theta_draws is None:
            return None
        if self.basis is None:
            return self.theta_draws
        return self.theta_draws.dot(self.basis.T)

    def scalar_draws(self):
        """Draws of all scalar parameters by name."""
        draws = {name: self.beta_draws[:, j] for j, name in enumerate(self.beta_names)}
        if self.tau_e_draws is not None:
            draws["tau_e"] = self.tau_e_draws
        if self.tau_theta_draws is not None:
            draws["tau_theta"] = self.tau_theta_draws
        if self.spatial_parameter_draws is not None:
            draws[self.spec.spatial_family.parameter_name] = (
                self.spatial_parameter_draws
            )
        return draws

    def __repr__(self):
        return "ModelFit(method={!r}, family={!r}, n_draws={})".format(
            self.method, self.family, self.n_draws
        )


def posterior_summary(fit):
    """Summaries of the scalar parameters of *fit*.

    Returns
    -------
    dict
        Maps every fixed effect name, ``"tau_e"``, ``"tau_theta"`` and the
        learned spatial parameter (where present) to a dict with the keys
        ``"mean"``, ``"median"``, ``"q025"`` and ``"q975"``.

    Raises
    ------
    InsufficientDraws
        If the fit has fewer than 100 retained draws.
    """
    summary = {}
    for name, draws in fit.scalar_draws().items():
        stats = summarize_draws(draws)
        summary[name] = {key: float(value) for key, value in stats.items()}
    return summary


def spatial_effect_summary(fit):
    """Posterior mean and 95% interval of the spatial effect of every area.

    Returns
    -------
    dict or None
        Arrays under ``"mean"``, ``"median"``, ``"q025"`` and ``"q975"``,
        or None for models without spatial effect.
    """
    effects = fit.spatial_effect_draws()
    if effects is None:
        return None
    return summarize_draws(effects)
