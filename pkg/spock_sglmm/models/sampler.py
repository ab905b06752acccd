"""Shared machinery of the Markov chain samplers."""

import logging
from abc import ABCMeta, abstractmethod

import numpy as np
import scipy.linalg

from spock_sglmm.exceptions import CholeskyFailure, DivergentChain

logger = logging.getLogger(__name__)

#: Grid of the proper CAR and Leroux parameter in griddy-Gibbs updates.
PARAMETER_GRID = np.arange(1, 100) / 100.0


def sample_dense_gaussian(A, b, rng):
    r"""Draw from :math:`N(A^{-1} b, A^{-1})` for a dense SPD matrix *A*."""
    try:
        U = scipy.linalg.cholesky(A, lower=False)
    except np.linalg.LinAlgError as e:
        raise CholeskyFailure(
            "Conditional precision is not positive definite: {}".format(e)
        )
    mean = scipy.linalg.cho_solve((U, False), b)
    return mean + scipy.linalg.solve_triangular(
        U, rng.standard_normal(len(b)), lower=False
    )


class SpatialParameterUpdate(object):
    """Griddy-Gibbs update of the proper CAR or Leroux parameter.

    The parameter has a uniform prior on `.PARAMETER_GRID`. Its full
    conditional is proportional to
    :math:`|Q(p)|^{1/2} \\exp(-\\tau_\\theta \\theta^\\top Q(p) \\theta / 2)`
    with :math:`Q(p) = Q_0 + p Q_1`.
    """

    def __init__(self, family, g):
        self.family = family
        self.Q0, self.Q1 = family.components(g)
        self.half_logdet = 0.5 * family.logdet_grid(g, PARAMETER_GRID)
        self.value = float(family.parameter)

    def precision(self, value=None):
        value = self.value if value is None else value
        return (self.Q0 + value * self.Q1).tocsc()

    def step(self, theta, tau_theta, rng):
        a = float(np.dot(theta, self.Q0.dot(theta)))
        b = float(np.dot(theta, self.Q1.dot(theta)))
        logp = self.half_logdet - 0.5 * tau_theta * (a + PARAMETER_GRID * b)
        p = np.exp(logp - np.max(logp))
        self.value = float(rng.choice(PARAMETER_GRID, p=p / np.sum(p)))
        return self.value


class AbstractSampler(metaclass=ABCMeta):
    """Markov chain over :math:`(\\beta, \\theta, \\tau)` of one model.

    Parameters
    ----------
    y : (n,) ndarray
        Response.
    X : DesignMatrix
        Design matrix.
    latent : LatentEffect or None
        Spatial effect; None for the linear model.
    spec : ModelSpec
        Priors, chain settings and fixed precisions.
    """

    def __init__(self, y, X, latent, spec):
        self.y = np.asarray(y, dtype=float)
        self.X = X.values
        self.latent = latent
        self.spec = spec
        self.priors = spec.priors
        self.parameter_update = None
        if latent is not None and spec.learn_spatial_parameter:
            self.parameter_update = SpatialParameterUpdate(latent.family, latent.graph)

        self.beta = None
        self.theta = None
        self.tau_e = None
        self.tau_theta = None

    @property
    def n(self):
        return len(self.y)

    @property
    def q(self):
        return self.X.shape[1]

    @property
    def prior_precision(self):
        """Current prior structure *R* of the spatial coefficients."""
        if self.parameter_update is not None:
            return self.parameter_update.precision()
        if self.latent.is_sparse:
            return self.latent.precision.matrix
        return self.latent.precision

    def quadratic_form(self, theta):
        return float(np.dot(theta, self.prior_precision.dot(theta)))

    def sample_tau_theta(self, rng):
        if self.spec.fixed_tau_theta is not None:
            return self.spec.fixed_tau_theta
        shape = self.priors.tau_shape + 0.5 * self.latent.rank
        rate = self.priors.tau_rate + 0.5 * self.quadratic_form(self.theta)
        return rng.gamma(shape, 1.0 / rate)

    def sample_spatial_parameter(self, rng):
        if self.parameter_update is None:
            return None
        return self.parameter_update.step(self.theta, self.tau_theta, rng)

    @abstractmethod
    def initialize(self, rng):
        """Set the initial state of the chain."""
        raise NotImplementedError()

    @abstractmethod
    def step(self, rng):
        """Advance the chain by one iteration."""
        raise NotImplementedError()

    def adapt(self, iteration):
        """Hook called after every burn-in iteration."""

    def diagnostics(self):
        """Sampler statistics stored with the fit."""
        return {}

    def _check_finite(self, iteration):
        values = [self.beta, self.theta, self.tau_e, self.tau_theta]
        values = [np.atleast_1d(v) for v in values if v is not None]
        if not all(np.all(np.isfinite(v)) for v in values):
            raise DivergentChain(
                "Non-finite state in iteration {} of the {} sampler.".format(
                    iteration, self.spec.method
                )
            )

    def run(self, rng):
        """Run the chain and collect the retained draws.

        Returns
        -------
        dict
            Arrays of draws under ``"beta"``, ``"theta"``, ``"tau_e"``,
            ``"tau_theta"`` and ``"spatial_parameter"``; None where the
            model has no such parameter.
        """
        mcmc = self.spec.mcmc
        n_draws = mcmc.n_draws
        spatial = self.latent is not None
        draws = {
            "beta": np.empty((n_draws, self.q)),
            "theta": np.empty((n_draws, self.latent.dim)) if spatial else None,
            "tau_e": np.empty(n_draws) if self.spec.family == "gaussian" else None,
            "tau_theta": np.empty(n_draws) if spatial else None,
            "spatial_parameter": (
                np.empty(n_draws) if self.parameter_update is not None else None
            ),
        }

        self.initialize(rng)
        k = 0
        for iteration in range(mcmc.n_iter):
            self.step(rng)
            self._check_finite(iteration)
            if iteration < mcmc.n_burn:
                self.adapt(iteration)
                continue
            if (iteration - mcmc.n_burn) % mcmc.thin != 0:
                continue
            draws["beta"][k] = self.beta
            if spatial:
                draws["theta"][k] = self.theta
                draws["tau_theta"][k] = self.tau_theta
            if draws["tau_e"] is not None:
                draws["tau_e"][k] = self.tau_e
            if draws["spatial_parameter"] is not None:
                draws["spatial_parameter"][k] = self.parameter_update.value
            self.record(k)
            k += 1
        assert k == n_draws
        return draws

    def record(self, k):
        """Hook called after draw *k* has been stored."""
