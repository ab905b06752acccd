r"""Metropolis-within-Gibbs sampler for Poisson responses.

The model is :math:`y_i \sim \mathrm{Poisson}(\exp(\eta_i))` with
:math:`\eta = o + X\beta + Z\theta` for an offset *o* (log expected
counts). The fixed effects are updated jointly by a random walk whose
proposal covariance is the inverse Fisher information at the initial
estimate; the spatial coefficients are updated one at a time by random
walks. Coefficients with a sparse proper prior (:math:`Z = I`) that are
not neighbors are conditionally independent, so every color class of a
greedy coloring of the graph is updated in one vectorized step.

Intrinsic priors keep :math:`\theta` centered within every connected
component. A move of size :math:`\delta` at area *i* of component *c* is
proposed along :math:`e_i - 1_c / n_c`, which leaves the component sum at
zero. Its acceptance ratio only needs the component totals of *y* and
:math:`\exp(\eta)`, because the move shifts all other areas of the
component by the same amount.

Proposal scales are tuned towards the target acceptance rates during
burn-in only; the kernel is fixed afterwards.
"""

import logging
import math
import warnings

import networkx as nx
import numpy as np
import scipy.linalg

from spock_sglmm.exceptions import CholeskyFailure
from spock_sglmm.models.sampler import AbstractSampler

logger = logging.getLogger(__name__)

#: Target acceptance rate of the joint fixed effect update.
TARGET_BLOCK = 0.234

#: Target acceptance rate of the single-site spatial updates.
TARGET_SITE = 0.44

#: Burn-in iterations between two adaptations of the proposal scales.
ADAPT_INTERVAL = 50

#: Acceptance rate after burn-in below which a warning is issued.
LOW_ACCEPTANCE = 0.1


def color_classes(g):
    """Partition the areas of *g* into sets without neighbors among them.

    Returns
    -------
    list of ndarray
        Area indices of every color class.
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(g.n))
    graph.add_edges_from(g.edges.tolist())
    coloring = nx.greedy_color(graph, strategy="largest_first")
    colors = np.array([coloring[i] for i in range(g.n)])
    return [np.flatnonzero(colors == c) for c in range(colors.max() + 1)]


def log_likelihood(y, eta):
    """Poisson log-likelihood without the constant ``-log(y!)``."""
    return y * eta - np.exp(eta)


class PoissonSampler(AbstractSampler):
    def __init__(self, y, X, latent, spec, offset=None):
        super(PoissonSampler, self).__init__(y, X, latent, spec)
        self.offset = np.zeros(self.n) if offset is None else np.asarray(offset)
        self.classes = None
        self.counts = None
        if latent is not None:
            if latent.labels is not None:
                self.counts = np.bincount(latent.labels).astype(float)
            elif latent.is_sparse:
                self.classes = color_classes(latent.graph)
            else:
                self.Z = latent.basis

        self.beta_scale = 2.38 / np.sqrt(self.q)
        self.theta_scale = None
        self._beta_accepted = 0
        self._theta_accepted = None
        self._batch_beta = 0
        self._batch_theta = None
        self._n_adapt = 0
        self._kept_beta = 0
        self._kept_theta = None
        self._n_kept_steps = 0
        self.scale_trace = None

    def initialize(self, rng):
        rate = np.maximum(self.y, 0.5) / np.exp(self.offset)
        self.beta = np.linalg.lstsq(self.X, np.log(rate), rcond=None)[0]
        mu = np.exp(self.offset + self.X.dot(self.beta))
        fisher = self.X.T.dot(mu[:, np.newaxis] * self.X)
        fisher += self.priors.beta_precision * np.eye(self.q)
        try:
            self.beta_chol = scipy.linalg.cholesky(
                scipy.linalg.inv(fisher), lower=True
            )
        except np.linalg.LinAlgError as e:
            raise CholeskyFailure("Fisher information is singular: {}".format(e))
        self.eta_fixed = self.offset + self.X.dot(self.beta)

        if self.latent is not None:
            self.theta = np.zeros(self.latent.dim)
            self.spatial = np.zeros(self.n)
            self.tau_theta = (
                1.0 if self.spec.fixed_tau_theta is None else self.spec.fixed_tau_theta
            )
            self.theta_scale = np.full(self.latent.dim, self.spec.mcmc.rw_scale)
            self._theta_accepted = np.zeros(self.latent.dim)
            self._batch_theta = np.zeros(self.latent.dim)
            self._kept_theta = np.zeros(self.latent.dim)
        else:
            self.spatial = 0.0
        self.scale_trace = np.empty((self.spec.mcmc.n_draws, 2))

    @property
    def eta(self):
        return self.eta_fixed + self.spatial

    def _step_beta(self, rng):
        proposal = self.beta + self.beta_scale * self.beta_chol.dot(
            rng.standard_normal(self.q)
        )
        eta_fixed = self.offset + self.X.dot(proposal)
        b = self.priors.beta_precision
        log_ratio = np.sum(
            log_likelihood(self.y, eta_fixed + self.spatial)
            - log_likelihood(self.y, self.eta)
        ) - 0.5 * b * (np.dot(proposal, proposal) - np.dot(self.beta, self.beta))
        if np.log(rng.uniform()) < log_ratio:
            self.beta = proposal
            self.eta_fixed = eta_fixed
            return 1
        return 0

    def _step_theta_sparse(self, rng, R):
        accepted = np.zeros(self.latent.dim)
        diag = R.diagonal()
        R = R.tocsr()
        for sites in self.classes:
            delta = self.theta_scale[sites] * rng.standard_normal(len(sites))
            eta = self.eta[sites]
            log_ratio = (
                self.y[sites] * delta
                - (np.exp(eta + delta) - np.exp(eta))
                - 0.5
                * self.tau_theta
                * (2.0 * delta * R[sites].dot(self.theta) + diag[sites] * delta ** 2)
            )
            accept = np.log(rng.uniform(size=len(sites))) < log_ratio
            moved = sites[accept]
            self.theta[moved] += delta[accept]
            self.spatial[moved] += delta[accept]
            accepted[moved] = 1.0
        return accepted

    def _step_theta_dense(self, rng, R):
        accepted = np.zeros(self.latent.dim)
        R_theta = R.dot(self.theta)
        deltas = self.theta_scale * rng.standard_normal(self.latent.dim)
        log_u = np.log(rng.uniform(size=self.latent.dim))
        eta = self.eta
        current = log_likelihood(self.y, eta)
        for j in range(self.latent.dim):
            delta = deltas[j]
            column = self.Z[:, j]
            proposal = log_likelihood(self.y, eta + delta * column)
            log_ratio = np.sum(proposal - current) - 0.5 * self.tau_theta * (
                2.0 * delta * R_theta[j] + R[j, j] * delta ** 2
            )
            if log_u[j] < log_ratio:
                self.theta[j] += delta
                eta = eta + delta * column
                current = proposal
                R_theta += delta * R[:, j]
                accepted[j] = 1.0
        self.spatial = self.latent.effect(self.theta)
        return accepted

    def _step_theta_constrained(self, rng, R):
        labels = self.latent.labels
        counts = self.counts
        R = R.tocsc()
        diag = R.diagonal()
        indptr, indices, data = R.indptr, R.indices, R.data
        R_theta = R.dot(self.theta)
        eta = self.eta
        total_y = np.bincount(labels, weights=self.y, minlength=len(counts))
        total_mu = np.bincount(labels, weights=np.exp(eta), minlength=len(counts))
        # every area of component c is shifted by shift[c] on top of its own moves
        shift = np.zeros(len(counts))
        own = np.zeros(self.n)
        deltas = self.theta_scale * rng.standard_normal(self.n)
        log_u = np.log(rng.uniform(size=self.n))
        accepted = np.zeros(self.n)
        for i in range(self.n):
            c = labels[i]
            delta = deltas[i]
            d = delta / counts[c]
            eta_i = eta[i] + own[i] + shift[c]
            mu_i = math.exp(eta_i)
            rest = total_mu[c] - mu_i
            log_ratio = (
                self.y[i] * delta
                - total_y[c] * d
                - mu_i * math.expm1(delta - d)
                - rest * math.expm1(-d)
                - 0.5
                * self.tau_theta
                * (2.0 * delta * R_theta[i] + diag[i] * delta ** 2)
            )
            if log_u[i] < log_ratio:
                own[i] += delta
                shift[c] -= d
                total_mu[c] = math.exp(-d) * (rest + mu_i * math.exp(delta))
                lo, hi = indptr[i], indptr[i + 1]
                R_theta[indices[lo:hi]] += delta * data[lo:hi]
                accepted[i] = 1.0
        self.theta = self.theta + own + shift[labels]
        self.spatial = self.theta
        return accepted

    def step(self, rng):
        beta_accepted = self._step_beta(rng)
        self._beta_accepted = beta_accepted
        if self.latent is not None:
            R = self.prior_precision
            if self.counts is not None:
                theta_accepted = self._step_theta_constrained(rng, R)
            elif self.latent.is_sparse:
                theta_accepted = self._step_theta_sparse(rng, R)
            else:
                theta_accepted = self._step_theta_dense(rng, R)
            self._theta_accepted = theta_accepted
            self.tau_theta = self.sample_tau_theta(rng)
            self.sample_spatial_parameter(rng)

    def adapt(self, iteration):
        self._batch_beta += self._beta_accepted
        if self.latent is not None:
            self._batch_theta += self._theta_accepted
        if not self.spec.mcmc.adapt or (iteration + 1) % ADAPT_INTERVAL != 0:
            return

        self._n_adapt += 1
        gain = 1.0 / np.sqrt(self._n_adapt)
        beta_rate = self._batch_beta / float(ADAPT_INTERVAL)
        self.beta_scale *= np.exp(gain * (beta_rate - TARGET_BLOCK))
        self._batch_beta = 0
        if self.latent is not None:
            theta_rate = self._batch_theta / float(ADAPT_INTERVAL)
            self.theta_scale *= np.exp(gain * (theta_rate - TARGET_SITE))
            self._batch_theta[:] = 0.0
            logger.debug(
                "Iteration %d: beta acceptance %.2f (scale %.3g), "
                "mean theta acceptance %.2f",
                iteration + 1,
                beta_rate,
                self.beta_scale,
                np.mean(theta_rate),
            )

    def record(self, k):
        self._n_kept_steps += 1
        self._kept_beta += self._beta_accepted
        if self.latent is not None:
            self._kept_theta += self._theta_accepted
        self.scale_trace[k] = (
            self.beta_scale,
            np.nan if self.theta_scale is None else np.mean(self.theta_scale),
        )

    def diagnostics(self):
        steps = max(self._n_kept_steps, 1)
        info = {"acceptance_beta": self._kept_beta / float(steps)}
        info["beta_scale"] = float(self.beta_scale)
        if self.latent is not None:
            info["acceptance_theta"] = float(np.mean(self._kept_theta) / steps)
            info["theta_scale"] = float(np.mean(self.theta_scale))

        rates = [info["acceptance_beta"], info.get("acceptance_theta", 1.0)]
        if min(rates) < LOW_ACCEPTANCE:
            warnings.warn(
                "Low acceptance rate after burn-in (beta {:.2f}, theta {}); "
                "consider a longer burn-in.".format(
                    info["acceptance_beta"],
                    "{:.2f}".format(info["acceptance_theta"])
                    if "acceptance_theta" in info
                    else "n/a",
                )
            )
        logger.info(
            "Acceptance after burn-in: beta %.3f, theta %s",
            info["acceptance_beta"],
            info.get("acceptance_theta"),
        )
        return info
