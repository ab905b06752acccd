r"""Blocked Gibbs sampler for Gaussian responses.

The model is :math:`y = X\beta + Z\theta + e` with
:math:`e \sim N(0, \tau_e I)`, :math:`\beta \sim N(0, b I)` and
:math:`\theta \sim N(0, \tau_\theta R)`, all normals in precision
parameterization. Each sweep draws

1. :math:`\beta` from :math:`N(A^{-1} \tau_e X^\top (y - Z\theta), A^{-1})`
   with :math:`A = \tau_e X^\top X + b I`,
2. :math:`\theta` from :math:`N(B^{-1} \tau_e Z^\top (y - X\beta), B^{-1})`
   with :math:`B = \tau_e Z^\top Z + \tau_\theta R`, by sparse Cholesky
   factorization if :math:`Z = I` and dense Cholesky otherwise,
3. :math:`\tau_e` and :math:`\tau_\theta` from their Gamma full
   conditionals,
4. optionally the spatial parameter of *R* on a grid.
"""

import numpy as np
import scipy.sparse

from spock_sglmm.models.sampler import AbstractSampler, sample_dense_gaussian
from spock_sglmm.precisions import SparseCholesky


class GaussianSampler(AbstractSampler):
    def __init__(self, y, X, latent, spec):
        super(GaussianSampler, self).__init__(y, X, latent, spec)
        self.XtX = self.X.T.dot(self.X)
        self.beta_prior = self.priors.beta_precision * np.eye(self.q)
        if latent is not None:
            if latent.is_sparse:
                self.identity = scipy.sparse.identity(self.n, format="csc")
            else:
                self.Z = latent.basis
                self.ZtZ = self.Z.T.dot(self.Z)

    def _spatial_effect(self):
        if self.latent is None:
            return 0.0
        return self.latent.effect(self.theta)

    def initialize(self, rng):
        self.beta = np.linalg.lstsq(self.X, self.y, rcond=None)[0]
        if self.spec.fixed_tau_e is not None:
            self.tau_e = self.spec.fixed_tau_e
        else:
            resid = self.y - self.X.dot(self.beta)
            variance = np.var(resid)
            self.tau_e = 1.0 / variance if variance > 0.0 else 1.0
        if self.latent is not None:
            self.theta = np.zeros(self.latent.dim)
            self.tau_theta = (
                1.0 if self.spec.fixed_tau_theta is None else self.spec.fixed_tau_theta
            )

    def sample_beta(self, rng):
        A = self.tau_e * self.XtX + self.beta_prior
        b = self.tau_e * self.X.T.dot(self.y - self._spatial_effect())
        return sample_dense_gaussian(A, b, rng)

    def sample_theta(self, rng):
        r = self.y - self.X.dot(self.beta)
        if self.latent.is_sparse:
            A = self.tau_e * self.identity + self.tau_theta * self.prior_precision
            theta = SparseCholesky(A).sample(rng, b=self.tau_e * r)
        else:
            A = self.tau_e * self.ZtZ + self.tau_theta * self.prior_precision
            theta = sample_dense_gaussian(A, self.tau_e * self.Z.T.dot(r), rng)
        # the component indicators are eigenvectors of A when Z = I, so
        # centering yields exact draws under the sum-to-zero constraints
        theta, _ = self.latent.center(theta)
        return theta

    def sample_tau_e(self, rng):
        if self.spec.fixed_tau_e is not None:
            return self.spec.fixed_tau_e
        resid = self.y - self.X.dot(self.beta) - self._spatial_effect()
        shape = self.priors.tau_shape + 0.5 * self.n
        rate = self.priors.tau_rate + 0.5 * np.dot(resid, resid)
        return rng.gamma(shape, 1.0 / rate)

    def step(self, rng):
        self.beta = self.sample_beta(rng)
        if self.latent is not None:
            self.theta = self.sample_theta(rng)
        self.tau_e = self.sample_tau_e(rng)
        if self.latent is not None:
            self.tau_theta = self.sample_tau_theta(rng)
            self.sample_spatial_parameter(rng)
