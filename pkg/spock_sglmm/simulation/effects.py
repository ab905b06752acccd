"""Generators of spatial random effects with singular precision matrices."""

import numpy as np

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter
from spock_sglmm.geometry import as_design, build_projector
from spock_sglmm.typechecks import as_generator, is_number

#: Relative eigenvalue threshold separating the null space.
NULL_TOL = 1e-8


def _dense(Q):
    if hasattr(Q, "toarray"):
        return Q.toarray()
    return np.asarray(Q, dtype=float)


class IntrinsicGmrfEffects(object):
    r"""Generator for draws of :math:`\theta \sim N(0, \tau Q)` with singular *Q*.

    *Q* is eigendecomposed once. Every draw combines the eigenvectors with
    eigenvalue :math:`\lambda_j > 10^{-8} \lambda_{max}` with independent
    :math:`N(0, 1 / (\tau \lambda_j))` coefficients, so draws have no
    component in the null space of *Q*. For the ICAR precision this is the
    sum-to-zero constraint within every connected component.

    Parameters
    ----------
    Q : SparsePrecision, sparse matrix or (n, n) array_like
        Symmetric positive semi-definite precision structure.
    tau : float
        Precision scale.
    rng : numpy.random.Generator, RandomState, int, optional
        Source of randomness.
    """

    def __init__(self, Q, tau, rng=None):
        Q = _dense(Q)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch("A precision matrix must be square.")
        if not is_number(tau) or tau <= 0:
            raise InvalidParameter("Precision must be positive.", attr="tau", obj=self)
        eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (Q + Q.T))
        keep = eigenvalues > NULL_TOL * max(eigenvalues[-1], 0.0)
        self.n = Q.shape[0]
        self.tau = float(tau)
        self.basis = eigenvectors[:, keep]
        self.scales = 1.0 / np.sqrt(self.tau * eigenvalues[keep])
        self.rng = as_generator(rng)

    @property
    def rank(self):
        return self.basis.shape[1]

    @property
    def nullity(self):
        return self.n - self.rank

    def sample(self, size=None, rng=None):
        """Draw one effect, or an array of *size* effects stacked in rows."""
        rng = self.rng if rng is None else as_generator(rng)
        shape = (self.rank,) if size is None else (size, self.rank)
        z = self.scales * rng.standard_normal(shape)
        return z.dot(self.basis.T)

    def covariance(self):
        """Pseudo-inverse of :math:`\\tau Q`, the covariance of the draws."""
        return (self.basis * self.scales ** 2).dot(self.basis.T)

    def __iter__(self):
        return self

    def __next__(self):
        return self.sample()


def rhz_precision(Q, X):
    r"""Restricted precision :math:`P^\perp Q P^\perp` for the design *X*."""
    Q = _dense(Q)
    P = build_projector(as_design(X)).matrix
    if P.shape != Q.shape:
        raise DimensionMismatch(
            "Design has {} rows but the precision is {}x{}.".format(
                P.shape[0], Q.shape[0], Q.shape[1]
            )
        )
    R = P.dot(Q).dot(P)
    return 0.5 * (R + R.T)


def sample_icar_effect(Q, tau, seed=None, size=None):
    """Draw an intrinsic CAR effect with precision ``tau * Q``.

    Parameters
    ----------
    Q : SparsePrecision or array_like
        ICAR precision of the map.
    tau : float
        Precision of the spatial effect.
    seed : int, Generator or RandomState, optional
        Source of randomness.
    size : int, optional
        Number of draws. Returns a single vector if omitted.
    """
    return IntrinsicGmrfEffects(Q, tau, rng=seed).sample(size)


def sample_rhz_effect(Q, X, tau, seed=None, size=None):
    """Draw a spatial effect restricted to the complement of span(*X*).

    The precision is ``tau * P Q P`` with the projector *P* onto the
    orthogonal complement of span(*X*), so every draw is orthogonal to the
    columns of *X*.
    """
    return IntrinsicGmrfEffects(rhz_precision(Q, X), tau, rng=seed).sample(size)
