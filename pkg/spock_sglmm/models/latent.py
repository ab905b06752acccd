"""Spatial random effects of the competing models.

Every spatial model writes the linear predictor as
:math:`X\\beta + Z\\theta` with :math:`\\theta \\sim N(0, \\tau_\\theta R)`
(precision parameterization). The models differ in the design *Z* of the
spatial coefficients and their prior structure *R*:

========  =========================  ====================================
method    Z                          R
========  =========================  ====================================
icar      identity                   Q of the original graph (sparse)
spock     identity                   Q of the rebuilt graph (sparse)
rhz       L, complement of span(X)   :math:`L^\\top Q L` (dense)
hh        Moran eigenvectors M       :math:`M^\\top Q M` (dense)
========  =========================  ====================================
"""

import logging
import warnings

import numpy as np

from spock_sglmm.exceptions import DimensionMismatch
from spock_sglmm.geometry import (
    as_design,
    build_projector,
    orthogonal_complement,
    project_centroids,
)
from spock_sglmm.graph import connected_components, reconstruct_graph
from spock_sglmm.precisions import IcarFamily, icar_precision, moran_basis

logger = logging.getLogger(__name__)

#: Relative eigenvalue threshold for the rank of a dense prior structure.
RANK_TOL = 1e-8


def _dense_rank(R):
    eigenvalues = np.linalg.eigvalsh(R)
    if eigenvalues[-1] <= 0.0:
        return 0
    return int(np.sum(eigenvalues > RANK_TOL * eigenvalues[-1]))


class LatentEffect(object):
    """Design and prior structure of the spatial coefficients.

    Parameters
    ----------
    method : str
        Name of the model.
    precision : SparsePrecision or (m, m) array_like
        Prior structure *R* of the coefficients. Sparse for models with
        ``Z = I``.
    rank : int
        Rank of *R*, the exponent of :math:`\\tau_\\theta^{rank/2}` in the
        prior.
    basis : (n, m) array_like, optional
        Design *Z*; None for the identity.
    labels : (n,) array_like, optional
        Connected component of every area. Given for intrinsic priors, whose
        coefficients are centered per component.
    graph : NeighborhoodGraph, optional
        Graph the prior structure was built from.
    family : AbstractPrecisionFamily, optional
        Family the prior structure was built from.
    """

    def __init__(
        self, method, precision, rank, basis=None, labels=None, graph=None, family=None
    ):
        self.method = method
        self.precision = precision
        self.rank = int(rank)
        self.basis = None if basis is None else np.asarray(basis, dtype=float)
        self.labels = None if labels is None else np.asarray(labels)
        self.graph = graph
        self.family = family

    @property
    def is_sparse(self):
        return self.basis is None

    @property
    def dim(self):
        """Number of spatial coefficients."""
        if self.basis is None:
            return self.precision.n
        return self.basis.shape[1]

    @property
    def n(self):
        if self.basis is None:
            return self.precision.n
        return self.basis.shape[0]

    def effect(self, theta):
        """Per-area spatial effect :math:`Z \\theta`."""
        if self.basis is None:
            return np.asarray(theta)
        return self.basis.dot(theta)

    def quadratic_form(self, theta):
        """:math:`\\theta^\\top R \\theta`."""
        if self.basis is None:
            return self.precision.quadratic_form(theta)
        return float(np.dot(theta, self.precision.dot(theta)))

    def center(self, theta):
        """Subtract the per-component mean for intrinsic priors.

        Returns
        -------
        theta : ndarray
            Centered coefficients.
        means : ndarray or None
            Mean of every component that was subtracted.
        """
        if self.labels is None:
            return theta, None
        counts = np.bincount(self.labels)
        means = np.bincount(self.labels, weights=theta) / counts
        return theta - means[self.labels], means

    def __repr__(self):
        return "LatentEffect(method={!r}, dim={}, rank={})".format(
            self.method, self.dim, self.rank
        )


def _check_graph(g, X):
    if X is not None and X.n != g.n:
        raise DimensionMismatch(
            "Design matrix has {} rows but the graph {} areas.".format(X.n, g.n)
        )


def sparse_latent(g, family, method="icar"):
    """Spatial effect with one coefficient per area and prior ``family.build(g)``."""
    Q = family.build(g)
    labels = None
    if family.is_intrinsic:
        _, labels = connected_components(g)
    return LatentEffect(
        method, Q, Q.structural_rank, labels=labels, graph=g, family=family
    )


def rhz_latent(g, X):
    """Spatial effect restricted to the orthogonal complement of span(*X*)."""
    X = as_design(X)
    _check_graph(g, X)
    L = orthogonal_complement(X)
    Q = icar_precision(g)
    R = L.T.dot(Q.matrix.dot(L))
    R = 0.5 * (R + R.T)
    return LatentEffect(
        "rhz", R, _dense_rank(R), basis=L, graph=g, family=IcarFamily()
    )


def hh_latent(g, X, h=None):
    """Spatial effect spanned by the *h* leading Moran eigenvectors."""
    X = as_design(X)
    _check_graph(g, X)
    M = moran_basis(g, X, h=h).M
    Q = icar_precision(g)
    R = M.T.dot(Q.matrix.dot(M))
    R = 0.5 * (R + R.T)
    return LatentEffect(
        "hh", R, _dense_rank(R), basis=M, graph=g, family=IcarFamily()
    )


def spock_graph(s, X, g, method="knn", k=None):
    """Neighborhood graph rebuilt on the centroids projected away from *X*.

    Parameters
    ----------
    s : CentroidSet
        Original centroids.
    X : DesignMatrix
        Design matrix.
    g : NeighborhoodGraph
        Original graph. Its degrees are the Knn neighbor counts.
    method : {"knn", "delaunay"}
        Reconstruction method.
    k : int, optional
        Neighbor count for every area, overriding the original degrees.
    """
    X = as_design(X)
    _check_graph(g, X)
    if s.n != g.n:
        raise DimensionMismatch(
            "Got {} centroids for a graph on {} areas.".format(s.n, g.n)
        )
    s_star = project_centroids(s, build_projector(X))
    if method == "knn":
        if k is None:
            # areas without neighbors keep one in the rebuilt graph
            k = np.maximum(g.degree, 1)
        rebuilt = reconstruct_graph(s_star, method="knn", k=k)
    else:
        rebuilt = reconstruct_graph(s_star, method=method)

    n_components, _ = connected_components(rebuilt)
    if n_components > 1:
        warnings.warn(
            "The rebuilt graph has {} connected components.".format(n_components)
        )
    logger.debug(
        "Rebuilt graph: %d edges (original %d), %d component(s)",
        rebuilt.n_edges,
        g.n_edges,
        n_components,
    )
    return rebuilt


def spock_latent(s, X, g, family, method="knn", k=None):
    """Sparse spatial effect on the graph rebuilt by `.spock_graph`."""
    rebuilt = spock_graph(s, X, g, method=method, k=k)
    return sparse_latent(rebuilt, family, method="spock")
