import math

import numpy as np

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter
from spock_sglmm.geometry import as_design, orthogonal_complement
from spock_sglmm.typechecks import is_integer

#: Upper bound of the default number of retained Moran eigenvectors.
MAX_DEFAULT_RANK = 50


class MoranBasis(object):
    """Leading eigenvectors of the Moran operator restricted to the complement of *X*.

    Attributes
    ----------
    M : (n, h) ndarray
        Orthonormal eigenvectors, orthogonal to every column of *X*.
    eigenvalues : (h,) ndarray
        Corresponding eigenvalues in descending order.
    """

    def __init__(self, M, eigenvalues):
        M = np.array(M, dtype=float)
        eigenvalues = np.array(eigenvalues, dtype=float)
        if M.ndim != 2 or eigenvalues.shape != (M.shape[1],):
            raise DimensionMismatch("Need one eigenvalue per Moran eigenvector.")
        M.setflags(write=False)
        eigenvalues.setflags(write=False)
        self.M = M
        self.eigenvalues = eigenvalues

    @property
    def n(self):
        return self.M.shape[0]

    @property
    def h(self):
        return self.M.shape[1]

    def __repr__(self):
        return "MoranBasis(n={}, h={})".format(self.n, self.h)


def default_moran_rank(n, q=1):
    """Default number of Moran eigenvectors, ``min(ceil(0.1 n), 50, n - q)``."""
    return max(1, min(int(math.ceil(0.1 * n)), MAX_DEFAULT_RANK, n - q))


def moran_basis(g, X, h=None):
    r"""Eigenvectors of the *h* largest eigenvalues of :math:`P^\perp A P^\perp`.

    The operator is decomposed on the orthonormal basis *L* of the
    complement of span(*X*), :math:`P^\perp A P^\perp = L (L^\top A L)
    L^\top`, so the eigenvectors never leave that complement, even where
    the spectrum on it is negative.

    Parameters
    ----------
    g : NeighborhoodGraph
        Graph providing the adjacency *A*.
    X : DesignMatrix or (n, q) array_like
        Design matrix.
    h : int, optional
        Number of eigenvectors, at most ``n - q``. Defaults to
        `.default_moran_rank`.

    Returns
    -------
    MoranBasis
    """
    X = as_design(X)
    if X.n != g.n:
        raise DimensionMismatch(
            "Design matrix has {} rows but the graph {} areas.".format(X.n, g.n)
        )
    if h is None:
        h = default_moran_rank(g.n, X.q)
    if not is_integer(h) or not 1 <= h <= g.n - X.q:
        raise InvalidParameter(
            "Moran rank h={!r} must be an integer in [1, {}].".format(h, g.n - X.q),
            attr="h",
        )

    L = orthogonal_complement(X)
    B = L.T.dot(g.adjacency().dot(L))
    eigenvalues, V = np.linalg.eigh(0.5 * (B + B.T))
    keep = np.arange(len(eigenvalues) - 1, len(eigenvalues) - 1 - h, -1)
    return MoranBasis(L.dot(V[:, keep]), eigenvalues[keep])
