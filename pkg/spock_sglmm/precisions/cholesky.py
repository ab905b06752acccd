"""Symmetric positive definite factorization of sparse precision matrices."""

import logging

import numpy as np
import scipy.sparse
from scipy.sparse.linalg import splu

from spock_sglmm.exceptions import CholeskyFailure, DimensionMismatch
from spock_sglmm.typechecks import as_generator

logger = logging.getLogger(__name__)

#: Pivots below this fraction of the largest diagonal entry count as zero.
PIVOT_TOL = 1e-12


class SparseCholesky(object):
    r"""Fill-reducing :math:`LDL^\top` factorization of a sparse SPD matrix.

    The factorization is obtained from SuperLU with a symmetric column
    ordering and diagonal pivoting, so that :math:`P A P^\top = L U` with
    :math:`U = D L^\top`. A matrix is accepted as positive definite if all
    pivots in *D* are positive and finite.

    Parameters
    ----------
    A : sparse matrix or (n, n) array_like
        Symmetric matrix to factorize.

    Raises
    ------
    CholeskyFailure
        If *A* is not numerically positive definite.
    """

    def __init__(self, A):
        A = scipy.sparse.csc_matrix(A, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch("Only square matrices can be factorized.")
        self.n = A.shape[0]

        lu = self._factorize(A, "MMD_AT_PLUS_A")
        if not np.array_equal(lu.perm_r, lu.perm_c):
            logger.debug("Symmetric ordering not preserved, refactorizing unordered")
            lu = self._factorize(A, "NATURAL")
        if not np.array_equal(lu.perm_r, lu.perm_c):
            raise CholeskyFailure("Matrix required off-diagonal pivoting.")

        d = lu.U.diagonal()
        scale = max(np.max(np.abs(A.diagonal())), np.finfo(float).tiny)
        threshold = PIVOT_TOL * scale
        if not np.all(np.isfinite(d)) or np.any(d <= threshold):
            raise CholeskyFailure(
                "Matrix is not positive definite (smallest pivot {:.3g}).".format(
                    np.min(d)
                )
            )

        self._lu = lu
        self._perm = lu.perm_c
        self._L = lu.L.tocsr()
        self._sqrt_d = np.sqrt(d)
        self._logdet = float(np.sum(np.log(d)))

    @staticmethod
    def _factorize(A, permc_spec):
        try:
            return splu(
                A,
                permc_spec=permc_spec,
                diag_pivot_thresh=0.0,
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as e:
            raise CholeskyFailure("Factorization failed: {}".format(e))

    @property
    def logdet(self):
        """Log-determinant of the factorized matrix."""
        return self._logdet

    def solve(self, b):
        r"""Solve :math:`A x = b`."""
        b = np.asarray(b, dtype=float)
        if b.shape[0] != self.n:
            raise DimensionMismatch(
                "Right hand side has {} rows, expected {}.".format(b.shape[0], self.n)
            )
        return self._lu.solve(b)

    def sample(self, rng=None, b=None, z=None):
        r"""Draw from :math:`N(A^{-1} b, A^{-1})`.

        With :math:`w = P^\top L D^{1/2} z` for standard normal *z*,
        :math:`A^{-1} w` has covariance :math:`A^{-1}`, so a draw costs one
        sparse product and one solve.

        Parameters
        ----------
        rng : Generator, RandomState, int or None
            Source of the standard normal draws.
        b : (n,) array_like, optional
            Canonical mean parameter. Defaults to zero.
        z : (n,) array_like, optional
            Standard normal draws to use instead of drawing from *rng*.
        """
        if z is None:
            z = as_generator(rng).standard_normal(self.n)
        w = self._L.dot(self._sqrt_d * np.asarray(z, dtype=float))[self._perm]
        if b is not None:
            w = w + np.asarray(b, dtype=float)
        return self.solve(w)
