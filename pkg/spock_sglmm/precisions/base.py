from abc import ABCMeta, abstractmethod

import numpy as np
import scipy.sparse
from nengo.exceptions import ValidationError
from nengo.params import Parameter

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter

#: Maximum absolute asymmetry tolerated in a precision matrix.
SYMMETRY_TOL = 1e-12


class SparsePrecision(object):
    """Sparse symmetric precision matrix *Q* of a spatial random effect.

    Parameters
    ----------
    matrix : sparse matrix or (n, n) array_like
        Symmetric precision matrix.
    structural_rank : int
        Rank of *Q*. Intrinsic models have a rank below *n*.
    family : AbstractPrecisionFamily
        Family that produced *Q*.

    Attributes
    ----------
    matrix : scipy.sparse.csc_matrix
        The precision matrix.
    structural_rank : int
        Rank of the precision matrix.
    family : AbstractPrecisionFamily
        Family that produced the matrix.
    """

    def __init__(self, matrix, structural_rank, family):
        matrix = scipy.sparse.csc_matrix(matrix, dtype=float)
        if matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("A precision matrix must be square.")
        asymmetry = abs(matrix - matrix.T)
        if asymmetry.nnz > 0 and asymmetry.max() > SYMMETRY_TOL:
            raise InvalidParameter(
                "Precision matrix is not symmetric.", attr="matrix", obj=self
            )
        if not 0 <= structural_rank <= matrix.shape[0]:
            raise InvalidParameter(
                "Rank {} is impossible for an {}x{} matrix.".format(
                    structural_rank, matrix.shape[0], matrix.shape[0]
                ),
                attr="structural_rank",
                obj=self,
            )
        matrix.sort_indices()
        self.matrix = matrix
        self.structural_rank = int(structural_rank)
        self.family = family

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def is_proper(self):
        """Whether *Q* is of full rank (a proper Gaussian prior)."""
        return self.structural_rank == self.n

    @property
    def nullity(self):
        return self.n - self.structural_rank

    def toarray(self):
        return self.matrix.toarray()

    def dot(self, v):
        return self.matrix.dot(v)

    def quadratic_form(self, v):
        r""":math:`v^\top Q v`."""
        v = np.asarray(v, dtype=float)
        return float(np.dot(v, self.matrix.dot(v)))

    def lower_triplets(self):
        """Coordinates and values of the lower triangle (including diagonal).

        Returns
        -------
        rows, cols, values : ndarray
            Sorted by row, then column.
        """
        lower = scipy.sparse.tril(self.matrix).tocoo()
        order = np.lexsort((lower.col, lower.row))
        return lower.row[order], lower.col[order], lower.data[order]

    def cholesky(self):
        """Factorize a proper precision matrix.

        Raises `.CholeskyFailure` if *Q* is not numerically positive definite.
        """
        from spock_sglmm.precisions.cholesky import SparseCholesky

        return SparseCholesky(self.matrix)

    def __repr__(self):
        return "SparsePrecision(n={}, rank={}, family={!r})".format(
            self.n, self.structural_rank, self.family
        )


class AbstractPrecisionFamily(metaclass=ABCMeta):
    """Abstract base class for families of spatial precision matrices.

    A family turns a `.NeighborhoodGraph` into a `.SparsePrecision`. Families
    with a spatial parameter are written as :math:`Q(p) = Q_0 + p Q_1`, which
    allows evaluating the prior density on a grid of parameter values.
    """

    #: Short name used in configuration files and on the command line.
    name = None

    #: Name of the spatial parameter, or None.
    parameter_name = None

    #: Open interval of admissible parameter values.
    parameter_range = None

    @property
    def parameter(self):
        """Value of the spatial parameter, or None."""
        if self.parameter_name is None:
            return None
        return getattr(self, self.parameter_name)

    @property
    def is_intrinsic(self):
        """Whether the precision matrix is rank deficient by construction."""
        return False

    @abstractmethod
    def build(self, g):
        """Returns the precision matrix for graph *g*.

        Parameters
        ----------
        g : NeighborhoodGraph
            Neighborhood graph.

        Returns
        -------
        SparsePrecision
        """
        raise NotImplementedError()

    def components(self, g):
        """Returns sparse :math:`(Q_0, Q_1)` with :math:`Q(p) = Q_0 + p Q_1`."""
        raise NotImplementedError(
            "{} has no spatial parameter.".format(type(self).__name__)
        )

    def logdet_grid(self, g, grid):
        """Log-determinant of :math:`Q(p)` for every *p* in *grid*."""
        raise NotImplementedError(
            "{} has no spatial parameter.".format(type(self).__name__)
        )

    def with_parameter(self, value):
        """Returns a family of the same kind with a different parameter."""
        raise NotImplementedError(
            "{} has no spatial parameter.".format(type(self).__name__)
        )

    def to_dict(self):
        d = {"name": self.name}
        if self.parameter_name is not None:
            d[self.parameter_name] = float(self.parameter)
        return d


class PrecisionFamilyParam(Parameter):
    """A precision family given as instance or by name (``"icar"``, ...)."""

    def coerce(self, obj, family):
        family = super(PrecisionFamilyParam, self).coerce(obj, family)
        if family is None or isinstance(family, AbstractPrecisionFamily):
            return family
        if isinstance(family, (str, dict)):
            from spock_sglmm.precisions.families import make_family

            try:
                return make_family(family)
            except InvalidParameter as e:
                raise ValidationError(str(e), attr=self.name, obj=obj)
        raise ValidationError(
            "Invalid precision family {!r}".format(family), attr=self.name, obj=obj
        )
