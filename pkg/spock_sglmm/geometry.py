"""Orthogonal projection of area centroids away from the covariate span."""

import numpy as np
import scipy.linalg

from spock_sglmm.exceptions import (
    DimensionMismatch,
    DuplicateCentroid,
    InvalidParameter,
    RankDeficient,
)

#: Singular value ratio below which a design matrix is considered rank deficient.
RANK_TOL = 1e-10

INTERCEPT_NAME = "(Intercept)"


class DesignMatrix(object):
    """Full-rank design matrix *X* holding the covariates of a regression.

    Parameters
    ----------
    values : (n, q) array_like
        Covariate values, one row per area. A one-dimensional input is
        treated as a single column.
    names : sequence of str, optional
        Column names. Constant columns default to ``"(Intercept)"``, all
        other columns to ``"x1"``, ``"x2"``, ...
    has_intercept : bool, optional
        Whether *X* contains an intercept column. Detected from the presence
        of a non-zero constant column if not given.

    Attributes
    ----------
    values : (n, q) ndarray
        Read-only copy of the covariate values.
    names : tuple of str
        Column names.
    has_intercept : bool
        Whether *X* contains an intercept column.
    """

    def __init__(self, values, names=None, has_intercept=None):
        values = np.array(values, dtype=float)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if values.ndim != 2:
            raise DimensionMismatch("Design matrix must be two-dimensional.")
        if not np.all(np.isfinite(values)):
            raise InvalidParameter(
                "Design matrix contains non-finite values.", attr="values", obj=self
            )
        n, q = values.shape
        if q < 1:
            raise DimensionMismatch("Design matrix needs at least one column.")
        if n <= q:
            raise RankDeficient(
                "Design matrix needs more rows than columns (n={}, q={}).".format(n, q)
            )

        sv = np.linalg.svd(values, compute_uv=False)
        if sv[0] <= 0.0 or sv[-1] / sv[0] < RANK_TOL:
            raise RankDeficient(
                "Design matrix is rank deficient (singular value ratio {:.3g}).".format(
                    0.0 if sv[0] <= 0.0 else sv[-1] / sv[0]
                )
            )

        self._constant = np.all(values == values[0], axis=0) & (values[0] != 0.0)
        if has_intercept is None:
            has_intercept = bool(np.any(self._constant))
        self.has_intercept = bool(has_intercept)

        if names is None:
            names = []
            k = 1
            for is_constant in self._constant:
                if is_constant:
                    names.append(INTERCEPT_NAME)
                else:
                    names.append("x{}".format(k))
                    k += 1
        names = tuple(str(name) for name in names)
        if len(names) != q:
            raise DimensionMismatch(
                "Got {} names for {} design matrix columns.".format(len(names), q)
            )
        self.names = names

        values.setflags(write=False)
        self.values = values

    @classmethod
    def from_covariates(cls, covariates, names=None, intercept=True):
        """Build a design matrix from covariate columns.

        Parameters
        ----------
        covariates : (n,) or (n, k) array_like
            Covariate columns (without intercept).
        names : sequence of str, optional
            Names of the *k* covariate columns.
        intercept : bool, optional
            Whether to prepend a column of ones.
        """
        covariates = np.asarray(covariates, dtype=float)
        if covariates.ndim == 1:
            covariates = covariates[:, np.newaxis]
        if names is None:
            names = ["x{}".format(i + 1) for i in range(covariates.shape[1])]
        names = list(names)
        if intercept:
            covariates = np.column_stack((np.ones(len(covariates)), covariates))
            names = [INTERCEPT_NAME] + names
        return cls(covariates, names=names, has_intercept=intercept)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def q(self):
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def covariate_mask(self):
        """Boolean mask of the non-constant (non-intercept) columns."""
        return ~self._constant

    @property
    def covariates(self):
        """The non-constant columns, as used by the canonical correlation."""
        return self.values[:, self.covariate_mask]

    def standardized(self):
        """Copy with every covariate column centered and scaled to unit variance.

        Constant columns such as the intercept are kept as they are.
        """
        values = self.values.copy()
        columns = values[:, self.covariate_mask]
        scale = columns.std(axis=0, ddof=1)
        values[:, self.covariate_mask] = (columns - columns.mean(axis=0)) / scale
        return DesignMatrix(values, names=self.names, has_intercept=self.has_intercept)

    @property
    def covariate_names(self):
        return tuple(
            name for name, keep in zip(self.names, self.covariate_mask) if keep
        )

    def __len__(self):
        return self.n

    def __repr__(self):
        return "DesignMatrix(n={}, q={}, names={!r})".format(self.n, self.q, self.names)


def as_design(X):
    """Return *X* as a `.DesignMatrix` (no-op for design matrices)."""
    if isinstance(X, DesignMatrix):
        return X
    return DesignMatrix(X)


class CentroidSet(object):
    """Planar centroid coordinates of the areas of a map.

    Parameters
    ----------
    coords : (n, 2) array_like
        Centroid coordinates in planar map units.
    area_ids : sequence, optional
        Area labels in the same order as *coords*. Defaults to ``"0"``,
        ``"1"``, ...
    check_distinct : bool, optional
        Whether to reject coincident centroids with `.DuplicateCentroid`.
        Projected centroids are allowed to coincide.
    """

    def __init__(self, coords, area_ids=None, check_distinct=True):
        coords = np.array(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise DimensionMismatch("Centroids must be an (n, 2) array.")
        if not np.all(np.isfinite(coords)):
            raise InvalidParameter(
                "Centroids contain non-finite values.", attr="coords", obj=self
            )
        if area_ids is None:
            area_ids = [str(i) for i in range(len(coords))]
        area_ids = tuple(area_ids)
        if len(area_ids) != len(coords):
            raise DimensionMismatch(
                "Got {} area ids for {} centroids.".format(len(area_ids), len(coords))
            )
        if check_distinct:
            _, first, counts = np.unique(
                coords, axis=0, return_index=True, return_counts=True
            )
            if np.any(counts > 1):
                dup = np.sort(first[counts > 1])[0]
                raise DuplicateCentroid(
                    "Area {!r} shares its centroid {} with another area.".format(
                        area_ids[dup], tuple(coords[dup])
                    )
                )
        coords.setflags(write=False)
        self.coords = coords
        self.area_ids = area_ids

    @property
    def n(self):
        return len(self.coords)

    @property
    def s1(self):
        return self.coords[:, 0]

    @property
    def s2(self):
        return self.coords[:, 1]

    def centered(self):
        """Return the centroids translated so that their mean is the origin."""
        return CentroidSet(
            self.coords - self.coords.mean(axis=0), self.area_ids, check_distinct=False
        )

    def __len__(self):
        return self.n

    def __repr__(self):
        return "CentroidSet(n={})".format(self.n)


class ProjectionOperator(object):
    r"""Orthogonal projector :math:`P^\perp` onto the complement of span(*X*).

    Parameters
    ----------
    matrix : (n, n) array_like
        Symmetric idempotent matrix.

    Attributes
    ----------
    matrix : (n, n) ndarray
        Read-only projector matrix.
    """

    def __init__(self, matrix):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionMismatch("A projector must be a square matrix.")
        matrix.setflags(write=False)
        self.matrix = matrix

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def complement(self):
        """The projector :math:`P = I - P^\\perp` onto span(*X*)."""
        return np.eye(self.n) - self.matrix

    def apply(self, v):
        """Project the vector or column-stacked vectors *v*."""
        v = np.asarray(v, dtype=float)
        if v.shape[0] != self.n:
            raise DimensionMismatch(
                "Cannot project {} rows with an {}x{} projector.".format(
                    v.shape[0], self.n, self.n
                )
            )
        return np.dot(self.matrix, v)

    def __repr__(self):
        return "ProjectionOperator(n={})".format(self.n)


def build_projector(X):
    r"""Build :math:`P^\perp = I - X (X^\top X)^{-1} X^\top`.

    The projector is computed from the thin QR factor :math:`Q_1` of *X* as
    :math:`I - Q_1 Q_1^\top`; :math:`X^\top X` is never inverted.

    Parameters
    ----------
    X : DesignMatrix or (n, q) array_like
        Full-rank design matrix.

    Returns
    -------
    ProjectionOperator
    """
    X = as_design(X)
    q1, _ = scipy.linalg.qr(X.values, mode="economic")
    matrix = np.eye(X.n) - np.dot(q1, q1.T)
    return ProjectionOperator(0.5 * (matrix + matrix.T))


def orthogonal_complement(X):
    """Orthonormal basis *L* of the orthogonal complement of span(*X*).

    Returns
    -------
    (n, n - q) ndarray
        Columns are orthonormal and orthogonal to every column of *X*.
    """
    X = as_design(X)
    q, _ = scipy.linalg.qr(X.values, mode="full")
    return q[:, X.q :]


def project_centroids(s, P):
    r"""Project centroids into the new geography, :math:`s^* = P^\perp s`.

    Area ids and their order are preserved. Projected centroids may
    coincide (for example when a covariate equals a coordinate).
    """
    if not isinstance(P, ProjectionOperator):
        P = ProjectionOperator(P)
    if P.n != s.n:
        raise DimensionMismatch(
            "Projector is {0}x{0} but there are {1} centroids.".format(P.n, s.n)
        )
    return CentroidSet(P.apply(s.coords), s.area_ids, check_distinct=False)


def trend_covariate(s, kind="linear"):
    """Covariate with a polynomial spatial trend on the centered centroids.

    Parameters
    ----------
    s : CentroidSet
        Centroids; they are centered at the origin first.
    kind : {"linear", "quadratic", "cubic"}
        ``s1 + s2``, ``s1**2 + s2**2`` or ``s1**3 + s2**3``.

    Returns
    -------
    (n,) ndarray
    """
    powers = {"linear": 1, "quadratic": 2, "cubic": 3}
    if kind not in powers:
        raise InvalidParameter(
            "Unknown trend {!r}; expected one of {}.".format(kind, sorted(powers)),
            attr="kind",
        )
    c = s.centered().coords
    return c[:, 0] ** powers[kind] + c[:, 1] ** powers[kind]
