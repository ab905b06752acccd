"""Neighborhood graphs and their reconstruction from (projected) centroids."""

import logging
import warnings
from collections import namedtuple

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph
from scipy.spatial import Delaunay, QhullError
from scipy.spatial.distance import cdist

from spock_sglmm.exceptions import (
    DegenerateGeometry,
    DimensionMismatch,
    EmptyGraph,
    InvalidK,
    InvalidParameter,
)
from spock_sglmm.geometry import CentroidSet
from spock_sglmm.typechecks import is_integer

logger = logging.getLogger(__name__)

#: Relative resolution below which two distances count as tied.
DISTANCE_TIE_TOL = 1e-12

#: Singular value ratio below which a point set counts as collinear.
COLLINEAR_TOL = 1e-10

#: Relative in-circle determinant below which four points count as cocircular.
COCIRCULAR_TOL = 1e-10


class NeighborhoodGraph(object):
    """Undirected simple graph on *n* areas.

    Edges are stored once as pairs ``(i, j)`` with ``i < j`` in
    lexicographic order. Duplicate pairs and both orientations of a pair
    collapse into one edge.

    Parameters
    ----------
    n : int
        Number of areas (vertices).
    edges : (m, 2) array_like of int, optional
        Pairs of 0-based area indices.

    Attributes
    ----------
    n : int
        Number of areas.
    edges : (m, 2) ndarray
        Read-only sorted edge list with ``edges[:, 0] < edges[:, 1]``.
    """

    def __init__(self, n, edges=()):
        if not is_integer(n) or n < 0:
            raise InvalidParameter(
                "Number of areas must be a non-negative integer.", attr="n", obj=self
            )
        self.n = int(n)

        edges = np.asarray(edges, dtype=np.int64)
        if edges.size == 0:
            edges = np.zeros((0, 2), dtype=np.int64)
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise DimensionMismatch("Edges must be given as an (m, 2) array.")
        if np.any(edges < 0) or np.any(edges >= self.n):
            raise InvalidParameter(
                "Edge endpoints must be in [0, {}).".format(self.n), attr="edges"
            )
        if np.any(edges[:, 0] == edges[:, 1]):
            loop = int(edges[edges[:, 0] == edges[:, 1]][0, 0])
            raise InvalidParameter(
                "Self-loop at area {} is not allowed.".format(loop), attr="edges"
            )

        edges = np.sort(edges, axis=1)
        edges = np.unique(edges, axis=0) if len(edges) > 0 else edges
        edges.setflags(write=False)
        self.edges = edges

    @classmethod
    def from_adjacency(cls, A):
        """Build a graph from a dense or sparse symmetric 0/1 matrix."""
        A = scipy.sparse.coo_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise DimensionMismatch("Adjacency matrix must be square.")
        if (abs(A - A.T) > 0).nnz > 0:
            raise InvalidParameter("Adjacency matrix is not symmetric.", attr="A")
        upper = scipy.sparse.triu(A, k=1).tocoo()
        mask = upper.data != 0
        return cls(A.shape[0], np.column_stack((upper.row[mask], upper.col[mask])))

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def degree(self):
        """Number of neighbors of every area."""
        return np.bincount(self.edges.ravel(), minlength=self.n)

    @property
    def isolated(self):
        """Indices of areas without any neighbor."""
        return np.flatnonzero(self.degree == 0)

    @property
    def edge_set(self):
        return frozenset((int(i), int(j)) for i, j in self.edges)

    def edge_codes(self):
        """Unique integer code ``i * n + j`` for every edge."""
        return self.edges[:, 0] * self.n + self.edges[:, 1]

    def adjacency(self):
        """Symmetric 0/1 adjacency matrix *A* in CSR format."""
        rows = np.concatenate((self.edges[:, 0], self.edges[:, 1]))
        cols = np.concatenate((self.edges[:, 1], self.edges[:, 0]))
        data = np.ones(len(rows))
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def neighbors(self, i):
        """Sorted indices of the neighbors of area *i*."""
        pairs = self.edges[(self.edges[:, 0] == i) | (self.edges[:, 1] == i)]
        return np.sort(np.where(pairs[:, 0] == i, pairs[:, 1], pairs[:, 0]))

    def __eq__(self, other):
        if not isinstance(other, NeighborhoodGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self):
        return "NeighborhoodGraph(n={}, n_edges={})".format(self.n, self.n_edges)


class ReconstructionScore(namedtuple("ReconstructionScore", ["sensitivity", "recall"])):
    """Agreement between an original graph and its reconstruction.

    Attributes
    ----------
    sensitivity : float
        Fraction of the original edges that are reproduced.
    recall : float
        Fraction of the reconstructed edges that are original edges.
    """

    __slots__ = ()

    def to_dict(self):
        return {"sensitivity": float(self.sensitivity), "recall": float(self.recall)}


def _coordinates(s):
    coords = s.coords if isinstance(s, CentroidSet) else np.asarray(s, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 2:
        raise DimensionMismatch("Centroids must be an (n, 2) array.")
    if not np.all(np.isfinite(coords)):
        raise DegenerateGeometry("Centroids contain non-finite coordinates.")
    return coords


def knn_reconstruct(s_star, k):
    """Rebuild a neighborhood graph from the *k* nearest neighbors of each area.

    Area *j* becomes a neighbor of area *i* if it is among the ``k[i]``
    nearest areas of *i* by Euclidean distance. The directed relation is
    symmetrized by union, so every area ends up with at least ``k[i]``
    neighbors. Distances equal up to a relative resolution of
    `.DISTANCE_TIE_TOL` are ordered by area index.

    Parameters
    ----------
    s_star : CentroidSet or (n, 2) array_like
        Centroids, typically the projected ones.
    k : int or (n,) array_like of int
        Number of neighbors per area, each in ``[1, n - 1]``. Pass the
        degrees of the original graph to keep the original neighbor counts.

    Returns
    -------
    NeighborhoodGraph
    """
    coords = _coordinates(s_star)
    n = len(coords)
    k = np.asarray(k)
    if k.ndim == 0:
        k = np.full(n, k)
    if k.shape != (n,):
        raise InvalidK("Expected {} neighbor counts, got {}.".format(n, k.shape[0]))
    if not np.issubdtype(k.dtype, np.integer):
        if not np.all(np.mod(k, 1) == 0):
            raise InvalidK("Neighbor counts must be integers.")
        k = k.astype(np.int64)
    bad = np.flatnonzero((k < 1) | (k > n - 1))
    if len(bad) > 0:
        raise InvalidK(
            "Neighbor count {} of area {} is outside of [1, {}].".format(
                k[bad[0]], bad[0], n - 1
            )
        )

    dist = cdist(coords, coords)
    scale = np.max(dist)
    resolution = DISTANCE_TIE_TOL * scale if scale > 0.0 else 1.0
    key = np.rint(dist / resolution)
    np.fill_diagonal(key, np.inf)
    # stable sort keeps lower indices first among tied distances
    order = np.argsort(key, axis=1, kind="stable")

    rows = np.repeat(np.arange(n), k)
    cols = np.concatenate([order[i, : k[i]] for i in range(n)])

    has_next = k < n - 1
    idx = np.flatnonzero(has_next)
    tied = key[idx, order[idx, k[idx] - 1]] == key[idx, order[idx, k[idx]]]
    if np.any(tied):
        warnings.warn(
            "Distance ties at the neighbor cutoff of {} area(s) were resolved "
            "by area index.".format(int(np.sum(tied)))
        )

    graph = NeighborhoodGraph(n, np.column_stack((rows, cols)))
    logger.debug("Knn reconstruction: n=%d, %d edges", n, graph.n_edges)
    return graph


def delaunay_reconstruct(s_star):
    """Rebuild a neighborhood graph from the Delaunay triangulation of *s_star*.

    Two areas are neighbors if they share an edge of a Delaunay triangle.
    Where several points lie on one empty circle the Delaunay triangulation
    is not unique. Such a cell is triangulated as a fan from its first point
    in lexicographic coordinate order, so the graph does not depend on the
    order of the areas or on Qhull.

    Raises
    ------
    DegenerateGeometry
        If there are fewer than three points, coincident points, or all
        points are collinear.
    """
    coords = _coordinates(s_star)
    n = len(coords)
    if n < 3:
        raise DegenerateGeometry("Delaunay triangulation needs at least 3 points.")
    if len(np.unique(coords, axis=0)) < n:
        raise DegenerateGeometry(
            "Delaunay triangulation is undefined for coincident centroids."
        )
    sv = np.linalg.svd(coords - coords.mean(axis=0), compute_uv=False)
    if sv[0] == 0.0 or sv[1] / sv[0] < COLLINEAR_TOL:
        raise DegenerateGeometry("All centroids are collinear.")

    try:
        tri = Delaunay(coords)
    except QhullError as e:
        raise DegenerateGeometry("Delaunay triangulation failed: {}".format(e))
    if len(tri.coplanar) > 0:
        raise DegenerateGeometry(
            "{} point(s) could not be placed in the triangulation.".format(
                len(tri.coplanar)
            )
        )

    edges = _delaunay_edges(coords, tri.simplices, tri.neighbors)
    graph = NeighborhoodGraph(n, edges)
    logger.debug("Delaunay reconstruction: n=%d, %d edges", n, graph.n_edges)
    return graph


def _in_circle(a, b, c, d):
    """Row-wise in-circle determinants of *d* against triangles ``(a, b, c)``."""
    rows = [p - d for p in (a, b, c)]
    m = np.stack(
        [np.column_stack((r[:, 0], r[:, 1], np.sum(r ** 2, axis=1))) for r in rows],
        axis=1,
    )
    scale = np.max(np.stack([np.sum(r ** 2, axis=1) for r in rows]), axis=0)
    return np.linalg.det(m) / scale ** 2


def _delaunay_edges(coords, simplices, neighbors):
    s, j = np.nonzero(neighbors >= 0)
    t = neighbors[s, j]
    keep = s < t
    s, t = s[keep], t[keep]
    opposite = simplices[t][neighbors[t] == s[:, np.newaxis]]
    a, b, c = (coords[simplices[s, i]] for i in range(3))
    cocircular = np.abs(_in_circle(a, b, c, coords[opposite])) <= COCIRCULAR_TOL

    m = len(simplices)
    links = scipy.sparse.coo_matrix(
        (np.ones(np.sum(cocircular)), (s[cocircular], t[cocircular])), shape=(m, m)
    )
    _, cells = scipy.sparse.csgraph.connected_components(links, directed=False)
    sizes = np.bincount(cells)

    single = simplices[sizes[cells] == 1]
    edges = [single[:, [0, 1]], single[:, [1, 2]], single[:, [0, 2]]]

    rank = np.empty(len(coords), dtype=np.int64)
    rank[np.lexsort((coords[:, 1], coords[:, 0]))] = np.arange(len(coords))
    merged = np.flatnonzero(sizes > 1)
    for cell in merged:
        ring = np.unique(simplices[cells == cell])
        offset = coords[ring] - coords[ring].mean(axis=0)
        ring = ring[np.argsort(np.arctan2(offset[:, 1], offset[:, 0]))]
        ring = np.roll(ring, -np.argmin(rank[ring]))
        edges.append(np.column_stack((ring, np.roll(ring, -1))))
        edges.append(np.column_stack((np.full(len(ring) - 3, ring[0]), ring[2:-1])))
    if len(merged) > 0:
        logger.debug("Triangulated %d cocircular Delaunay cell(s) as fans", len(merged))
    return np.concatenate(edges)


def reconstruct_graph(s_star, method="knn", k=None):
    """Rebuild a graph with the given *method* (``"knn"`` or ``"delaunay"``)."""
    if method == "knn":
        if k is None:
            raise InvalidK("Knn reconstruction needs neighbor counts.")
        return knn_reconstruct(s_star, k)
    elif method == "delaunay":
        return delaunay_reconstruct(s_star)
    raise InvalidParameter(
        "Unknown reconstruction method {!r}.".format(method), attr="method"
    )


def score_reconstruction(original, rebuilt):
    """Score how well *rebuilt* reproduces the edges of *original*.

    Returns
    -------
    ReconstructionScore
        ``sensitivity = |E_o & E_r| / |E_o|`` and
        ``recall = |E_o & E_r| / |E_r|``.
    """
    if original.n != rebuilt.n:
        raise DimensionMismatch(
            "Cannot compare graphs on {} and {} areas.".format(original.n, rebuilt.n)
        )
    if original.n_edges == 0:
        raise EmptyGraph("The original graph has no edges; sensitivity is undefined.")
    if rebuilt.n_edges == 0:
        raise EmptyGraph("The rebuilt graph has no edges; recall is undefined.")
    common = len(
        np.intersect1d(original.edge_codes(), rebuilt.edge_codes(), assume_unique=True)
    )
    return ReconstructionScore(
        sensitivity=common / float(original.n_edges),
        recall=common / float(rebuilt.n_edges),
    )


def mean_reconstruction_score(pairs):
    """Average sensitivity and recall over several ``(original, rebuilt)`` maps."""
    scores = [score_reconstruction(original, rebuilt) for original, rebuilt in pairs]
    if len(scores) == 0:
        raise EmptyGraph("No graphs to score.")
    return ReconstructionScore(
        sensitivity=float(np.mean([s.sensitivity for s in scores])),
        recall=float(np.mean([s.recall for s in scores])),
    )


def connected_components(g):
    """Label the connected components of *g*.

    Returns
    -------
    n_components : int
    labels : (n,) ndarray
        Component label of every area, numbered in order of first appearance.
    """
    if g.n == 0:
        return 0, np.zeros(0, dtype=np.int64)
    n_components, labels = scipy.sparse.csgraph.connected_components(
        g.adjacency(), directed=False
    )
    return int(n_components), labels


def edge_direction_alignment(g, coords, direction=(1.0, 1.0)):
    """Mean absolute cosine between the edges of *g* and *direction*.

    Edges are drawn between the rows of *coords* (usually the original
    centroids). Zero-length edges are ignored.
    """
    coords = _coordinates(coords)
    if len(coords) != g.n:
        raise DimensionMismatch(
            "Graph has {} areas but {} coordinates were given.".format(g.n, len(coords))
        )
    direction = np.asarray(direction, dtype=float)
    vectors = coords[g.edges[:, 1]] - coords[g.edges[:, 0]]
    lengths = np.linalg.norm(vectors, axis=1)
    keep = lengths > 0.0
    if not np.any(keep):
        raise EmptyGraph("The graph has no edges of positive length.")
    cosines = np.dot(vectors[keep], direction) / (
        lengths[keep] * np.linalg.norm(direction)
    )
    return float(np.mean(np.abs(cosines)))
