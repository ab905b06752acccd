"""Maps of areas: centroids together with their neighborhood graph."""

import numpy as np

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter, IsolatedArea
from spock_sglmm.geometry import CentroidSet
from spock_sglmm.graph import NeighborhoodGraph
from spock_sglmm.typechecks import is_integer


class AreaMap(object):
    """Areas located at their centroids, connected by the adjacency graph.

    Parameters
    ----------
    centroids : CentroidSet
        Centroids in canonical area order.
    adjacency : NeighborhoodGraph
        Original neighborhood graph on the same areas.
    allow_islands : bool, optional
        Whether areas without neighbors are accepted.
    """

    def __init__(self, centroids, adjacency, allow_islands=False):
        if adjacency.n != centroids.n:
            raise DimensionMismatch(
                "Adjacency has {} areas but there are {} centroids.".format(
                    adjacency.n, centroids.n
                )
            )
        if len(set(centroids.area_ids)) != centroids.n:
            raise InvalidParameter("Area ids must be unique.", attr="area_ids")
        isolated = adjacency.isolated
        if len(isolated) > 0 and not allow_islands:
            raise IsolatedArea(
                "Area(s) {} have no neighbors.".format(
                    ", ".join(repr(centroids.area_ids[i]) for i in isolated[:5])
                )
            )
        self.centroids = centroids
        self.adjacency = adjacency
        self.allow_islands = bool(allow_islands)
        self._index = {area_id: i for i, area_id in enumerate(centroids.area_ids)}

    @property
    def n(self):
        return self.centroids.n

    @property
    def area_ids(self):
        return self.centroids.area_ids

    def index_of(self, area_id):
        """0-based position of *area_id*, or None if it is not on the map."""
        return self._index.get(area_id)

    def __eq__(self, other):
        if not isinstance(other, AreaMap):
            return NotImplemented
        return (
            self.area_ids == other.area_ids
            and np.array_equal(self.centroids.coords, other.centroids.coords)
            and self.adjacency == other.adjacency
        )

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None

    def __repr__(self):
        return "AreaMap(n={}, n_edges={})".format(self.n, self.adjacency.n_edges)


def lattice_map(rows, cols, spacing=1.0):
    """Regular lattice of *rows* x *cols* square areas with rook adjacency.

    Area ``r * cols + c`` has its centroid at ``(c * spacing, r * spacing)``
    and is labelled ``str(r * cols + c)``.
    """
    for name, value in (("rows", rows), ("cols", cols)):
        if not is_integer(value) or value < 1:
            raise InvalidParameter(
                "Lattice {} must be a positive integer.".format(name), attr=name
            )
    if rows * cols < 2:
        raise InvalidParameter("A lattice needs at least two areas.", attr="rows")

    index = np.arange(rows * cols).reshape(rows, cols)
    horizontal = np.column_stack((index[:, :-1].ravel(), index[:, 1:].ravel()))
    vertical = np.column_stack((index[:-1, :].ravel(), index[1:, :].ravel()))
    r, c = np.divmod(np.arange(rows * cols), cols)
    centroids = CentroidSet(
        np.column_stack((c * spacing, r * spacing)).astype(float),
        area_ids=[str(i) for i in range(rows * cols)],
    )
    return AreaMap(
        centroids, NeighborhoodGraph(rows * cols, np.vstack((horizontal, vertical)))
    )
