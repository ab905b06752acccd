import numpy as np
import pytest

from spock_sglmm.exceptions import (
    DegenerateGeometry,
    DimensionMismatch,
    EmptyGraph,
    InvalidK,
    InvalidParameter,
)
from spock_sglmm.geometry import CentroidSet
from spock_sglmm.graph import (
    NeighborhoodGraph,
    ReconstructionScore,
    connected_components,
    delaunay_reconstruct,
    edge_direction_alignment,
    knn_reconstruct,
    mean_reconstruction_score,
    reconstruct_graph,
    score_reconstruction,
)
from spock_sglmm.testing import (
    brute_force_delaunay,
    brute_force_knn,
    complete_graph,
    cycle_graph,
    path_graph,
)

UNIT_SQUARE = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]


def rotate(coords, angle, shift):
    c, s = np.cos(angle), np.sin(angle)
    return np.dot(coords, [[c, s], [-s, c]]) + shift


def test_graph_normalizes_edges():
    g = NeighborhoodGraph(4, [(1, 0), (0, 1), (3, 2), (1, 2)])
    assert g.edge_set == {(0, 1), (1, 2), (2, 3)}
    assert np.array_equal(g.edges, [[0, 1], [1, 2], [2, 3]])
    assert np.array_equal(g.degree, [1, 2, 2, 1])
    assert np.array_equal(g.neighbors(1), [0, 2])
    assert g == path_graph(4)
    assert g != cycle_graph(4)


def test_graph_rejects_invalid_edges():
    with pytest.raises(InvalidParameter):
        NeighborhoodGraph(3, [(0, 0)])
    with pytest.raises(InvalidParameter):
        NeighborhoodGraph(3, [(0, 3)])


def test_graph_from_adjacency():
    g = cycle_graph(5)
    assert NeighborhoodGraph.from_adjacency(g.adjacency()) == g
    assert NeighborhoodGraph.from_adjacency(g.adjacency().toarray()) == g
    with pytest.raises(InvalidParameter):
        NeighborhoodGraph.from_adjacency(np.triu(np.ones((3, 3)), k=1))


def test_knn_collinear_ties_broken_by_index():
    coords = np.column_stack((np.arange(4.0), np.zeros(4)))
    with pytest.warns(UserWarning, match="resolved by area index"):
        g = knn_reconstruct(coords, 1)
    assert g.edge_set == {(0, 1), (1, 2), (2, 3)}


def test_knn_complete_graph(rng):
    coords = rng.randn(7, 2)
    assert knn_reconstruct(coords, 6) == complete_graph(7)


def test_knn_square_has_no_diagonals():
    g = knn_reconstruct(CentroidSet(UNIT_SQUARE), [2, 2, 2, 2])
    assert g.edge_set == {(0, 1), (1, 2), (2, 3), (0, 3)}
    assert g == brute_force_knn(UNIT_SQUARE, 2)


def test_knn_matches_brute_force(rng):
    for _ in range(50):
        n = rng.randint(3, 26)
        coords = rng.randn(n, 2)
        k = rng.randint(1, n, size=n)
        g = knn_reconstruct(coords, k)
        assert g == brute_force_knn(coords, k)
        assert np.all(g.degree >= k)


def test_knn_invalid_k(rng):
    coords = rng.randn(5, 2)
    with pytest.raises(InvalidK):
        knn_reconstruct(coords, 0)
    with pytest.raises(InvalidK):
        knn_reconstruct(coords, 5)
    with pytest.raises(InvalidK):
        knn_reconstruct(coords, [1, 2, 3])


def test_knn_non_finite_coordinates():
    with pytest.raises(DegenerateGeometry):
        knn_reconstruct([[0.0, 0.0], [np.inf, 0.0], [1.0, 1.0]], 1)


def test_knn_allows_coincident_points():
    coords = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]
    with pytest.warns(UserWarning):
        g = knn_reconstruct(coords, 1)
    assert g.edge_set == {(0, 1), (0, 2), (2, 3)}


def test_reconstruction_invariant_under_rigid_motion(rng):
    coords = rng.rand(20, 2)
    moved = rotate(coords, 0.7, [3.0, -2.0])
    k = rng.randint(1, 6, size=20)
    assert knn_reconstruct(coords, k) == knn_reconstruct(moved, k)
    assert delaunay_reconstruct(coords) == delaunay_reconstruct(moved)


def test_delaunay_triangle():
    g = delaunay_reconstruct([[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]])
    assert g.edge_set == {(0, 1), (1, 2), (0, 2)}


def test_delaunay_perturbed_square():
    coords = np.array(UNIT_SQUARE) + [[0.0, 0.0], [0.0, 0.0], [0.01, 0.02], [0.0, 0.0]]
    g = delaunay_reconstruct(coords)
    assert g.n_edges == 5
    assert {(0, 1), (1, 2), (2, 3), (0, 3)} < g.edge_set
    assert g == brute_force_delaunay(coords)


def test_delaunay_jittered_grid(rng):
    xx, yy = np.meshgrid(np.arange(3.0), np.arange(3.0))
    coords = np.column_stack((xx.ravel(), yy.ravel()))
    coords += rng.uniform(-1e-6, 1e-6, size=coords.shape)
    assert delaunay_reconstruct(coords) == brute_force_delaunay(coords)


def test_delaunay_regular_grid_is_independent_of_area_order(rng):
    xx, yy = np.meshgrid(np.arange(4.0), np.arange(4.0))
    coords = np.column_stack((xx.ravel(), yy.ravel()))
    g = delaunay_reconstruct(coords)
    # every unit square is split by the diagonal from its lower left corner
    assert g.n_edges == 12 + 12 + 9
    for i, j in g.edge_set:
        dx, dy = coords[j] - coords[i]
        assert (abs(dx), abs(dy)) in {(1.0, 0.0), (0.0, 1.0)} or dx == dy == 1.0

    for _ in range(5):
        perm = rng.permutation(len(coords))
        permuted = delaunay_reconstruct(coords[perm])
        edges = {tuple(sorted((perm[i], perm[j]))) for i, j in permuted.edge_set}
        assert edges == g.edge_set


def test_delaunay_cocircular_polygon_is_a_fan():
    angles = 2 * np.pi * np.arange(8) / 8
    coords = np.column_stack((np.cos(angles), np.sin(angles)))
    g = delaunay_reconstruct(coords)
    first = np.lexsort((coords[:, 1], coords[:, 0]))[0]
    assert g.n_edges == 8 + 5
    assert g.degree[first] == 7
    for i in range(8):
        assert tuple(sorted((i, (i + 1) % 8))) in g.edge_set


def test_delaunay_matches_brute_force(rng):
    for _ in range(50):
        coords = rng.rand(rng.randint(3, 26), 2)
        assert delaunay_reconstruct(coords) == brute_force_delaunay(coords)


def test_delaunay_contains_nearest_neighbor_graph(rng):
    for _ in range(10):
        coords = rng.randn(30, 2)
        nearest = knn_reconstruct(coords, 1)
        assert nearest.edge_set <= delaunay_reconstruct(coords).edge_set


def test_delaunay_degenerate_inputs():
    with pytest.raises(DegenerateGeometry, match="collinear"):
        delaunay_reconstruct([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    with pytest.raises(DegenerateGeometry):
        delaunay_reconstruct([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(DegenerateGeometry, match="coincident"):
        delaunay_reconstruct([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])


def test_reconstruct_graph_dispatch(rng):
    coords = rng.randn(10, 2)
    assert reconstruct_graph(coords, "knn", 3) == knn_reconstruct(coords, 3)
    assert reconstruct_graph(coords, "delaunay") == delaunay_reconstruct(coords)
    with pytest.raises(InvalidParameter):
        reconstruct_graph(coords, "gabriel")


def test_score_identical_graphs(rng):
    g = knn_reconstruct(rng.randn(15, 2), 3)
    assert score_reconstruction(g, g) == (1.0, 1.0)


def test_score_extra_edge():
    original = cycle_graph(4)
    rebuilt = NeighborhoodGraph(4, list(original.edges) + [(0, 2)])
    score = score_reconstruction(original, rebuilt)
    assert isinstance(score, ReconstructionScore)
    assert score.sensitivity == 1.0
    assert score.recall == pytest.approx(0.8)
    assert score.to_dict() == {"sensitivity": 1.0, "recall": score.recall}


def test_score_errors():
    with pytest.raises(EmptyGraph):
        score_reconstruction(NeighborhoodGraph(3), path_graph(3))
    with pytest.raises(EmptyGraph):
        score_reconstruction(path_graph(3), NeighborhoodGraph(3))
    with pytest.raises(DimensionMismatch):
        score_reconstruction(path_graph(3), path_graph(4))


def test_mean_reconstruction_score():
    original = cycle_graph(4)
    rebuilt = NeighborhoodGraph(4, list(original.edges) + [(0, 2)])
    score = mean_reconstruction_score([(original, original), (original, rebuilt)])
    assert score.sensitivity == 1.0
    assert score.recall == pytest.approx(0.9)
    with pytest.raises(EmptyGraph):
        mean_reconstruction_score([])


def test_connected_components():
    assert connected_components(path_graph(6))[0] == 1

    triangles = NeighborhoodGraph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    count, labels = connected_components(triangles)
    assert count == 2
    assert len(set(labels[:3])) == 1 and len(set(labels[3:])) == 1
    assert labels[0] != labels[3]

    count, labels = connected_components(NeighborhoodGraph(5))
    assert count == 5
    assert len(set(labels)) == 5


def test_edge_direction_alignment():
    coords = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 0.0]])
    assert edge_direction_alignment(path_graph(3), coords[:3]) == pytest.approx(1.0)
    along_x = NeighborhoodGraph(4, [(0, 3)])
    assert edge_direction_alignment(along_x, coords) == pytest.approx(np.sqrt(0.5))
    assert edge_direction_alignment(along_x, coords, (1.0, 0.0)) == pytest.approx(1.0)
    with pytest.raises(DimensionMismatch):
        edge_direction_alignment(along_x, coords[:3])
