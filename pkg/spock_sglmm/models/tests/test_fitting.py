import time

import numpy as np
import pytest

from spock_sglmm.geometry import CentroidSet, DesignMatrix
from spock_sglmm.graph import NeighborhoodGraph, knn_reconstruct
from spock_sglmm.maps import AreaMap, lattice_map
from spock_sglmm.models import (
    McmcConfig,
    ModelSpec,
    fit_icar,
    fit_model,
    fit_rhz,
    fit_spock,
    spock_graph,
)
from spock_sglmm.models.fitting import _as_spec
from spock_sglmm.precisions import LerouxFamily


def checkerboard_design(rows, cols):
    """Design whose covariate is orthogonal to the lattice coordinates."""
    r, c = np.divmod(np.arange(rows * cols), cols)
    return DesignMatrix.from_covariates(np.where((r + c) % 2 == 0, 1.0, -1.0))


def short_chain(seed=1, n_iter=300, n_burn=100):
    return McmcConfig(n_iter=n_iter, n_burn=n_burn, seed=seed)


def test_orthogonal_covariate_keeps_the_lattice():
    area_map = lattice_map(6, 6)
    X = checkerboard_design(6, 6)
    rebuilt = spock_graph(area_map.centroids, X, area_map.adjacency)
    assert rebuilt == area_map.adjacency
    assert rebuilt == knn_reconstruct(
        area_map.centroids.centered(), area_map.adjacency.degree
    )


def test_spock_equals_icar_when_the_graph_is_kept(rng):
    area_map = lattice_map(6, 6)
    X = checkerboard_design(6, 6)
    y = X.values.dot([1.0, 2.0]) + rng.randn(36)
    spec = ModelSpec(mcmc=short_chain(seed=7))
    spock = fit_spock(y, X, area_map.centroids, area_map.adjacency, spec)
    icar = fit_icar(y, X, area_map.adjacency, spec)
    assert spock.method == "spock"
    assert icar.method == "icar"
    assert np.array_equal(spock.beta_draws, icar.beta_draws)
    assert np.array_equal(spock.theta_draws, icar.theta_draws)


def test_spock_covariate_aligned_with_coordinate(rng):
    area_map = lattice_map(6, 6)
    X = DesignMatrix.from_covariates(area_map.centroids.s1 + 0.1 * rng.randn(36))
    y = X.values.dot([0.5, 1.0]) + rng.randn(36)
    fit = fit_spock(
        y, X, area_map.centroids, area_map.adjacency, ModelSpec(mcmc=short_chain())
    )
    assert fit.theta_draws.shape == (200, 36)
    assert fit.info["rank"] <= 35
    assert np.all(np.isfinite(fit.beta_draws))


def test_spock_with_leroux_and_delaunay(rng):
    n = 40
    coords = rng.uniform(0, 10, size=(n, 2))
    s = CentroidSet(coords)
    g = knn_reconstruct(s, 4)
    X = DesignMatrix.from_covariates(rng.randn(n))
    y = X.values.dot([1.0, -1.0]) + rng.randn(n)

    spec = ModelSpec(
        spatial_family=LerouxFamily(0.5),
        learn_spatial_parameter=True,
        reconstruction="delaunay",
        mcmc=short_chain(),
    )
    fit = fit_spock(y, X, s, g, spec)
    assert fit.spatial_parameter_draws.shape == (200,)
    assert fit.info["n_edges"] >= 2 * n - 5

    fixed_k = fit_spock(y, X, s, g, ModelSpec(k_override=3, mcmc=short_chain()))
    assert fixed_k.info["rank"] < n


def test_island_keeps_one_neighbor(rng):
    coords = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [5.0, 5.0]])
    g = NeighborhoodGraph(5, [(0, 1), (0, 2), (1, 3), (2, 3)])
    area_map = AreaMap(CentroidSet(coords), g, allow_islands=True)
    X = DesignMatrix.from_covariates(rng.randn(5))
    rebuilt = spock_graph(area_map.centroids, X, g)
    assert rebuilt.degree[4] >= 1


def test_fit_model_dispatch(rng):
    area_map = lattice_map(5, 5)
    X = checkerboard_design(5, 5)
    y = X.values.dot([1.0, 1.0]) + rng.randn(25)
    for method in ("lm", "icar", "rhz", "hh", "spock"):
        spec = ModelSpec(method=method, mcmc=short_chain())
        fit = fit_model(y, X, area_map, spec)
        assert fit.method == method
        assert fit.area_ids == area_map.area_ids
        assert (fit.theta_draws is None) == (method == "lm")

    fit = fit_model(y, X, area_map, ModelSpec(method="lm").to_dict())
    assert fit.method == "lm"


def test_spec_defaults_per_fitting_function():
    assert _as_spec(None, "rhz").method == "rhz"
    spec = _as_spec({"method": "lm", "mcmc": {"n_iter": 500, "n_burn": 50}}, "hh")
    assert spec.method == "hh"
    assert spec.mcmc.n_iter == 500


@pytest.mark.slow
def test_spock_iterations_are_cheaper_than_rhz(rng):
    area_map = lattice_map(30, 30)
    X = DesignMatrix.from_covariates(rng.randn(900))
    y = X.values.dot([1.0, 1.0]) + rng.randn(900)
    spec = ModelSpec(mcmc=McmcConfig(n_iter=60, n_burn=10, seed=1))

    started = time.perf_counter()
    fit_spock(y, X, area_map.centroids, area_map.adjacency, spec)
    spock_time = time.perf_counter() - started
    started = time.perf_counter()
    fit_rhz(y, X, area_map.adjacency, spec)
    rhz_time = time.perf_counter() - started
    assert rhz_time >= 5 * spock_time
