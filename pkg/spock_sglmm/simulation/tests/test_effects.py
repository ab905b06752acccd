import numpy as np
import pytest

from spock_sglmm.exceptions import InvalidParameter
from spock_sglmm.geometry import DesignMatrix
from spock_sglmm.graph import NeighborhoodGraph, connected_components
from spock_sglmm.maps import lattice_map
from spock_sglmm.precisions import icar_precision
from spock_sglmm.simulation import (
    IntrinsicGmrfEffects,
    rhz_precision,
    sample_icar_effect,
    sample_rhz_effect,
)
from spock_sglmm.testing import path_graph, pseudo_inverse_covariance


def test_icar_effects_are_centered_per_component(rng):
    g = NeighborhoodGraph(7, [(0, 1), (1, 2), (3, 4), (4, 5), (5, 6), (3, 6)])
    _, labels = connected_components(g)
    draws = sample_icar_effect(icar_precision(g), 2.0, seed=rng, size=50)
    assert draws.shape == (50, 7)
    for c in np.unique(labels):
        assert np.max(np.abs(draws[:, labels == c].mean(axis=1))) < 1e-10


def test_icar_covariance_matches_pseudo_inverse():
    Q = icar_precision(path_graph(4))
    draws = sample_icar_effect(Q, 1.5, seed=3, size=100000)
    expected = pseudo_inverse_covariance(Q, tau=1.5)
    empirical = draws.T.dot(draws) / len(draws)
    assert np.allclose(empirical, expected, atol=0.02 * np.max(np.abs(expected)))


def test_precision_scaling():
    Q = icar_precision(lattice_map(3, 3).adjacency)
    var1 = sample_icar_effect(Q, 1.0, seed=1, size=100000).var(axis=0)
    var2 = sample_icar_effect(Q, 2.0, seed=2, size=100000).var(axis=0)
    assert np.all((var2 / var1 >= 0.48) & (var2 / var1 <= 0.52))


def test_generator_interface(rng):
    Q = icar_precision(path_graph(5))
    effects = IntrinsicGmrfEffects(Q, 1.0, rng=rng)
    assert effects.rank == 4
    assert effects.nullity == 1
    v = next(effects)
    assert v.shape == (5,)
    assert np.allclose(effects.covariance(), pseudo_inverse_covariance(Q))

    with pytest.raises(InvalidParameter):
        IntrinsicGmrfEffects(Q, 0.0)


def test_rhz_effects_are_orthogonal_to_covariates(rng):
    area_map = lattice_map(4, 5)
    X = DesignMatrix.from_covariates(
        np.column_stack((rng.randn(20), area_map.centroids.s1))
    )
    Q = icar_precision(area_map.adjacency)
    draws = sample_rhz_effect(Q, X, 0.2, seed=rng, size=20)
    assert np.max(np.abs(draws.dot(X.values))) < 1e-8
    assert np.max(np.abs(draws.mean(axis=1))) < 1e-10

    eigenvalues = np.linalg.eigvalsh(rhz_precision(Q, X))
    null = np.sum(eigenvalues <= 1e-8 * eigenvalues[-1])
    assert null >= X.q


def test_rhz_with_intercept_only_matches_icar():
    Q = icar_precision(path_graph(4))
    X = DesignMatrix(np.ones((4, 1)))
    draws = sample_rhz_effect(Q, X, 1.0, seed=4, size=100000)
    expected = pseudo_inverse_covariance(Q)
    empirical = draws.T.dot(draws) / len(draws)
    assert np.allclose(empirical, expected, atol=0.02 * np.max(np.abs(expected)))
