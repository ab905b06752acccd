import numpy as np
import pytest
import scipy.stats

from spock_sglmm.geometry import DesignMatrix
from spock_sglmm.graph import NeighborhoodGraph, connected_components
from spock_sglmm.maps import lattice_map
from spock_sglmm.models import (
    McmcConfig,
    ModelSpec,
    fit_hh,
    fit_icar,
    fit_lm,
    fit_rhz,
    fit_spock,
    spock_graph,
)
from spock_sglmm.models.latent import hh_latent, rhz_latent
from spock_sglmm.precisions import LerouxFamily, ProperCarFamily, icar_precision
from spock_sglmm.testing import assert_mcse_close, gaussian_posterior


def grid_data(rng, rows=4, cols=4, tau_e=1.0):
    area_map = lattice_map(rows, cols)
    n = area_map.n
    X = DesignMatrix.from_covariates(rng.randn(n))
    theta = rng.randn(n)
    theta -= theta.mean()
    y = X.values.dot([2.0, 1.0]) + theta + rng.randn(n) / np.sqrt(tau_e)
    return area_map, X, y


def mcmc(n_iter=6000, n_burn=1000, seed=1, **kwargs):
    return McmcConfig(n_iter=n_iter, n_burn=n_burn, seed=seed, **kwargs)


def test_lm_noiseless_recovers_coefficients(rng):
    n = 50
    X = DesignMatrix.from_covariates(rng.randn(n, 2))
    y = X.values.dot([2.0, 1.0, -1.0])
    fit = fit_lm(y, X, ModelSpec(method="lm", mcmc=mcmc(n_iter=2000, n_burn=500)))
    assert np.allclose(fit.beta_draws.mean(axis=0), [2.0, 1.0, -1.0], atol=1e-3)
    assert fit.theta_draws is None
    assert fit.tau_theta_draws is None


def test_lm_matches_conjugate_posterior_mean(rng):
    n = 50
    X = DesignMatrix.from_covariates(rng.randn(n, 2))
    y = X.values.dot([2.0, 1.0, -1.0]) + rng.randn(n)
    fit = fit_lm(y, X, ModelSpec(method="lm", mcmc=mcmc(n_iter=11000)))
    assert fit.n_draws == 10000

    # with a near-flat prior the posterior mean is the least squares solution
    ols = np.linalg.lstsq(X.values, y, rcond=None)[0]
    assert_mcse_close(fit.beta_draws, ols, atol=1e-4)
    assert np.allclose(fit.beta_draws.mean(axis=0), ols, atol=0.02)

    resid = y - X.values.dot(ols)
    shape = 0.5 + 0.5 * n
    # E[tau_e] with beta integrated out has shape reduced by q / 2
    expected_tau = (shape - 1.5) / (0.0005 + 0.5 * np.dot(resid, resid))
    assert np.mean(fit.tau_e_draws) == pytest.approx(expected_tau, rel=0.05)


def test_icar_matches_exact_posterior(rng):
    area_map, X, y = grid_data(rng)
    g = area_map.adjacency
    spec = ModelSpec(
        method="icar",
        fixed_tau_e=1.0,
        fixed_tau_theta=2.0,
        mcmc=mcmc(n_iter=11000),
    )
    fit = fit_icar(y, X, g, spec)

    Q = icar_precision(g).toarray()
    mean, _ = gaussian_posterior(
        y,
        X.values,
        np.eye(g.n),
        Q,
        1.0,
        2.0,
        beta_precision=1e-6,
        constraints=np.ones((1, g.n)),
    )
    draws = np.column_stack((fit.beta_draws, fit.theta_draws))
    assert_mcse_close(draws, mean, n_se=4.0)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.02)
    assert np.all(fit.tau_e_draws == 1.0)
    assert np.all(fit.tau_theta_draws == 2.0)


def test_rhz_matches_exact_posterior(rng):
    area_map, X, y = grid_data(rng)
    g = area_map.adjacency
    spec = ModelSpec(
        method="rhz", fixed_tau_e=1.0, fixed_tau_theta=0.5, mcmc=mcmc(n_iter=11000)
    )
    fit = fit_rhz(y, X, g, spec)

    latent = rhz_latent(g, X)
    mean, _ = gaussian_posterior(
        y, X.values, latent.basis, latent.precision, 1.0, 0.5, beta_precision=1e-6
    )
    draws = np.column_stack((fit.beta_draws, fit.theta_draws))
    assert_mcse_close(draws, mean, n_se=4.0)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.02)


def test_hh_matches_exact_posterior(rng):
    area_map, X, y = grid_data(rng)
    g = area_map.adjacency
    spec = ModelSpec(
        method="hh",
        h=5,
        fixed_tau_e=1.0,
        fixed_tau_theta=0.5,
        mcmc=mcmc(n_iter=11000),
    )
    fit = fit_hh(y, X, g, spec)

    latent = hh_latent(g, X, h=5)
    mean, _ = gaussian_posterior(
        y, X.values, latent.basis, latent.precision, 1.0, 0.5, beta_precision=1e-6
    )
    draws = np.column_stack((fit.beta_draws, fit.theta_draws))
    assert_mcse_close(draws, mean, n_se=4.0)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.02)


def test_hh_with_full_basis_matches_rhz(rng):
    area_map, X, y = grid_data(rng)
    g = area_map.adjacency
    h = g.n - X.q
    rhz = rhz_latent(g, X)
    hh = hh_latent(g, X, h=h)

    effects = []
    for latent in (rhz, hh):
        mean, _ = gaussian_posterior(
            y, X.values, latent.basis, latent.precision, 1.0, 0.5, beta_precision=1e-6
        )
        effects.append((mean[: X.q], latent.basis.dot(mean[X.q :])))
    assert np.allclose(effects[0][0], effects[1][0])
    assert np.allclose(effects[0][1], effects[1][1])

    spec = ModelSpec(
        method="hh",
        h=h,
        fixed_tau_e=1.0,
        fixed_tau_theta=0.5,
        mcmc=mcmc(n_iter=11000),
    )
    fit = fit_hh(y, X, g, spec)
    draws = np.column_stack((fit.beta_draws, fit.spatial_effect_draws()))
    assert_mcse_close(draws, np.concatenate(effects[0]), n_se=4.0, atol=0.01)


def test_spock_matches_exact_posterior(rng):
    area_map, X, y = grid_data(rng)
    s, g = area_map.centroids, area_map.adjacency
    spec = ModelSpec(
        method="spock",
        fixed_tau_e=1.0,
        fixed_tau_theta=2.0,
        mcmc=mcmc(n_iter=11000),
    )
    fit = fit_spock(y, X, s, g, spec)

    rebuilt = spock_graph(s, X, g)
    _, labels = connected_components(rebuilt)
    constraints = np.array([labels == c for c in np.unique(labels)], dtype=float)
    mean, _ = gaussian_posterior(
        y,
        X.values,
        np.eye(g.n),
        icar_precision(rebuilt).toarray(),
        1.0,
        2.0,
        beta_precision=1e-6,
        constraints=constraints,
    )
    draws = np.column_stack((fit.beta_draws, fit.theta_draws))
    assert_mcse_close(draws, mean, n_se=4.0)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.02)


def test_rhz_and_hh_effects_are_orthogonal_to_covariates(rng):
    area_map, X, y = grid_data(rng, rows=5, cols=5)
    g = area_map.adjacency
    short = mcmc(n_iter=300, n_burn=100)
    rhz = fit_rhz(y, X, g, ModelSpec(method="rhz", mcmc=short))
    hh = fit_hh(y, X, g, ModelSpec(method="hh", h=6, mcmc=short))

    assert rhz.theta_draws.shape == (200, 23)
    assert hh.theta_draws.shape == (200, 6)
    for fit in (rhz, hh):
        effects = fit.spatial_effect_draws()
        assert np.max(np.abs(effects.dot(X.values))) < 1e-8


def test_icar_effects_are_centered_per_component(rng):
    g = NeighborhoodGraph(
        9, [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 8)]
    )
    X = DesignMatrix.from_covariates(rng.randn(9))
    y = rng.randn(9)
    spec = ModelSpec(method="icar", mcmc=mcmc(n_iter=400, n_burn=100))
    fit = fit_icar(y, X, g, spec)

    _, labels = connected_components(g)
    for c in np.unique(labels):
        means = fit.theta_draws[:, labels == c].mean(axis=1)
        assert np.max(np.abs(means)) < 1e-10
    assert fit.info["rank"] == 7


def test_strong_spatial_precision_recovers_lm(rng):
    area_map, X, y = grid_data(rng, rows=5, cols=5)
    chain = mcmc(n_iter=9000, n_burn=1000, seed=4)
    lm = fit_lm(y, X, ModelSpec(method="lm", fixed_tau_e=1.0, mcmc=chain))
    icar = fit_icar(
        y,
        X,
        area_map.adjacency,
        ModelSpec(
            method="icar",
            fixed_tau_e=1.0,
            fixed_tau_theta=1e8,
            mcmc=chain.with_seed(5),
        ),
    )
    assert np.max(np.abs(icar.theta_draws)) < 1e-2
    ks = scipy.stats.ks_2samp(lm.beta_draws[:, 1], icar.beta_draws[:, 1])
    assert ks.statistic <= 0.05


def test_same_seed_gives_identical_draws(rng, family):
    area_map, X, y = grid_data(rng)
    spec = ModelSpec(
        method="icar", spatial_family=family, mcmc=mcmc(n_iter=300, n_burn=50, seed=9)
    )
    fit1 = fit_icar(y, X, area_map.adjacency, spec)
    fit2 = fit_icar(y, X, area_map.adjacency, spec)
    assert np.array_equal(fit1.beta_draws, fit2.beta_draws)
    assert np.array_equal(fit1.theta_draws, fit2.theta_draws)
    assert np.array_equal(fit1.tau_theta_draws, fit2.tau_theta_draws)

    reseeded = spec.replace(mcmc=mcmc(n_iter=300, n_burn=50, seed=10))
    other = fit_icar(y, X, area_map.adjacency, reseeded)
    assert not np.array_equal(fit1.beta_draws, other.beta_draws)


def test_thinning(rng):
    area_map, X, y = grid_data(rng)
    spec = ModelSpec(method="icar", mcmc=mcmc(n_iter=1000, n_burn=200, thin=4))
    fit = fit_icar(y, X, area_map.adjacency, spec)
    assert fit.n_draws == 200
    assert fit.tau_e_draws.shape == (200,)


def test_learn_leroux_parameter(rng):
    area_map, X, y = grid_data(rng, rows=6, cols=6)
    spec = ModelSpec(
        method="icar",
        spatial_family=LerouxFamily(0.5),
        learn_spatial_parameter=True,
        mcmc=mcmc(n_iter=600, n_burn=100),
    )
    fit = fit_icar(y, X, area_map.adjacency, spec)
    lam = fit.spatial_parameter_draws
    assert lam.shape == (500,)
    assert np.all((lam > 0.0) & (lam < 1.0))
    assert np.allclose(lam * 100, np.round(lam * 100))
    assert "lam" in fit.scalar_draws()


def test_tau_estimates_are_plausible(rng):
    X = DesignMatrix.from_covariates(rng.randn(100))
    y = X.values.dot([1.0, 0.5]) + rng.randn(100) / np.sqrt(4.0)
    fit = fit_lm(y, X, ModelSpec(method="lm", mcmc=mcmc(n_iter=3000, n_burn=500)))
    lower, upper = np.percentile(fit.tau_e_draws, [0.5, 99.5])
    assert lower < 4.0 < upper


def test_learn_proper_car_parameter_with_island(rng):
    g = NeighborhoodGraph(10, [(i, i + 1) for i in range(8)])
    X = DesignMatrix.from_covariates(rng.randn(10))
    y = X.values.dot([1.0, 0.5]) + rng.randn(10)
    spec = ModelSpec(
        method="icar",
        spatial_family=ProperCarFamily(0.5),
        learn_spatial_parameter=True,
        mcmc=mcmc(n_iter=400, n_burn=100),
    )
    fit = fit_icar(y, X, g, spec)
    rho = fit.spatial_parameter_draws
    assert np.all((rho > -1.0) & (rho < 1.0))
    assert np.all(np.isfinite(fit.theta_draws))
    assert fit.info["rank"] == 9
