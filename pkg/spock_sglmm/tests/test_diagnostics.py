import numpy as np
import pytest
from statsmodels.multivariate.manova import MANOVA

from spock_sglmm.diagnostics import (
    DiagnosticReport,
    canonical_correlations,
    diagnose,
    permutation_distribution,
    permutation_test,
    rao_f,
    wilks_test,
)
from spock_sglmm.exceptions import InvalidParameter, SingularCovariance
from spock_sglmm.geometry import CentroidSet, DesignMatrix
from spock_sglmm.maps import lattice_map


def orthogonal_covariate(coords, rng):
    basis = np.column_stack((np.ones(len(coords)), coords))
    x = rng.randn(len(coords))
    return x - basis.dot(np.linalg.lstsq(basis, x, rcond=None)[0])


def test_coordinate_covariate_has_unit_correlation(rng):
    s = CentroidSet(rng.randn(50, 2))
    rho = canonical_correlations(s, DesignMatrix.from_covariates(s.s1))
    assert rho.shape == (1,)
    assert rho[0] == pytest.approx(1.0, abs=1e-10)

    X = DesignMatrix.from_covariates(np.column_stack((s.s1, rng.randn(50))))
    rho = canonical_correlations(s, X)
    assert rho.shape == (2,)
    assert rho[0] == pytest.approx(1.0, abs=1e-10)
    assert 0.0 <= rho[1] < 1.0


def test_orthogonal_covariate_has_zero_correlation(rng):
    s = lattice_map(6, 6).centroids
    X = DesignMatrix.from_covariates(orthogonal_covariate(s.coords, rng))
    report = wilks_test(s, X)
    assert report.rho1 == pytest.approx(0.0, abs=1e-10)
    assert report.wilks_lambda == pytest.approx(1.0)
    assert report.f_statistic == pytest.approx(0.0, abs=1e-10)
    assert report.p_asymptotic == pytest.approx(1.0)


def test_perfect_association_limit(rng):
    s = CentroidSet(rng.randn(40, 2))
    report = wilks_test(s, DesignMatrix.from_covariates(s.s1))
    assert report.wilks_lambda == pytest.approx(0.0, abs=1e-10)
    assert report.p_asymptotic < 1e-10


def test_wilks_matches_statsmodels_manova(rng):
    n = 100
    s = CentroidSet(rng.randn(n, 2))
    x = s.s1 + rng.randn(n)
    report = wilks_test(s, DesignMatrix.from_covariates(x))

    exog = np.column_stack((np.ones(n), x))
    result = MANOVA(endog=s.coords, exog=exog).mv_test(
        hypotheses=[("covariates", np.array([[0.0, 1.0]]), None)]
    )
    table = result.results["covariates"]["stat"]
    assert report.wilks_lambda == pytest.approx(table.loc["Wilks' lambda", "Value"])
    assert report.f_statistic == pytest.approx(
        table.loc["Wilks' lambda", "F Value"], rel=1e-8
    )
    assert report.p_asymptotic == pytest.approx(
        table.loc["Wilks' lambda", "Pr > F"], rel=1e-6, abs=1e-12
    )


def test_wilks_matches_statsmodels_with_two_covariates(rng):
    n = 80
    s = CentroidSet(rng.randn(n, 2))
    covariates = np.column_stack((0.3 * s.s2 + rng.randn(n), rng.randn(n)))
    report = wilks_test(s, DesignMatrix.from_covariates(covariates))

    exog = np.column_stack((np.ones(n), covariates))
    L = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    result = MANOVA(endog=s.coords, exog=exog).mv_test(
        hypotheses=[("covariates", L, None)]
    )
    table = result.results["covariates"]["stat"]
    assert report.df == (
        pytest.approx(table.loc["Wilks' lambda", "Num DF"]),
        pytest.approx(table.loc["Wilks' lambda", "Den DF"]),
    )
    assert report.p_asymptotic == pytest.approx(
        table.loc["Wilks' lambda", "Pr > F"], rel=1e-6, abs=1e-12
    )


def test_rao_f_limits():
    assert rao_f(1.0, 50, 2, 1)[0] == 0.0
    assert rao_f(1.0, 50, 2, 1)[3] == pytest.approx(1.0)
    f_statistic, _, _, p_value = rao_f(0.0, 50, 2, 3)
    assert f_statistic == np.inf
    assert p_value == 0.0


def test_correlation_invariances(rng):
    n = 60
    coords = rng.randn(n, 2)
    covariates = np.column_stack((coords[:, 0] + rng.randn(n), rng.randn(n)))
    rho = canonical_correlations(coords, DesignMatrix.from_covariates(covariates))

    c, s = np.cos(1.1), np.sin(1.1)
    moved = 3.5 * coords.dot([[c, s], [-s, c]]) + [10.0, -4.0]
    transform = np.array([[2.0, 0.5], [-1.0, 3.0]])
    mixed = covariates.dot(transform) + [7.0, 1.0]
    rho2 = canonical_correlations(moved, DesignMatrix.from_covariates(mixed))
    assert np.allclose(rho, rho2, atol=1e-8)

    report = wilks_test(coords, DesignMatrix.from_covariates(covariates))
    assert report.wilks_lambda / np.prod(1.0 - np.square(report.rho)) == (
        pytest.approx(1.0, abs=1e-10)
    )


def test_singular_covariances(rng):
    coords = np.column_stack((np.arange(10.0), 2.0 * np.arange(10.0)))
    with pytest.raises(SingularCovariance):
        canonical_correlations(coords, DesignMatrix.from_covariates(rng.randn(10)))
    with pytest.raises(SingularCovariance):
        canonical_correlations(rng.randn(10, 2), np.ones((10, 1)))
    small = DesignMatrix.from_covariates(rng.randn(5, 2))
    with pytest.raises(SingularCovariance):
        canonical_correlations(rng.randn(5, 2), small)


def test_permutation_p_value_minimum(rng):
    s = CentroidSet(rng.randn(50, 2))
    p = permutation_test(s, DesignMatrix.from_covariates(s.s1), n_perm=999, seed=3)
    assert p == pytest.approx(1.0 / 1000)


def test_permutation_deterministic(rng):
    s = CentroidSet(rng.randn(40, 2))
    X = DesignMatrix.from_covariates(rng.randn(40))
    p1 = permutation_test(s, X, n_perm=199, seed=11)
    p2 = permutation_test(s, X, n_perm=199, seed=11)
    assert p1 == p2

    serial = permutation_distribution(s, X, n_perm=199, seed=11, n_jobs=1)
    parallel = permutation_distribution(s, X, n_perm=199, seed=11, n_jobs=2)
    assert np.array_equal(serial, parallel)


def test_permutation_requires_enough_permutations(rng):
    s = CentroidSet(rng.randn(20, 2))
    with pytest.raises(InvalidParameter):
        permutation_test(s, DesignMatrix.from_covariates(rng.randn(20)), n_perm=50)


def test_null_p_values_are_not_small(rng):
    p_values = []
    for i in range(20):
        s = CentroidSet(rng.randn(100, 2))
        X = DesignMatrix.from_covariates(rng.randn(100))
        p_values.append(permutation_test(s, X, n_perm=99, seed=i))
    assert np.mean(p_values) > 0.3


def test_diagnose_report(rng):
    s = CentroidSet(rng.randn(30, 2))
    report = diagnose(s, DesignMatrix.from_covariates(s.s1), n_perm=99, seed=5)
    assert isinstance(report, DiagnosticReport)
    assert report.correction_recommended(0.05)
    assert report.verdict().startswith("correction recommended")
    assert report.n_permutations == 99
    assert report.seed == 5
    d = report.to_dict()
    assert d["p_permutation"] == pytest.approx(0.01)
    assert set(d) >= {"rho", "wilks_lambda", "f_statistic", "df", "p_asymptotic"}

    with pytest.raises(InvalidParameter):
        wilks_test(s, DesignMatrix.from_covariates(s.s1)).correction_recommended()


@pytest.mark.slow
def test_permutation_calibration(rng):
    rejections = 0
    repeats = 500
    for i in range(repeats):
        s = CentroidSet(rng.randn(200, 2))
        X = DesignMatrix.from_covariates(rng.randn(200))
        rejections += permutation_test(s, X, n_perm=999, seed=i) < 0.05
    assert 0.03 <= rejections / float(repeats) <= 0.07
