"""Diagnostics for spatial confounding between covariates and centroids.

The association between the centroid coordinates *s* and the covariates of
*X* (without intercept) is measured by their canonical correlations. A
strong association indicates that a spatial random effect will be
confounded with the fixed effects and a correction is advisable.
"""

import logging

import numpy as np
import scipy.linalg
import scipy.stats
from joblib import Parallel, delayed, effective_n_jobs

from spock_sglmm.exceptions import InvalidParameter, SingularCovariance
from spock_sglmm.geometry import CentroidSet, as_design
from spock_sglmm.typechecks import is_integer, substream

logger = logging.getLogger(__name__)

#: Singular value ratio below which a centered data set counts as singular.
SINGULAR_TOL = 1e-10

#: Smallest number of permutations accepted by `.permutation_test`.
MIN_PERMUTATIONS = 99

#: Permuted statistics within this distance of the observed one count as ties.
TIE_TOL = 1e-12


class DiagnosticReport(object):
    """Result of the confounding diagnostic.

    Attributes
    ----------
    rho : tuple of float
        Canonical correlations in descending order.
    wilks_lambda : float
        Wilks' lambda, the product of ``1 - rho_j**2``.
    f_statistic : float
        Rao's F statistic for Wilks' lambda.
    df : tuple of float
        Numerator and denominator degrees of freedom of *f_statistic*.
    p_asymptotic : float
        Upper tail probability of *f_statistic*.
    p_permutation : float or None
        Permutation p-value of the largest canonical correlation.
    n_permutations : int
        Number of permutations used for *p_permutation*.
    seed : int or None
        Seed of the permutations.
    """

    def __init__(
        self,
        rho,
        wilks_lambda,
        f_statistic,
        df,
        p_asymptotic,
        p_permutation=None,
        n_permutations=0,
        seed=None,
    ):
        self.rho = tuple(float(r) for r in rho)
        self.wilks_lambda = float(wilks_lambda)
        if abs(self.wilks_lambda - np.prod(1.0 - np.square(self.rho))) > 1e-10:
            raise InvalidParameter(
                "Wilks' lambda is inconsistent with the canonical correlations.",
                attr="wilks_lambda",
                obj=self,
            )
        self.f_statistic = float(f_statistic)
        self.df = tuple(float(d) for d in df)
        self.p_asymptotic = float(p_asymptotic)
        self.p_permutation = None if p_permutation is None else float(p_permutation)
        self.n_permutations = int(n_permutations)
        self.seed = seed

    @property
    def rho1(self):
        """The largest canonical correlation."""
        return self.rho[0]

    def correction_recommended(self, alpha=0.05):
        """Whether the permutation p-value is below *alpha*."""
        if self.p_permutation is None:
            raise InvalidParameter(
                "The report has no permutation p-value.", attr="p_permutation"
            )
        return self.p_permutation < alpha

    def verdict(self, alpha=0.05):
        """One-line human readable summary."""
        if self.correction_recommended(alpha):
            decision = "correction recommended"
        else:
            decision = "no correction needed"
        return "{} (rho1 = {:.3f}, permutation p = {:.4g}, alpha = {:g})".format(
            decision, self.rho1, self.p_permutation, alpha
        )

    def with_permutation(self, p_permutation, n_permutations, seed):
        return DiagnosticReport(
            self.rho,
            self.wilks_lambda,
            self.f_statistic,
            self.df,
            self.p_asymptotic,
            p_permutation=p_permutation,
            n_permutations=n_permutations,
            seed=seed,
        )

    def to_dict(self):
        """Plain JSON types; an infinite F statistic (wilks_lambda = 0) is None."""
        f_statistic = self.f_statistic if np.isfinite(self.f_statistic) else None
        return {
            "rho": list(self.rho),
            "wilks_lambda": self.wilks_lambda,
            "f_statistic": f_statistic,
            "df": list(self.df),
            "p_asymptotic": self.p_asymptotic,
            "p_permutation": self.p_permutation,
            "n_permutations": self.n_permutations,
            "seed": self.seed,
        }

    def __repr__(self):
        return "DiagnosticReport(rho={}, wilks_lambda={:.4g}, p={:.4g})".format(
            self.rho, self.wilks_lambda, self.p_asymptotic
        )


def _orthonormal_centered(data, name):
    data = np.asarray(data, dtype=float)
    centered = data - data.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[0] <= 0.0 or sv[-1] / sv[0] < SINGULAR_TOL:
        raise SingularCovariance(
            "The covariance matrix of {} is singular.".format(name)
        )
    q, _ = scipy.linalg.qr(centered, mode="economic")
    return q


def _centroid_and_covariate_bases(s, X):
    coords = s.coords if isinstance(s, CentroidSet) else np.asarray(s, dtype=float)
    X = as_design(X)
    covariates = X.covariates
    if covariates.shape[1] == 0:
        raise SingularCovariance("The design matrix has no non-constant covariate.")
    if len(coords) != X.n:
        raise InvalidParameter(
            "Got {} centroids for {} design matrix rows.".format(len(coords), X.n),
            attr="s",
        )
    if X.n <= X.q + 2:
        raise SingularCovariance(
            "Need more than {} areas for {} design columns.".format(X.q + 2, X.q)
        )
    return (
        _orthonormal_centered(coords, "the centroids"),
        _orthonormal_centered(covariates, "the covariates"),
    )


def _correlations(qs, qx):
    rho = np.linalg.svd(np.dot(qs.T, qx), compute_uv=False)
    return np.clip(rho[: min(2, qx.shape[1])], 0.0, 1.0)


def canonical_correlations(s, X):
    """Canonical correlations between the centroids and the covariates.

    Both sets are column-centered and constant columns (the intercept) of
    *X* are dropped. The correlations are the singular values of
    :math:`Q_s^\\top Q_x` for orthonormal bases of the centered sets, which
    are the square roots of the eigenvalues of
    :math:`S_{ss}^{-1/2} S_{sx} S_{xx}^{-1} S_{xs} S_{ss}^{-1/2}`.

    Returns
    -------
    (min(2, q_nc),) ndarray
        Canonical correlations in descending order.
    """
    return _correlations(*_centroid_and_covariate_bases(s, X))


def rao_f(wilks_lambda, n, p, q):
    """Rao's F approximation to Wilks' lambda.

    Parameters
    ----------
    wilks_lambda : float
        Value of Wilks' lambda.
    n : int
        Number of observations.
    p : int
        Number of response columns.
    q : int
        Number of (non-intercept) predictor columns.

    Returns
    -------
    f_statistic, df1, df2, p_value : float
    """
    w = n - 1.0 - (p + q + 1.0) / 2.0
    if p * p + q * q - 5 > 0:
        t = np.sqrt((p * p * q * q - 4.0) / (p * p + q * q - 5.0))
    else:
        t = 1.0
    df1 = float(p * q)
    df2 = w * t - (p * q - 2.0) / 2.0
    if wilks_lambda <= 0.0:
        return np.inf, df1, df2, 0.0
    root = wilks_lambda ** (1.0 / t)
    f_statistic = max((1.0 - root) / root * df2 / df1, 0.0)
    return f_statistic, df1, df2, float(scipy.stats.f.sf(f_statistic, df1, df2))


def wilks_test(s, X):
    """Asymptotic test of no linear association between *s* and *X*.

    Returns
    -------
    DiagnosticReport
        Report without permutation p-value.
    """
    qs, qx = _centroid_and_covariate_bases(s, X)
    rho = _correlations(qs, qx)
    wilks_lambda = float(np.prod(1.0 - np.square(rho)))
    f_statistic, df1, df2, p_value = rao_f(
        wilks_lambda, qs.shape[0], qs.shape[1], qx.shape[1]
    )
    return DiagnosticReport(rho, wilks_lambda, f_statistic, (df1, df2), p_value)


def _permuted_rho1(qs, qx, seed, indices):
    stats = np.empty(len(indices))
    for i, index in enumerate(indices):
        perm = substream(seed, index).permutation(len(qx))
        stats[i] = _correlations(qs, qx[perm])[0]
    return stats


def permutation_distribution(s, X, n_perm=999, seed=0, n_jobs=1):
    """Largest canonical correlation for *n_perm* row permutations of *X*.

    Permutation *i* is drawn from its own random stream derived from
    ``(seed, i)``, so the result does not depend on *n_jobs*.
    """
    if not is_integer(n_perm) or n_perm < MIN_PERMUTATIONS:
        raise InvalidParameter(
            "Need at least {} permutations, got {!r}.".format(MIN_PERMUTATIONS, n_perm),
            attr="n_perm",
        )
    qs, qx = _centroid_and_covariate_bases(s, X)
    # permuting rows of X permutes rows of its centered orthonormal basis
    n_chunks = max(1, min(effective_n_jobs(n_jobs), n_perm))
    chunks = np.array_split(np.arange(n_perm), n_chunks)
    parts = Parallel(n_jobs=n_jobs)(
        delayed(_permuted_rho1)(qs, qx, seed, chunk) for chunk in chunks
    )
    return np.concatenate(parts)


def permutation_test(s, X, n_perm=999, seed=0, n_jobs=1):
    """Permutation p-value of the largest canonical correlation.

    Returns
    -------
    float
        ``(1 + #{permuted rho1 >= observed rho1}) / (1 + n_perm)``.
    """
    observed = canonical_correlations(s, X)[0]
    stats = permutation_distribution(s, X, n_perm=n_perm, seed=seed, n_jobs=n_jobs)
    exceed = int(np.sum(stats >= observed - TIE_TOL))
    return (1.0 + exceed) / (1.0 + n_perm)


def diagnose(s, X, n_perm=999, seed=0, n_jobs=1):
    """Run the asymptotic and the permutation test.

    Returns
    -------
    DiagnosticReport
    """
    report = wilks_test(s, X)
    p_permutation = permutation_test(s, X, n_perm=n_perm, seed=seed, n_jobs=n_jobs)
    report = report.with_permutation(p_permutation, n_perm, seed)
    logger.info(
        "Canonical correlations %s, Wilks' lambda %.4g, p=%.4g (asymptotic), "
        "p=%.4g (%d permutations)",
        np.round(report.rho, 4),
        report.wilks_lambda,
        report.p_asymptotic,
        report.p_permutation,
        n_perm,
    )
    return report
