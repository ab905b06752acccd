"""Dense reference computations and assertions for unit testing."""

import itertools

import numpy as np
import scipy.linalg

from spock_sglmm.graph import NeighborhoodGraph


def path_graph(n):
    """Path ``0 - 1 - ... - (n - 1)``."""
    return NeighborhoodGraph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n):
    """Cycle on *n* areas."""
    return NeighborhoodGraph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return NeighborhoodGraph(n, list(itertools.combinations(range(n), 2)))


def random_connected_graph(n, rng, extra_edges=None):
    """Random spanning tree on *n* areas plus *extra_edges* random edges."""
    if extra_edges is None:
        extra_edges = n
    order = rng.permutation(n)
    edges = [(order[i], order[rng.randint(i)]) for i in range(1, n)]
    for _ in range(extra_edges):
        i, j = rng.choice(n, size=2, replace=False)
        edges.append((i, j))
    return NeighborhoodGraph(n, edges)


def residual_maker(X):
    r"""Dense :math:`I - X (X^\top X)^{-1} X^\top` by explicit inversion."""
    X = np.asarray(X, dtype=float)
    return np.eye(len(X)) - X.dot(np.linalg.inv(X.T.dot(X))).dot(X.T)


def brute_force_knn(coords, k):
    """Knn graph from a full sort of the distances of every area.

    Ties are ordered by area index; the directed relation is symmetrized by
    union.
    """
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    k = np.broadcast_to(k, (n,))
    edges = set()
    for i in range(n):
        others = sorted(
            (float(np.sum((coords[i] - coords[j]) ** 2)), j) for j in range(n) if j != i
        )
        for _, j in others[: k[i]]:
            edges.add((min(i, j), max(i, j)))
    return NeighborhoodGraph(n, sorted(edges))


def _in_circle(a, b, c, d):
    """Positive if *d* lies strictly inside the circumcircle of *a, b, c*."""
    m = np.array(
        [
            [a[0] - d[0], a[1] - d[1], (a[0] - d[0]) ** 2 + (a[1] - d[1]) ** 2],
            [b[0] - d[0], b[1] - d[1], (b[0] - d[0]) ** 2 + (b[1] - d[1]) ** 2],
            [c[0] - d[0], c[1] - d[1], (c[0] - d[0]) ** 2 + (c[1] - d[1]) ** 2],
        ]
    )
    orientation = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return np.linalg.det(m) * np.sign(orientation)


def brute_force_delaunay(coords):
    """Delaunay graph from an empty-circumcircle check of every triangle.

    Only valid for point sets without four cocircular points.
    """
    coords = np.asarray(coords, dtype=float)
    n = len(coords)
    edges = set()
    for i, j, k in itertools.combinations(range(n), 3):
        a, b, c = coords[i], coords[j], coords[k]
        orientation = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if orientation == 0.0:
            continue
        if all(
            _in_circle(a, b, c, coords[m]) <= 0.0
            for m in range(n)
            if m not in (i, j, k)
        ):
            edges.update(((i, j), (j, k), (i, k)))
    return NeighborhoodGraph(n, sorted(edges))


def gaussian_posterior(
    y, X, Z, R, tau_e, tau_theta, beta_precision=0.0, constraints=None
):
    r"""Exact posterior of :math:`(\beta, \theta)` with fixed precisions.

    The model is :math:`y = X\beta + Z\theta + e` with
    :math:`e \sim N(0, (\tau_e I)^{-1})`, :math:`\beta \sim N(0, (b I)^{-1})`
    and :math:`\theta \sim N(0, (\tau_\theta R)^{-1})`, optionally
    conditioned on :math:`C\theta = 0` for the rows *C* of *constraints*.

    Returns
    -------
    mean : (q + m,) ndarray
    cov : (q + m, q + m) ndarray
    """
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    R = np.asarray(R, dtype=float)
    q, m = X.shape[1], Z.shape[1]

    B = np.eye(m)
    if constraints is not None:
        B = scipy.linalg.null_space(np.atleast_2d(constraints))
    W = np.column_stack((X, Z.dot(B)))
    prior = scipy.linalg.block_diag(
        beta_precision * np.eye(q), tau_theta * B.T.dot(R).dot(B)
    )
    precision = tau_e * W.T.dot(W) + prior
    cov_reduced = np.linalg.inv(precision)
    mean_reduced = cov_reduced.dot(tau_e * W.T.dot(y))

    T = scipy.linalg.block_diag(np.eye(q), B)
    return T.dot(mean_reduced), T.dot(cov_reduced).dot(T.T)


def pseudo_inverse_covariance(Q, tau=1.0):
    """Covariance of an intrinsic GMRF with precision ``tau * Q``."""
    Q = Q.toarray() if hasattr(Q, "toarray") else np.asarray(Q, dtype=float)
    return np.linalg.pinv(Q, hermitian=True) / tau


def dense_logdet(Q):
    Q = Q.toarray() if hasattr(Q, "toarray") else np.asarray(Q, dtype=float)
    sign, logdet = np.linalg.slogdet(Q)
    assert sign > 0
    return logdet


def batch_mean_se(draws, n_batches=50):
    """Monte Carlo standard error of the column means by batch means."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, np.newaxis]
    size = len(draws) // n_batches
    batches = draws[: size * n_batches].reshape(n_batches, size, -1).mean(axis=1)
    return batches.std(axis=0, ddof=1) / np.sqrt(n_batches)


def assert_mcse_close(draws, target, n_se=3.0, atol=0.0, n_batches=50):
    """Test that posterior means are within *n_se* Monte Carlo SEs of *target*.

    Parameters
    ----------
    draws : (N, d) array_like
        Retained MCMC draws.
    target : (d,) array_like
        Exact posterior mean.
    n_se : float, optional
        Number of tolerated Monte Carlo standard errors.
    atol : float, optional
        Additional absolute tolerance.
    """
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 1:
        draws = draws[:, np.newaxis]
    error = np.abs(draws.mean(axis=0) - np.ravel(target))
    bound = n_se * batch_mean_se(draws, n_batches=n_batches) + atol
    worst = np.argmax(error - bound)
    assert np.all(error <= bound), (
        "Posterior mean off by {:.4g} at index {} (bound {:.4g})".format(
            error[worst], worst, bound[worst]
        )
    )
