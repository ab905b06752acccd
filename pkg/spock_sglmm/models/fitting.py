"""Fitting the linear model and the four spatial models."""

import logging
import time

import numpy as np

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter, NegativeCount
from spock_sglmm.geometry import as_design
from spock_sglmm.models.config import ModelSpec
from spock_sglmm.models.fit import ModelFit
from spock_sglmm.models.gaussian import GaussianSampler
from spock_sglmm.models.latent import (
    hh_latent,
    rhz_latent,
    sparse_latent,
    spock_latent,
)
from spock_sglmm.models.poisson import PoissonSampler
from spock_sglmm.typechecks import as_generator

logger = logging.getLogger(__name__)


def _as_spec(spec, method):
    if spec is None:
        return ModelSpec(method=method)
    if isinstance(spec, dict):
        spec = ModelSpec.from_dict(spec)
    if spec.method != method:
        spec = spec.replace(method=method)
    return spec


def _check_response(y, X, spec, offset):
    y = np.asarray(y, dtype=float)
    if y.ndim != 1 or len(y) != X.n:
        raise DimensionMismatch(
            "Got {} responses for {} design matrix rows.".format(y.size, X.n)
        )
    if not np.all(np.isfinite(y)):
        raise InvalidParameter("Response contains non-finite values.", attr="y")
    if spec.family == "poisson":
        if np.any(y < 0) or np.any(y != np.round(y)):
            raise NegativeCount("Poisson responses must be non-negative integers.")
    if offset is not None:
        if spec.family != "poisson":
            raise InvalidParameter("Offsets require the Poisson family.", attr="offset")
        offset = np.asarray(offset, dtype=float)
        if offset.shape != y.shape:
            raise DimensionMismatch("Offset must have one value per area.")
        if not np.all(np.isfinite(offset)):
            raise InvalidParameter("Offset contains non-finite values.", attr="offset")
    return y, offset


def _run(y, X, latent, spec, offset, started):
    if spec.family == "gaussian":
        sampler = GaussianSampler(y, X, latent, spec)
    else:
        sampler = PoissonSampler(y, X, latent, spec, offset=offset)
    draws = sampler.run(as_generator(spec.mcmc.seed))
    info = sampler.diagnostics()
    if latent is not None:
        info["rank"] = latent.rank
        if latent.graph is not None:
            info["n_edges"] = int(latent.graph.n_edges)
    wall_time = time.perf_counter() - started

    logger.info(
        "Fitted %s %s model (n=%d, q=%d, spatial dim=%s) in %.3f s",
        spec.family,
        spec.method,
        X.n,
        X.q,
        "-" if latent is None else latent.dim,
        wall_time,
    )
    return ModelFit(
        spec,
        draws["beta"],
        X.names,
        theta_draws=draws["theta"],
        tau_e_draws=draws["tau_e"],
        tau_theta_draws=draws["tau_theta"],
        spatial_parameter_draws=draws["spatial_parameter"],
        basis=None if latent is None else latent.basis,
        wall_time=wall_time,
        info=info,
    )


def fit_lm(y, X, spec=None, offset=None):
    """Fit the non-spatial generalized linear model.

    Parameters
    ----------
    y : (n,) array_like
        Response.
    X : DesignMatrix or (n, q) array_like
        Full-rank design matrix.
    spec : ModelSpec, optional
        Family, priors and chain settings.
    offset : (n,) array_like, optional
        Log expected counts of a Poisson model.

    Returns
    -------
    ModelFit
    """
    started = time.perf_counter()
    spec = _as_spec(spec, "lm")
    X = as_design(X)
    y, offset = _check_response(y, X, spec, offset)
    return _run(y, X, None, spec, offset, started)


def fit_icar(y, X, g, spec=None, offset=None):
    """Fit the spatial model with a CAR effect on the original graph *g*.

    The precision family is ``spec.spatial_family``. Intrinsic effects are
    centered within every connected component of *g*.
    """
    started = time.perf_counter()
    spec = _as_spec(spec, "icar")
    X = as_design(X)
    y, offset = _check_response(y, X, spec, offset)
    if g.n != X.n:
        raise DimensionMismatch(
            "Graph has {} areas but there are {} observations.".format(g.n, X.n)
        )
    latent = sparse_latent(g, spec.spatial_family, method="icar")
    return _run(y, X, latent, spec, offset, started)


def fit_rhz(y, X, g, spec=None, offset=None):
    """Fit the restricted spatial model on the complement of span(*X*).

    The spatial effect is :math:`L \\theta` for an orthonormal basis *L*
    of the orthogonal complement of the columns of *X*, with prior
    precision :math:`\\tau_\\theta L^\\top Q L`.
    """
    started = time.perf_counter()
    spec = _as_spec(spec, "rhz")
    X = as_design(X)
    y, offset = _check_response(y, X, spec, offset)
    latent = rhz_latent(g, X)
    return _run(y, X, latent, spec, offset, started)


def fit_hh(y, X, g, spec=None, offset=None):
    """Fit the spatial model on the leading Moran eigenvectors.

    The spatial effect is :math:`M \\theta` with the ``spec.h`` leading
    eigenvectors *M* of the Moran operator and prior precision
    :math:`\\tau_\\theta M^\\top Q M`.
    """
    started = time.perf_counter()
    spec = _as_spec(spec, "hh")
    X = as_design(X)
    y, offset = _check_response(y, X, spec, offset)
    latent = hh_latent(g, X, h=spec.h)
    return _run(y, X, latent, spec, offset, started)


def fit_spock(y, X, s, g, spec=None, offset=None):
    """Fit the spatial model on the graph rebuilt from projected centroids.

    The centroids *s* are projected onto the orthogonal complement of
    span(*X*) and a new graph is rebuilt from them, by default by
    connecting every area to as many nearest projected neighbors as it has
    in *g*. The spatial effect keeps one coefficient per area with the
    sparse precision of ``spec.spatial_family`` on the new graph.
    """
    started = time.perf_counter()
    spec = _as_spec(spec, "spock")
    X = as_design(X)
    y, offset = _check_response(y, X, spec, offset)
    latent = spock_latent(
        s,
        X,
        g,
        spec.spatial_family,
        method=spec.reconstruction,
        k=spec.k_override,
    )
    return _run(y, X, latent, spec, offset, started)


def fit_model(y, X, area_map, spec, offset=None):
    """Fit the model named by ``spec.method`` on the areas of *area_map*.

    Returns
    -------
    ModelFit
        With the area ids of *area_map*.
    """
    if isinstance(spec, dict):
        spec = ModelSpec.from_dict(spec)
    g = area_map.adjacency
    if spec.method == "lm":
        fit = fit_lm(y, X, spec, offset=offset)
    elif spec.method == "icar":
        fit = fit_icar(y, X, g, spec, offset=offset)
    elif spec.method == "rhz":
        fit = fit_rhz(y, X, g, spec, offset=offset)
    elif spec.method == "hh":
        fit = fit_hh(y, X, g, spec, offset=offset)
    else:
        fit = fit_spock(y, X, area_map.centroids, g, spec, offset=offset)
    fit.area_ids = tuple(area_map.area_ids)
    return fit
