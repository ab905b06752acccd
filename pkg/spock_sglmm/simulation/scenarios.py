"""Data generating scenarios of the confounding simulation study.

Every scenario uses the design ``X = [1, X1, X2]`` with ``X1`` drawn iid
standard normal for every replicate and the response
``y = X beta + theta + e`` with ``e ~ N(0, tau_e)`` (precision). The
scenarios differ in ``X2`` and in the prior of the spatial effect:

=====================  =====================  ===========================
scenario               X2                     theta
=====================  =====================  ===========================
``icar_spatial_x``     first coordinate s1    ICAR, precision tau_theta Q
``rhz``                first coordinate s1    precision tau_theta P Q P
``icar_nonspatial_x``  iid standard normal    ICAR, precision tau_theta Q
=====================  =====================  ===========================
"""

from collections import namedtuple

import numpy as np
from nengo.params import Default

from spock_sglmm.exceptions import DimensionMismatch, InvalidParameter
from spock_sglmm.geometry import DesignMatrix, as_design
from spock_sglmm.maps import lattice_map
from spock_sglmm.params import (
    ConfigObject,
    EnumParam,
    IntParam,
    NumberParam,
    StringParam,
    TupleParam,
)
from spock_sglmm.precisions import icar_precision
from spock_sglmm.simulation.effects import IntrinsicGmrfEffects, rhz_precision
from spock_sglmm.typechecks import substream

SCENARIOS = ("icar_spatial_x", "rhz", "icar_nonspatial_x")

#: The (tau_e, tau_theta) settings of the study.
PRECISION_SETTINGS = ((0.2, 1.0), (1.0, 1.0), (1.0, 0.2))

COVARIATE_NAMES = ("x1", "x2")


class ScenarioConfig(ConfigObject):
    """Settings of one simulation scenario.

    Parameters
    ----------
    scenario : {"icar_spatial_x", "rhz", "icar_nonspatial_x"}, optional
        Data generating process (Default: "rhz").
    beta : tuple of 3 float, optional (Default: (2, 1, -1))
        Coefficients of intercept, ``X1`` and ``X2``.
    tau_e : float, optional (Default: 1.0)
        Observation precision.
    tau_theta : float, optional (Default: 0.2)
        Precision of the spatial effect.
    n_replicates : int, optional (Default: 200)
        Number of simulated data sets.
    seed : int, optional (Default: 0)
        Seed of the study. Replicate *i* uses the sub-stream ``(seed, i)``.
    lattice_rows, lattice_cols : int, optional (Default: 14)
        Size of the rook lattice used when no map files are given.
    centroid_path, adjacency_path : str, optional
        Map files (see `spock_sglmm.io.load_map`) replacing the lattice.
    """

    scenario = EnumParam("scenario", default="rhz", values=SCENARIOS, readonly=True)
    beta = TupleParam("beta", default=(2.0, 1.0, -1.0), length=3, readonly=True)
    tau_e = NumberParam("tau_e", default=1.0, low=0, low_open=True, readonly=True)
    tau_theta = NumberParam(
        "tau_theta", default=0.2, low=0, low_open=True, readonly=True
    )
    n_replicates = IntParam("n_replicates", default=200, low=1, readonly=True)
    seed = IntParam("seed", default=0, low=0, readonly=True)
    lattice_rows = IntParam("lattice_rows", default=14, low=1, readonly=True)
    lattice_cols = IntParam("lattice_cols", default=14, low=1, readonly=True)
    centroid_path = StringParam(
        "centroid_path", default=None, optional=True, readonly=True
    )
    adjacency_path = StringParam(
        "adjacency_path", default=None, optional=True, readonly=True
    )

    def __init__(
        self,
        scenario=Default,
        beta=Default,
        tau_e=Default,
        tau_theta=Default,
        n_replicates=Default,
        seed=Default,
        lattice_rows=Default,
        lattice_cols=Default,
        centroid_path=Default,
        adjacency_path=Default,
    ):
        super(ScenarioConfig, self).__init__()
        self.scenario = scenario
        self.beta = beta
        self.tau_e = tau_e
        self.tau_theta = tau_theta
        self.n_replicates = n_replicates
        self.seed = seed
        self.lattice_rows = lattice_rows
        self.lattice_cols = lattice_cols
        self.centroid_path = centroid_path
        self.adjacency_path = adjacency_path

        if (self.centroid_path is None) != (self.adjacency_path is None):
            raise InvalidParameter(
                "Give both the centroid and the adjacency file or neither.",
                attr="centroid_path",
                obj=self,
            )

    def build_map(self):
        """The map of the study: the given files or the rook lattice."""
        if self.centroid_path is not None:
            from spock_sglmm.io import load_map

            return load_map(self.centroid_path, self.adjacency_path)
        return lattice_map(self.lattice_rows, self.lattice_cols)


Replicate = namedtuple("Replicate", ["replicate_id", "y", "X", "theta"])
Replicate.__doc__ = """One simulated data set.

Attributes
----------
replicate_id : int
y : (n,) ndarray
    Response.
X : DesignMatrix
    Design ``[1, X1, X2]``.
theta : (n,) ndarray
    Realized spatial effect.
"""


class ScenarioGenerator(object):
    """Draws the replicates of a scenario on a fixed map.

    The eigendecomposition of the ICAR precision is shared by all
    replicates of the ICAR scenarios.
    """

    def __init__(self, cfg, area_map=None):
        self.cfg = cfg
        self.area_map = cfg.build_map() if area_map is None else area_map
        self.Q = icar_precision(self.area_map.adjacency)
        self._icar = None
        if cfg.scenario != "rhz":
            self._icar = IntrinsicGmrfEffects(self.Q, cfg.tau_theta)

    @property
    def n(self):
        return self.area_map.n

    def design(self, rng):
        x1 = rng.standard_normal(self.n)
        if self.cfg.scenario == "icar_nonspatial_x":
            x2 = rng.standard_normal(self.n)
        else:
            x2 = np.array(self.area_map.centroids.s1)
        return DesignMatrix.from_covariates(
            np.column_stack((x1, x2)), names=COVARIATE_NAMES
        )

    def effect(self, X, rng):
        if self._icar is not None:
            effects = self._icar
        else:
            R = rhz_precision(self.Q, X)
            effects = IntrinsicGmrfEffects(R, self.cfg.tau_theta)
        return effects.sample(rng=rng)

    def replicate(self, replicate_id):
        rng = substream(self.cfg.seed, replicate_id)
        X = self.design(rng)
        theta = self.effect(X, rng)
        noise = rng.standard_normal(self.n) / np.sqrt(self.cfg.tau_e)
        y = X.values.dot(self.cfg.beta) + theta + noise
        return Replicate(int(replicate_id), y, X, theta)


def generate_replicate(cfg, replicate_id, area_map=None):
    """Simulate replicate *replicate_id* of the scenario *cfg*.

    The data set is fully determined by ``(cfg.seed, replicate_id)``.

    Returns
    -------
    Replicate
    """
    return ScenarioGenerator(cfg, area_map=area_map).replicate(replicate_id)


def compute_beta_star(beta, X, theta):
    r"""Coefficients :math:`\beta^* = \beta + (X^\top X)^{-1} X^\top \theta`.

    :math:`\beta^*` absorbs the part of the realized spatial effect that
    lies in span(*X*); it is the target of models correcting for spatial
    confounding.

    Raises
    ------
    RankDeficient
        If *X* does not have full column rank.
    """
    X = as_design(X)
    beta = np.asarray(beta, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if beta.shape != (X.q,) or theta.shape != (X.n,):
        raise DimensionMismatch(
            "Need {} coefficients and {} effects, got {} and {}.".format(
                X.q, X.n, beta.size, theta.size
            )
        )
    return beta + np.linalg.lstsq(X.values, theta, rcond=None)[0]
