"""Configuration of the model samplers.

All configuration objects are frozen and convert losslessly to plain dicts,
which is the form written into output files and shipped to workers.
"""

from nengo.params import Default

from spock_sglmm.exceptions import InvalidParameter
from spock_sglmm.params import (
    BoolParam,
    ConfigObject,
    ConfigParam,
    EnumParam,
    IntParam,
    NumberParam,
)
from spock_sglmm.precisions import IcarFamily, PrecisionFamilyParam

METHODS = ("lm", "icar", "rhz", "hh", "spock")
FAMILIES = ("gaussian", "poisson")
RECONSTRUCTIONS = ("knn", "delaunay")


class PriorConfig(ConfigObject):
    r"""Prior hyperparameters shared by all models.

    All normal distributions use the precision parameterization.

    Parameters
    ----------
    beta_precision : float, optional (Default: 1e-6)
        Prior precision of every fixed effect, :math:`\beta_j \sim N(0, b)`.
        Zero gives a flat prior.
    tau_shape : float, optional (Default: 0.5)
        Shape of the Gamma prior of :math:`\tau_e` and :math:`\tau_\theta`.
    tau_rate : float, optional (Default: 0.0005)
        Rate of the Gamma prior of :math:`\tau_e` and :math:`\tau_\theta`.
    """

    beta_precision = NumberParam("beta_precision", default=1e-6, low=0, readonly=True)
    tau_shape = NumberParam(
        "tau_shape", default=0.5, low=0, low_open=True, readonly=True
    )
    tau_rate = NumberParam(
        "tau_rate", default=0.0005, low=0, low_open=True, readonly=True
    )

    def __init__(self, beta_precision=Default, tau_shape=Default, tau_rate=Default):
        super(PriorConfig, self).__init__()
        self.beta_precision = beta_precision
        self.tau_shape = tau_shape
        self.tau_rate = tau_rate


class McmcConfig(ConfigObject):
    """Length, thinning and seeding of a Markov chain.

    Parameters
    ----------
    n_iter : int, optional (Default: 10000)
        Total number of iterations, including burn-in.
    n_burn : int, optional (Default: 2000)
        Number of discarded initial iterations. Proposal scales of the
        Poisson sampler are adapted during these iterations only.
    thin : int, optional (Default: 1)
        Keep every *thin*-th iteration after burn-in.
    seed : int, optional (Default: None)
        Seed of the chain. Without a seed the chain is not reproducible.
    rw_scale : float, optional (Default: 0.1)
        Initial standard deviation of the random-walk proposals for the
        spatial effects of Poisson models.
    adapt : bool, optional (Default: True)
        Whether proposal scales are tuned during burn-in.
    """

    n_iter = IntParam("n_iter", default=10000, low=1, readonly=True)
    n_burn = IntParam("n_burn", default=2000, low=0, readonly=True)
    thin = IntParam("thin", default=1, low=1, readonly=True)
    seed = IntParam("seed", default=None, low=0, optional=True, readonly=True)
    rw_scale = NumberParam("rw_scale", default=0.1, low=0, low_open=True, readonly=True)
    adapt = BoolParam("adapt", default=True, readonly=True)

    def __init__(
        self,
        n_iter=Default,
        n_burn=Default,
        thin=Default,
        seed=Default,
        rw_scale=Default,
        adapt=Default,
    ):
        super(McmcConfig, self).__init__()
        self.n_iter = n_iter
        self.n_burn = n_burn
        self.thin = thin
        self.seed = seed
        self.rw_scale = rw_scale
        self.adapt = adapt

        if self.n_iter <= self.n_burn:
            raise InvalidParameter(
                "Need more iterations ({}) than burn-in iterations ({}).".format(
                    self.n_iter, self.n_burn
                ),
                attr="n_iter",
                obj=self,
            )

    @property
    def kept(self):
        """Iterations whose state is retained."""
        return range(self.n_burn, self.n_iter, self.thin)

    @property
    def n_draws(self):
        return len(self.kept)

    def with_seed(self, seed):
        d = self.to_dict()
        d["seed"] = seed
        return McmcConfig.from_dict(d)


class ModelSpec(ConfigObject):
    """Which model to fit and how.

    Parameters
    ----------
    family : {"gaussian", "poisson"}, optional (Default: "gaussian")
        Response distribution (with canonical link).
    method : {"lm", "icar", "rhz", "hh", "spock"}, optional (Default: "spock")
        The model. ``"rhz"`` and ``"hh"`` only support the ICAR precision.
    spatial_family : AbstractPrecisionFamily or str, optional (Default: ICAR)
        Precision family of the spatial effect for ``"icar"`` and
        ``"spock"``.
    h : int, optional (Default: None)
        Number of Moran eigenvectors for ``"hh"``. Defaults to
        `.default_moran_rank`.
    priors : PriorConfig, optional
        Prior hyperparameters.
    mcmc : McmcConfig, optional
        Chain settings.
    fixed_tau_e : float, optional (Default: None)
        Hold the observation precision (Gaussian only) at this value.
    fixed_tau_theta : float, optional (Default: None)
        Hold the spatial precision at this value.
    learn_spatial_parameter : bool, optional (Default: False)
        Sample the parameter of the proper CAR or Leroux family on a grid
        instead of holding it at the value of *spatial_family*.
    reconstruction : {"knn", "delaunay"}, optional (Default: "knn")
        How ``"spock"`` rebuilds the graph from the projected centroids.
    k_override : int, optional (Default: None)
        Use this neighbor count for every area in the Knn reconstruction
        instead of the original degrees.
    """

    family = EnumParam("family", default="gaussian", values=FAMILIES, readonly=True)
    method = EnumParam("method", default="spock", values=METHODS, readonly=True)
    spatial_family = PrecisionFamilyParam(
        "spatial_family", default=IcarFamily(), readonly=True
    )
    h = IntParam("h", default=None, low=1, optional=True, readonly=True)
    priors = ConfigParam("priors", PriorConfig, default=PriorConfig(), readonly=True)
    mcmc = ConfigParam("mcmc", McmcConfig, default=McmcConfig(), readonly=True)
    fixed_tau_e = NumberParam(
        "fixed_tau_e", default=None, low=0, low_open=True, optional=True, readonly=True
    )
    fixed_tau_theta = NumberParam(
        "fixed_tau_theta",
        default=None,
        low=0,
        low_open=True,
        optional=True,
        readonly=True,
    )
    learn_spatial_parameter = BoolParam(
        "learn_spatial_parameter", default=False, readonly=True
    )
    reconstruction = EnumParam(
        "reconstruction", default="knn", values=RECONSTRUCTIONS, readonly=True
    )
    k_override = IntParam(
        "k_override", default=None, low=1, optional=True, readonly=True
    )

    def __init__(
        self,
        family=Default,
        method=Default,
        spatial_family=Default,
        h=Default,
        priors=Default,
        mcmc=Default,
        fixed_tau_e=Default,
        fixed_tau_theta=Default,
        learn_spatial_parameter=Default,
        reconstruction=Default,
        k_override=Default,
    ):
        super(ModelSpec, self).__init__()
        self.family = family
        self.method = method
        self.spatial_family = spatial_family
        self.h = h
        self.priors = priors
        self.mcmc = mcmc
        self.fixed_tau_e = fixed_tau_e
        self.fixed_tau_theta = fixed_tau_theta
        self.learn_spatial_parameter = learn_spatial_parameter
        self.reconstruction = reconstruction
        self.k_override = k_override

        if self.method in ("rhz", "hh") and not isinstance(
            self.spatial_family, IcarFamily
        ):
            raise InvalidParameter(
                "Method {!r} only supports the ICAR precision, got {!r}.".format(
                    self.method, self.spatial_family.name
                ),
                attr="spatial_family",
                obj=self,
            )
        if self.h is not None and self.method != "hh":
            raise InvalidParameter(
                "The Moran rank h only applies to method 'hh'.", attr="h", obj=self
            )
        if self.learn_spatial_parameter and (
            self.method not in ("icar", "spock")
            or self.spatial_family.parameter_name is None
        ):
            raise InvalidParameter(
                "Learning the spatial parameter needs method 'icar' or 'spock' "
                "with a proper CAR or Leroux family.",
                attr="learn_spatial_parameter",
                obj=self,
            )
        if self.family == "poisson" and self.fixed_tau_e is not None:
            raise InvalidParameter(
                "Poisson models have no observation precision.",
                attr="fixed_tau_e",
                obj=self,
            )

    @property
    def is_spatial(self):
        return self.method != "lm"

    def replace(self, **fields):
        """Returns a copy with some fields replaced."""
        d = self.to_dict()
        d.update(fields)
        return ModelSpec.from_dict(d)
