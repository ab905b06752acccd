import numpy as np
import scipy.sparse

from spock_sglmm.exceptions import InvalidParameter
from spock_sglmm.graph import connected_components
from spock_sglmm.params import ConfigObject, NumberParam
from spock_sglmm.precisions.base import AbstractPrecisionFamily, SparsePrecision


def _degree_and_adjacency(g):
    return scipy.sparse.diags(g.degree.astype(float)), g.adjacency()


class IcarFamily(AbstractPrecisionFamily):
    r"""Intrinsic conditional autoregression.

    The precision matrix is the graph Laplacian :math:`Q = D - A` with the
    degree matrix *D* and the 0/1 adjacency *A*. *Q* has one zero eigenvalue
    (with a constant eigenvector) per connected component, so its rank is
    *n* minus the number of components.
    """

    name = "icar"

    _instance = None

    def __new__(cls):
        if type(cls._instance) is not cls:
            cls._instance = super(IcarFamily, cls).__new__(cls)
        return cls._instance

    @property
    def is_intrinsic(self):
        return True

    def build(self, g):
        D, A = _degree_and_adjacency(g)
        n_components, _ = connected_components(g)
        return SparsePrecision(D - A, g.n - n_components, self)

    def __repr__(self):
        return "IcarFamily()"


class ProperCarFamily(ConfigObject, AbstractPrecisionFamily):
    r"""Proper conditional autoregression, :math:`Q = D - \rho A`.

    *Q* is diagonally dominant and thus positive definite for
    :math:`|\rho| < 1` as long as no area is isolated. Isolated areas have a
    zero row and carry a flat prior.

    Parameters
    ----------
    rho : float
        Spatial dependence in the open interval (-1, 1).
    """

    name = "proper_car"
    parameter_name = "rho"
    parameter_range = (-1.0, 1.0)

    rho = NumberParam(
        "rho", low=-1.0, high=1.0, low_open=True, high_open=True, readonly=True
    )

    def __init__(self, rho):
        super(ProperCarFamily, self).__init__()
        self.rho = rho

    def build(self, g):
        D, A = _degree_and_adjacency(g)
        return SparsePrecision(D - self.rho * A, g.n - len(g.isolated), self)

    def components(self, g):
        D, A = _degree_and_adjacency(g)
        return D.tocsc(), -A.tocsc()

    def logdet_grid(self, g, grid):
        # det(D - rho A) = det(D) prod(1 - rho mu) with mu the eigenvalues of
        # D^-1/2 A D^-1/2, taken over the areas with neighbors. Isolated areas
        # have a zero row in Q and do not enter the pseudo-determinant.
        connected = g.degree > 0
        degree = g.degree[connected].astype(float)
        scale = 1.0 / np.sqrt(degree)
        A = g.adjacency().toarray()[np.ix_(connected, connected)]
        mu = np.linalg.eigvalsh(scale[:, None] * A * scale[None, :])
        grid = np.asarray(grid, dtype=float)
        return np.sum(np.log(degree)) + np.sum(
            np.log1p(-grid[:, None] * mu[None, :]), axis=1
        )

    def with_parameter(self, value):
        return ProperCarFamily(value)

    def to_dict(self):
        return {"name": self.name, "rho": float(self.rho)}


class LerouxFamily(ConfigObject, AbstractPrecisionFamily):
    r"""Leroux conditional autoregression.

    The precision matrix :math:`Q = \lambda (D - A) + (1 - \lambda) I` mixes
    the intrinsic structure with independent noise.

    Parameters
    ----------
    lam : float
        Mixing weight in the open interval (0, 1).
    """

    name = "leroux"
    parameter_name = "lam"
    parameter_range = (0.0, 1.0)

    lam = NumberParam(
        "lam", low=0.0, high=1.0, low_open=True, high_open=True, readonly=True
    )

    def __init__(self, lam):
        super(LerouxFamily, self).__init__()
        self.lam = lam

    def build(self, g):
        D, A = _degree_and_adjacency(g)
        Q = self.lam * (D - A) + (1.0 - self.lam) * scipy.sparse.identity(g.n)
        return SparsePrecision(Q, g.n, self)

    def components(self, g):
        D, A = _degree_and_adjacency(g)
        identity = scipy.sparse.identity(g.n)
        return identity.tocsc(), (D - A - identity).tocsc()

    def logdet_grid(self, g, grid):
        D, A = _degree_and_adjacency(g)
        omega = np.linalg.eigvalsh((D - A).toarray())
        grid = np.asarray(grid, dtype=float)
        return np.sum(
            np.log(grid[:, None] * omega[None, :] + (1.0 - grid[:, None])), axis=1
        )

    def with_parameter(self, value):
        return LerouxFamily(value)

    def to_dict(self):
        return {"name": self.name, "lam": float(self.lam)}


def make_family(name, parameter=None):
    """Create a precision family from its *name* and spatial *parameter*.

    Parameters
    ----------
    name : {"icar", "proper_car", "leroux"}
        Family name. ``"car"`` and ``"proper-car"`` are accepted for the
        proper CAR family.
    parameter : float, optional
        Value of :math:`\\rho` or :math:`\\lambda`. Defaults to 0.9 for the
        proper CAR and 0.5 for the Leroux family.
    """
    if isinstance(name, dict):
        d = dict(name)
        name = d.pop("name")
        parameter = d.pop("rho", d.pop("lam", parameter))
    key = str(name).lower().replace("-", "_")
    if key == "icar":
        return IcarFamily()
    elif key in ("proper_car", "car", "propercar"):
        return ProperCarFamily(0.9 if parameter is None else parameter)
    elif key == "leroux":
        return LerouxFamily(0.5 if parameter is None else parameter)
    raise InvalidParameter("Unknown precision family {!r}".format(name), attr="name")


def icar_precision(g):
    """ICAR precision :math:`Q = D - A` of graph *g*."""
    return IcarFamily().build(g)


def proper_car_precision(g, rho):
    r"""Proper CAR precision :math:`Q = D - \rho A` of graph *g*."""
    return ProperCarFamily(rho).build(g)


def leroux_precision(g, lam):
    r"""Leroux precision :math:`Q = \lambda (D - A) + (1 - \lambda) I`."""
    return LerouxFamily(lam).build(g)
