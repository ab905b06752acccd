from nengo.exceptions import ValidationError


class SpockException(Exception):
    """An exception within the spatial confounding toolkit."""

    exit_code = 1


class SpockInputError(SpockException, ValueError):
    """Invalid input data or parameters."""

    exit_code = 2


class SpockNumericalError(SpockException, ArithmeticError):
    """A numerical procedure could not be carried out."""

    exit_code = 3


class SpockIOError(SpockException, OSError):
    """Reading or writing a file failed."""

    exit_code = 4


class RankDeficient(SpockInputError):
    """A design matrix does not have full column rank."""


class DimensionMismatch(SpockInputError):
    """The shapes of two operands do not agree."""


class InvalidK(SpockInputError):
    """A nearest-neighbor count is outside of ``[1, n - 1]``."""


class EmptyGraph(SpockInputError):
    """A graph without edges where at least one edge is required."""


class InvalidParameter(SpockInputError, ValidationError):
    """A model or prior parameter is outside of its admissible range."""

    def __init__(self, msg, attr, obj=None):
        ValidationError.__init__(self, msg, attr, obj)


class ParseError(SpockInputError):
    """An input file could not be parsed.

    Parameters
    ----------
    msg : str
        Description of the problem.
    path : str, optional
        File that failed to parse.
    line : int, optional
        1-based line number of the offending line.
    """

    def __init__(self, msg, path=None, line=None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = str(path)
            if line is not None:
                location += ":{}".format(line)
            location += ": "
        elif line is not None:
            location = "line {}: ".format(line)
        super(ParseError, self).__init__(location + msg)


class UnknownAreaId(SpockInputError):
    """A file references an area id that is not part of the map."""

    def __init__(self, area_id, source=None):
        self.area_id = area_id
        msg = "Unknown area id {!r}".format(area_id)
        if source is not None:
            msg += " in {}".format(source)
        super(UnknownAreaId, self).__init__(msg)


class DuplicateCentroid(SpockInputError):
    """Two areas share the same centroid coordinates."""


class IsolatedArea(SpockInputError):
    """An area has no neighbors and islands are not allowed."""


class NegativeCount(SpockInputError):
    """A Poisson response is negative or not an integer."""


class LengthMismatch(SpockInputError):
    """A table does not cover the same areas as the map."""


class DegenerateGeometry(SpockNumericalError):
    """Point configuration on which a graph cannot be reconstructed."""


class SingularCovariance(SpockNumericalError):
    """A sample covariance matrix is numerically singular."""


class CholeskyFailure(SpockNumericalError):
    """A precision matrix is not numerically positive definite."""


class DivergentChain(SpockNumericalError):
    """A Markov chain reached a non-finite state."""


class InsufficientDraws(SpockNumericalError):
    """Too few retained posterior draws to summarize or persist a fit."""


class IoError(SpockIOError):
    """An output file could not be written or an input file not read."""
