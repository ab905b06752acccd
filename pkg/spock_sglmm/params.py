"""Validated, read-only configuration parameters.

The parameter classes are the ones of `nengo.params` with range and type
violations reported as `.InvalidParameter`.
"""

import hashlib
import inspect
import json

import nengo.config
import nengo.params
import numpy as np
from nengo.exceptions import ReadonlyError, ValidationError

from spock_sglmm.exceptions import InvalidParameter


class _InvalidParameterMixin(object):
    def coerce(self, obj, value):
        try:
            return super(_InvalidParameterMixin, self).coerce(obj, value)
        except (InvalidParameter, ReadonlyError):
            raise
        except ValidationError as e:
            msg = e.args[0] if e.args else "Invalid value {!r}".format(value)
            raise InvalidParameter(msg, attr=self.name, obj=obj)


class NumberParam(_InvalidParameterMixin, nengo.params.NumberParam):
    pass


class IntParam(_InvalidParameterMixin, nengo.params.IntParam):
    pass


class BoolParam(_InvalidParameterMixin, nengo.params.BoolParam):
    pass


class EnumParam(_InvalidParameterMixin, nengo.params.EnumParam):
    pass


class StringParam(_InvalidParameterMixin, nengo.params.StringParam):
    pass


class TupleParam(_InvalidParameterMixin, nengo.params.Parameter):
    """A tuple of floats, optionally of fixed *length*."""

    def __init__(
        self, name, default=nengo.params.Unconfigurable, length=None, **kwargs
    ):
        self.length = length
        super(TupleParam, self).__init__(name, default=default, **kwargs)

    def coerce(self, obj, value):
        if value is not None:
            try:
                value = tuple(float(v) for v in value)
            except (TypeError, ValueError):
                raise InvalidParameter(
                    "Expected a sequence of numbers, got {!r}".format(value),
                    attr=self.name,
                    obj=obj,
                )
            if self.length is not None and len(value) != self.length:
                raise InvalidParameter(
                    "Expected {} values, got {}".format(self.length, len(value)),
                    attr=self.name,
                    obj=obj,
                )
        return super(TupleParam, self).coerce(obj, value)


def _jsonable(value):
    if hasattr(value, "to_dict"):
        return value.to_dict()
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def config_hash(d):
    """SHA-256 of the canonical (key-sorted) JSON form of the dict *d*."""
    canonical = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ConfigObject(nengo.config.SupportDefaultsMixin, nengo.params.FrozenObject):
    """Frozen configuration that converts to and from plain JSON types.

    The dict form holds one entry per argument of ``__init__``; nested
    configuration objects are converted recursively.
    """

    @classmethod
    def _field_names(cls):
        sig = inspect.signature(cls.__init__)
        return [name for name in sig.parameters if name != "self"]

    def to_dict(self):
        return {name: _jsonable(getattr(self, name)) for name in self._field_names()}

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls._field_names())
        if unknown:
            raise InvalidParameter(
                "Unknown field(s) {}".format(", ".join(sorted(unknown))),
                attr=cls.__name__,
            )
        return cls(**d)

    def config_hash(self):
        return config_hash(self.to_dict())

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((type(self).__name__, self.config_hash()))

    def __repr__(self):
        return "{}({})".format(
            type(self).__name__,
            ", ".join("{}={!r}".format(k, v) for k, v in self.to_dict().items()),
        )


class ConfigParam(_InvalidParameterMixin, nengo.params.Parameter):
    """A nested `.ConfigObject` given as instance or as its dict form."""

    def __init__(
        self, name, config_class, default=nengo.params.Unconfigurable, **kwargs
    ):
        self.config_class = config_class
        super(ConfigParam, self).__init__(name, default=default, **kwargs)

    def coerce(self, obj, value):
        if isinstance(value, dict):
            value = self.config_class.from_dict(value)
        if value is not None and not isinstance(value, self.config_class):
            raise InvalidParameter(
                "Expected {}, got {!r}".format(self.config_class.__name__, value),
                attr=self.name,
                obj=obj,
            )
        return super(ConfigParam, self).coerce(obj, value)
