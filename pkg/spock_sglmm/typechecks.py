"""Type checks and random number streams shared across the package."""

import numpy as np


def is_integer(obj):
    return isinstance(obj, (int, np.integer)) and not isinstance(obj, bool)


def is_number(obj):
    return is_integer(obj) or isinstance(obj, (float, np.floating))


def as_generator(rng=None):
    """Return a `numpy.random.Generator` for *rng*.

    Parameters
    ----------
    rng : Generator, RandomState, SeedSequence, int or None
        Source of randomness. A `numpy.random.RandomState` (as handed out by
        the ``rng`` test fixture) is used to draw a seed, so the result stays
        reproducible.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, np.random.RandomState):
        return np.random.default_rng(rng.randint(np.iinfo(np.int32).max))
    return np.random.default_rng(rng)


def substream(seed, *key):
    """Return an independent generator for the sub-task identified by *key*."""
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    )


def substream_seed(seed, *key):
    """Return an integer seed for the sub-task identified by *key*."""
    sequence = np.random.SeedSequence(
        int(seed), spawn_key=tuple(int(k) for k in key)
    )
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
