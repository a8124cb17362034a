"""Seeded, splittable random streams.

Every random draw in the package comes from a Philox counter-based
generator keyed by ``(master seed, *key)``.  Independent units of work
(multi-start indices, superposed sources, replications) get distinct keys,
so results do not depend on how the work is scheduled.
"""

import numpy as np

DEFAULT_SEED = 20240611


def substream(seed=None, *key):
    """Return a ``numpy.random.Generator`` for the substream ``key`` of ``seed``.

    Passing an existing ``Generator`` returns it unchanged (``key`` must then
    be empty), which lets callers thread one stream through many calls.
    """
    if isinstance(seed, np.random.Generator):
        if key:
            raise ValueError("cannot derive a keyed substream from a live Generator")
        return seed
    if seed is None:
        seed = DEFAULT_SEED
    if int(seed) < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
