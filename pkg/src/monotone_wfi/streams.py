"""Reproducible random number streams.

All randomness in this package flows through counter-based Philox
generators keyed by a 64-bit base seed plus a tuple of integer stream
ids.  Distinct id tuples give statistically independent streams, so
replicate ``r`` of experiment ``e`` can run on stream ``(e, r)`` in any
worker process and still produce the exact numbers a serial run would.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream"]


def stream(seed: int, *ids: int) -> np.random.Generator:
    """Return the generator for stream ``(seed; ids...)``.

    Parameters
    ----------
    seed : int
        Base seed (any Python int; 64-bit values round-trip exactly).
    *ids : int
        Stream coordinates, e.g. ``(experiment, replicate)``.  The empty
        tuple is the root stream of ``seed``.

    The mapping (seed, ids) -> stream is pure: calling twice yields
    generators that produce identical output.
    """
    key = np.random.SeedSequence(int(seed), spawn_key=tuple(int(i) for i in ids))
    return np.random.Generator(np.random.Philox(key))
