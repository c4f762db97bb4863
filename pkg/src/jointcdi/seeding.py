"""Counter-based seed derivation.

Every random stream is keyed by ``(master_seed, tag, *indices)`` through
:class:`numpy.random.SeedSequence`, so a realization draws the same numbers
whichever worker process evaluates it and in whatever order.
"""

import zlib

import numpy as np


def _tag(key):
    if isinstance(key, str):
        return zlib.crc32(key.encode())
    return int(key)


def derive_rng(master_seed, *keys):
    """Independent generator for the stream named by ``keys``."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF] + [_tag(k) for k in keys]
    return np.random.default_rng(np.random.SeedSequence(entropy))
