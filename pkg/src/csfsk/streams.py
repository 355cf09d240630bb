"""Counter-based random streams.

Every trial gets its own Philox stream whose key is a digest of
``(master_seed, *labels)`` and whose high counter word is the trial index.
Streams therefore depend only on *what* is being drawn, never on which
worker draws it or in what order.
"""

from __future__ import annotations

import hashlib

import numpy as np


def stream_key(master_seed: int, *labels: object) -> np.ndarray:
    text = "|".join([str(int(master_seed))] + [str(x) for x in labels])
    digest = hashlib.blake2b(text.encode(), digest_size=16).digest()
    return np.frombuffer(digest, dtype=np.uint64).copy()


def stream(key: np.ndarray, index: int) -> np.random.Generator:
    """Generator for sub-stream ``index`` under ``key``.

    The index occupies the top counter word, so sub-streams are disjoint
    unless one of them draws more than 2**192 blocks.
    """
    if index < 0:
        raise ValueError("stream index must be non-negative")
    counter = np.array([0, 0, 0, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def labelled_stream(master_seed: int, index: int, *labels: object) -> np.random.Generator:
    return stream(stream_key(master_seed, *labels), index)
