"""Random search for a low-coherence chip matrix."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sensing import ChipMatrix, build_dft, coherence, column_gram
from .streams import stream, stream_key

DESK_CANDIDATES = 10_000
PAPER_CANDIDATES = 100_000

# scores this close to the minimum count as ties (rounding noise)
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ForgeConfig:
    p: int
    m: int
    num_candidates: int = DESK_CANDIDATES
    master_seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.p <= self.m:
            raise ValueError(f"need 1 <= p <= M, got p={self.p}, M={self.m}")
        if self.num_candidates < 1:
            raise ValueError("num_candidates must be >= 1")


def sample_chip_matrix(p: int, m: int, rng: np.random.Generator) -> ChipMatrix:
    bits = rng.integers(0, 2, size=(p, m), dtype=np.int8)
    return ChipMatrix(2 * bits - 1)


def candidate(forge: ForgeConfig, index: int) -> ChipMatrix:
    """Candidate ``index`` of the search; its stream depends only on the index."""
    key = stream_key(forge.master_seed, "forge", forge.p, forge.m)
    chips = sample_chip_matrix(forge.p, forge.m, stream(key, index))
    return ChipMatrix(chips.values, seed=forge.master_seed)


def _score_block(forge: ForgeConfig, f: np.ndarray, start: int, stop: int) -> np.ndarray:
    vs = np.stack([candidate(forge, i).as_float() for i in range(start, stop)])
    c = column_gram(vs @ f)
    idx = np.arange(forge.m)
    c[:, idx, idx] = 0.0
    return np.minimum(c.max(axis=(1, 2)), 1.0)


def score_candidates(forge: ForgeConfig, f: Optional[np.ndarray] = None, workers: int = 1, block: int = 128) -> np.ndarray:
    """Coherence of V F for every candidate, in candidate order."""
    if f is None:
        f = build_dft(forge.m)
    if f.shape != (forge.m, forge.m):
        raise ValueError("F must be M x M")
    bounds = [(s, min(s + block, forge.num_candidates)) for s in range(0, forge.num_candidates, block)]
    if workers <= 1:
        parts = [_score_block(forge, f, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda ab: _score_block(forge, f, *ab), bounds))
    return np.concatenate(parts)


def select_best(forge: ForgeConfig, f: Optional[np.ndarray] = None, workers: int = 1) -> tuple[ChipMatrix, float]:
    """Lowest-coherence candidate; ties go to the earliest index."""
    if f is None:
        f = build_dft(forge.m)
    scores = score_candidates(forge, f, workers)
    best = int(np.flatnonzero(scores <= scores.min() + TIE_TOL)[0])
    chips = candidate(forge, best)
    score = coherence(chips.as_float() @ f) if forge.m > 1 else 0.0
    return ChipMatrix(chips.values, seed=forge.master_seed, coherence=score), score
