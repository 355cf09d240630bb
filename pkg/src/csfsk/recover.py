"""Symbol detection: OMP for I-FSK, thresholding for WTFC."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .sysmodel import IfskSymbol, Symbol, WtfcSymbol


@dataclass(frozen=True)
class IfskDetection:
    indices: tuple[int, ...]  # 1-based, in selection order
    residual_norms: tuple[float, ...] = ()
    rank_deficient: bool = False


@dataclass(frozen=True)
class WtfcDetection:
    freq_index: int  # 1-based row of A* Y
    slot_index: int  # 0-based column of A* Y
    degenerate: bool = False


Detection = Union[IfskDetection, WtfcDetection]


def omp(a: np.ndarray, y: np.ndarray, q: int) -> IfskDetection:
    """Orthogonal matching pursuit with a fixed number of iterations.

    Each step picks the unselected column maximising |a_i* r| (lowest index
    on ties) and re-projects y onto the orthogonal complement of the chosen
    columns via a least-squares solve.
    """
    a = np.asarray(a)
    y = np.asarray(y)
    n = a.shape[1]
    if not 1 <= q <= n:
        raise ValueError(f"sparsity {q} outside [1, {n}]")
    ah = a.conj().T
    r = y.astype(complex, copy=True)
    chosen: list[int] = []
    norms = [float(np.linalg.norm(r))]
    deficient = False
    for _ in range(q):
        corr = np.abs(ah @ r)
        corr[chosen] = -np.inf
        chosen.append(int(np.argmax(corr)))
        lam = a[:, chosen]
        coef, _, rank, _ = np.linalg.lstsq(lam, y, rcond=None)
        deficient |= rank < len(chosen)
        r = y - lam @ coef
        norms.append(float(np.linalg.norm(r)))
    return IfskDetection(tuple(i + 1 for i in chosen), tuple(norms), bool(deficient))


def threshold_scores(scores: np.ndarray) -> WtfcDetection:
    """Locate the largest entry of a precomputed |A* Y|."""
    scores = np.asarray(scores)
    if scores.size == 0:
        raise ValueError("empty observation")
    if scores.ndim == 1:
        scores = scores[:, None]
    flat = int(np.argmax(scores))  # row-major: first hit is the smallest (row, col)
    row, col = divmod(flat, scores.shape[1])
    degenerate = bool(np.count_nonzero(scores == scores.flat[flat]) > 1)
    return WtfcDetection(row + 1, col, degenerate)


def threshold(a: np.ndarray, y: np.ndarray) -> WtfcDetection:
    """Row (frequency) and column (slot) of the largest entry of |A* Y|."""
    a = np.asarray(a)
    y = np.asarray(y)
    if y.size == 0:
        raise ValueError("empty observation")
    if a.shape[0] != y.shape[0]:
        raise ValueError(f"A has {a.shape[0]} rows, Y has {y.shape[0]}")
    return threshold_scores(np.abs(a.conj().T @ y))


def is_symbol_error(detected: Detection, truth: Symbol) -> bool:
    if isinstance(truth, IfskSymbol):
        if not isinstance(detected, IfskDetection):
            raise TypeError("I-FSK symbol needs an I-FSK detection")
        return set(detected.indices) != set(truth.support)
    if isinstance(truth, WtfcSymbol):
        if not isinstance(detected, WtfcDetection):
            raise TypeError("WTFC symbol needs a WTFC detection")
        return (detected.freq_index, detected.slot_index) != (truth.freq_index, truth.slot_index)
    raise TypeError(f"unknown symbol type {type(truth).__name__}")
