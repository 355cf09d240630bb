"""Linear models of the two receivers.

Matched-filter bank:  r = (Ts - Td) x + z,   z ~ CN(0, N0 (Ts - Td) I)
Chipping receiver:    y = V F D x + V g,     g ~ CN(0, (N0 / B) I)

CN(0, s2) means independent real and imaginary parts, each N(0, s2 / 2).

The chipping receiver's noise has two laws.  ``"exact"`` is the one above,
with covariance (N0 / B) V V* for the specific V.  ``"averaged"`` replaces
V V* by its expectation M I, i.e. white noise of variance N0 M / B on every
output; the published error-rate curves are reproduced with this law.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .sysmodel import FrequencyGrid, SystemConfig, build_grid


class Receiver(str, enum.Enum):
    MF = "MF"
    CS = "CS"


NOISE_LAWS = ("exact", "averaged")


def complex_normal(rng: np.random.Generator, size, variance: float) -> np.ndarray:
    """i.i.d. circular complex Gaussian samples with total variance ``variance``."""
    z = rng.standard_normal(size=tuple(np.atleast_1d(size)) + (2,))
    z *= math.sqrt(variance / 2)
    return z.view(np.complex128)[..., 0]


def build_dft(m: int) -> np.ndarray:
    """F[l, k] = exp(j 2 pi (2k - M - 1)(l - 1) / (2M)), 1-based l, k."""
    if m < 1:
        raise ValueError("M must be >= 1")
    l = np.arange(m)[:, None]
    k = np.arange(1, m + 1)[None, :]
    # reduce the phase mod 2M first; keeps entries accurate for large M
    phase = np.mod((2 * k - m - 1) * l, 2 * m)
    f = np.exp(1j * np.pi * phase / m)
    f.setflags(write=False)
    return f


def build_attenuation_diag(config: SystemConfig, grid: Optional[FrequencyGrid] = None) -> np.ndarray:
    """Diagonal of D, the per-tone gain of one chip integration.

    D_kk = j / (2 pi f_k) * exp(j 2 pi f_k Td) * (1 - exp(j 2 pi f_k / B)),
    with the removable singularity at f_k = 0 filled by its limit 1 / B.
    """
    if grid is None:
        grid = build_grid(config)
    f = np.asarray(grid.freqs, dtype=float)
    if len(f) != config.num_freqs_M:
        raise ValueError("grid does not match config")
    b, td = config.bandwidth_B, config.delay_spread_Td
    d = np.empty(len(f), dtype=complex)
    nz = f != 0
    fn = f[nz]
    d[nz] = 1j / (2 * np.pi * fn) * np.exp(2j * np.pi * fn * td) * (1 - np.exp(2j * np.pi * fn / b))
    d[~nz] = 1.0 / b
    d.setflags(write=False)
    return d


def attenuation_sinc(config: SystemConfig) -> np.ndarray:
    """|sinc((2k - M - 1) / (2M))|, which B |D_kk| must equal."""
    m = config.num_freqs_M
    k = np.arange(1, m + 1)
    return np.abs(np.sinc((2 * k - m - 1) / (2 * m)))


@dataclass(frozen=True)
class ChipMatrix:
    """p x M matrix of +-1 chip amplitudes, plus how it was chosen."""

    values: np.ndarray
    seed: int = -1
    coherence: float = math.nan

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ValueError("chip matrix must be 2-D")
        if not np.all(np.abs(v) == 1):
            raise ValueError("chip values must be -1 or +1")
        v = v.astype(np.int8)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def p(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]

    def as_float(self) -> np.ndarray:
        return self.values.astype(float)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChipMatrix):
            return NotImplemented
        same_coh = (self.coherence == other.coherence) or (
            math.isnan(self.coherence) and math.isnan(other.coherence)
        )
        return self.seed == other.seed and same_coh and np.array_equal(self.values, other.values)

    __hash__ = None


def write_chip_matrix(chips: ChipMatrix, path: Union[str, Path]) -> None:
    lines = [f"{chips.p} {chips.m} {chips.seed} {chips.coherence!r}"]
    lines += [" ".join(str(int(v)) for v in row) for row in chips.values]
    Path(path).write_text("\n".join(lines) + "\n")


def read_chip_matrix(path: Union[str, Path]) -> ChipMatrix:
    lines = Path(path).read_text().split("\n")
    p, m, seed, coh = lines[0].split()
    rows = [[int(t) for t in line.split()] for line in lines[1 : 1 + int(p)]]
    values = np.array(rows, dtype=np.int8).reshape(int(p), int(m))
    return ChipMatrix(values, seed=int(seed), coherence=float(coh))


def _real_times_complex(a: np.ndarray, z: np.ndarray) -> np.ndarray:
    # two real products beat promoting ``a`` to complex
    return (a @ z.real) + 1j * (a @ z.imag)


@dataclass(frozen=True)
class SensingModel:
    """Dictionary, gain and noise law of one receiver.

    For the chipping receiver the detector sees ``A = V F`` and the vector it
    recovers is ``D x``; ``D`` is kept separately in ``attenuation``.
    """

    receiver: Receiver
    config: SystemConfig
    chips: Optional[ChipMatrix] = None
    attenuation: Optional[np.ndarray] = None
    noise_law: str = "exact"
    _dft: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def num_outputs(self) -> int:
        return self.config.num_freqs_M if self.receiver is Receiver.MF else self.chips.p

    @functools.cached_property
    def _v(self) -> np.ndarray:
        return self.chips.as_float()

    @functools.cached_property
    def _adjoint_matrix(self) -> np.ndarray:
        return np.ascontiguousarray(self.dictionary.conj().T)

    @property
    def dictionary(self) -> np.ndarray:
        c = self.config
        if self.receiver is Receiver.MF:
            return c.window * np.eye(c.num_freqs_M)
        return self._v @ self._dft

    @property
    def noise_variance(self) -> float:
        """Per-entry variance of z (MF) or of the pre-chip vector g (CS)."""
        c = self.config
        if self.receiver is Receiver.MF:
            return c.noise_psd_N0 * c.window
        return c.noise_psd_N0 / c.bandwidth_B

    def noise_covariance(self) -> np.ndarray:
        if self.receiver is Receiver.MF:
            return self.noise_variance * np.eye(self.config.num_freqs_M)
        if self.noise_law == "averaged":
            return self.noise_variance * self.config.num_freqs_M * np.eye(self.chips.p)
        return self.noise_variance * (self._v @ self._v.T)

    def signal(self, x: np.ndarray) -> np.ndarray:
        """Noiseless output for input ``x`` (vector, or M x slots matrix)."""
        if self.receiver is Receiver.MF:
            return self.config.window * x
        dx = self.attenuation.reshape((-1,) + (1,) * (x.ndim - 1)) * x
        return self._v @ (self._dft @ dx)

    def noise(self, rng: np.random.Generator, slots: Optional[int] = None) -> np.ndarray:
        m = self.config.num_freqs_M
        tail = () if slots is None else (slots,)
        if self.config.noise_psd_N0 == 0:
            return np.zeros((self.num_outputs,) + tail, dtype=complex)
        if self.receiver is Receiver.MF:
            return complex_normal(rng, (m,) + tail, self.noise_variance)
        if self.noise_law == "averaged":
            return complex_normal(rng, (self.chips.p,) + tail, self.noise_variance * m)
        return _real_times_complex(self._v, complex_normal(rng, (m,) + tail, self.noise_variance))

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """A* y without forming A when A is a scaled identity."""
        if self.receiver is Receiver.MF:
            return self.config.window * y
        return self._adjoint_matrix @ y


def build_model(
    config: SystemConfig,
    receiver: Union[Receiver, str],
    chips: Optional[ChipMatrix] = None,
    noise_law: str = "exact",
) -> SensingModel:
    receiver = Receiver(receiver)
    if noise_law not in NOISE_LAWS:
        raise ValueError(f"noise_law must be one of {NOISE_LAWS}")
    if receiver is Receiver.MF:
        if chips is not None:
            raise ValueError("matched-filter bank takes no chip matrix")
        return SensingModel(receiver, config)
    if chips is None:
        raise ValueError("chipping receiver needs a chip matrix")
    if chips.m != config.num_freqs_M:
        raise ValueError(f"chip matrix has {chips.m} columns, config has M = {config.num_freqs_M}")
    return SensingModel(
        receiver, config, chips, build_attenuation_diag(config), noise_law, build_dft(config.num_freqs_M)
    )


def column_gram(a: np.ndarray) -> np.ndarray:
    """Normalised |Gram| of the columns of ``a`` (batched over leading axes)."""
    g = np.swapaxes(a, -1, -2).conj() @ a
    norms = np.sqrt(np.real(np.diagonal(g, axis1=-2, axis2=-1)))
    return np.abs(g) / (norms[..., :, None] * norms[..., None, :])


def coherence(a: np.ndarray) -> float:
    """Largest normalised inner product between two distinct columns."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError("need a matrix with at least two columns")
    if np.any(np.linalg.norm(a, axis=0) == 0):
        raise ValueError("dictionary has a zero column")
    c = column_gram(a)
    np.fill_diagonal(c, 0.0)
    return float(min(c.max(), 1.0))
