"""Physical parameters, frequency grid, SNR bookkeeping and symbol alphabet."""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

_REL_TOL = 1e-9

# Accepted in config files for the record; nothing consumes them.
DOC_ONLY_FIELDS = ("doppler_spread_Bd", "coherence_time_Tc")


class ConfigError(ValueError):
    pass


class Scheme(str, enum.Enum):
    IFSK = "IFSK"
    WTFC = "WTFC"


def _as_integer(value: float, what: str) -> int:
    n = round(value)
    if n < 1 or abs(value - n) > _REL_TOL * max(1.0, abs(value)):
        raise ConfigError(f"{what} = {value!r} is not a positive integer")
    return int(n)


@dataclass(frozen=True)
class SystemConfig:
    """All physical parameters of one link.

    ``num_freqs_M`` is redundant with ``bandwidth_B * (Ts - Td)`` and is
    checked against it on construction.
    """

    scheme: Scheme
    bandwidth_B: float
    num_freqs_M: int
    symbol_time_Ts: float
    delay_spread_Td: float
    duty_cycle_theta: float
    avg_power_P: float
    noise_psd_N0: float
    tones_Q: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.bandwidth_B <= 0:
            raise ConfigError("bandwidth_B must be positive")
        if not 0 <= self.delay_spread_Td < self.symbol_time_Ts:
            raise ConfigError("need 0 <= delay_spread_Td < symbol_time_Ts")
        m = _as_integer(self.bandwidth_B * self.window, "bandwidth_B * (Ts - Td)")
        if int(self.num_freqs_M) != m:
            raise ConfigError(f"num_freqs_M = {self.num_freqs_M} but B(Ts - Td) = {m}")
        if not 0 < self.duty_cycle_theta <= 1:
            raise ConfigError("duty_cycle_theta must lie in (0, 1]")
        _as_integer(1.0 / self.duty_cycle_theta, "1 / duty_cycle_theta")
        if self.avg_power_P <= 0:
            raise ConfigError("avg_power_P must be positive")
        if self.noise_psd_N0 < 0:
            raise ConfigError("noise_psd_N0 must be non-negative")
        if self.scheme is Scheme.WTFC and self.tones_Q != 1:
            raise ConfigError("WTFC transmits exactly one tone (tones_Q = 1)")
        if not 1 <= self.tones_Q <= self.num_freqs_M:
            raise ConfigError("need 1 <= tones_Q <= num_freqs_M")

    @property
    def window(self) -> float:
        """Integration window Ts - Td."""
        return self.symbol_time_Ts - self.delay_spread_Td

    @property
    def freq_spacing(self) -> float:
        return 1.0 / self.window

    @property
    def num_slots(self) -> int:
        return int(round(1.0 / self.duty_cycle_theta))

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["scheme"] = self.scheme.value
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "SystemConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names - set(DOC_ONLY_FIELDS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        missing = names - set(data) - {"tones_Q"}
        if missing:
            raise ConfigError(f"missing config keys: {sorted(missing)}")
        return cls(**{k: v for k, v in data.items() if k in names})


def load_config(path: Union[str, Path]) -> SystemConfig:
    return SystemConfig.from_dict(json.loads(Path(path).read_text()))


def save_config(config: SystemConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n")


def make_config(
    scheme: Union[Scheme, str],
    bandwidth_B: float,
    symbol_time_Ts: float,
    delay_spread_Td: float,
    duty_cycle_theta: float = 1.0,
    avg_power_P: float = 1.0,
    noise_psd_N0: float = 1.0,
    tones_Q: int = 1,
) -> SystemConfig:
    """Build a config, deriving M from B and the window."""
    m = round(bandwidth_B * (symbol_time_Ts - delay_spread_Td))
    return SystemConfig(
        Scheme(scheme), bandwidth_B, m, symbol_time_Ts, delay_spread_Td,
        duty_cycle_theta, avg_power_P, noise_psd_N0, tones_Q,
    )


@dataclass(frozen=True)
class FrequencyGrid:
    freqs: np.ndarray

    def __len__(self) -> int:
        return len(self.freqs)


def build_grid(config: SystemConfig) -> FrequencyGrid:
    m = config.num_freqs_M
    i = np.arange(1, m + 1)
    freqs = (2 * i - m - 1) / (2 * config.window)
    freqs.setflags(write=False)
    return FrequencyGrid(freqs)


def peak_snr_db(config: SystemConfig) -> float:
    c = config
    if c.noise_psd_N0 == 0:
        return math.inf
    return 10 * math.log10(c.avg_power_P / (c.noise_psd_N0 * c.bandwidth_B * c.duty_cycle_theta))


def avg_snr_db(config: SystemConfig) -> float:
    c = config
    if c.noise_psd_N0 == 0:
        return math.inf
    return 10 * math.log10(c.avg_power_P / (c.noise_psd_N0 * c.bandwidth_B))


def solve_parameter_for_peak_snr(config: SystemConfig, target_db: float, free: str = "theta") -> SystemConfig:
    """Return a copy of ``config`` hitting ``target_db`` peak SNR.

    With ``free="power"`` the match is exact.  With ``free="theta"`` the slot
    count 1/theta must stay integral, so it is rounded and the achieved SNR
    is whatever ``peak_snr_db`` reports for the result.
    """
    c = config
    if math.isclose(peak_snr_db(c), target_db, rel_tol=0, abs_tol=1e-12):
        return c
    lin = 10 ** (target_db / 10)
    if free == "power":
        return c.replace(avg_power_P=lin * c.noise_psd_N0 * c.bandwidth_B * c.duty_cycle_theta)
    if free == "theta":
        theta = c.avg_power_P / (lin * c.noise_psd_N0 * c.bandwidth_B)
        if theta > 1:
            raise ConfigError(f"target {target_db} dB needs duty cycle {theta:.4g} > 1")
        slots = max(1, round(1 / theta))
        return c.replace(duty_cycle_theta=1.0 / slots)
    raise ValueError(f"free must be 'theta' or 'power', not {free!r}")


def alphabet_size(config: SystemConfig) -> int:
    if config.scheme is Scheme.WTFC:
        return config.num_freqs_M * config.num_slots
    n = math.comb(config.num_freqs_M, config.tones_Q)
    if n > 2**63 - 1:
        raise OverflowError(f"C({config.num_freqs_M}, {config.tones_Q}) overflows a 64-bit count")
    return n


@dataclass(frozen=True)
class IfskSymbol:
    support: tuple[int, ...]  # 1-based, increasing


@dataclass(frozen=True)
class WtfcSymbol:
    freq_index: int  # 1-based
    slot_index: int  # 0-based


Symbol = Union[IfskSymbol, WtfcSymbol]


def random_symbol(config: SystemConfig, rng: np.random.Generator) -> Symbol:
    m = config.num_freqs_M
    if config.scheme is Scheme.WTFC:
        k = int(rng.integers(1, m + 1))
        slot = int(rng.integers(0, config.num_slots))
        return WtfcSymbol(k, slot)
    support = rng.choice(m, size=config.tones_Q, replace=False)
    return IfskSymbol(tuple(int(s) + 1 for s in np.sort(support)))


def check_symbol(config: SystemConfig, symbol: Symbol) -> None:
    m = config.num_freqs_M
    if config.scheme is Scheme.WTFC:
        if not isinstance(symbol, WtfcSymbol):
            raise TypeError("WTFC config needs a WtfcSymbol")
        if not (1 <= symbol.freq_index <= m and 0 <= symbol.slot_index < config.num_slots):
            raise ValueError(f"symbol {symbol} out of range")
        return
    if not isinstance(symbol, IfskSymbol):
        raise TypeError("I-FSK config needs an IfskSymbol")
    s = symbol.support
    if len(s) != config.tones_Q or list(s) != sorted(set(s)) or not all(1 <= i <= m for i in s):
        raise ValueError(f"support {s} is not {config.tones_Q} increasing indices in [1, {m}]")
