"""Per-trial receiver observations.

``simulate_trial`` samples the closed-form linear models directly.
``waveform_oracle`` integrates the continuous-time products numerically and
exists only to check those closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .sensing import ChipMatrix, Receiver, SensingModel, complex_normal
from .sysmodel import (
    Scheme,
    Symbol,
    SystemConfig,
    WtfcSymbol,
    build_grid,
    check_symbol,
)


@dataclass(frozen=True)
class ChannelDraw:
    """Rayleigh block-fading gains, one per transmitted tone."""

    alphas: np.ndarray


def draw_channel(num_tones: int, rng: np.random.Generator) -> ChannelDraw:
    return ChannelDraw(complex_normal(rng, num_tones, 1.0))


@dataclass(frozen=True)
class Observation:
    receiver: Receiver
    data: np.ndarray


def tone_amplitude(config: SystemConfig) -> float:
    """Peak amplitude of each transmitted tone before fading."""
    c = config
    if c.scheme is Scheme.WTFC:
        return math.sqrt(c.avg_power_P * c.symbol_time_Ts / (c.duty_cycle_theta * c.window))
    return math.sqrt(c.avg_power_P / (c.tones_Q * c.duty_cycle_theta))


def _tones(config: SystemConfig, symbol: Symbol) -> list[int]:
    check_symbol(config, symbol)
    if isinstance(symbol, WtfcSymbol):
        return [symbol.freq_index]
    return list(symbol.support)


def transmit_vector(config: SystemConfig, symbol: Symbol, draw: ChannelDraw) -> np.ndarray:
    """Faded input vector x (for WTFC: the active slot's column)."""
    tones = _tones(config, symbol)
    if len(draw.alphas) != len(tones):
        raise ValueError(f"{len(tones)} tones but {len(draw.alphas)} fading gains")
    x = np.zeros(config.num_freqs_M, dtype=complex)
    x[np.asarray(tones) - 1] = draw.alphas * tone_amplitude(config)
    return x


def simulate_trial(
    config: SystemConfig,
    model: SensingModel,
    symbol: Symbol,
    draw: ChannelDraw,
    rng: np.random.Generator,
) -> Observation:
    if model.config != config:
        raise ValueError("model was built for a different config")
    x = transmit_vector(config, symbol, draw)
    if config.scheme is Scheme.IFSK:
        return Observation(model.receiver, model.signal(x) + model.noise(rng))
    # every slot is noise; only the active one also carries the tone
    data = model.noise(rng, config.num_slots)
    data[:, symbol.slot_index] += model.signal(x)
    return Observation(model.receiver, data)


def _simpson_nodes(config: SystemConfig, oversample: int) -> tuple[np.ndarray, np.ndarray]:
    """Chip-aligned composite Simpson nodes and weights on [Td, Ts]."""
    m, b = config.num_freqs_M, config.bandwidth_B
    k = oversample
    h = 1.0 / (b * k)
    u = np.arange(m * k + 1)
    t = config.delay_spread_Td + u * h
    w = np.where(u % 2 == 1, 4.0, 2.0)
    w[0] = w[-1] = 1.0
    return t, w * h / 3


def waveform_oracle(
    config: SystemConfig,
    receiver: Union[Receiver, str],
    chips: Optional[ChipMatrix],
    symbol: Symbol,
    draw: ChannelDraw,
    oversample: int = 64,
    noise: bool = False,
) -> Observation:
    """Noiseless receiver output by numerical integration of the waveforms.

    Each chip interval of width 1/B is split into ``oversample`` panels and
    integrated with composite Simpson, so no panel straddles a chip edge.
    For WTFC every slot is integrated in slot-local time.
    """
    if noise:
        raise ValueError("the waveform oracle is noiseless by design")
    if oversample < 8 or oversample % 2:
        raise ValueError("oversample must be an even number >= 8")
    receiver = Receiver(receiver)
    x = transmit_vector(config, symbol, draw)
    active = np.asarray(_tones(config, symbol)) - 1
    freqs = build_grid(config).freqs
    t, w = _simpson_nodes(config, oversample)
    sig = np.exp(2j * np.pi * np.outer(t, freqs[active])) @ x[active]

    if receiver is Receiver.MF:
        out = np.exp(-2j * np.pi * np.outer(freqs, t)) @ (w * sig)
    else:
        if chips is None or chips.m != config.num_freqs_M:
            raise ValueError("chipping receiver needs a p x M chip matrix")
        # chip l spans nodes l*K .. (l+1)*K; one Simpson rule per chip
        k = oversample
        local = np.where(np.arange(k + 1) % 2 == 1, 4.0, 2.0)
        local[0] = local[-1] = 1.0
        local *= (t[1] - t[0]) / 3
        per_chip = np.lib.stride_tricks.sliding_window_view(sig, k + 1)[::k] @ local
        out = chips.as_float() @ per_chip

    if config.scheme is Scheme.IFSK:
        return Observation(receiver, out)
    data = np.zeros((len(out), config.num_slots), dtype=complex)
    data[:, symbol.slot_index] = out
    return Observation(receiver, data)
