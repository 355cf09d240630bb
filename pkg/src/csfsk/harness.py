"""Seeded Monte Carlo symbol-error-rate experiments.

Randomness is keyed, never sequential: the symbol and fading of trial ``t``
in a link come from stream ``t`` under ``(seed, link, "draw")`` and are shared
by both receivers (paired comparison), while the noise comes from stream ``t``
under ``(seed, link, receiver, p, "noise")``.  Results therefore do not depend
on chunking or worker count.
"""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .chipforge import DESK_CANDIDATES, ForgeConfig, select_best
from .recover import is_symbol_error, omp, threshold_scores
from .sensing import ChipMatrix, Receiver, SensingModel, build_model, complex_normal
from .simulate import draw_channel, simulate_trial, waveform_oracle
from .streams import stream, stream_key
from .sysmodel import (
    ConfigError,
    Scheme,
    SystemConfig,
    make_config,
    peak_snr_db,
    random_symbol,
    solve_parameter_for_peak_snr,
)

CHUNK = 256

RESULT_COLUMNS = [
    "experiment", "scheme", "M", "B_hz", "Ts_s", "Td_s", "theta", "Q", "p",
    "peak_snr_db", "receiver", "trials", "errors", "ser", "ci_low", "ci_high",
    "v_seed", "v_coherence",
]
RATIO_COLUMNS = ["experiment", "cell_key", "ratio", "ratio_low", "ratio_high"]


def fmt(x) -> str:
    """17 significant digits for floats; blank for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return f"{x:.17g}"


@dataclass(frozen=True)
class SerEstimate:
    errors: int
    trials: int
    ser: float
    ci_low: float
    ci_high: float
    flagged: bool = False

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low


def wilson_interval(errors: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    z = stats.norm.ppf(0.5 + level / 2)
    phat = errors / trials
    denom = 1 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # clamp so that ci_low <= ser <= ci_high survives rounding at the extremes
    return max(0.0, min(centre - half, phat)), min(1.0, max(centre + half, phat))


def estimate(errors: int, trials: int) -> SerEstimate:
    if trials == 0:
        return SerEstimate(0, 0, 0.0, 0.0, 1.0, flagged=True)
    lo, hi = wilson_interval(errors, trials)
    return SerEstimate(errors, trials, errors / trials, lo, hi)


@dataclass(frozen=True)
class ExperimentSpec:
    """A sweep over links (bandwidth, tones, peak SNR) and chip counts.

    Each (band, Q, SNR) combination is one link; the matched-filter bank is
    run once per link and the chipping receiver once per p.  ``bands`` holds
    (M, B) pairs that replace the base bandwidth at fixed Ts and Td.
    """

    name: str
    base: SystemConfig
    snr_db: tuple[float, ...] = ()
    free: str = "theta"
    tones: tuple[int, ...] = ()
    bands: tuple[tuple[int, float], ...] = ()
    p_values: tuple[int, ...] = ()
    p_fractions: tuple[float, ...] = ()
    receivers: tuple[Receiver, ...] = (Receiver.MF, Receiver.CS)
    trials: int = 10_000
    master_seed: int = 0
    candidates: int = DESK_CANDIDATES
    forge_seed: Optional[int] = None
    cs_noise: str = "averaged"

    @property
    def chip_seed(self) -> int:
        return self.master_seed if self.forge_seed is None else self.forge_seed

    def with_overrides(self, **changes) -> "ExperimentSpec":
        return dataclasses.replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["base"] = self.base.to_dict()
        d["receivers"] = [Receiver(r).value for r in self.receivers]
        return d


@dataclass(frozen=True)
class Link:
    config: SystemConfig
    target_snr_db: Optional[float]
    key: str


@dataclass
class CellResult:
    experiment: str
    link: Link
    receiver: Receiver
    p: int
    estimate: SerEstimate
    chips: Optional[ChipMatrix] = None

    def row(self) -> list[str]:
        c = self.link.config
        return [
            self.experiment, c.scheme.value, fmt(c.num_freqs_M), fmt(c.bandwidth_B),
            fmt(c.symbol_time_Ts), fmt(c.delay_spread_Td), fmt(c.duty_cycle_theta),
            fmt(c.tones_Q), fmt(self.p), fmt(peak_snr_db(c)), self.receiver.value,
            fmt(self.estimate.trials), fmt(self.estimate.errors), fmt(self.estimate.ser),
            fmt(self.estimate.ci_low), fmt(self.estimate.ci_high),
            fmt(self.chips.seed if self.chips is not None else None),
            fmt(self.chips.coherence if self.chips is not None else None),
        ]


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    cells: list[CellResult] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)

    def find(self, receiver: Receiver, **where) -> list[CellResult]:
        out = []
        for cell in self.cells:
            c = cell.link.config
            attrs = {"M": c.num_freqs_M, "Q": c.tones_Q, "p": cell.p, "snr": cell.link.target_snr_db}
            if cell.receiver is Receiver(receiver) and all(attrs[k] == v for k, v in where.items()):
                out.append(cell)
        return out


def links(spec: ExperimentSpec) -> tuple[list[Link], list[dict]]:
    base = spec.base
    bands = spec.bands or ((base.num_freqs_M, base.bandwidth_B),)
    tones = spec.tones or (base.tones_Q,)
    snrs = spec.snr_db or (None,)
    out, skipped = [], []
    for m, b in bands:
        for q in tones:
            for snr in snrs:
                label = f"{base.scheme.value}/M={m}/B={b!r}/Q={q}/snr={snr!r}"
                try:
                    cfg = base.replace(bandwidth_B=float(b), num_freqs_M=int(m), tones_Q=int(q))
                    if snr is not None:
                        cfg = solve_parameter_for_peak_snr(cfg, snr, spec.free)
                except ConfigError as exc:
                    skipped.append({"cell": label, "reason": str(exc)})
                    continue
                key = (
                    f"{label}/Ts={cfg.symbol_time_Ts!r}/Td={cfg.delay_spread_Td!r}"
                    f"/theta={cfg.duty_cycle_theta!r}/P={cfg.avg_power_P!r}/N0={cfg.noise_psd_N0!r}"
                )
                out.append(Link(cfg, snr, key))
    return out, skipped


def chip_counts(spec: ExperimentSpec, m: int) -> list[int]:
    ps = list(spec.p_values)
    ps += [int(round(f * m)) for f in spec.p_fractions]
    return ps or [m]


@functools.lru_cache(maxsize=64)
def forged_chips(p: int, m: int, candidates: int, seed: int) -> ChipMatrix:
    """One chip matrix per (p, M), reused by every link and SNR."""
    chips, _ = select_best(ForgeConfig(p, m, candidates, seed))
    return chips


def detect(model: SensingModel, obs: np.ndarray, a: Optional[np.ndarray] = None):
    """OMP for I-FSK, thresholding for WTFC; ``a`` may carry a cached dictionary."""
    c = model.config
    if c.scheme is Scheme.WTFC:
        return threshold_scores(np.abs(model.adjoint(obs)))
    return omp(model.dictionary if a is None else a, obs, c.tones_Q)


def _count_errors(link: Link, model: SensingModel, seed: int, p: int, start: int, stop: int) -> int:
    cfg = link.config
    draw_key = stream_key(seed, link.key, "draw")
    noise_key = stream_key(seed, link.key, model.receiver.value, p, model.noise_law, "noise")
    errors = 0
    a = model.dictionary if cfg.scheme is Scheme.IFSK else None
    for t in range(start, stop):
        rng = stream(draw_key, t)
        symbol = random_symbol(cfg, rng)
        draw = draw_channel(cfg.tones_Q, rng)
        obs = simulate_trial(cfg, model, symbol, draw, stream(noise_key, t)).data
        errors += is_symbol_error(detect(model, obs, a), symbol)
    return errors


def run_cell(link: Link, model: SensingModel, trials: int, seed: int, p: int, workers: int = 1) -> SerEstimate:
    spans = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    job = lambda span: _count_errors(link, model, seed, p, *span)  # noqa: E731
    if workers <= 1:
        counts = [job(s) for s in spans]
    else:
        with ThreadPoolExecutor(workers) as pool:
            counts = list(pool.map(job, spans))
    return estimate(int(sum(counts)), trials)


def run_experiment(spec: ExperimentSpec, workers: int = 1, progress=None) -> ExperimentResult:
    result = ExperimentResult(spec)
    all_links, result.skipped = links(spec)
    for link in all_links:
        m = link.config.num_freqs_M
        for receiver in map(Receiver, spec.receivers):
            ps = [m] if receiver is Receiver.MF else chip_counts(spec, m)
            for p in ps:
                if not 1 <= p <= m:
                    result.skipped.append({"cell": f"{link.key}/{receiver.value}/p={p}", "reason": "need 1 <= p <= M"})
                    continue
                chips = None
                if receiver is Receiver.CS:
                    chips = forged_chips(p, m, spec.candidates, spec.chip_seed)
                model = build_model(link.config, receiver, chips, spec.cs_noise)
                est = run_cell(link, model, spec.trials, spec.master_seed, p, workers)
                cell = CellResult(spec.name, link, receiver, p, est, chips)
                result.cells.append(cell)
                if progress is not None:
                    progress(cell)
    return result


@dataclass(frozen=True)
class RatioEntry:
    experiment: str
    cell_key: str
    ratio: Optional[float]
    ratio_low: Optional[float]
    ratio_high: Optional[float]
    informative: bool = True

    def row(self) -> list[str]:
        return [self.experiment, self.cell_key, fmt(self.ratio), fmt(self.ratio_low), fmt(self.ratio_high)]


def ser_ratio(cs: SerEstimate, mf: SerEstimate) -> tuple[Optional[float], Optional[float], Optional[float]]:
    """CS/MF error-rate ratio with conservative bounds from the interval ends."""
    if mf.trials == 0 or mf.ser == 0:
        return None, None, None
    low = cs.ci_low / mf.ci_high
    high = cs.ci_high / mf.ci_low if mf.ci_low > 0 else None
    return cs.ser / mf.ser, low, high


def ratio_table(result: ExperimentResult, saturated: float = 0.9) -> list[RatioEntry]:
    """One entry per chipping-receiver cell, paired with its link's filter bank.

    Cells where both receivers err more often than ``saturated`` are marked
    uninformative.
    """
    mf = {c.link.key: c for c in result.cells if c.receiver is Receiver.MF}
    out = []
    for cell in result.cells:
        if cell.receiver is not Receiver.CS or cell.link.key not in mf:
            continue
        ref = mf[cell.link.key].estimate
        ratio, low, high = ser_ratio(cell.estimate, ref)
        c = cell.link.config
        key = f"M={c.num_freqs_M};Q={c.tones_Q};snr={cell.link.target_snr_db!r};p={cell.p}"
        informative = not (ref.ser > saturated and cell.estimate.ser > saturated)
        out.append(RatioEntry(result.spec.name, key, ratio, low, high, informative))
    return out


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for cell in result.cells:
        w.writerow(cell.row())
    return buf.getvalue()


def ratios_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RATIO_COLUMNS)
    for entry in ratio_table(result):
        w.writerow(entry.row())
    return buf.getvalue()


def manifest(result: ExperimentResult) -> dict:
    return {
        "tool": "csfsk",
        "version": __version__,
        "spec": result.spec.to_dict(),
        "master_seed": result.spec.master_seed,
        "forge_seed": result.spec.chip_seed,
        "links": [
            {"key": cell.link.key, "config": cell.link.config.to_dict()}
            for cell in result.cells if cell.receiver is Receiver.MF
        ],
        "skipped": result.skipped,
    }


def write_outputs(result: ExperimentResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "results": out / f"{result.spec.name}_results.csv",
        "ratios": out / f"{result.spec.name}_ratios.csv",
        "manifest": out / f"{result.spec.name}_manifest.json",
    }
    paths["results"].write_text(results_csv(result))
    paths["ratios"].write_text(ratios_csv(result))
    paths["manifest"].write_text(json.dumps(manifest(result), indent=2, sort_keys=True) + "\n")
    return paths


def waveform_ser(config: SystemConfig, trials: int, seed: int, oversample: int = 8) -> SerEstimate:
    """Filter-bank I-FSK error rate from numerically integrated outputs.

    Brute-force cross-check of the statistical path: the noiseless output
    comes from the waveform oracle, and i.i.d. CN(0, N0 (Ts - Td)) noise is
    added to it.
    """
    if config.scheme is not Scheme.IFSK:
        raise ValueError("waveform-domain error rate is implemented for I-FSK only")
    key = stream_key(seed, "waveform-ser", config.num_freqs_M, config.tones_Q)
    a = config.window * np.eye(config.num_freqs_M)
    variance = config.noise_psd_N0 * config.window
    errors = 0
    for t in range(trials):
        rng = stream(key, t)
        symbol = random_symbol(config, rng)
        draw = draw_channel(config.tones_Q, rng)
        clean = waveform_oracle(config, Receiver.MF, None, symbol, draw, oversample).data
        noisy = clean + complex_normal(rng, config.num_freqs_M, variance)
        errors += is_symbol_error(omp(a, noisy, config.tones_Q), symbol)
    return estimate(errors, trials)


# --- presets -------------------------------------------------------------

IFSK_BASE = make_config("IFSK", 20e6, 25e-6, 20e-6, 1e-4, 1e4, 1.0, 1)
WTFC_FIG5_BASE = make_config("WTFC", 400e6, 0.55e-6, 0.3e-6, 1e-3, 1.0, 1.0, 1)
WTFC_FIG6_BASE = make_config("WTFC", 20e6, 5.3e-6, 0.3e-6, 1e-3, 1.0, 1.0, 1)

PRESETS = ("fig3a", "fig3b", "fig4", "fig5", "fig6")


def preset(name: str, include_large: bool = False) -> ExperimentSpec:
    p_sweep = tuple(range(10, 101, 10))
    if name == "fig3a":
        return ExperimentSpec("fig3a", IFSK_BASE, snr_db=(7.0, 17.0), p_values=p_sweep)
    if name == "fig3b":
        return ExperimentSpec("fig3b", IFSK_BASE.replace(tones_Q=2), snr_db=(7.0, 17.0), p_values=p_sweep)
    if name == "fig4":
        return ExperimentSpec(
            "fig4", IFSK_BASE, snr_db=(2.0, 5.0, 8.0, 11.0, 14.0, 17.0), tones=(1, 2, 5), p_values=(50,)
        )
    if name == "fig5":
        return ExperimentSpec(
            "fig5", WTFC_FIG5_BASE, snr_db=(-5.0, 0.0, 5.0), free="power", p_values=p_sweep
        )
    if name == "fig6":
        bands = ((100, 20e6), (200, 40e6)) + (((500, 100e6),) if include_large else ())
        return ExperimentSpec(
            "fig6", WTFC_FIG6_BASE, snr_db=(4.0,), free="power", bands=bands,
            p_fractions=(0.2, 0.4, 0.5, 0.6, 0.8, 1.0),
        )
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")



def oracle_check(m: int, oversample: int = 64, trials: int = 20, seed: int = 0) -> dict[str, float]:
    """Worst relative l2 gap between closed-form and integrated outputs.

    Covers both schemes and both receivers at M = ``m`` with a random p = M
    chip matrix; keys look like ``"IFSK/CS"``.
    """
    from .chipforge import sample_chip_matrix

    window_ifsk, window_wtfc = 5e-6, 0.25e-6
    configs = {
        Scheme.IFSK: make_config("IFSK", m / window_ifsk, 25e-6, 20e-6, 1e-4, 1e4, 0.0, min(2, m)),
        Scheme.WTFC: make_config("WTFC", m / window_wtfc, 0.55e-6, 0.3e-6, 1e-3, 1e6, 0.0, 1),
    }
    worst = {}
    for scheme, cfg in configs.items():
        rng = stream(stream_key(seed, "oracle-check", m, scheme.value), 0)
        chips = sample_chip_matrix(m, m, rng)
        for receiver in Receiver:
            model = build_model(cfg, receiver, chips if receiver is Receiver.CS else None)
            gap = 0.0
            for _ in range(trials):
                symbol = random_symbol(cfg, rng)
                draw = draw_channel(cfg.tones_Q, rng)
                fast = simulate_trial(cfg, model, symbol, draw, rng).data
                slow = waveform_oracle(cfg, receiver, model.chips, symbol, draw, oversample).data
                gap = max(gap, float(np.linalg.norm(fast - slow) / np.linalg.norm(slow)))
            worst[f"{scheme.value}/{receiver.value}"] = gap
    return worst
