import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csfsk.chipforge import sample_chip_matrix
from csfsk.sensing import build_model
from csfsk.simulate import (
    ChannelDraw,
    draw_channel,
    simulate_trial,
    tone_amplitude,
    transmit_vector,
    waveform_oracle,
)
from csfsk.sysmodel import IfskSymbol, WtfcSymbol, make_config, random_symbol

ONE = ChannelDraw(np.array([1.0 + 0j]))


def noiseless_ifsk(m, q=1):
    return make_config("IFSK", m / 5e-6, 25e-6, 20e-6, 1e-4, 1e4, 0.0, q)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def test_mf_noiseless_example(rng):
    cfg = noiseless_ifsk(4)
    obs = simulate_trial(cfg, build_model(cfg, "MF"), IfskSymbol((2,)), ONE, rng)
    np.testing.assert_allclose(obs.data, [0, 0.05, 0, 0], atol=1e-15, rtol=1e-12)


def test_cs_noiseless_matches_oracle(rng):
    cfg = noiseless_ifsk(4)
    chips = sample_chip_matrix(4, 4, rng)
    obs = simulate_trial(cfg, build_model(cfg, "CS", chips), IfskSymbol((2,)), ONE, rng)
    ref = waveform_oracle(cfg, "CS", chips, IfskSymbol((2,)), ONE, oversample=64)
    assert rel(obs.data, ref.data) <= 1e-6


def test_wtfc_amplitude_single_slot(rng):
    cfg = make_config("WTFC", 400e6, 0.55e-6, 0.3e-6, 1e-3, 1.00475e6, 0.0)
    assert tone_amplitude(cfg) == pytest.approx(4.70e4, rel=1e-3)
    sym = WtfcSymbol(17, 321)
    obs = simulate_trial(cfg, build_model(cfg, "MF"), sym, ONE, rng)
    assert obs.data.shape == (100, 1000)
    nz = np.argwhere(obs.data != 0)
    assert nz.tolist() == [[16, 321]]
    assert obs.data[16, 321] == pytest.approx(cfg.window * tone_amplitude(cfg), rel=1e-12)


def test_wtfc_cs_single_active_column(rng):
    cfg = make_config("WTFC", 400e6, 0.55e-6, 0.3e-6, 1e-3, 1.0, 0.0)
    chips = sample_chip_matrix(30, 100, rng)
    obs = simulate_trial(cfg, build_model(cfg, "CS", chips), WtfcSymbol(3, 999), draw_channel(1, rng), rng)
    active = np.flatnonzero(np.any(obs.data != 0, axis=0))
    assert active.tolist() == [999]


def test_ifsk_amplitude_splits_power():
    cfg = noiseless_ifsk(10, q=5)
    x = transmit_vector(cfg, IfskSymbol((1, 3, 5, 7, 9)), ChannelDraw(np.ones(5, dtype=complex)))
    np.testing.assert_allclose(np.abs(x[::2]), math.sqrt(1e4 / (5 * 1e-4)))
    assert np.all(x[1::2] == 0)


def test_scheme_mismatch_rejected(rng):
    cfg = noiseless_ifsk(4)
    with pytest.raises(TypeError):
        simulate_trial(cfg, build_model(cfg, "MF"), WtfcSymbol(1, 0), ONE, rng)
    with pytest.raises(ValueError):
        simulate_trial(cfg, build_model(cfg, "MF"), IfskSymbol((2,)), ChannelDraw(np.ones(2)), rng)


def test_fading_power():
    g = np.random.default_rng(8)
    a = draw_channel(100_000, g).alphas
    assert abs(np.mean(np.abs(a) ** 2) - 1) < 5 / math.sqrt(100_000)
    assert abs(np.mean(a)) < 5 / math.sqrt(100_000)


def test_mf_noise_variance_through_trials():
    cfg = make_config("IFSK", 1.6e6, 25e-6, 20e-6, 1e-4, 1e4, 2.0)
    model = build_model(cfg, "MF")
    g = np.random.default_rng(9)
    quiet = ChannelDraw(np.zeros(1, dtype=complex))
    z = np.array([simulate_trial(cfg, model, IfskSymbol((1,)), quiet, g).data for _ in range(100_000 // 8)])
    z = z.ravel()
    target = cfg.noise_psd_N0 * cfg.window
    # |z|^2 is exponential: sd equals its mean
    assert abs(np.mean(np.abs(z) ** 2) - target) < 5 * target / math.sqrt(z.size)


def test_wtfc_slots_have_independent_noise():
    cfg = make_config("WTFC", 1.6e6, 25e-6, 20e-6, 1e-3, 1.0, 1.0)
    g = np.random.default_rng(10)
    y = simulate_trial(cfg, build_model(cfg, "MF"), WtfcSymbol(1, 0), ChannelDraw(np.zeros(1, complex)), g).data
    c = np.corrcoef(np.abs(y[:, :-1]).ravel(), np.abs(y[:, 1:]).ravel())[0, 1]
    assert abs(c) < 5 / math.sqrt(y[:, 1:].size)


@pytest.mark.parametrize("oversample", [8, 16, 64])
def test_oracle_mf_diagonal_exact(oversample):
    cfg = noiseless_ifsk(12)
    out = waveform_oracle(cfg, "MF", None, IfskSymbol((5,)), ONE, oversample).data
    expected = cfg.window * math.sqrt(cfg.avg_power_P / cfg.duty_cycle_theta)
    assert abs(out[4] - expected) <= 1e-9 * expected
    off = np.delete(out, 4)
    assert np.max(np.abs(off)) <= 1e-9 * abs(out[4])


def test_oracle_cs_m16_and_convergence(rng):
    cfg = noiseless_ifsk(16, q=3)
    chips = sample_chip_matrix(16, 16, rng)
    model = build_model(cfg, "CS", chips)
    sym = random_symbol(cfg, rng)
    draw = draw_channel(3, rng)
    closed = simulate_trial(cfg, model, sym, draw, rng).data
    errs = [rel(waveform_oracle(cfg, "CS", chips, sym, draw, k).data, closed) for k in (16, 32, 64)]
    assert errs[-1] <= 1e-6
    # fourth-order rule: halving the panel width cuts the error ~16x
    assert errs[0] / errs[1] > 8 and errs[1] / errs[2] > 8


def test_oracle_refuses_noise(rng):
    cfg = noiseless_ifsk(4)
    with pytest.raises(ValueError):
        waveform_oracle(cfg, "MF", None, IfskSymbol((1,)), ONE, 8, noise=True)
    with pytest.raises(ValueError):
        waveform_oracle(cfg, "MF", None, IfskSymbol((1,)), ONE, 4)


@settings(max_examples=25, deadline=None)
@given(m=st.sampled_from([4, 16]), scheme=st.sampled_from(["IFSK", "WTFC"]), seed=st.integers(0, 2**32 - 1))
def test_oracle_agrees_with_closed_form(m, scheme, seed):
    g = np.random.default_rng(seed)
    if scheme == "IFSK":
        cfg = make_config("IFSK", m / 5e-6, 25e-6, 20e-6, 1e-4, 1e4, 0.0, min(2, m))
    else:
        cfg = make_config("WTFC", m / 0.25e-6, 0.55e-6, 0.3e-6, 1e-2, 1e6, 0.0)
    chips = sample_chip_matrix(int(g.integers(1, m + 1)), m, g)
    sym = random_symbol(cfg, g)
    draw = draw_channel(cfg.tones_Q, g)
    for receiver, v in (("MF", None), ("CS", chips)):
        closed = simulate_trial(cfg, build_model(cfg, receiver, v), sym, draw, g).data
        assert rel(waveform_oracle(cfg, receiver, v, sym, draw, 64).data, closed) <= 1e-6
