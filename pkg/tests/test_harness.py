import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from csfsk.harness import (
    IFSK_BASE,
    RATIO_COLUMNS,
    RESULT_COLUMNS,
    ExperimentSpec,
    estimate,
    fmt,
    links,
    preset,
    ratio_table,
    ratios_csv,
    results_csv,
    run_experiment,
    ser_ratio,
    wilson_interval,
    write_outputs,
)
from csfsk.sensing import Receiver
from csfsk.sysmodel import make_config


def test_wilson_coverage():
    g = np.random.default_rng(11)
    n, rate = 2000, 0.01
    hits = 0
    for k in g.binomial(n, rate, size=1000):
        lo, hi = wilson_interval(int(k), n)
        hits += lo <= rate <= hi
    assert hits >= 930


@given(n=st.integers(1, 10**7), frac=st.floats(0, 1))
def test_estimate_bounds(n, frac):
    e = estimate(int(frac * n), n)
    assert 0 <= e.ci_low <= e.ser <= e.ci_high <= 1


def test_zero_trials_flagged():
    e = estimate(0, 0)
    assert e.flagged and e.errors == 0 and (e.ci_low, e.ci_high) == (0.0, 1.0)
    spec = ExperimentSpec("z", IFSK_BASE, snr_db=(17.0,), p_values=(50,), trials=0, candidates=2)
    assert all(c.estimate.flagged for c in run_experiment(spec).cells)


def test_ratio_examples():
    a = estimate(30, 1000)
    assert ser_ratio(a, a)[0] == 1.0
    assert ser_ratio(estimate(300, 10000), estimate(100, 10000))[0] == pytest.approx(3.0)
    lo_hi = ser_ratio(estimate(300, 10000), estimate(100, 10000))
    assert lo_hi[1] < 3.0 < lo_hi[2]
    assert ser_ratio(a, estimate(0, 1000)) == (None, None, None)


def test_noiseless_cells_have_zero_ser():
    base = IFSK_BASE.replace(noise_psd_N0=0.0)
    spec = ExperimentSpec("quiet", base, p_values=(100,), trials=300, candidates=5)
    res = run_experiment(spec)
    assert [c.estimate.errors for c in res.cells] == [0, 0]
    # undefined ratio is emitted as blanks
    assert ratios_csv(res).splitlines()[1].endswith(",,,")


def test_preset_cells():
    fig5, _ = links(preset("fig5"))
    assert {l.config.num_freqs_M for l in fig5} == {100}
    fig6, _ = links(preset("fig6", include_large=True))
    assert sorted({(l.config.num_freqs_M, l.config.bandwidth_B) for l in fig6}) == [
        (100, 20e6), (200, 40e6), (500, 100e6)
    ]
    assert all(l.config.freq_spacing == pytest.approx(200e3) for l in fig6)
    fig3a, _ = links(preset("fig3a"))
    seven = [l for l in fig3a if l.target_snr_db == 7.0][0]
    assert seven.config.duty_cycle_theta == pytest.approx(1e-4, rel=0.01)
    assert preset("fig4").tones == (1, 2, 5) and preset("fig4").p_values == (50,)
    assert preset("fig3b").base.tones_Q == 2
    with pytest.raises(ValueError):
        preset("fig7")


def test_infeasible_cells_recorded():
    spec = ExperimentSpec("bad", IFSK_BASE, snr_db=(-80.0, 17.0), p_values=(50, 150), trials=10, candidates=2)
    res = run_experiment(spec)
    reasons = [s["cell"] for s in res.skipped]
    assert any("snr=-80.0" in r for r in reasons)
    assert any("p=150" in r for r in reasons)
    assert len(res.cells) == 2


def test_csv_schema(tmp_path):
    spec = ExperimentSpec("tiny", IFSK_BASE, snr_db=(7.0,), p_values=(40,), trials=50, candidates=3)
    paths = write_outputs(run_experiment(spec), tmp_path)
    rows = list(csv.reader(io.StringIO(paths["results"].read_text())))
    assert rows[0] == RESULT_COLUMNS and len(rows) == 3
    assert {r[10] for r in rows[1:]} == {"MF", "CS"}
    assert paths["ratios"].read_text().splitlines()[0] == ",".join(RATIO_COLUMNS)
    man = json.loads(paths["manifest"].read_text())
    assert man["master_seed"] == 0 and man["spec"]["trials"] == 50


def test_fmt():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(None) == fmt(math.nan) == ""
    assert fmt(7) == "7"


def test_worker_count_does_not_change_results():
    spec = ExperimentSpec("det", IFSK_BASE, snr_db=(7.0,), p_values=(30,), trials=600, candidates=4)
    assert results_csv(run_experiment(spec, workers=1)) == results_csv(run_experiment(spec, workers=4))


def test_monotone_in_p_and_parity():
    spec = ExperimentSpec(
        "mono", IFSK_BASE, snr_db=(7.0,), p_values=(20, 60, 100), trials=2000, candidates=20
    )
    res = run_experiment(spec)
    cs = [res.find(Receiver.CS, p=p)[0].estimate for p in (20, 60, 100)]
    for a, b in zip(cs, cs[1:]):
        assert b.ser <= a.ser + 3 * b.ci_width
    mf = res.find(Receiver.MF)[0].estimate
    for e in cs:
        assert mf.ser <= e.ser + 3 * e.ci_width


def test_saturated_cells_uninformative():
    base = make_config("IFSK", 20e6, 25e-6, 20e-6, 1e-4, 1e4, 1e6, 5)
    spec = ExperimentSpec("sat", base, p_values=(10,), trials=100, candidates=2)
    (entry,) = ratio_table(run_experiment(spec))
    assert not entry.informative
