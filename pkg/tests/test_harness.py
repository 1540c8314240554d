"""Experiment campaigns: statistics helpers, accounting, reproducibility."""

import numpy as np
import pytest

from xband.harness import (
    EXPERIMENT_KINDS,
    ExperimentSpec,
    _demap_array,
    _map_bits_array,
    _packet_chunk,
    _packet_ctx,
    _scheme_formats,
    default_scenario,
    packet_payload_bits,
    run_experiment,
    run_interference_strength,
    run_mitigation_compare,
    run_param_sweep,
    run_throughput,
    wilson_interval,
)


def _spec(kind: str, trials: int, seed: int = 17, **kwargs) -> ExperimentSpec:
    return ExperimentSpec(
        kind=kind, scenario=default_scenario(seed=seed), n_trials=trials, **kwargs
    )


def test_wilson_interval_reference_values():
    lo, hi = wilson_interval(50, 100)
    assert lo == pytest.approx(0.40383, abs=1e-4)
    assert hi == pytest.approx(0.59617, abs=1e-4)
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and 0.0 < hi < 0.05
    lo, hi = wilson_interval(100, 100)
    assert 0.95 < lo < 1.0 and hi == 1.0


def test_vectorized_bit_mapping_roundtrip():
    rng = np.random.default_rng(0)
    bits = rng.integers(0, 2, size=(5, 8, 2))
    vals = _map_bits_array(bits, power=2.0)
    assert np.allclose(np.abs(vals) ** 2, 2.0)
    assert np.array_equal(_demap_array(vals), bits)


def test_payload_bits_accounting():
    def bits_for(scheme, fmt):
        ctx = _packet_ctx(
            _spec("throughput", 1), scheme, fmt, p_r_db=0.0, eps_max=0.0, stream=(0,)
        )
        return packet_payload_bits(ctx)

    full = 2 * 32 * 8  # 32 symbols x 8 subcarriers x 2 bits
    assert bits_for("none", 0) == full
    # A 4-bin guardband shrinks each link's allocation to 6 subcarriers.
    assert bits_for("fgb", 4) == 2 * 32 * 6
    # Each antipodal pair spends one of its two subcarriers on the coding.
    assert bits_for("isc", 2) == full - 2 * 32 * 2
    # Each cross-symbol-coded subcarrier sends one payload per symbol pair.
    assert bits_for("csc", 4) == full - 2 * (32 // 2) * 4


def test_scheme_format_ranges():
    assert _scheme_formats("none", 8, 16) == [0]
    assert _scheme_formats("fgb", 8, 16) == list(range(0, 15))
    assert _scheme_formats("isc", 8, 16) == [0, 1, 2, 3, 4]
    assert _scheme_formats("csc", 8, 16) == [0, 2, 4, 6, 8]
    with pytest.raises(ValueError):
        _scheme_formats("notch", 8, 16)


def test_packets_error_free_without_interference():
    # A negligible interferer, no noise, no offset: every packet decodes.
    spec = ExperimentSpec(
        kind="throughput",
        scenario=default_scenario(seed=1, p_r_db=-120.0, noise_db=-400.0),
        n_trials=20,
    )
    for scheme, fmt in (("none", 0), ("isc", 2), ("csc", 4)):
        ctx = _packet_ctx(spec, scheme, fmt, p_r_db=-120.0, eps_max=0.0, stream=(9,))
        successes, packets, bit_errors = _packet_chunk(ctx, 0, 20)
        assert (successes, packets, bit_errors) == (20, 20, 0)


def test_interference_strength_report_shape_and_agreement():
    report = run_interference_strength(_spec("interference_strength", 300))
    table = report.tables["interference_strength"]
    assert table.columns == (
        "f",
        "analytic_db",
        "sim_nonfading_db",
        "sim_rayleigh_db",
        "analytic",
        "sim_nonfading",
        "sim_rayleigh",
    )
    assert [row[0] for row in table.rows] == list(range(1, 9))
    for row in table.rows:
        assert abs(row[1] - row[2]) < 0.6
        assert abs(row[1] - row[3]) < 1.0
    assert report.meta["max_gap_nonfading_db"] < 0.6


def test_interference_strength_reproducible():
    a = run_interference_strength(_spec("interference_strength", 300))
    b = run_interference_strength(_spec("interference_strength", 300))
    assert a.tables == b.tables
    c = run_interference_strength(_spec("interference_strength", 300, seed=18))
    assert a.tables != c.tables


def test_param_sweep_tables():
    report = run_param_sweep(_spec("param_sweep", 1))
    assert set(report.tables) == {"L_sweep", "rho_sweep", "N_sweep"}
    width = report.tables["L_sweep"]
    assert width.columns == ("l", "f", "cbi", "cbi_db")
    assert {row[0] for row in width.rows} == {4, 8, 16}


def test_mitigation_compare_budget_accounting():
    report = run_mitigation_compare(_spec("mitigation_compare", 256))
    # 25% of each link's 8 subcarrier slots: 4 guard bins, 2 antipodal pairs,
    # 4 cross-symbol-coded subcarriers.
    assert report.meta["gap"] == 4
    assert report.meta["isc_coded"] == 4
    assert report.meta["csc_coded"] == 4
    table = report.tables["mitigation_spectra"]
    assert table.columns[0] == "f"
    assert len(table.rows) == 81


def test_run_experiment_dispatch_covers_all_kinds():
    assert set(EXPERIMENT_KINDS) == {
        "interference_strength",
        "param_sweep",
        "sync_error",
        "ber",
        "mitigation_compare",
        "throughput",
        "freq_offset_sensitivity",
    }
    report = run_experiment(_spec("param_sweep", 1))
    assert report.kind == "param_sweep"
    with pytest.raises(ValueError):
        ExperimentSpec(kind="unknown", scenario=default_scenario(), n_trials=1)
    with pytest.raises(ValueError):
        ExperimentSpec(
            kind="throughput", scenario=default_scenario(), n_trials=1, p_r_db_list=()
        )


def test_throughput_report_sane():
    report = run_throughput(
        ExperimentSpec(
            kind="throughput",
            scenario=default_scenario(seed=23),
            n_trials=80,
            p_r_db_list=(0.0, 9.0),
        )
    )
    table = report.tables["throughput"]
    slack = 1e-9  # the interval endpoints are clipped independently of thr
    for p_r_db, scheme, fmt, thr, lo, hi, n in table.rows:
        assert 0.0 <= lo <= thr + slack
        assert thr <= hi + slack <= 1.0 + 2 * slack
        assert n == 80
    schemes = {row[1] for row in table.rows}
    assert schemes == {"none", "fgb", "isc", "csc"}
