"""Config parsing, CSV output stability, and the command-line entry point."""

from pathlib import Path

import numpy as np
import pytest

from xband.cli import (
    ConfigError,
    RunConfig,
    build_experiment_spec,
    build_scenario,
    format_cell,
    main,
    parse_config,
    version_string,
    write_table_csv,
)
from xband.harness import Table


def test_defaults_parse():
    params = parse_config(None, [])
    assert params["n_fft"] == 64
    assert params["n_cp"] == 16
    assert params["eps"] is None and params["eps_max"] is None


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown config key"):
        parse_config(None, ["nfft=64"])


def test_bad_value_rejected():
    with pytest.raises(ConfigError, match="invalid value"):
        parse_config(None, ["n_fft=sixty-four"])
    with pytest.raises(ConfigError, match="invalid value"):
        parse_config(None, ["tie_channels=maybe"])
    with pytest.raises(ConfigError):
        parse_config(None, ["n_fft"])  # missing '='


def test_offset_modes_are_exclusive():
    with pytest.raises(ConfigError, match="not both"):
        parse_config(None, ["eps=0.1", "eps_max=0.2"])


def test_config_file_with_comments(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nn_cp = 8\np_r_db = 6  # inline\n\n")
    params = parse_config(str(cfg), ["p_r_db=9"])
    assert params["n_cp"] == 8
    assert params["p_r_db"] == 9.0  # --set wins over the file
    bad = tmp_path / "bad.cfg"
    bad.write_text("just words\n")
    with pytest.raises(ConfigError, match="expected key=value"):
        parse_config(str(bad), [])


def test_invalid_air_interface_becomes_config_error():
    params = parse_config(None, ["n_cp=64"])
    with pytest.raises(ConfigError):
        build_scenario(params, seed=0)


def test_scenario_construction_modes():
    params = parse_config(None, ["eps=0.25", "tau=37", "channel=rician", "k_factor=5"])
    sc = build_scenario(params, seed=4)
    assert sc.freq_offset.mode == "fixed" and sc.freq_offset.value == 0.25
    assert sc.mismatch.mode == "fixed" and sc.mismatch.tau == 37.0
    assert sc.channel.kind == "rician" and sc.channel.k_factor == 5.0
    # Infinite Rician factor degenerates to the non-fading channel.
    params = parse_config(None, ["channel=rician", "k_factor=inf"])
    assert build_scenario(params, seed=0).channel.kind == "non_fading"


def test_experiment_spec_from_config():
    config = RunConfig(
        experiment="throughput",
        params=parse_config(None, ["p_r_db_list=0,9", "eps_max_list=0,0.5"]),
        seed=3,
        trials=50,
        out_dir=Path("unused"),
    )
    spec = build_experiment_spec(config)
    assert spec.p_r_db_list == (0.0, 9.0)
    assert spec.eps_max_list == (0.0, 0.5)
    assert spec.n_trials == 50


def test_format_cell():
    assert format_cell(True) == "true"
    assert format_cell(np.int64(3)) == "3"
    assert format_cell(0.1) == "1.00000000e-01"
    assert format_cell(np.float64(-13.5)) == "-1.35000000e+01"
    assert format_cell("fgb") == "fgb"


def test_write_table_csv_bytes(tmp_path):
    table = Table(("f", "power_db"), ((1, -9.1), (2, -13.5)))
    path = tmp_path / "t.csv"
    write_table_csv(path, table)
    assert path.read_bytes() == (
        b"# columns: f, power_db\n"
        b"f,power_db\n"
        b"1,-9.10000000e+00\n"
        b"2,-1.35000000e+01\n"
    )


def test_version_string_nonempty():
    assert version_string()


def test_main_runs_small_campaign(tmp_path, capsys):
    out = tmp_path / "out"
    rc = main([
        "--experiment", "interference_strength",
        "--trials", "64",
        "--seed", "5",
        "--out", str(out),
        "--no-figures",
    ])
    assert rc == 0
    assert (out / "interference_strength.csv").exists()
    meta = (out / "meta.csv").read_text()
    assert "seed,5" in meta
    assert "experiment,interference_strength" in meta


def test_main_identical_runs_are_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        rc = main([
            "--experiment", "param_sweep",
            "--trials", "1",
            "--seed", "2",
            "--out", str(out),
            "--no-figures",
        ])
        assert rc == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    assert outs[0] == outs[1]


def test_main_renders_figures(tmp_path):
    out = tmp_path / "figs"
    rc = main([
        "--experiment", "param_sweep",
        "--trials", "1",
        "--seed", "2",
        "--out", str(out),
    ])
    assert rc == 0
    pngs = list(out.glob("*.png"))
    assert pngs, "report rendering should produce PNG files"


def test_main_config_error_exit_code(tmp_path, capsys):
    rc = main([
        "--experiment", "param_sweep",
        "--set", "bogus=1",
        "--out", str(tmp_path / "x"),
    ])
    assert rc == 2
    assert "unknown config key" in capsys.readouterr().err
