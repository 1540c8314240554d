"""Command-line front end.

Parses a key=value config (file and/or repeated --set flags), dispatches the
requested experiment campaign, and writes one CSV per result table plus a
meta.csv describing the run.  Floats are emitted in scientific notation with
9 significant digits and LF line endings so outputs are byte-stable.  Each
report is also rendered to PNG figures next to the CSVs (disable with
--no-figures).
"""

from __future__ import annotations

import argparse
import math
import subprocess
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from xband.channel import ChannelModel, FreqOffsetModel, MismatchModel
from xband.harness import (
    EXPERIMENT_KINDS,
    CampaignReport,
    ExperimentSpec,
    Table,
    default_scenario,
    run_experiment,
)


class ConfigError(ValueError):
    """Bad config key or value; the message names the offending key."""


# Scenario and sweep defaults (air interface: 64-point FFT, 16-sample CP,
# QPSK, 12.5 kHz spacing, 8+8 subcarriers, 32-symbol packets, no guardband).
_DEFAULTS: dict[str, object] = {
    "n_fft": 64,
    "n_cp": 16,
    "subcarrier_spacing_hz": 12.5e3,
    "l1": 8,
    "l2": 8,
    "guardband": 0,
    "p_r_db": 0.0,
    "noise_db": -40.0,
    "eps": None,  # fixed inter-link offset (subcarrier units)
    "eps_max": None,  # uniform inter-link offset in [-eps_max, eps_max]
    "tau": "uniform",  # temporal mismatch: "uniform" or a fixed sample count
    "channel": "non_fading",  # "non_fading" or "rician"
    "k_factor": 0.0,
    "tie_channels": True,
    "packet_symbols": 32,
    "overhead_budget": 0.25,
    "p_r_db_list": "0,3,6,9",
    "k_factor_list": "inf,10,1,0",
    "eps_max_list": "0,0.1,0.2,0.3,0.4,0.5",
}

_LIST_KEYS = ("p_r_db_list", "k_factor_list", "eps_max_list")


@dataclass(frozen=True)
class RunConfig:
    experiment: str
    params: dict
    seed: int
    trials: int
    out_dir: Path
    render_figures: bool = True


def _convert(key: str, raw: str):
    default = _DEFAULTS[key]
    try:
        if key in _LIST_KEYS:
            return raw
        if key == "tau":
            return raw if raw == "uniform" else float(raw)
        if key in ("eps", "eps_max"):
            return float(raw)
        if isinstance(default, bool):
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key!r}: {raw!r}") from exc


def parse_config(path: str | None, overrides: list[str] | None) -> dict:
    """Merge defaults, an optional key=value config file, and --set overrides
    (in that precedence order) into a validated parameter dict."""
    params = dict(_DEFAULTS)
    pairs: list[tuple[str, str]] = []
    if path:
        text = Path(path).read_text()
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = stripped.partition("=")
            pairs.append((key.strip(), value.strip()))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), value.strip()))
    for key, value in pairs:
        if key not in _DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        params[key] = _convert(key, value)
    if params["eps"] is not None and params["eps_max"] is not None:
        raise ConfigError("set either 'eps' (fixed) or 'eps_max' (uniform), not both")
    return params


def _parse_float_list(key: str, raw) -> tuple[float, ...]:
    if isinstance(raw, tuple):
        return raw
    try:
        return tuple(float(tok) for tok in str(raw).split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(f"invalid value for {key!r}: {raw!r}") from exc


def build_scenario(params: dict, seed: int):
    """ScenarioSpec from a validated parameter dict."""
    if params["eps_max"] is not None:
        freq_offset = FreqOffsetModel.uniform(params["eps_max"])
    else:
        freq_offset = FreqOffsetModel.fixed(params["eps"] or 0.0)
    tau = params["tau"]
    mismatch = MismatchModel.uniform() if tau == "uniform" else MismatchModel.fixed(tau)
    kind = params["channel"]
    if kind == "rician" and math.isinf(params["k_factor"]):
        kind = "non_fading"
    channel = ChannelModel(
        kind,
        k_factor=params["k_factor"] if kind == "rician" else 0.0,
        tie_channels=params["tie_channels"],
    )
    try:
        scenario = default_scenario(
            seed=seed,
            n_fft=params["n_fft"],
            n_cp=params["n_cp"],
            p_r_db=params["p_r_db"],
            noise_db=params["noise_db"],
            l1=params["l1"],
            l2=params["l2"],
            gap=params["guardband"],
            channel=channel,
            mismatch=mismatch,
            freq_offset=freq_offset,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cfg = scenario.cfg
    if params["subcarrier_spacing_hz"] != cfg.subcarrier_spacing_hz:
        scenario = replace(
            scenario,
            cfg=replace(cfg, subcarrier_spacing_hz=params["subcarrier_spacing_hz"]),
        )
    return scenario


def build_experiment_spec(config: RunConfig) -> ExperimentSpec:
    params = config.params
    scenario = build_scenario(params, config.seed)
    try:
        return ExperimentSpec(
            kind=config.experiment,
            scenario=scenario,
            n_trials=config.trials,
            p_r_db_list=_parse_float_list("p_r_db_list", params["p_r_db_list"]),
            k_factor_list=_parse_float_list("k_factor_list", params["k_factor_list"]),
            eps_max_list=_parse_float_list("eps_max_list", params["eps_max_list"]),
            overhead_budget=params["overhead_budget"],
            packet_symbols=params["packet_symbols"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# CSV output


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.8e}"
    return str(value)


def write_table_csv(path: Path, table: Table) -> None:
    lines = ["# columns: " + ", ".join(table.columns)]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(format_cell(cell) for cell in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report(report: CampaignReport, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in report.tables.items():
        path = out_dir / f"{name}.csv"
        write_table_csv(path, table)
        written.append(path)
    return written


def version_string() -> str:
    try:
        from importlib.metadata import version

        base = version("xband")
    except Exception:
        base = "unknown"
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if described.returncode == 0 and described.stdout.strip():
            return f"{base}+g{described.stdout.strip()}"
    except Exception:
        pass
    return base


def write_meta(out_dir: Path, config: RunConfig, report_meta: dict) -> Path:
    rows = [
        ("experiment", config.experiment),
        ("seed", config.seed),
        ("trials", config.trials),
        ("version", version_string()),
    ]
    for key in sorted(config.params):
        value = config.params[key]
        rows.append((key, "" if value is None else value))
    for key in sorted(report_meta):
        rows.append((key, report_meta[key]))
    path = out_dir / "meta.csv"
    write_table_csv(path, Table(("key", "value"), tuple(rows)))
    return path


# ---------------------------------------------------------------------------
# entry point


def run(config: RunConfig) -> int:
    """Execute one campaign (or the full reproduction suite) and write its
    CSVs, meta.csv, and figures into the output directory."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    if config.experiment == "reproduce_paper":
        return _run_reproduction_suite(config)
    spec = build_experiment_spec(config)
    report = run_experiment(spec)
    write_report(report, config.out_dir)
    write_meta(config.out_dir, config, report.meta)
    if config.render_figures:
        from xband.figures import render_report

        render_report(report, config.out_dir)
    return 0


def _run_reproduction_suite(config: RunConfig) -> int:
    from xband.acceptance import evaluate_all
    from xband.figures import render_report

    results, reports = evaluate_all(
        seed=config.seed, trials=config.trials, include_extras=True
    )
    for report in reports.values():
        write_report(report, config.out_dir)
        if config.render_figures:
            render_report(report, config.out_dir)
    summary = Table(
        ("criterion", "name", "passed", "detail"),
        tuple((r.number, r.name, r.passed, r.detail) for r in results),
    )
    write_table_csv(config.out_dir / "summary.csv", summary)
    write_meta(config.out_dir, config, {})
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  criterion {r.number}: {r.name} — {r.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xband",
        description="Cross-band interference analysis and simulation campaigns.",
    )
    parser.add_argument(
        "--experiment",
        required=True,
        choices=list(EXPERIMENT_KINDS) + ["reproduce_paper"],
        help="campaign to run",
    )
    parser.add_argument("--config", help="key=value config file")
    parser.add_argument("--seed", type=int, default=0, help="campaign seed (u64)")
    parser.add_argument("--trials", type=int, default=10_000, help="trials per point")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config parameter (repeatable)",
    )
    parser.add_argument(
        "--no-figures",
        action="store_true",
        help="skip PNG rendering, write CSVs only",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = parse_config(args.config, args.set)
        config = RunConfig(
            experiment=args.experiment,
            params=params,
            seed=args.seed,
            trials=args.trials,
            out_dir=Path(args.out),
            render_figures=not args.no_figures,
        )
        return run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
