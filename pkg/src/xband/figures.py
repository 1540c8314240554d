"""PNG rendering of campaign reports, written alongside the CSV tables."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from xband.harness import CampaignReport, Table  # noqa: E402


def _rows_by(table: Table, key: str) -> dict:
    """Group rows by the value in the named column, preserving row order."""
    idx = table.columns.index(key)
    groups: dict = defaultdict(list)
    for row in table.rows:
        groups[row[idx]].append(row)
    return groups


def _col(rows, table: Table, name: str):
    idx = table.columns.index(name)
    return [row[idx] for row in rows]


def render_report(report: CampaignReport, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    renderer = _RENDERERS.get(report.kind, _render_generic)
    return renderer(report, out_dir)


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_interference_strength(report, out_dir):
    table = report.tables["interference_strength"]
    fig, ax = plt.subplots(figsize=(6, 4))
    f = _col(table.rows, table, "f")
    ax.plot(f, _col(table.rows, table, "analytic_db"), "k-", label="analytic")
    ax.plot(f, _col(table.rows, table, "sim_nonfading_db"), "bo--", label="sim non-fading")
    ax.plot(f, _col(table.rows, table, "sim_rayleigh_db"), "rs--", label="sim Rayleigh")
    ax.set_xlabel("frequency separation (subcarriers)")
    ax.set_ylabel("interference strength (dB)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "interference_strength.png")]


def _render_param_sweep(report, out_dir):
    paths = []
    for name, table in report.tables.items():
        param = table.columns[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        for value, rows in _rows_by(table, param).items():
            ax.plot(
                _col(rows, table, "f"),
                _col(rows, table, "cbi_db"),
                label=f"{param}={value:g}",
            )
        ax.set_xlabel("frequency separation (subcarriers)")
        ax.set_ylabel("interference strength (dB)")
        ax.legend()
        ax.grid(True, alpha=0.3)
        paths.append(_save(fig, out_dir / f"{name}.png"))
    return paths


def _render_sync_error(report, out_dir):
    table = report.tables["sync_error"]
    fig, ax = plt.subplots(figsize=(6, 4))
    pr = _col(table.rows, table, "p_r_db")
    ax.plot(pr, _col(table.rows, table, "analytic_std"), "k-", label="analytic")
    ax.plot(pr, _col(table.rows, table, "sim_std"), "bo--", label="simulated")
    ax.set_xlabel("power ratio (dB)")
    ax.set_ylabel("frequency-offset error std (subcarrier units)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "sync_error.png")]


def _render_ber(report, out_dir):
    paths = []
    for name, table in report.tables.items():
        param = table.columns[0]
        fig, ax = plt.subplots(figsize=(6, 4))
        for value, rows in _rows_by(table, param).items():
            ax.semilogy(
                _col(rows, table, "subcarrier"),
                [max(b, 1e-6) for b in _col(rows, table, "ber")],
                "o-",
                label=f"{param}={value:g}",
            )
        ax.set_xlabel("subcarrier")
        ax.set_ylabel("BER")
        ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        paths.append(_save(fig, out_dir / f"{name}.png"))
    return paths


def _render_mitigation(report, out_dir):
    table = report.tables["mitigation_spectra"]
    fig, ax = plt.subplots(figsize=(6, 4))
    f = _col(table.rows, table, "f")
    for column, style in (
        ("none_db", "k-"),
        ("fgb_db", "g-"),
        ("isc_db", "b--"),
        ("csc_db", "r-"),
    ):
        ax.plot(f, _col(table.rows, table, column), style, label=column[:-3].upper())
    ax.set_xlabel("frequency separation (subcarriers)")
    ax.set_ylabel("interference strength (dBc)")
    ax.set_ylim(bottom=-80)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "mitigation_spectra.png")]


def _render_throughput(report, out_dir):
    table = report.tables["throughput"]
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = _rows_by(table, "scheme")
    for scheme, rows in groups.items():
        pr = _col(rows, table, "p_r_db")
        thr = _col(rows, table, "throughput")
        lo = _col(rows, table, "ci_low")
        hi = _col(rows, table, "ci_high")
        # The interval endpoints are clipped to [0, 1] independently of the
        # point estimate, so guard against tiny negative rounding residues.
        err = [
            [max(t - a, 0.0) for t, a in zip(thr, lo)],
            [max(b - t, 0.0) for t, b in zip(thr, hi)],
        ]
        ax.errorbar(pr, thr, yerr=err, marker="o", capsize=3, label=scheme)
    ax.set_xlabel("power ratio (dB)")
    ax.set_ylabel("effective throughput (payload bits / symbol / subcarrier)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "throughput.png")]


def _render_freq_offset(report, out_dir):
    table = report.tables["freq_offset_sensitivity"]
    fig, ax = plt.subplots(figsize=(6, 4))
    for scheme, rows in _rows_by(table, "scheme").items():
        ax.plot(
            _col(rows, table, "eps_max"),
            _col(rows, table, "throughput"),
            "o-",
            label=scheme,
        )
    ax.set_xlabel("max inter-link frequency offset (subcarrier units)")
    ax.set_ylabel("effective throughput")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return [_save(fig, out_dir / "freq_offset_sensitivity.png")]


def _render_generic(report, out_dir):
    paths = []
    for name, table in report.tables.items():
        numeric = [
            c
            for c in table.columns[1:]
            if all(isinstance(row[table.columns.index(c)], (int, float)) for row in table.rows)
        ]
        if not numeric:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        x = _col(table.rows, table, table.columns[0])
        for column in numeric:
            ax.plot(x, _col(table.rows, table, column), label=column)
        ax.set_xlabel(table.columns[0])
        ax.legend()
        ax.grid(True, alpha=0.3)
        paths.append(_save(fig, out_dir / f"{name}.png"))
    return paths


_RENDERERS = {
    "interference_strength": _render_interference_strength,
    "param_sweep": _render_param_sweep,
    "sync_error": _render_sync_error,
    "ber": _render_ber,
    "mitigation_compare": _render_mitigation,
    "throughput": _render_throughput,
    "freq_offset_sensitivity": _render_freq_offset,
}
