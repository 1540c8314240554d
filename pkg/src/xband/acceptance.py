"""Release validation suite.

Ten numbered criteria check the analytic model and the simulator against
frozen reference values and qualitative system properties.  Each criterion
returns a CriterionResult; `evaluate_all` runs them in order and also hands
back the campaign reports it produced so callers can write them out.

Reference tolerances assume the full 10^4-trial budget; reduced-trial runs
widen the simulation-vs-theory tolerance (criterion 2) to 0.4 dB.
"""

from __future__ import annotations

import math
import tempfile
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from xband import analytic
from xband.channel import ChannelModel, MismatchModel, measure_cbi
from xband.harness import (
    CampaignReport,
    ExperimentSpec,
    default_scenario,
    measure_mitigated_spectrum,
    run_ber,
    run_experiment,
    run_freq_offset_sensitivity,
    run_interference_strength,
    run_mitigation_compare,
    run_param_sweep,
    run_sync_error,
    run_throughput,
)
from xband.ofdm import OfdmConfig, SubcarrierSet

# Frozen reference: average interference strength (dB) at the victim's
# subcarriers 1..8 for the default configuration (N=64, CP=16, 8-subcarrier
# interferer just below the band edge, unit power).
REFERENCE_CBI_DB = (-9.1, -13.5, -16.1, -17.8, -19.2, -20.3, -21.3, -22.1)

# Frozen reference: minimum guardband (subcarriers, 0.1 resolution) keeping
# the victim's edge subcarrier above a CIR floor, per (CIR floor dB, power
# ratio dB).
REFERENCE_GUARDBANDS = {
    (5.0, 0.0): 0.0, (5.0, 3.0): 0.0, (5.0, 6.0): 0.6, (5.0, 9.0): 1.6,
    (10.0, 0.0): 0.2, (10.0, 3.0): 1.0, (10.0, 6.0): 2.0, (10.0, 9.0): 4.0,
    (15.0, 0.0): 1.8, (15.0, 3.0): 3.7, (15.0, 6.0): 5.9, (15.0, 9.0): 10.0,
}

_N = 64
_N_CP = 16
_OMEGA1 = tuple(range(-7, 1))
_OMEGA2 = tuple(range(1, 9))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str


def _db(x, floor=1e-30):
    return 10.0 * np.log10(np.maximum(x, floor))


# ---------------------------------------------------------------------------
# 1. analytic reference values


def criterion_1_analytic_reference() -> CriterionResult:
    start = time.perf_counter()
    f = np.arange(1.0, 9.0)
    values = _db(analytic.cbi_overall(f, _OMEGA1, 1.0, _N, _N_CP))
    elapsed = time.perf_counter() - start
    gaps = np.abs(values - np.array(REFERENCE_CBI_DB))
    passed = bool(np.max(gaps) <= 0.05 and elapsed < 1.0)
    return CriterionResult(
        1,
        "analytic interference strengths match the reference table",
        passed,
        f"max |Δ| = {np.max(gaps):.3f} dB (tol 0.05), runtime {elapsed * 1e3:.1f} ms",
    )


# ---------------------------------------------------------------------------
# 2. simulation matches theory


def criterion_2_simulation_matches_theory(
    report: CampaignReport, trials: int
) -> CriterionResult:
    tol = 0.2 if trials >= 10_000 else 0.4
    gap_nf = report.meta["max_gap_nonfading_db"]
    gap_rl = report.meta["max_gap_rayleigh_db"]
    passed = gap_nf <= tol and gap_rl <= tol
    return CriterionResult(
        2,
        "simulated interference matches the analytic model",
        passed,
        f"max gap non-fading {gap_nf:.3f} dB, Rayleigh {gap_rl:.3f} dB "
        f"(tol {tol} at {trials} trials)",
    )


# ---------------------------------------------------------------------------
# 3. large-mismatch case exceeds small-mismatch case by ~3 dB


def criterion_3_case_gap() -> CriterionResult:
    gaps = []
    for k in range(1, 9):
        f = np.arange(k - 0.5, k + 0.5, 0.01)
        a = np.mean(analytic.cbi_case_a(f, _OMEGA1, 1.0, _N))
        b = np.mean(analytic.cbi_case_b_avg(f, _OMEGA1, 1.0, _N))
        gaps.append(10.0 * math.log10(b / a))
    gaps = np.array(gaps)
    passed = bool(np.all(np.abs(gaps - 3.0) <= 0.5))
    return CriterionResult(
        3,
        "large-mismatch interference exceeds small-mismatch by 3 dB",
        passed,
        f"step-averaged gap range [{gaps.min():.2f}, {gaps.max():.2f}] dB "
        "(target 3 ± 0.5)",
    )


# ---------------------------------------------------------------------------
# 4. parameter sensitivity


def criterion_4_parameter_sweeps() -> CriterionResult:
    problems = []
    f_int = np.arange(1.0, 9.0)
    p_rho0 = analytic.cbi_overall_rho(f_int, _OMEGA1, 1.0, _N, 0.0)
    p_rho5 = analytic.cbi_overall_rho(f_int, _OMEGA1, 1.0, _N, 0.5)
    rho_gain = 10.0 * np.log10(p_rho0 / p_rho5)
    if not np.all(np.abs(rho_gain - 3.0) <= 0.5):
        problems.append(f"CP-overhead gain {rho_gain.min():.2f}..{rho_gain.max():.2f} dB")

    # FFT size: the large-N curves coincide.  (N=64 sits visibly above them
    # and is excluded from the 0.1 dB check; see the project notes.)
    f_grid = np.arange(0.25, 8.01, 0.25)
    spectra = analytic.param_sensitivity("N", [256, 1024], f_grid, l=8, rho=0.2)
    n_gap = np.max(np.abs(_db(spectra[256].values) - _db(spectra[1024].values)))
    if n_gap > 0.1:
        problems.append(f"N=256 vs N=1024 differ by {n_gap:.3f} dB")

    by_l = analytic.param_sensitivity("L", [4, 8, 16], f_grid, rho=0.2, n=_N)
    if not (
        np.all(by_l[4].values <= by_l[8].values * (1 + 1e-12))
        and np.all(by_l[8].values <= by_l[16].values * (1 + 1e-12))
    ):
        problems.append("interference not non-decreasing in the interferer width")

    return CriterionResult(
        4,
        "parameter sweeps behave as analyzed",
        not problems,
        "; ".join(problems)
        or f"CP gain {rho_gain.mean():.2f} dB, N-curve gap {n_gap:.4f} dB, "
        "monotone in interferer width",
    )


# ---------------------------------------------------------------------------
# 5. worked example of the synchronization/ICI budget


def criterion_5_worked_example() -> CriterionResult:
    checks = []

    p_i = analytic.mean_interference_power(
        _OMEGA2,
        lambda f: analytic.cbi_overall(f, _OMEGA1, 1.0, _N, _N_CP),
        epsilon=0.0,
    )
    p_i_db = 10.0 * math.log10(p_i)
    checks.append((abs(p_i_db - (-15.1)) <= 0.1, f"P_I {p_i_db:.2f} dB (ref -15.1 ± 0.1)"))

    sinr = 1.0 / (p_i + 1e-4)
    df_std = analytic.sync_error_std(8, sinr)
    checks.append(
        (abs(df_std - 0.028) <= 0.001, f"offset-error std {df_std:.4f} (ref 0.028 ± 0.001)")
    )

    delta_f = 2.0 * df_std
    p_sig, _ = analytic.decompose_sig_ici(delta_f, 1, _OMEGA2, 1.0, _N)
    p_sig_db = 10.0 * math.log10(p_sig)
    checks.append(
        (abs(p_sig_db - (-0.1)) <= 0.05, f"signal loss {p_sig_db:.3f} dB (ref -0.1 ± 0.05)")
    )

    ici_db = [
        10.0 * math.log10(analytic.decompose_sig_ici(delta_f, l, _OMEGA2, 1.0, _N)[1])
        for l in _OMEGA2
    ]
    checks.append(
        (
            min(ici_db) > -23.7 and max(ici_db) < -20.9,
            f"ICI range [{min(ici_db):.2f}, {max(ici_db):.2f}] dB (ref (-23.7, -20.9))",
        )
    )

    for f, ref in ((1.0, -9.1), (8.0, -22.1)):
        v = 10.0 * math.log10(analytic.cbi_overall(f, _OMEGA1, 1.0, _N, _N_CP))
        checks.append((abs(v - ref) <= 0.05, f"P_CBI({int(f)}) {v:.2f} dB (ref {ref} ± 0.05)"))

    passed = all(ok for ok, _ in checks)
    detail = "; ".join(("ok: " if ok else "FAIL: ") + msg for ok, msg in checks)
    return CriterionResult(5, "worked interference/ICI budget example", passed, detail)


# ---------------------------------------------------------------------------
# 6. guardband sizing table


def criterion_6_guardband_table() -> CriterionResult:
    cfg = OfdmConfig(n_fft=_N, n_cp=_N_CP)
    computed = {}
    problems = []
    for (cir_db, p_r_db), ref in REFERENCE_GUARDBANDS.items():
        gap = analytic.min_guardband(cir_db, p_r_db, cfg, interferer_width=8)
        computed[(cir_db, p_r_db)] = gap
        if gap is None or abs(gap - ref) > 0.2:
            problems.append(f"CIR {cir_db:g}/p_r {p_r_db:g}: got {gap}, ref {ref}")
    cirs = sorted({c for c, _ in computed})
    prs = sorted({p for _, p in computed})
    for c in cirs:
        row = [computed[(c, p)] for p in prs]
        if any(b < a for a, b in zip(row, row[1:])):
            problems.append(f"not monotone in power ratio at CIR {c:g}")
    for p in prs:
        col = [computed[(c, p)] for c in cirs]
        if any(b < a for a, b in zip(col, col[1:])):
            problems.append(f"not monotone in CIR floor at p_r {p:g}")
    return CriterionResult(
        6,
        "minimum-guardband table matches the reference",
        not problems,
        "; ".join(problems) or "all 12 entries within 0.2 subcarriers, monotone",
    )


# ---------------------------------------------------------------------------
# 7. mitigation spectra properties


def criterion_7_mitigation_spectra(
    report: CampaignReport, seed: int
) -> CriterionResult:
    table = report.tables["mitigation_spectra"]
    cols = {name: i for i, name in enumerate(table.columns)}
    rows = np.array([[row[cols[c]] for c in table.columns] for row in table.rows])
    none_db = rows[:, cols["none_db"]]
    isc_db = rows[:, cols["isc_db"]]
    fgb_db = rows[:, cols["fgb_db"]]
    fgb_ana_db = rows[:, cols["fgb_analytic_db"]]

    problems = []
    isc_gap = float(np.mean(isc_db - none_db))
    if abs(isc_gap) > 1.0:
        problems.append(f"ISC grid-average differs from unmitigated by {isc_gap:.2f} dB")
    fgb_gap = float(np.max(np.abs(fgb_db - fgb_ana_db)))
    if fgb_gap > 0.2:
        problems.append(f"guardband spectrum off analytic shift by {fgb_gap:.3f} dB")

    cfg = OfdmConfig(n_fft=_N, n_cp=_N_CP)
    worst_csc = -math.inf
    for tau in (5.0, 30.0, 77.0):
        ps = measure_mitigated_spectrum(
            cfg, _OMEGA1, 1.0, "csc", np.arange(1.0, 9.0), n_trials=64,
            seed=seed, mismatch=MismatchModel.fixed(tau), eps=0.0,
        )
        worst_csc = max(worst_csc, float(np.max(_db(ps.values))))
    if worst_csc > -60.0:
        problems.append(f"cross-symbol coding leaves {worst_csc:.1f} dBc at integer offsets")

    return CriterionResult(
        7,
        "mitigation spectra show the expected behavior",
        not problems,
        "; ".join(problems)
        or f"ISC avg gap {isc_gap:.2f} dB, FGB max gap {fgb_gap:.3f} dB, "
        f"CSC worst integer-offset level {worst_csc:.1f} dBc",
    )


# ---------------------------------------------------------------------------
# 8. throughput properties


def _throughput_rows(report: CampaignReport, table_name: str):
    table = report.tables[table_name]
    cols = {name: i for i, name in enumerate(table.columns)}
    out = {}
    for row in table.rows:
        key = (row[cols[table.columns[0]]], row[cols["scheme"]])
        out[key] = (row[cols["throughput"]], row[cols["ci_low"]], row[cols["ci_high"]])
    return out


def criterion_8_throughput(
    thr_report: CampaignReport, foff_report: CampaignReport
) -> CriterionResult:
    problems = []
    by_pr = _throughput_rows(thr_report, "throughput")
    p_r_values = sorted({pr for pr, _ in by_pr})

    none9 = by_pr[(9.0, "none")]
    for scheme in ("fgb", "csc"):
        thr, lo, _ = by_pr[(9.0, scheme)]
        if not (thr >= 1.8 * none9[0] and lo > none9[2]):
            problems.append(
                f"{scheme} at p_r=9: {thr:.3f} vs unmitigated {none9[0]:.3f} "
                "(needs ≥1.8x with separated CIs)"
            )

    for pr in p_r_values:
        fgb = by_pr[(pr, "fgb")]
        csc = by_pr[(pr, "csc")]
        overlap = fgb[2] >= csc[1] and csc[2] >= fgb[1]
        if not (fgb[0] >= csc[0] or overlap):
            problems.append(f"guardband below cross-symbol coding at p_r={pr:g}")

    by_eps = _throughput_rows(foff_report, "freq_offset_sensitivity")
    eps_values = sorted({e for e, _ in by_eps})
    csc_curve = [by_eps[(e, "csc")] for e in eps_values]
    for (t0, _, h0), (t1, _, _) in zip(csc_curve, csc_curve[1:]):
        if t1 > h0:
            problems.append("cross-symbol throughput not non-increasing in offset spread")
            break
    last = eps_values[-1]
    csc_last, none_last = by_eps[(last, "csc")], by_eps[(last, "none")]
    if not (csc_last[2] >= none_last[1] and none_last[2] >= csc_last[1]):
        problems.append(
            f"at offset spread {last:g}, cross-symbol coding "
            f"({csc_last[0]:.3f}) not ≈ unmitigated ({none_last[0]:.3f})"
        )
    fgb_curve = [by_eps[(e, "fgb")][0] for e in eps_values]
    variation = (max(fgb_curve) - min(fgb_curve)) / np.mean(fgb_curve)
    if variation > 0.05:
        problems.append(f"guardband throughput varies {variation * 100:.1f}% with offset spread")

    return CriterionResult(
        8,
        "throughput gains and offset sensitivity",
        not problems,
        "; ".join(problems)
        or (
            f"fgb/csc vs none at p_r=9: {by_pr[(9.0, 'fgb')][0]:.3f}/"
            f"{by_pr[(9.0, 'csc')][0]:.3f} vs {none9[0]:.3f}; "
            f"fgb offset variation {variation * 100:.1f}%"
        ),
    )


# ---------------------------------------------------------------------------
# 9. closed forms vs numeric oracles


def _tone_window_power(f: float, k: int, n: int, lo: int, hi: int) -> float:
    nvec = np.arange(lo, hi)
    return float(np.abs(np.sum(np.exp(2j * np.pi * (k - f) * nvec / n))) ** 2) / n**2


def _oracle_case_a(f: float, omega, n: int) -> float:
    return sum(_tone_window_power(f, k, n, 0, n) for k in omega)


def _oracle_case_b_split(f: float, omega, n: int, m: int) -> float:
    # Expected window power when the first m samples belong to one symbol and
    # the rest to an independent one: the cross terms average out.
    return sum(
        _tone_window_power(f, k, n, 0, m) + _tone_window_power(f, k, n, m, n)
        for k in omega
    )


def _dbs_match(a: float, b: float, tol_db: float, floor: float = 1e-15) -> bool:
    if a < floor and b < floor:
        return True
    if a <= 0 or b <= 0:
        return False
    return abs(10.0 * math.log10(a / b)) <= tol_db


def criterion_9_oracle_equivalence() -> CriterionResult:
    f_grid = np.arange(0.25, 8.01, 0.25)
    problems = []

    for f in f_grid:
        if not _dbs_match(
            analytic.cbi_case_a(float(f), _OMEGA1, 1.0, _N),
            _oracle_case_a(float(f), _OMEGA1, _N),
            0.1,
        ):
            problems.append(f"small-mismatch form off at f={f:g}")
            break

    for m in (1, 13, 32, 63):
        tau = _N_CP + m - 0.25
        for f in f_grid:
            if not _dbs_match(
                analytic.cbi_case_b_at_tau(float(f), tau, _OMEGA1, 1.0, _N, _N_CP),
                _oracle_case_b_split(float(f), _OMEGA1, _N, m),
                0.1,
            ):
                problems.append(f"large-mismatch form off at f={f:g}, split {m}")
                break

    for f in f_grid:
        oracle_avg = np.mean(
            [_oracle_case_b_split(float(f), _OMEGA1, _N, m) for m in range(1, _N + 1)]
        )
        if not _dbs_match(
            analytic.cbi_case_b_avg(float(f), _OMEGA1, 1.0, _N), float(oracle_avg), 0.1
        ):
            problems.append(f"mismatch-averaged form off at f={f:g}")
            break

    rho = _N_CP / (_N + _N_CP)
    for f in f_grid:
        oracle = rho * _oracle_case_a(float(f), _OMEGA1, _N) + (1 - rho) * np.mean(
            [_oracle_case_b_split(float(f), _OMEGA1, _N, m) for m in range(1, _N + 1)]
        )
        if not _dbs_match(
            analytic.cbi_overall(float(f), _OMEGA1, 1.0, _N, _N_CP), float(oracle), 0.1
        ):
            problems.append(f"overall mixture off at f={f:g}")
            break

    for x in (0.028, 0.25, 1.75, 31.5):
        if not _dbs_match(
            analytic.dirichlet_power(x, _N), _tone_window_power(x, 0, _N, 0, _N), 0.1
        ):
            problems.append(f"leakage kernel off at x={x:g}")

    delta_f = 0.056
    for l in _OMEGA2:
        p_sig, p_ici = analytic.decompose_sig_ici(delta_f, l, _OMEGA2, 1.0, _N)
        o_sig = _tone_window_power(l + delta_f, l, _N, 0, _N)
        o_ici = sum(
            _tone_window_power(l + delta_f, k, _N, 0, _N) for k in _OMEGA2 if k != l
        )
        if not (_dbs_match(p_sig, o_sig, 0.1) and _dbs_match(p_ici, o_ici, 0.1)):
            problems.append(f"signal/ICI split off at subcarrier {l}")

    return CriterionResult(
        9,
        "closed forms agree with numeric oracles",
        not problems,
        "; ".join(problems) or "all closed forms within 0.1 dB of their oracles",
    )


# ---------------------------------------------------------------------------
# 10. determinism


def criterion_10_determinism(seed: int) -> CriterionResult:
    from xband.cli import write_report

    scenario = default_scenario(seed=seed)
    spec = ExperimentSpec(kind="interference_strength", scenario=scenario, n_trials=512)
    with tempfile.TemporaryDirectory() as tmp:
        dirs = []
        for i, threads in enumerate((1, 2, 1)):
            report = run_interference_strength(replace(spec, threads=threads))
            out = Path(tmp) / f"run{i}"
            write_report(report, out)
            dirs.append(out)
        blobs = [
            {p.name: p.read_bytes() for p in sorted(d.glob("*.csv"))} for d in dirs
        ]
    passed = blobs[0] == blobs[1] == blobs[2]
    return CriterionResult(
        10,
        "identical seeds give byte-identical outputs, serial and parallel",
        passed,
        "serial/parallel/serial CSVs identical" if passed else "outputs differ",
    )


# ---------------------------------------------------------------------------
# driver


def evaluate_all(
    seed: int = 12345,
    trials: int = 2000,
    include_extras: bool = False,
) -> tuple[list[CriterionResult], dict[str, CampaignReport]]:
    """Run all ten criteria; returns (results, campaign reports used)."""
    scenario = default_scenario(seed=seed)
    reports: dict[str, CampaignReport] = {}

    interf = run_interference_strength(
        ExperimentSpec(kind="interference_strength", scenario=scenario, n_trials=trials)
    )
    reports["interference_strength"] = interf
    reports["param_sweep"] = run_param_sweep(
        ExperimentSpec(kind="param_sweep", scenario=scenario, n_trials=1)
    )
    mit = run_mitigation_compare(
        ExperimentSpec(
            kind="mitigation_compare", scenario=scenario, n_trials=max(trials, 5000)
        )
    )
    reports["mitigation_compare"] = mit
    thr_trials = max(200, trials // 5)
    thr = run_throughput(
        ExperimentSpec(kind="throughput", scenario=scenario, n_trials=thr_trials)
    )
    reports["throughput"] = thr
    foff = run_freq_offset_sensitivity(
        ExperimentSpec(
            kind="freq_offset_sensitivity", scenario=scenario, n_trials=thr_trials
        )
    )
    reports["freq_offset_sensitivity"] = foff
    if include_extras:
        reports["sync_error"] = run_sync_error(
            ExperimentSpec(kind="sync_error", scenario=scenario, n_trials=trials)
        )
        reports["ber"] = run_ber(
            ExperimentSpec(kind="ber", scenario=scenario, n_trials=max(200, trials // 4))
        )

    results = [
        criterion_1_analytic_reference(),
        criterion_2_simulation_matches_theory(interf, trials),
        criterion_3_case_gap(),
        criterion_4_parameter_sweeps(),
        criterion_5_worked_example(),
        criterion_6_guardband_table(),
        criterion_7_mitigation_spectra(mit, seed),
        criterion_8_throughput(thr, foff),
        criterion_9_oracle_equivalence(),
        criterion_10_determinism(seed),
    ]
    return results, reports
