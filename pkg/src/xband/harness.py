"""Monte Carlo experiment campaigns.

Each experiment aggregates independent trials into a CampaignReport of plain
tables.  Trials draw from per-trial RNG streams derived from
(campaign seed, experiment id, point index, trial index), and partial sums
are combined over fixed-size chunks in index order, so serial and parallel
executions produce bit-identical reports.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from xband import analytic
from xband.channel import (
    TRIAL_CHUNK,
    ChannelModel,
    FreqOffsetModel,
    MismatchModel,
    ScenarioSpec,
    interferer_timeline,
    measure_cbi,
    random_qpsk_bins,
    resolve_threads,
    trial_rng,
    victim_windows,
)
from xband.mitigation import csc_phase, edge_pairs, edge_subcarriers, fgb_allocate
from xband.ofdm import (
    LinkSpec,
    OfdmConfig,
    SubcarrierSet,
    demodulate_stream,
    modulate_stream,
)
from xband.sync import estimate_cfo, make_preamble, multiband_filter

# Experiment stream tags keep RNG streams distinct between campaigns that
# share a seed.
_EXP_CBI = 1
_EXP_SYNC = 2
_EXP_BER = 3
_EXP_MIT = 4
_EXP_THR = 5
_EXP_FOFF = 6

EXPERIMENT_KINDS = (
    "interference_strength",
    "param_sweep",
    "sync_error",
    "ber",
    "mitigation_compare",
    "throughput",
    "freq_offset_sensitivity",
)

QPSK_POINTS = np.array([1 + 1j, -1 + 1j, 1 - 1j, -1 - 1j]) / np.sqrt(2)


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    scenario: ScenarioSpec
    n_trials: int = 10_000
    p_r_db_list: tuple[float, ...] = (0.0, 3.0, 6.0, 9.0)
    k_factor_list: tuple[float, ...] = (math.inf, 10.0, 1.0, 0.0)
    eps_max_list: tuple[float, ...] = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)
    overhead_budget: float = 0.25
    packet_symbols: int = 32
    threads: int | None = None

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if not self.p_r_db_list or not self.k_factor_list or not self.eps_max_list:
            raise ValueError("sweep lists must be non-empty")


@dataclass(frozen=True)
class CampaignReport:
    kind: str
    meta: dict
    tables: dict[str, Table]


def default_scenario(
    seed: int = 0,
    n_fft: int = 64,
    n_cp: int = 16,
    p_r_db: float = 0.0,
    noise_db: float = -40.0,
    l1: int = 8,
    l2: int = 8,
    gap: int = 0,
    channel: ChannelModel | None = None,
    mismatch: MismatchModel | None = None,
    freq_offset: FreqOffsetModel | None = None,
) -> ScenarioSpec:
    """Two contiguous links around the DC boundary, per the default layout."""
    omega1 = SubcarrierSet.contiguous(-(l1 - 1) - gap, -gap)
    omega2 = SubcarrierSet.contiguous(1, l2)
    p1 = 10.0 ** (p_r_db / 10.0)
    return ScenarioSpec(
        cfg=OfdmConfig(n_fft=n_fft, n_cp=n_cp),
        link1=LinkSpec(omega1, p1, role="interferer"),
        link2=LinkSpec(omega2, 1.0, role="signal"),
        mismatch=mismatch or MismatchModel.uniform(),
        freq_offset=freq_offset or FreqOffsetModel.fixed(0.0),
        channel=channel or ChannelModel("non_fading"),
        noise_power_per_subcarrier=10.0 ** (noise_db / 10.0) if noise_db > -300 else 0.0,
        seed=seed,
    )


def run_experiment(spec: ExperimentSpec) -> CampaignReport:
    runner = {
        "interference_strength": run_interference_strength,
        "param_sweep": run_param_sweep,
        "sync_error": run_sync_error,
        "ber": run_ber,
        "mitigation_compare": run_mitigation_compare,
        "throughput": run_throughput,
        "freq_offset_sensitivity": run_freq_offset_sensitivity,
    }[spec.kind]
    return runner(spec)


# ---------------------------------------------------------------------------
# shared helpers


def _chunks(n_trials: int):
    return [(lo, min(lo + TRIAL_CHUNK, n_trials)) for lo in range(0, n_trials, TRIAL_CHUNK)]


def _chunked_sum(worker, ctx, n_trials: int, threads: int | None):
    """Sum worker(ctx, lo, hi) over fixed chunks, in index order."""
    chunks = _chunks(n_trials)
    workers = resolve_threads(threads)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            partials = list(ex.map(_star, [(worker, ctx, lo, hi) for lo, hi in chunks]))
    else:
        partials = [worker(ctx, lo, hi) for lo, hi in chunks]
    acc = partials[0]
    for p in partials[1:]:
        acc = acc + p
    return acc


def _star(args):
    worker, ctx, lo, hi = args
    return worker(ctx, lo, hi)


def wilson_interval(successes: int, n: int, z: float = 1.959964) -> tuple[float, float]:
    """95% binomial confidence interval (Wilson score)."""
    if n == 0:
        return (0.0, 1.0)
    p = successes / n
    denom = 1.0 + z**2 / n
    center = (p + z**2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z**2 / (4 * n**2)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _db(x: float, floor: float = 1e-30) -> float:
    return 10.0 * math.log10(max(x, floor))


def _map_bits_array(bits: np.ndarray, power: float) -> np.ndarray:
    """Vectorized Gray QPSK map; bits has shape (..., 2)."""
    idx = 2 * bits[..., 0] + bits[..., 1]
    # Gray order: 00 -> (1+i), 01 -> (-1+i), 10 -> (1-i), 11 -> (-1-i)
    return QPSK_POINTS[idx] * np.sqrt(power)


def _demap_array(values: np.ndarray) -> np.ndarray:
    """Inverse of _map_bits_array; returns bits of shape (..., 2)."""
    b0 = (np.imag(values) < 0).astype(int)
    b1 = (np.real(values) < 0).astype(int)
    return np.stack([b0, b1], axis=-1)


# ---------------------------------------------------------------------------
# interference strength vs subcarrier separation


def run_interference_strength(spec: ExperimentSpec) -> CampaignReport:
    sc = spec.scenario
    cfg = sc.cfg
    f_grid = np.array([float(k) for k in sc.link2.subcarriers])
    theo = analytic.cbi_overall(
        f_grid, sc.link1.subcarriers, 1.0, cfg.n_fft, cfg.n_cp
    )
    base = replace(sc, noise_power_per_subcarrier=0.0)
    nonfad = measure_cbi(
        replace(base, channel=ChannelModel("non_fading")),
        f_grid, spec.n_trials, threads=spec.threads,
    )
    rayleigh = measure_cbi(
        replace(base, seed=base.seed + 1, channel=ChannelModel("rician", k_factor=0.0)),
        f_grid, spec.n_trials, threads=spec.threads,
    )
    rows = []
    for i, f in enumerate(f_grid):
        rows.append(
            (
                float(f),
                _db(theo[i]),
                _db(nonfad.values[i]),
                _db(rayleigh.values[i]),
                float(theo[i]),
                float(nonfad.values[i]),
                float(rayleigh.values[i]),
            )
        )
    gap_nf = float(np.max(np.abs(10 * np.log10(nonfad.values / theo))))
    gap_rl = float(np.max(np.abs(10 * np.log10(rayleigh.values / theo))))
    return CampaignReport(
        kind=spec.kind,
        meta={
            "seed": sc.seed,
            "n_trials": spec.n_trials,
            "max_gap_nonfading_db": gap_nf,
            "max_gap_rayleigh_db": gap_rl,
        },
        tables={
            "interference_strength": Table(
                (
                    "f",
                    "analytic_db",
                    "sim_nonfading_db",
                    "sim_rayleigh_db",
                    "analytic",
                    "sim_nonfading",
                    "sim_rayleigh",
                ),
                tuple(rows),
            )
        },
    )


# ---------------------------------------------------------------------------
# analytic parameter sweeps


def run_param_sweep(spec: ExperimentSpec) -> CampaignReport:
    cfg = spec.scenario.cfg
    f_grid = np.arange(0.25, 8.01, 0.25)
    rho = cfg.cp_overhead
    tables = {}
    sweeps = {
        "L": ("L_sweep", [4, 8, 16]),
        "rho": ("rho_sweep", [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]),
        "N": ("N_sweep", [64, 256, 1024]),
    }
    for param, (name, values) in sweeps.items():
        spectra = analytic.param_sensitivity(
            param, values, f_grid, l=len(spec.scenario.link1.subcarriers),
            rho=rho, n=cfg.n_fft,
        )
        rows = []
        for v, ps in spectra.items():
            for f, val in zip(ps.f_grid, ps.values):
                rows.append((float(v), float(f), float(val), _db(val)))
        tables[name] = Table((param.lower(), "f", "cbi", "cbi_db"), tuple(rows))
    return CampaignReport(spec.kind, {"seed": spec.scenario.seed}, tables)


# ---------------------------------------------------------------------------
# synchronization error


@dataclass(frozen=True)
class _SyncCtx:
    scenario: ScenarioSpec
    point: int
    p_r_db: float
    n_data_symbols: int = 3


def _sync_chunk(ctx: _SyncCtx, lo: int, hi: int) -> np.ndarray:
    sc = ctx.scenario
    cfg = sc.cfg
    p = cfg.symbol_len
    n_sym = 1 + ctx.n_data_symbols
    total = n_sym * p
    lead = 2
    p1 = 10.0 ** (ctx.p_r_db / 10.0)
    preamble = make_preamble(sc.link2, cfg, seed=sc.seed)
    pre_bins = preamble.freq.to_bins(cfg.n_fft)
    acc = np.zeros(3)  # sum err, sum err^2, count
    for t in range(lo, hi):
        rng = trial_rng(sc.seed, _EXP_SYNC, ctx.point, t)
        tau = sc.mismatch.draw(rng, cfg)
        eps = sc.freq_offset.draw(rng)
        h1 = sc.channel.draw(rng)
        h2 = h1 if sc.channel.tie_channels else sc.channel.draw(rng)
        cfo = rng.uniform(-0.5, 0.5)

        bins2 = random_qpsk_bins(
            rng, sc.link2.subcarriers, sc.link2.power_per_subcarrier, n_sym, cfg.n_fft
        )
        bins2[0] = pre_bins
        x2 = modulate_stream(bins2, cfg.n_cp)
        x2 = x2 * np.exp(2j * np.pi * cfo * np.arange(total) / cfg.n_fft)

        bins1 = random_qpsk_bins(
            rng, sc.link1.subcarriers, p1, n_sym + lead + 1, cfg.n_fft
        )
        x1 = interferer_timeline(bins1, cfg, int(round(tau)), eps, total, lead)

        rx = h1 * x1 + h2 * x2
        if sc.noise_power_per_subcarrier > 0:
            sigma = np.sqrt(sc.noise_power_per_subcarrier / cfg.n_fft / 2.0)
            rx = rx + sigma * (rng.standard_normal(total) + 1j * rng.standard_normal(total))

        filtered = multiband_filter(rx, sc.link2.subcarriers, cfg)
        err = estimate_cfo(filtered, cfg) - cfo
        acc += (err, err * err, 1.0)
    return acc


def run_sync_error(spec: ExperimentSpec) -> CampaignReport:
    sc = spec.scenario
    cfg = sc.cfg
    m = len(sc.link2.subcarriers)
    p_n = sc.noise_power_per_subcarrier
    rows = []
    for point, p_r_db in enumerate(spec.p_r_db_list):
        acc = _chunked_sum(
            _sync_chunk, _SyncCtx(sc, point, p_r_db), spec.n_trials, spec.threads
        )
        mean = acc[0] / acc[2]
        var = acc[1] / acc[2] - mean**2
        sim_std = math.sqrt(max(var, 0.0))
        p_i = 10.0 ** (p_r_db / 10.0) * analytic.mean_interference_power(
            sc.link2.subcarriers,
            lambda f: analytic.cbi_overall(
                f, sc.link1.subcarriers, 1.0, cfg.n_fft, cfg.n_cp
            ),
            epsilon=0.0,
        )
        sinr = 1.0 / (p_i + p_n) if (p_i + p_n) > 0 else math.inf
        ana_std = 0.0 if math.isinf(sinr) else analytic.sync_error_std(m, sinr)
        rows.append((p_r_db, sim_std, ana_std, int(acc[2])))
    return CampaignReport(
        spec.kind,
        {"seed": sc.seed, "n_trials": spec.n_trials},
        {"sync_error": Table(("p_r_db", "sim_std", "analytic_std", "n_trials"), tuple(rows))},
    )


# ---------------------------------------------------------------------------
# BER


@dataclass(frozen=True)
class _BerCtx:
    scenario: ScenarioSpec
    point: int
    p_r_db: float
    k_factor: float  # inf = non-fading
    n_symbols: int


def _ber_chunk(ctx: _BerCtx, lo: int, hi: int) -> np.ndarray:
    sc = ctx.scenario
    cfg = sc.cfg
    n_sym = ctx.n_symbols
    total = n_sym * cfg.symbol_len
    lead = 2
    p1 = 10.0 ** (ctx.p_r_db / 10.0)
    if math.isinf(ctx.k_factor):
        chan = ChannelModel("non_fading", tie_channels=sc.channel.tie_channels)
    else:
        chan = ChannelModel("rician", ctx.k_factor, tie_channels=sc.channel.tie_channels)
    bins2_idx = np.mod(sc.link2.subcarriers.as_array(), cfg.n_fft)
    n_sc = len(bins2_idx)
    errors = np.zeros(n_sc)
    bits_total = 0
    for t in range(lo, hi):
        rng = trial_rng(sc.seed, _EXP_BER, ctx.point, t)
        tau = sc.mismatch.draw(rng, cfg)
        eps = sc.freq_offset.draw(rng)
        h1 = chan.draw(rng)
        h2 = h1 if chan.tie_channels else chan.draw(rng)

        bits = rng.integers(0, 2, size=(n_sym, n_sc, 2))
        vals = _map_bits_array(bits, sc.link2.power_per_subcarrier)
        bins2 = np.zeros((n_sym, cfg.n_fft), dtype=complex)
        bins2[:, bins2_idx] = vals
        x2 = modulate_stream(bins2, cfg.n_cp)

        bins1 = random_qpsk_bins(
            rng, sc.link1.subcarriers, p1, n_sym + lead + 1, cfg.n_fft
        )
        x1 = interferer_timeline(bins1, cfg, int(round(tau)), eps, total, lead)

        rx = h1 * x1 + h2 * x2
        if sc.noise_power_per_subcarrier > 0:
            sigma = np.sqrt(sc.noise_power_per_subcarrier / cfg.n_fft / 2.0)
            rx = rx + sigma * (rng.standard_normal(total) + 1j * rng.standard_normal(total))

        rx_bins = demodulate_stream(rx, cfg, n_sym)
        eq = rx_bins[:, bins2_idx] / h2
        got = _demap_array(eq)
        errors += np.sum(got != bits, axis=(0, 2))
        bits_total += n_sym * 2
    return np.concatenate([errors, [bits_total]])


def run_ber(spec: ExperimentSpec) -> CampaignReport:
    sc = spec.scenario
    subcarriers = list(sc.link2.subcarriers)
    tables = {}

    def one_sweep(points, table_name, param_name):
        rows = []
        for point, (p_r_db, k_factor) in enumerate(points):
            ctx = _BerCtx(sc, point, p_r_db, k_factor, spec.packet_symbols)
            acc = _chunked_sum(_ber_chunk, ctx, spec.n_trials, spec.threads)
            errors, bits_total = acc[:-1], int(acc[-1])
            for k, e in zip(subcarriers, errors):
                ber = min(e / bits_total, 0.5)
                lo_ci, hi_ci = wilson_interval(int(e), bits_total)
                pv = p_r_db if param_name == "p_r_db" else k_factor
                rows.append((pv, int(k), ber, lo_ci, hi_ci, bits_total))
        tables[table_name] = Table(
            (param_name, "subcarrier", "ber", "ci_low", "ci_high", "n_bits"),
            tuple(rows),
        )

    one_sweep(
        [(p, 0.0) for p in spec.p_r_db_list], "ber_vs_pr", "p_r_db"
    )
    one_sweep(
        [(9.0, k) for k in spec.k_factor_list], "ber_vs_k", "k_factor"
    )
    return CampaignReport(
        spec.kind, {"seed": sc.seed, "n_trials": spec.n_trials}, tables
    )


# ---------------------------------------------------------------------------
# mitigation spectra at equal overhead


@dataclass(frozen=True)
class _MitCtx:
    cfg: OfdmConfig
    omega1: tuple[int, ...]
    p1: float
    scheme: str  # "none", "fgb", "isc", "csc"
    coded: tuple[int, ...]  # subcarriers taking part in the coding
    f_grid: tuple[float, ...]
    seed: int
    point: int
    mismatch: MismatchModel
    eps: float
    n_windows: int = 4


def _interferer_bins(rng, ctx: _MitCtx, n_symbols: int) -> np.ndarray:
    """Scheme-coded random interferer symbols (n_symbols, n_fft)."""
    cfg = ctx.cfg
    ks = np.array(ctx.omega1)
    col = {k: i for i, k in enumerate(ks)}
    sel = rng.integers(0, 4, size=(n_symbols, ks.size))
    vals = QPSK_POINTS[sel] * np.sqrt(ctx.p1)
    if ctx.scheme == "isc":
        coded = sorted(ctx.coded)
        for lo, hi in zip(coded[0::2], coded[1::2]):
            vals[:, col[hi]] = -vals[:, col[lo]]
    elif ctx.scheme == "csc":
        coded = sorted(ctx.coded)
        cols = [col[k] for k in coded]
        phase = csc_phase(np.array(coded), cfg)
        for m in range(0, n_symbols - 1, 2):
            vals[m + 1, cols] = vals[m, cols] * phase
    bins = np.zeros((n_symbols, cfg.n_fft), dtype=complex)
    bins[:, np.mod(ks, cfg.n_fft)] = vals
    return bins


def _mit_chunk(ctx: _MitCtx, lo: int, hi: int) -> np.ndarray:
    cfg = ctx.cfg
    f_grid = np.array(ctx.f_grid)
    kernel = np.exp(
        -2j * np.pi * np.outer(np.arange(cfg.n_fft), f_grid) / cfg.n_fft
    )
    p = cfg.symbol_len
    n_win = ctx.n_windows
    total = n_win * p
    lead = 2
    acc = np.zeros(f_grid.size)
    for t in range(lo, hi):
        rng = trial_rng(ctx.seed, _EXP_MIT, ctx.point, t)
        tau = ctx.mismatch.draw(rng, cfg)
        d = int(round(tau))
        bins1 = _interferer_bins(rng, ctx, n_win + lead + 2)
        rx = interferer_timeline(bins1, cfg, d, ctx.eps, total, lead)
        wins = victim_windows(rx, cfg, n_win)
        if ctx.scheme == "csc":
            # genie window choice: keep windows that sit inside one coded
            # symbol pair of the interferer (the receiver's selected copy)
            keep = []
            for m in range(n_win):
                w0 = m * p + cfg.n_cp
                a = (w0 - d) % (2 * p)
                if a + cfg.n_fft <= 2 * p:
                    keep.append(m)
            wins = wins[keep]
        acc += np.mean(np.abs(wins @ kernel) ** 2, axis=0)
    return acc


def measure_mitigated_spectrum(
    cfg: OfdmConfig,
    omega1,
    p1: float,
    scheme: str,
    f_grid,
    n_trials: int,
    seed: int,
    mismatch: MismatchModel | None = None,
    eps: float = 0.0,
    coded=None,
    point: int = 0,
    threads: int | None = None,
) -> analytic.PowerSpectrum:
    """Average interferer spectrum in the victim's windows under a coding
    scheme, normalized by the interferer's per-subcarrier power.

    `coded` selects the subcarriers taking part in ISC/CSC coding (default:
    all of them)."""
    ks = tuple(int(k) for k in (omega1.indices if hasattr(omega1, "indices") else omega1))
    coded = ks if coded is None else tuple(int(k) for k in coded)
    ctx = _MitCtx(
        cfg, ks, p1, scheme, coded,
        tuple(float(f) for f in np.asarray(f_grid, dtype=float)),
        seed, point, mismatch or MismatchModel.uniform(), eps,
    )
    acc = _chunked_sum(_mit_chunk, ctx, n_trials, threads)
    return analytic.PowerSpectrum(np.asarray(f_grid, dtype=float), acc / n_trials / p1)


def run_mitigation_compare(spec: ExperimentSpec) -> CampaignReport:
    """Interference spectra of the four schemes at equal overhead.

    The overhead budget is a fraction of each link's own subcarrier slots:
    an ISC pair costs one slot, a CSC-coded subcarrier half a slot, and the
    guardband costs each link half its width.
    """
    sc = spec.scenario
    cfg = sc.cfg
    l1 = len(sc.link1.subcarriers)
    total_span = l1 + len(sc.link2.subcarriers)
    budget = spec.overhead_budget
    gap = int(round(total_span * budget))
    isc_coded = 2 * int(round(budget * l1))
    csc_coded = min(l1, int(round(2 * budget * l1)))
    f_grid = np.round(np.arange(0.5, 8.501, 0.1), 10)
    omega1 = sc.link1.subcarriers
    omega1_shifted = SubcarrierSet(tuple(k - gap for k in omega1))
    schemes = {
        "none": (omega1, "none", None),
        "fgb": (omega1_shifted, "none", None),
        "isc": (omega1, "isc", edge_subcarriers(omega1, isc_coded, toward="high")),
        "csc": (omega1, "csc", edge_subcarriers(omega1, csc_coded, toward="high")),
    }
    spectra = {}
    for point, (name, (om, coding, coded)) in enumerate(schemes.items()):
        spectra[name] = measure_mitigated_spectrum(
            cfg, om, 1.0, coding, f_grid, spec.n_trials, sc.seed,
            mismatch=sc.mismatch, eps=sc.freq_offset.value
            if sc.freq_offset.mode == "fixed" else 0.0,
            coded=coded, point=point, threads=spec.threads,
        )
    shift_analytic = analytic.cbi_overall(
        f_grid + gap, omega1, 1.0, cfg.n_fft, cfg.n_cp
    )
    rows = tuple(
        (
            float(f),
            _db(spectra["none"].values[i]),
            _db(spectra["fgb"].values[i]),
            _db(spectra["isc"].values[i]),
            _db(spectra["csc"].values[i]),
            _db(shift_analytic[i]),
        )
        for i, f in enumerate(f_grid)
    )
    return CampaignReport(
        spec.kind,
        {
            "seed": sc.seed,
            "n_trials": spec.n_trials,
            "gap": gap,
            "isc_coded": isc_coded,
            "csc_coded": csc_coded,
        },
        {
            "mitigation_spectra": Table(
                ("f", "none_db", "fgb_db", "isc_db", "csc_db", "fgb_analytic_db"),
                rows,
            )
        },
    )


# ---------------------------------------------------------------------------
# packet throughput and offset sensitivity


@dataclass(frozen=True)
class _PacketCtx:
    cfg: OfdmConfig
    scheme: str  # "none", "fgb", "isc", "csc"
    fmt: int  # guard X, pair count, or coded-subcarrier count
    omega1: tuple[int, ...]
    omega2: tuple[int, ...]
    p1: float
    p2: float
    noise: float
    eps_max: float
    total_span: int
    n_symbols: int
    seed: int
    stream: tuple[int, ...]  # rng stream prefix after the seed


def packet_payload_bits(ctx: _PacketCtx) -> int:
    l2 = len(ctx.omega2)
    if ctx.scheme in ("none", "fgb"):
        slots = ctx.n_symbols * l2
    elif ctx.scheme == "isc":
        slots = ctx.n_symbols * (l2 - ctx.fmt)
    elif ctx.scheme == "csc":
        slots = ctx.n_symbols * (l2 - ctx.fmt) + (ctx.n_symbols // 2) * ctx.fmt
    else:
        raise ValueError(ctx.scheme)
    return 2 * slots


def _encode_packet(rng, ctx: _PacketCtx, sset: tuple[int, ...], power: float, edge: str):
    """Random payload for one link; returns (bins matrix, payload bits, layout).

    `edge` is the side of the band nearest the other link, where coded
    subcarriers are placed.
    """
    cfg = ctx.cfg
    n_sym = ctx.n_symbols
    ks = np.array(sorted(sset))
    col = {k: i for i, k in enumerate(ks)}
    vals = np.zeros((n_sym, ks.size), dtype=complex)
    layout = {}
    if ctx.scheme in ("none", "fgb") or ctx.fmt == 0:
        bits = rng.integers(0, 2, size=(n_sym, ks.size, 2))
        vals = _map_bits_array(bits, power)
        layout["plain_cols"] = np.arange(ks.size)
        payload = bits
    elif ctx.scheme == "isc":
        pairs = edge_pairs(SubcarrierSet(tuple(ks)), ctx.fmt, toward=edge)
        pair_lo = np.array([col[lo] for lo, _ in pairs])
        pair_hi = np.array([col[hi] for _, hi in pairs])
        coded_cols = set(pair_lo) | set(pair_hi)
        plain_cols = np.array([i for i in range(ks.size) if i not in coded_cols], dtype=int)
        bits_plain = rng.integers(0, 2, size=(n_sym, plain_cols.size, 2))
        bits_pair = rng.integers(0, 2, size=(n_sym, pair_lo.size, 2))
        vals[:, plain_cols] = _map_bits_array(bits_plain, power)
        lo_vals = _map_bits_array(bits_pair, power)
        vals[:, pair_lo] = lo_vals
        vals[:, pair_hi] = -lo_vals
        layout.update(plain_cols=plain_cols, pair_lo=pair_lo, pair_hi=pair_hi)
        payload = (bits_plain, bits_pair)
    elif ctx.scheme == "csc":
        coded = edge_subcarriers(SubcarrierSet(tuple(ks)), ctx.fmt, toward=edge)
        coded_cols = np.array([col[k] for k in coded])
        plain_cols = np.array(
            [i for i in range(ks.size) if i not in set(coded_cols)], dtype=int
        )
        bits_plain = rng.integers(0, 2, size=(n_sym, plain_cols.size, 2))
        bits_coded = rng.integers(0, 2, size=(n_sym // 2, coded_cols.size, 2))
        vals[:, plain_cols] = _map_bits_array(bits_plain, power)
        cv = _map_bits_array(bits_coded, power)
        phase = csc_phase(ks[coded_cols], cfg)
        vals[0::2, coded_cols] = cv
        vals[1::2, coded_cols] = cv * phase
        layout.update(plain_cols=plain_cols, coded_cols=coded_cols, phase=phase)
        payload = (bits_plain, bits_coded)
    else:
        raise ValueError(ctx.scheme)
    bins = np.zeros((n_sym, cfg.n_fft), dtype=complex)
    bins[:, np.mod(ks, cfg.n_fft)] = vals
    return bins, payload, (ks, layout)


def _decode_packet(rx_bins, ctx: _PacketCtx, h2, payload, ks_layout, pick_first=True):
    """Bit-error count for one received packet against its payload.

    For cross-symbol coding, `pick_first` says which of the two coded copies
    sits in a window aligned with one whole interferer symbol pair (known
    from the frame timing); that copy is decoded.
    """
    ks, layout = ks_layout
    cols = np.mod(ks, ctx.cfg.n_fft)
    eq = rx_bins[:, cols] / h2
    if ctx.scheme in ("none", "fgb") or ctx.fmt == 0:
        got = _demap_array(eq[:, layout["plain_cols"]])
        return int(np.sum(got != payload))
    if ctx.scheme == "isc":
        bits_plain, bits_pair = payload
        err = int(np.sum(_demap_array(eq[:, layout["plain_cols"]]) != bits_plain))
        comb = (eq[:, layout["pair_lo"]] - eq[:, layout["pair_hi"]]) / 2.0
        err += int(np.sum(_demap_array(comb) != bits_pair))
        return err
    if ctx.scheme == "csc":
        bits_plain, bits_coded = payload
        err = int(np.sum(_demap_array(eq[:, layout["plain_cols"]]) != bits_plain))
        cand1 = eq[0::2, layout["coded_cols"]]
        cand2 = eq[1::2, layout["coded_cols"]] / layout["phase"]
        chosen = cand1 if pick_first else cand2
        err += int(np.sum(_demap_array(chosen) != bits_coded))
        return err
    raise ValueError(ctx.scheme)


def _clean_first_window(ctx: _PacketCtx, d: int) -> bool:
    """Whether the first window of each victim symbol pair lies inside one
    coded interferer pair (span 2 symbols) starting at delay d."""
    p = ctx.cfg.symbol_len
    a = (ctx.cfg.n_cp - d) % (2 * p)
    return a + ctx.cfg.n_fft <= 2 * p


def _packet_chunk(ctx: _PacketCtx, lo: int, hi: int) -> np.ndarray:
    """Returns [successes, packets, bit_errors]."""
    cfg = ctx.cfg
    n_sym = ctx.n_symbols
    p = cfg.symbol_len
    total = n_sym * p
    lead = 2
    successes = 0
    bit_errors = 0
    for t in range(lo, hi):
        rng = trial_rng(ctx.seed, *ctx.stream, t)
        tau = rng.uniform(0.0, p)
        u = rng.uniform(-1.0, 1.0)
        eps = u * ctx.eps_max
        d = int(round(tau))

        bins2, payload, layout2 = _encode_packet(rng, ctx, ctx.omega2, ctx.p2, edge="low")
        x2 = modulate_stream(bins2, cfg.n_cp)

        bins1, _, _ = _encode_packet(rng, ctx, ctx.omega1, ctx.p1, edge="high")
        # Lead symbols so the interferer covers the whole victim packet; an
        # even count keeps its cross-symbol pairing aligned to delay mod 2P.
        extra, _, _ = _encode_packet(rng, ctx, ctx.omega1, ctx.p1, edge="high")
        bins1_full = np.concatenate([extra[: lead + 2], bins1], axis=0)
        x1 = interferer_timeline(bins1_full, cfg, d, eps, total, lead)

        rx = x1 + x2
        if ctx.noise > 0:
            sigma = np.sqrt(ctx.noise / cfg.n_fft / 2.0)
            rx = rx + sigma * (rng.standard_normal(total) + 1j * rng.standard_normal(total))
        rx_bins = demodulate_stream(rx, cfg, n_sym)
        err = _decode_packet(
            rx_bins, ctx, 1.0, payload, layout2, pick_first=_clean_first_window(ctx, d)
        )
        bit_errors += err
        successes += int(err == 0)
    return np.array([successes, hi - lo, bit_errors], dtype=float)


def _scheme_formats(scheme: str, l2: int, total_span: int):
    if scheme == "none":
        return [0]
    if scheme == "fgb":
        return list(range(0, total_span - 1))
    if scheme == "isc":
        return list(range(0, l2 // 2 + 1))
    if scheme == "csc":
        return list(range(0, l2 + 1, 2))
    raise ValueError(scheme)


def _packet_ctx(spec: ExperimentSpec, scheme: str, fmt: int, p_r_db: float,
                eps_max: float, stream: tuple[int, ...]) -> _PacketCtx:
    sc = spec.scenario
    total_span = len(sc.link1.subcarriers) + len(sc.link2.subcarriers)
    if scheme == "fgb":
        omega1, omega2 = fgb_allocate(total_span, fmt)
        omega1, omega2 = tuple(omega1.indices), tuple(omega2.indices)
    else:
        omega1, omega2 = tuple(sc.link1.subcarriers.indices), tuple(
            sc.link2.subcarriers.indices
        )
    return _PacketCtx(
        cfg=sc.cfg,
        scheme=scheme,
        fmt=fmt,
        omega1=omega1,
        omega2=omega2,
        p1=10.0 ** (p_r_db / 10.0),
        p2=sc.link2.power_per_subcarrier,
        noise=sc.noise_power_per_subcarrier,
        eps_max=eps_max,
        total_span=total_span,
        n_symbols=spec.packet_symbols,
        seed=sc.seed,
        stream=stream,
    )


def _throughput_stats(ctx: _PacketCtx, acc: np.ndarray):
    successes, packets, _ = acc
    payload = packet_payload_bits(ctx)
    denom = ctx.n_symbols * ctx.total_span
    rate = payload / denom
    thr = (successes / packets) * rate
    lo, hi = wilson_interval(int(successes), int(packets))
    return thr, lo * rate, hi * rate


def optimize_format(
    spec: ExperimentSpec, scheme: str, p_r_db: float, eps_max: float,
    n_search: int, stream_tag: int,
) -> int:
    """Exhaustive overhead search maximizing link 2's effective throughput."""
    sc = spec.scenario
    l2 = len(sc.link2.subcarriers)
    total_span = len(sc.link1.subcarriers) + l2
    best_fmt, best_thr = 0, -1.0
    for fi, fmt in enumerate(_scheme_formats(scheme, l2, total_span)):
        ctx = _packet_ctx(spec, scheme, fmt, p_r_db, eps_max,
                          stream=(stream_tag, 90, fi))
        acc = _chunked_sum(_packet_chunk, ctx, n_search, spec.threads)
        thr, _, _ = _throughput_stats(ctx, acc)
        if thr > best_thr:
            best_fmt, best_thr = fmt, thr
    return best_fmt


def run_throughput(spec: ExperimentSpec) -> CampaignReport:
    eps_max = 0.1
    n_search = max(100, spec.n_trials // 10)
    rows = []
    for pi, p_r_db in enumerate(spec.p_r_db_list):
        for si, scheme in enumerate(("none", "fgb", "isc", "csc")):
            fmt = (
                0
                if scheme == "none"
                else optimize_format(spec, scheme, p_r_db, eps_max, n_search,
                                     stream_tag=_EXP_THR * 100 + pi * 10 + si)
            )
            ctx = _packet_ctx(spec, scheme, fmt, p_r_db, eps_max,
                              stream=(_EXP_THR, pi, si))
            acc = _chunked_sum(_packet_chunk, ctx, spec.n_trials, spec.threads)
            thr, lo, hi = _throughput_stats(ctx, acc)
            rows.append((p_r_db, scheme, fmt, thr, lo, hi, int(acc[1])))
    return CampaignReport(
        spec.kind,
        {"seed": spec.scenario.seed, "n_trials": spec.n_trials, "eps_max": eps_max},
        {
            "throughput": Table(
                ("p_r_db", "scheme", "format", "throughput", "ci_low", "ci_high", "n_packets"),
                tuple(rows),
            )
        },
    )


def run_freq_offset_sensitivity(spec: ExperimentSpec) -> CampaignReport:
    """Throughput of FGB and CSC (and the unmitigated system) as the
    inter-link offset spread grows; common random numbers across the sweep."""
    p_r_db = spec.p_r_db_list[-1]
    n_search = max(100, spec.n_trials // 10)
    schemes = ("none", "fgb", "csc")
    fmts = {
        s: (0 if s == "none" else optimize_format(
            spec, s, p_r_db, 0.1, n_search, stream_tag=_EXP_FOFF * 100 + i))
        for i, s in enumerate(schemes)
    }
    rows = []
    for eps_max in spec.eps_max_list:
        for si, scheme in enumerate(schemes):
            ctx = _packet_ctx(spec, scheme, fmts[scheme], p_r_db, eps_max,
                              stream=(_EXP_FOFF, si))
            acc = _chunked_sum(_packet_chunk, ctx, spec.n_trials, spec.threads)
            thr, lo, hi = _throughput_stats(ctx, acc)
            rows.append((eps_max, scheme, fmts[scheme], thr, lo, hi, int(acc[1])))
    return CampaignReport(
        spec.kind,
        {"seed": spec.scenario.seed, "n_trials": spec.n_trials, "p_r_db": p_r_db},
        {
            "freq_offset_sensitivity": Table(
                ("eps_max", "scheme", "format", "throughput", "ci_low", "ci_high", "n_packets"),
                tuple(rows),
            )
        },
    )
