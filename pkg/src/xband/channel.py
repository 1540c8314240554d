"""Waveform-level two-link scenario simulation.

Builds the asynchronous superposition of an interferer and a victim link at
the victim's receiver (temporal mismatch, inter-link frequency offset,
Rician flat fading, AWGN) and provides a DTFT probe that measures power
spectra at arbitrary continuous frequencies.

Every trial is a pure function of (scenario seed, trial index), so campaigns
are reproducible regardless of execution order or parallelism.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from xband.analytic import PowerSpectrum
from xband.ofdm import LinkSpec, OfdmConfig, SubcarrierSet, modulate_stream

# Fixed aggregation chunk so serial and parallel runs sum partial results in
# the same floating-point order.
TRIAL_CHUNK = 256


@dataclass(frozen=True)
class MismatchModel:
    """Temporal mismatch tau in samples: fixed value or uniform per trial."""

    mode: str  # "fixed" or "uniform"
    tau: float | None = None

    @classmethod
    def fixed(cls, tau: float) -> "MismatchModel":
        return cls("fixed", float(tau))

    @classmethod
    def uniform(cls) -> "MismatchModel":
        return cls("uniform")

    def validate(self, cfg: OfdmConfig) -> None:
        if self.mode not in ("fixed", "uniform"):
            raise ValueError(f"invalid mismatch mode {self.mode!r}")
        if self.mode == "fixed":
            if self.tau is None or not 0 <= self.tau < cfg.symbol_len:
                raise ValueError(f"fixed tau must lie in [0, {cfg.symbol_len})")

    def draw(self, rng: np.random.Generator, cfg: OfdmConfig) -> float:
        if self.mode == "fixed":
            return float(self.tau)
        return float(rng.uniform(0.0, cfg.symbol_len))


@dataclass(frozen=True)
class FreqOffsetModel:
    """Inter-link frequency offset epsilon in subcarrier units."""

    mode: str  # "fixed" or "uniform"
    value: float = 0.0  # epsilon when fixed, epsilon_max when uniform

    @classmethod
    def fixed(cls, eps: float) -> "FreqOffsetModel":
        return cls("fixed", float(eps))

    @classmethod
    def uniform(cls, eps_max: float) -> "FreqOffsetModel":
        return cls("uniform", float(eps_max))

    def validate(self) -> None:
        if self.mode not in ("fixed", "uniform"):
            raise ValueError(f"invalid frequency-offset mode {self.mode!r}")
        if abs(self.value) > 0.5:
            raise ValueError("|epsilon| and epsilon_max are limited to 0.5 subcarrier")

    def draw(self, rng: np.random.Generator) -> float:
        if self.mode == "fixed":
            return self.value
        return float(rng.uniform(-self.value, self.value))


@dataclass(frozen=True)
class ChannelModel:
    """Flat fading model; one coefficient per link per trial."""

    kind: str = "non_fading"  # "non_fading" or "rician"
    k_factor: float = 0.0
    tie_channels: bool = True  # interferer and victim share the same coefficient

    def validate(self) -> None:
        if self.kind not in ("non_fading", "rician"):
            raise ValueError(f"invalid channel kind {self.kind!r}")
        if self.k_factor < 0:
            raise ValueError("k_factor must be non-negative")

    def draw(self, rng: np.random.Generator) -> complex:
        if self.kind == "non_fading":
            return 1.0 + 0.0j
        k = self.k_factor
        los = np.sqrt(k / (k + 1.0))
        scatter = np.sqrt(1.0 / (2.0 * (k + 1.0)))
        return complex(los + scatter * (rng.standard_normal() + 1j * rng.standard_normal()))


@dataclass(frozen=True)
class ScenarioSpec:
    """Two-link scenario: link1 interferes with link2's receiver."""

    cfg: OfdmConfig
    link1: LinkSpec
    link2: LinkSpec
    mismatch: MismatchModel
    freq_offset: FreqOffsetModel
    channel: ChannelModel
    noise_power_per_subcarrier: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.link1.subcarriers.disjoint(self.link2.subcarriers):
            raise ValueError("the two links' subcarrier sets must be disjoint")
        self.link1.subcarriers.validate_for(self.cfg)
        self.link2.subcarriers.validate_for(self.cfg)
        self.mismatch.validate(self.cfg)
        self.freq_offset.validate()
        self.channel.validate()
        if self.noise_power_per_subcarrier < 0:
            raise ValueError("noise power must be non-negative")

    @property
    def power_ratio_db(self) -> float:
        """Interferer-to-signal per-subcarrier power ratio in dB."""
        return 10.0 * np.log10(
            self.link1.power_per_subcarrier / self.link2.power_per_subcarrier
        )


@dataclass(frozen=True)
class ReceivedFrame:
    """Superposed receive samples at link 2 plus the realized trial state."""

    samples: np.ndarray
    tau: float
    delay: int
    eps: float
    h1: complex
    h2: complex
    link1_samples: np.ndarray
    link2_samples: np.ndarray


def trial_rng(seed: int, *stream: int) -> np.random.Generator:
    """Per-trial RNG derived from the master seed and a stream path."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, *map(int, stream)])


def random_qpsk_bins(
    rng: np.random.Generator,
    sset: SubcarrierSet,
    power: float,
    n_symbols: int,
    n_fft: int,
) -> np.ndarray:
    """(n_symbols, n_fft) bin matrix with random QPSK on the given set."""
    pts = np.array([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]) / np.sqrt(2)
    sel = rng.integers(0, 4, size=(n_symbols, len(sset)))
    bins = np.zeros((n_symbols, n_fft), dtype=complex)
    bins[:, np.mod(sset.as_array(), n_fft)] = pts[sel] * np.sqrt(power)
    return bins


def place_delayed(
    target_len: int, stream: np.ndarray, start: int
) -> np.ndarray:
    """Overlay `stream` into a zero timeline of target_len starting at `start`
    (which may be negative)."""
    out = np.zeros(target_len, dtype=complex)
    lo = max(start, 0)
    hi = min(start + stream.size, target_len)
    if hi > lo:
        out[lo:hi] = stream[lo - start: hi - start]
    return out


def interferer_timeline(
    bins1: np.ndarray,
    cfg: OfdmConfig,
    delay: int,
    eps: float,
    total_len: int,
    lead_symbols: int = 2,
) -> np.ndarray:
    """Interferer sample stream at the victim's receiver.

    The stream's symbol grid is shifted right by `delay` samples; `bins1`
    must contain lead_symbols extra symbols in front so the whole window
    [0, total_len) is covered.  The inter-link offset is applied as a phase
    ramp on the receiver's sample index.
    """
    x1 = modulate_stream(bins1, cfg.n_cp)
    timeline = place_delayed(total_len, x1, delay - lead_symbols * cfg.symbol_len)
    if eps:
        n_idx = np.arange(total_len)
        timeline = timeline * np.exp(2j * np.pi * eps * n_idx / cfg.n_fft)
    return timeline


def realize_trial(spec: ScenarioSpec, n_symbols: int, trial_index: int) -> ReceivedFrame:
    """One deterministic trial: both links' waveforms superposed plus AWGN.

    Link 2 is sample-aligned; link 1 is delayed by the realized mismatch
    (rounded to the nearest sample) and offset by the realized epsilon.
    """
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    cfg = spec.cfg
    rng = trial_rng(spec.seed, trial_index)
    tau = spec.mismatch.draw(rng, cfg)
    eps = spec.freq_offset.draw(rng)
    h1 = spec.channel.draw(rng)
    h2 = h1 if spec.channel.tie_channels else spec.channel.draw(rng)
    delay = int(round(tau))

    total = n_symbols * cfg.symbol_len
    lead = 2
    bins1 = random_qpsk_bins(
        rng, spec.link1.subcarriers, spec.link1.power_per_subcarrier,
        n_symbols + lead + 1, cfg.n_fft,
    )
    link1 = h1 * interferer_timeline(bins1, cfg, delay, eps, total, lead)

    bins2 = random_qpsk_bins(
        rng, spec.link2.subcarriers, spec.link2.power_per_subcarrier,
        n_symbols, cfg.n_fft,
    )
    link2 = h2 * modulate_stream(bins2, cfg.n_cp)

    samples = link1 + link2
    if spec.noise_power_per_subcarrier > 0:
        # Time-domain variance P_n / N makes the demodulated per-bin noise
        # power equal P_n under the unnormalized DFT.
        sigma = np.sqrt(spec.noise_power_per_subcarrier / cfg.n_fft / 2.0)
        samples = samples + sigma * (
            rng.standard_normal(total) + 1j * rng.standard_normal(total)
        )
    return ReceivedFrame(samples, tau, delay, eps, h1, h2, link1, link2)


def dtft_probe(samples: np.ndarray, cfg: OfdmConfig, f_grid) -> PowerSpectrum:
    """Power of one CP-stripped symbol window at continuous frequencies.

    |sum_n x(n) e^{-i 2 pi f n / N}|^2 over exactly N samples.
    """
    samples = np.asarray(samples, dtype=complex)
    if samples.size != cfg.n_fft:
        raise ValueError(f"probe window must be exactly {cfg.n_fft} samples")
    f_grid = np.asarray(f_grid, dtype=float)
    if np.any(f_grid < -cfg.n_fft / 2) or np.any(f_grid >= cfg.n_fft / 2):
        raise ValueError("f_grid values must lie in [-N/2, N/2)")
    kernel = np.exp(
        -2j * np.pi * np.outer(np.arange(cfg.n_fft), f_grid) / cfg.n_fft
    )
    return PowerSpectrum(f_grid, np.abs(samples @ kernel) ** 2)


def victim_windows(samples: np.ndarray, cfg: OfdmConfig, n_windows: int) -> np.ndarray:
    """(n_windows, N) matrix of CP-stripped victim symbol windows."""
    p = cfg.symbol_len
    return samples[: n_windows * p].reshape(n_windows, p)[:, cfg.n_cp:]


def _probe_kernel(cfg: OfdmConfig, f_grid: np.ndarray) -> np.ndarray:
    return np.exp(-2j * np.pi * np.outer(np.arange(cfg.n_fft), f_grid) / cfg.n_fft)


def _cbi_chunk(
    spec: ScenarioSpec,
    f_grid: np.ndarray,
    lo: int,
    hi: int,
    n_windows: int,
) -> np.ndarray:
    """Sum over trials [lo, hi) of the mean windowed interferer spectrum."""
    cfg = spec.cfg
    kernel = _probe_kernel(cfg, np.asarray(f_grid, dtype=float))
    total = n_windows * cfg.symbol_len
    lead = 2
    acc = np.zeros(len(f_grid))
    for t in range(lo, hi):
        rng = trial_rng(spec.seed, t)
        tau = spec.mismatch.draw(rng, cfg)
        eps = spec.freq_offset.draw(rng)
        h1 = spec.channel.draw(rng)
        bins1 = random_qpsk_bins(
            rng, spec.link1.subcarriers, spec.link1.power_per_subcarrier,
            n_windows + lead + 1, cfg.n_fft,
        )
        rx = h1 * interferer_timeline(bins1, cfg, int(round(tau)), eps, total, lead)
        wins = victim_windows(rx, cfg, n_windows)
        acc += np.mean(np.abs(wins @ kernel) ** 2, axis=0)
    return acc


def measure_cbi(
    spec: ScenarioSpec,
    f_grid,
    n_trials: int,
    n_windows: int = 4,
    normalize: bool = True,
    threads: int | None = None,
) -> PowerSpectrum:
    """Monte Carlo average of the interferer's power seen in the victim's
    DFT windows; the victim link is silent for this probe."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    f_grid = np.asarray(f_grid, dtype=float)
    chunks = [
        (lo, min(lo + TRIAL_CHUNK, n_trials)) for lo in range(0, n_trials, TRIAL_CHUNK)
    ]
    workers = resolve_threads(threads)
    if workers > 1 and len(chunks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            partials = list(
                ex.map(
                    _cbi_chunk_star,
                    [(spec, f_grid, lo, hi, n_windows) for lo, hi in chunks],
                )
            )
    else:
        partials = [_cbi_chunk(spec, f_grid, lo, hi, n_windows) for lo, hi in chunks]
    acc = np.zeros(len(f_grid))
    for p in partials:  # fixed order, identical to the serial sum
        acc += p
    values = acc / n_trials
    if normalize:
        values = values / spec.link1.power_per_subcarrier
    return PowerSpectrum(f_grid, values)


def _cbi_chunk_star(args):
    return _cbi_chunk(*args)


def resolve_threads(threads: int | None) -> int:
    """Worker count: explicit argument, else the XBAND_THREADS env var, else 1."""
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("XBAND_THREADS")
    return max(1, int(env)) if env else 1
