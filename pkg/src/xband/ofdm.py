"""Baseband OFDM domain types and symbol construction/deconstruction.

Conventions used throughout the package:

* The IDFT carries the 1/N factor, the DFT carries none.  A modulate ->
  demodulate round trip is therefore the identity on the occupied bins.
* Subcarrier indices are signed with 0 = DC; index k maps to DFT bin
  k mod N.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Gray-coded QPSK: two bits (b0, b1) -> unit-average-power constellation point.
QPSK_GRAY = {
    (0, 0): (1 + 1j) / np.sqrt(2),
    (0, 1): (-1 + 1j) / np.sqrt(2),
    (1, 1): (-1 - 1j) / np.sqrt(2),
    (1, 0): (1 - 1j) / np.sqrt(2),
}

BITS_PER_QPSK_SYMBOL = 2


@dataclass(frozen=True)
class OfdmConfig:
    """Static air-interface parameters."""

    n_fft: int
    n_cp: int
    subcarrier_spacing_hz: float = 12.5e3
    modulation: str = "qpsk"

    def __post_init__(self):
        n, cp = self.n_fft, self.n_cp
        if n <= 0 or (n & (n - 1)) != 0:
            raise ValueError(f"n_fft must be a positive power of two, got {n}")
        if not 0 <= cp < n:
            raise ValueError(f"n_cp must satisfy 0 <= n_cp < n_fft, got {cp}")
        if self.subcarrier_spacing_hz <= 0:
            raise ValueError("subcarrier_spacing_hz must be positive")
        if self.modulation != "qpsk":
            raise ValueError(f"unsupported modulation {self.modulation!r}")

    @property
    def symbol_len(self) -> int:
        """Total samples per symbol including the cyclic prefix."""
        return self.n_fft + self.n_cp

    @property
    def cp_overhead(self) -> float:
        """CP overhead rho = N_CP / (N + N_CP)."""
        return self.n_cp / (self.n_fft + self.n_cp)


@dataclass(frozen=True)
class SubcarrierSet:
    """Ordered set of signed subcarrier indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        if len(self.indices) == 0:
            raise ValueError("subcarrier set must be non-empty")
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("subcarrier set has duplicate indices")
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @classmethod
    def contiguous(cls, lo: int, hi: int) -> "SubcarrierSet":
        """Indices lo..hi inclusive."""
        return cls(tuple(range(lo, hi + 1)))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, k: int) -> bool:
        return k in self.indices

    def validate_for(self, cfg: OfdmConfig) -> None:
        half = cfg.n_fft // 2
        for k in self.indices:
            if not -half <= k < half:
                raise ValueError(f"subcarrier {k} outside [-{half}, {half})")

    def disjoint(self, other: "SubcarrierSet") -> bool:
        return not set(self.indices) & set(other.indices)

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int)


@dataclass(frozen=True)
class LinkSpec:
    """One link's subcarrier allocation and per-subcarrier power."""

    subcarriers: SubcarrierSet
    power_per_subcarrier: float
    role: str = "signal"  # "signal" or "interferer"

    def __post_init__(self):
        if self.power_per_subcarrier <= 0:
            raise ValueError("power_per_subcarrier must be positive")
        if self.role not in ("signal", "interferer"):
            raise ValueError(f"invalid role {self.role!r}")


@dataclass(frozen=True)
class FreqSymbol:
    """Frequency-domain data; support is exactly the owning link's set."""

    subcarriers: SubcarrierSet
    values: np.ndarray  # complex, aligned with subcarriers.indices

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (len(self.subcarriers),):
            raise ValueError("values must align with the subcarrier set")
        object.__setattr__(self, "values", vals)

    def to_bins(self, n_fft: int) -> np.ndarray:
        """Full-length DFT bin vector (index k stored at bin k mod N)."""
        bins = np.zeros(n_fft, dtype=complex)
        bins[np.mod(self.subcarriers.as_array(), n_fft)] = self.values
        return bins

    def value_at(self, k: int) -> complex:
        return complex(self.values[self.subcarriers.indices.index(k)])


@dataclass(frozen=True)
class TimeSymbol:
    """One CP-prefixed time-domain OFDM symbol."""

    samples: np.ndarray
    n_cp: int

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    @property
    def body(self) -> np.ndarray:
        """Samples with the cyclic prefix stripped."""
        return self.samples[self.n_cp:]


def map_bits(bits: Sequence[int], link: LinkSpec) -> FreqSymbol:
    """Gray-map a bit sequence onto the link's subcarriers as QPSK.

    Points are scaled so E[|s(k)|^2] equals link.power_per_subcarrier.
    """
    bits = np.asarray(bits, dtype=int)
    n_sc = len(link.subcarriers)
    if bits.shape != (BITS_PER_QPSK_SYMBOL * n_sc,):
        raise ValueError(
            f"expected {BITS_PER_QPSK_SYMBOL * n_sc} bits for "
            f"{n_sc} QPSK subcarriers, got {bits.size}"
        )
    scale = np.sqrt(link.power_per_subcarrier)
    pts = [
        QPSK_GRAY[(int(bits[2 * i]), int(bits[2 * i + 1]))] * scale
        for i in range(n_sc)
    ]
    return FreqSymbol(link.subcarriers, np.array(pts, dtype=complex))


def demap_qpsk(values: np.ndarray) -> np.ndarray:
    """Hard-decision Gray demap back to bits, inverse of map_bits.

    Returns a flat bit array (2 bits per input value).
    """
    values = np.asarray(values, dtype=complex)
    b0 = np.imag(values) < 0
    b1 = np.real(values) < 0
    out = np.empty(2 * values.size, dtype=int)
    out[0::2] = b0.astype(int).reshape(-1)
    out[1::2] = b1.astype(int).reshape(-1)
    return out


def ofdm_modulate(sym: FreqSymbol, cfg: OfdmConfig) -> TimeSymbol:
    """IDFT with 1/N normalization plus cyclic-prefix framing."""
    sym.subcarriers.validate_for(cfg)
    body = np.fft.ifft(sym.to_bins(cfg.n_fft))
    samples = np.concatenate([body[cfg.n_fft - cfg.n_cp:], body]) if cfg.n_cp else body
    return TimeSymbol(samples, cfg.n_cp)


def ofdm_demodulate(sym: TimeSymbol, cfg: OfdmConfig, sset: SubcarrierSet) -> FreqSymbol:
    """Strip the CP, apply the (unnormalized) DFT and pick the given bins."""
    body = sym.samples[sym.n_cp:]
    if body.size != cfg.n_fft:
        raise ValueError(f"expected {cfg.n_fft} body samples, got {body.size}")
    spectrum = np.fft.fft(body)
    return FreqSymbol(sset, spectrum[np.mod(sset.as_array(), cfg.n_fft)])


def modulate_stream(bin_matrix: np.ndarray, n_cp: int) -> np.ndarray:
    """Vectorized modulation of many symbols.

    bin_matrix has shape (n_symbols, n_fft) in DFT-bin order; returns the
    concatenated CP-prefixed sample stream.
    """
    body = np.fft.ifft(bin_matrix, axis=1)
    if n_cp:
        framed = np.concatenate([body[:, body.shape[1] - n_cp:], body], axis=1)
    else:
        framed = body
    return framed.reshape(-1)


def demodulate_stream(samples: np.ndarray, cfg: OfdmConfig, n_symbols: int) -> np.ndarray:
    """DFT of each CP-stripped symbol window; returns (n_symbols, n_fft) bins."""
    p = cfg.symbol_len
    if samples.size < n_symbols * p:
        raise ValueError("sample stream shorter than requested symbol count")
    frames = samples[: n_symbols * p].reshape(n_symbols, p)[:, cfg.n_cp:]
    return np.fft.fft(frames, axis=1)
