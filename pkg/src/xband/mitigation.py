"""Transmitter-side interference mitigation coders and matching decoders.

Three schemes:

* FGB  — null guard subcarriers between the two links.
* ISC  — antipodal coding of adjacent subcarrier pairs within one symbol.
* CSC  — phase-continuity coding of a subcarrier across two consecutive
         symbols, so an asynchronous observer sees one uninterrupted tone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from xband.ofdm import FreqSymbol, OfdmConfig, SubcarrierSet


@dataclass(frozen=True)
class MitigationScheme:
    kind: str  # "none", "fgb", "isc", "csc"
    gap: int = 0
    coded_pairs: tuple[tuple[int, int], ...] = ()
    coded_set: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in ("none", "fgb", "isc", "csc"):
            raise ValueError(f"unknown mitigation kind {self.kind!r}")
        if self.kind == "fgb" and self.gap < 0:
            raise ValueError("guardband gap must be non-negative")
        if self.kind == "isc":
            _check_pairs(self.coded_pairs)


def _check_pairs(pairs) -> None:
    seen = set()
    for lo, hi in pairs:
        if hi != lo + 1:
            raise ValueError(f"ISC pair ({lo}, {hi}) is not adjacent")
        if lo in seen or hi in seen:
            raise ValueError("ISC pairs must be disjoint")
        seen.update((lo, hi))


def fgb_allocate(total_span: int, gap: int) -> tuple[SubcarrierSet, SubcarrierSet]:
    """Split a contiguous span (centered on the DC boundary) into two links
    separated by `gap` null subcarriers.

    The span covers indices -(total_span/2 - 1)..total_span/2; link 2 (the
    victim, upper band) gets the larger half on an odd split.
    """
    if gap < 0:
        raise ValueError("gap must be non-negative")
    remaining = total_span - gap
    if remaining < 2:
        raise ValueError(f"gap {gap} leaves fewer than 2 usable subcarriers")
    n2 = (remaining + 1) // 2
    n1 = remaining - n2
    hi = total_span // 2
    lo = hi - total_span + 1
    omega1 = SubcarrierSet.contiguous(lo, lo + n1 - 1)
    omega2 = SubcarrierSet.contiguous(hi - n2 + 1, hi)
    return omega1, omega2


def isc_encode(data: FreqSymbol, pairs: Sequence[tuple[int, int]]) -> FreqSymbol:
    """Antipodal pair coding: the upper subcarrier carries the negation of the
    lower one's data, so their sidelobes cancel at a time-aligned observer."""
    _check_pairs(pairs)
    values = data.values.copy()
    idx = {k: i for i, k in enumerate(data.subcarriers.indices)}
    for lo, hi in pairs:
        if lo not in idx or hi not in idx:
            raise ValueError(f"pair ({lo}, {hi}) outside the symbol support")
        values[idx[hi]] = -values[idx[lo]]
    return FreqSymbol(data.subcarriers, values)


def isc_decode(received: FreqSymbol, pairs: Sequence[tuple[int, int]]) -> FreqSymbol:
    """Difference combining per coded pair: (r(k-1) - r(k)) / 2 on the lower
    index; uncoded bins pass through."""
    _check_pairs(pairs)
    values = received.values.copy()
    idx = {k: i for i, k in enumerate(received.subcarriers.indices)}
    for lo, hi in pairs:
        if lo not in idx or hi not in idx:
            raise ValueError(f"pair ({lo}, {hi}) outside the symbol support")
        combined = (values[idx[lo]] - values[idx[hi]]) / 2.0
        values[idx[lo]] = combined
        values[idx[hi]] = -combined
    return FreqSymbol(received.subcarriers, values)


def csc_phase(k: int | np.ndarray, cfg: OfdmConfig):
    """Phase factor making symbol II continue symbol I's tone on subcarrier k."""
    return np.exp(2j * np.pi * np.asarray(k) * cfg.n_cp / cfg.n_fft)


def csc_encode(
    sym_pair: tuple[FreqSymbol, FreqSymbol],
    coded_set: Sequence[int],
    cfg: OfdmConfig,
) -> tuple[FreqSymbol, FreqSymbol]:
    """Cross-symbol coding: on each coded subcarrier the second symbol repeats
    the first symbol's value with a CP phase-continuity compensation, so any
    asynchronous observer sees one completed OFDM symbol."""
    first, second = sym_pair
    v2 = second.values.copy()
    idx = {k: i for i, k in enumerate(first.subcarriers.indices)}
    for k in coded_set:
        if k not in idx:
            raise ValueError(f"coded subcarrier {k} outside the symbol support")
        v2[idx[k]] = first.values[idx[k]] * csc_phase(k, cfg)
    return first, FreqSymbol(second.subcarriers, v2)


def csc_decode(
    received_pair: tuple[FreqSymbol, FreqSymbol],
    coded_set: Sequence[int],
    cfg: OfdmConfig,
    selector: str = "genie",
    interference_power: tuple[np.ndarray, np.ndarray] | None = None,
    constellation_scale: float = 1.0,
) -> FreqSymbol:
    """Recover the coded subcarriers' single payload value per symbol pair.

    selector "genie" picks the copy with the smaller ground-truth
    interference power (requires `interference_power`, one array per symbol
    aligned with the support); "energy_metric" picks the copy whose residual
    to the nearest scaled QPSK point is smaller.
    """
    r1, r2 = received_pair
    idx = {k: i for i, k in enumerate(r1.subcarriers.indices)}
    coded = [k for k in coded_set]
    for k in coded:
        if k not in idx:
            raise ValueError(f"coded subcarrier {k} outside the symbol support")
    out = np.zeros(len(coded), dtype=complex)
    for j, k in enumerate(coded):
        i = idx[k]
        cand1 = r1.values[i]
        cand2 = r2.values[i] / csc_phase(k, cfg)
        if selector == "genie":
            if interference_power is None:
                raise ValueError("genie selector needs ground-truth interference power")
            pick1 = interference_power[0][i] <= interference_power[1][i]
        elif selector == "energy_metric":
            pick1 = _qpsk_residual(cand1, constellation_scale) <= _qpsk_residual(
                cand2, constellation_scale
            )
        else:
            raise ValueError(f"unknown selector {selector!r}")
        out[j] = cand1 if pick1 else cand2
    return FreqSymbol(SubcarrierSet(tuple(coded)), out)


def _qpsk_residual(value: complex, scale: float) -> float:
    target = scale / np.sqrt(2) * (np.sign(value.real) + 1j * np.sign(value.imag))
    return abs(value - target)


def edge_pairs(sset: SubcarrierSet, n_pairs: int, toward: str = "low") -> tuple:
    """Adjacent pairs taken from the edge of a contiguous set.

    `toward` "low" pairs from the lowest indices (the edge nearest an
    interferer sitting below the band).
    """
    idx = sorted(sset.indices)
    if 2 * n_pairs > len(idx):
        raise ValueError("not enough subcarriers for the requested pairs")
    if toward == "low":
        chosen = idx[: 2 * n_pairs]
    else:
        chosen = idx[len(idx) - 2 * n_pairs:]
    return tuple((chosen[i], chosen[i + 1]) for i in range(0, len(chosen), 2))


def edge_subcarriers(sset: SubcarrierSet, count: int, toward: str = "low") -> tuple:
    """The `count` subcarriers nearest the given edge of a contiguous set."""
    idx = sorted(sset.indices)
    if count > len(idx):
        raise ValueError("count exceeds the set size")
    return tuple(idx[:count] if toward == "low" else idx[len(idx) - count:])
