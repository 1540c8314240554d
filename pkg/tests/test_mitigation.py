"""Guardband allocation and the two transmitter-side coding schemes."""

import numpy as np
import pytest

from xband.mitigation import (
    MitigationScheme,
    csc_decode,
    csc_encode,
    csc_phase,
    edge_pairs,
    edge_subcarriers,
    fgb_allocate,
    isc_decode,
    isc_encode,
)
from xband.ofdm import FreqSymbol, OfdmConfig, SubcarrierSet, ofdm_modulate

CFG = OfdmConfig(64, 16)


def test_scheme_validation():
    with pytest.raises(ValueError):
        MitigationScheme("notch")
    with pytest.raises(ValueError):
        MitigationScheme("fgb", gap=-1)
    with pytest.raises(ValueError):
        MitigationScheme("isc", coded_pairs=((1, 3),))  # not adjacent
    with pytest.raises(ValueError):
        MitigationScheme("isc", coded_pairs=((1, 2), (2, 3)))  # overlapping


def test_fgb_allocate_layout():
    omega1, omega2 = fgb_allocate(16, 0)
    assert omega1.indices == tuple(range(-7, 1))
    assert omega2.indices == tuple(range(1, 9))
    omega1, omega2 = fgb_allocate(16, 4)
    assert omega1.disjoint(omega2)
    assert len(omega1) + len(omega2) == 12
    assert min(omega2.indices) - max(omega1.indices) - 1 == 4
    with pytest.raises(ValueError):
        fgb_allocate(16, 15)
    with pytest.raises(ValueError):
        fgb_allocate(16, -1)


def test_isc_roundtrip_and_cancellation():
    sset = SubcarrierSet.contiguous(-7, 0)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    data = FreqSymbol(sset, vals)
    pairs = ((-3, -2), (-1, 0))
    coded = isc_encode(data, pairs)
    # Each pair carries antipodal values.
    assert coded.value_at(-2) == pytest.approx(-coded.value_at(-3))
    assert coded.value_at(0) == pytest.approx(-coded.value_at(-1))
    # Uncoded bins untouched; decode recovers the lower-index payloads.
    assert coded.value_at(-5) == pytest.approx(data.value_at(-5))
    back = isc_decode(coded, pairs)
    assert back.value_at(-3) == pytest.approx(coded.value_at(-3))
    assert back.value_at(-1) == pytest.approx(coded.value_at(-1))
    with pytest.raises(ValueError):
        isc_encode(data, ((4, 5),))  # outside the support


def test_isc_decode_averages_out_common_disturbance():
    sset = SubcarrierSet.contiguous(-1, 0)
    data = FreqSymbol(sset, np.array([1 + 1j, 0j]))
    coded = isc_encode(data, ((-1, 0),))
    # A disturbance hitting both bins equally cancels in the difference.
    received = FreqSymbol(sset, coded.values + (0.3 - 0.2j))
    back = isc_decode(received, ((-1, 0),))
    assert back.value_at(-1) == pytest.approx(1 + 1j)


def test_csc_phase_continuity_in_time():
    # With one coded subcarrier, two consecutive CP-prefixed symbols must form
    # a single uninterrupted tone over all 2 * (N + N_CP) samples.
    k = -3
    sset = SubcarrierSet((k,))
    first = FreqSymbol(sset, np.array([0.7 - 0.4j]))
    second = FreqSymbol(sset, np.array([1.0 + 0j]))  # overwritten by coding
    s1, s2 = csc_encode((first, second), [k], CFG)
    stream = np.concatenate(
        [ofdm_modulate(s1, CFG).samples, ofdm_modulate(s2, CFG).samples]
    )
    n = np.arange(stream.size)
    tone = stream[0] * np.exp(2j * np.pi * k * (n - 0) / CFG.n_fft)
    assert np.allclose(stream, tone)


def test_csc_encode_leaves_uncoded_bins():
    sset = SubcarrierSet.contiguous(-3, 0)
    rng = np.random.default_rng(1)
    first = FreqSymbol(sset, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    second = FreqSymbol(sset, rng.standard_normal(4) + 1j * rng.standard_normal(4))
    s1, s2 = csc_encode((first, second), [-1, 0], CFG)
    assert np.array_equal(s1.values, first.values)
    assert s2.value_at(-3) == second.value_at(-3)
    assert s2.value_at(0) == pytest.approx(first.value_at(0) * complex(csc_phase(0, CFG)))
    with pytest.raises(ValueError):
        csc_encode((first, second), [5], CFG)


def test_csc_decode_selects_cleaner_copy():
    sset = SubcarrierSet((2,))
    payload = 1 + 1j
    first = FreqSymbol(sset, np.array([payload]))
    second = FreqSymbol(sset, np.array([0j]))
    s1, s2 = csc_encode((first, second), [2], CFG)
    # Corrupt the first copy only.
    r1 = FreqSymbol(sset, s1.values + (2.0 - 2.0j))
    r2 = FreqSymbol(sset, s2.values)
    genie = csc_decode(
        (r1, r2), [2], CFG, selector="genie",
        interference_power=(np.array([8.0]), np.array([0.0])),
    )
    assert genie.value_at(2) == pytest.approx(payload)
    blind = csc_decode(
        (r1, r2), [2], CFG, selector="energy_metric", constellation_scale=np.sqrt(2)
    )
    assert blind.value_at(2) == pytest.approx(payload)
    with pytest.raises(ValueError):
        csc_decode((r1, r2), [2], CFG, selector="genie")
    with pytest.raises(ValueError):
        csc_decode((r1, r2), [2], CFG, selector="oracle")


def test_edge_selection_helpers():
    sset = SubcarrierSet.contiguous(1, 8)
    assert edge_pairs(sset, 2, toward="low") == ((1, 2), (3, 4))
    assert edge_pairs(sset, 1, toward="high") == ((7, 8),)
    assert edge_subcarriers(sset, 3, toward="low") == (1, 2, 3)
    assert edge_subcarriers(sset, 3, toward="high") == (6, 7, 8)
    with pytest.raises(ValueError):
        edge_pairs(sset, 5)
    with pytest.raises(ValueError):
        edge_subcarriers(sset, 9)
