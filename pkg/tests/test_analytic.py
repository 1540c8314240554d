"""Closed-form spectra checked against independent numeric constructions."""

import math

import numpy as np
import pytest

from xband import analytic
from xband.ofdm import OfdmConfig

N = 64
N_CP = 16
OMEGA1 = range(-7, 1)
OMEGA2 = range(1, 9)


def _windowed_tone_power(f: float, k: int, n: int, lo: int, hi: int) -> float:
    """|window average of a unit tone at subcarrier k probed at f|^2.

    Direct DTFT of e^{i 2 pi k m / n} / n over samples m in [lo, hi),
    independent of the closed forms under test.
    """
    m = np.arange(lo, hi)
    return abs(np.sum(np.exp(2j * np.pi * (k - f) * m / n)) / n) ** 2


def test_dirichlet_power_limits_and_nulls():
    assert analytic.dirichlet_power(0.0, N) == pytest.approx(1.0)
    assert analytic.dirichlet_power(64.0, N) == pytest.approx(1.0)  # periodic limit
    for f in (1, 2, 5, -3):
        assert analytic.dirichlet_power(float(f), N) == pytest.approx(0.0, abs=1e-25)
    # Generic point against the direct tone construction.
    for x in (0.3, 1.7, 4.25):
        assert analytic.dirichlet_power(x, N) == pytest.approx(
            _windowed_tone_power(x, 0, N, 0, N), rel=1e-9
        )


def test_small_mismatch_spectrum_matches_tone_sum():
    for f in (0.5, 1.3, 6.0 + 0.11):
        direct = sum(_windowed_tone_power(f, k, N, 0, N) for k in OMEGA1)
        assert analytic.cbi_case_a(f, OMEGA1, 1.0, N) == pytest.approx(direct, rel=1e-9)
    # Exact nulls at integer separations outside the interfering band.
    assert analytic.cbi_case_a(3.0, OMEGA1, 1.0, N) == pytest.approx(0.0, abs=1e-22)


def test_split_window_spectrum_matches_tone_sum():
    # At mismatch tau the victim window sees two partial tones from
    # consecutive interferer symbols with independent data, so powers add:
    # segments [0, M) and [M, N) with M = ceil(tau - n_cp).
    tau = 37.0
    m = math.ceil(tau - N_CP)
    for f in (0.5, 1.3, 4.71):
        direct = sum(
            _windowed_tone_power(f, k, N, 0, m) + _windowed_tone_power(f, k, N, m, N)
            for k in OMEGA1
        )
        got = analytic.cbi_case_b_at_tau(f, tau, OMEGA1, 1.0, N, N_CP)
        assert got == pytest.approx(direct, rel=1e-9)


def test_split_window_tau_range_enforced():
    with pytest.raises(ValueError):
        analytic.cbi_case_b_at_tau(1.5, 10.0, OMEGA1, 1.0, N, N_CP)
    with pytest.raises(ValueError):
        analytic.cbi_case_b_at_tau(1.5, 80.0, OMEGA1, 1.0, N, N_CP)


def test_large_mismatch_average_matches_numeric_tau_integral():
    # Averaging the per-tau split spectrum over the continuous split point
    # must reproduce the closed-form mismatch average.
    taus = N_CP + (np.arange(2000) + 0.5) / 2000 * N
    for f in (0.5, 1.3, 3.0, 6.4):
        avg = np.mean(
            [
                analytic.cbi_case_b_at_tau(f, t, OMEGA1, 1.0, N, N_CP, continuous=True)
                for t in taus
            ]
        )
        got = analytic.cbi_case_b_avg(f, OMEGA1, 1.0, N)
        assert got == pytest.approx(avg, rel=1e-5)


def test_large_mismatch_on_carrier_limit():
    # On an interferer carrier the averaged split term tends to 2/3.
    one = analytic.cbi_case_b_avg(0.0, [0], 1.0, N)
    assert one == pytest.approx(2.0 / 3.0, rel=1e-9)


def test_overall_is_cp_weighted_mixture():
    f = np.linspace(0.5, 8.0, 31)
    rho = N_CP / (N + N_CP)
    mix = rho * analytic.cbi_case_a(f, OMEGA1, 1.0, N) + (1 - rho) * analytic.cbi_case_b_avg(
        f, OMEGA1, 1.0, N
    )
    assert np.allclose(analytic.cbi_overall(f, OMEGA1, 1.0, N, N_CP), mix)
    assert np.allclose(
        analytic.cbi_overall_rho(f, OMEGA1, 1.0, N, rho), mix
    )


def test_signal_ici_decomposition_sums_to_psd():
    delta = 0.2
    for l in (1, 4, 8):
        p_sig, p_ici = analytic.decompose_sig_ici(delta, l, OMEGA2, 1.0, N)
        total = analytic.signal_psd(l + delta, OMEGA2, 1.0, N)
        assert p_sig + p_ici == pytest.approx(total, rel=1e-12)
    with pytest.raises(ValueError):
        analytic.decompose_sig_ici(0.2, 20, OMEGA2, 1.0, N)
    with pytest.raises(ValueError):
        analytic.decompose_sig_ici(0.7, 1, OMEGA2, 1.0, N)


def test_sync_error_std_closed_form():
    assert analytic.sync_error_std(32, 10.0) == pytest.approx(
        math.sqrt(2.0) / (math.pi * math.sqrt(320.0))
    )
    # Scales as 1/sqrt(m * sinr).
    assert analytic.sync_error_std(32, 40.0) == pytest.approx(
        analytic.sync_error_std(32, 10.0) / 2.0
    )
    with pytest.raises(ValueError):
        analytic.sync_error_std(0, 10.0)
    with pytest.raises(ValueError):
        analytic.sync_error_std(32, 0.0)


def test_mean_interference_power_averages_over_band():
    cbi = lambda f: analytic.cbi_overall(f, OMEGA1, 1.0, N, N_CP)
    direct = np.mean([cbi(0.1 + k) for k in OMEGA2])
    assert analytic.mean_interference_power(OMEGA2, cbi, 0.1) == pytest.approx(direct)


def test_cir_edge_cases():
    assert analytic.cir(1.0, 0.5, 0.5) == pytest.approx(1.0)
    assert analytic.cir(1.0, 0.0, 0.0) == math.inf
    with pytest.raises(ValueError):
        analytic.cir(1.0, -0.1, 0.0)


def test_antipodal_pair_spectrum_matches_coherent_tone_sum():
    # A time-aligned pair (k-1, k) carrying (s, -s) adds coherently; the
    # closed form must match the direct two-tone construction.
    k = 0
    m = np.arange(N)
    for f in (1.5, 2.3, 6.0, -0.41):
        amp = (
            np.sum(np.exp(2j * np.pi * (k - f) * m / N)) / N
            - np.sum(np.exp(2j * np.pi * ((k - 1) - f) * m / N)) / N
        )
        # The closed form replaces N sin(pi x / N) by pi x, so it matches the
        # discrete construction to the approximation's accuracy, not exactly.
        assert analytic.isc_pair_psd(f, k, 1.0, N) == pytest.approx(
            abs(amp) ** 2, rel=0.02
        )
    # Faster roll-off than a lone subcarrier once past the first sidelobes.
    f = 6.0
    lone = analytic.dirichlet_power(f - k, N) + analytic.dirichlet_power(f - k + 1, N)
    assert analytic.isc_pair_psd(f, k, 1.0, N) < lone


def test_cross_symbol_spectrum_is_the_small_mismatch_kernel():
    f = np.linspace(0.5, 8.0, 16)
    assert np.allclose(
        analytic.csc_subcarrier_psd(f, 0, 2.0, N),
        2.0 * analytic.dirichlet_power(f, N),
    )


def test_param_sensitivity_shapes_and_validation():
    grid = np.linspace(0.25, 8.0, 32)
    out = analytic.param_sensitivity("L", [4, 8, 16], grid)
    assert set(out) == {4, 8, 16}
    assert all(spec.values.shape == grid.shape for spec in out.values())
    # Wider interfering bands leak more at a fixed separation.
    assert out[16].values[0] > out[4].values[0]
    with pytest.raises(ValueError):
        analytic.param_sensitivity("Q", [1], grid)


def test_min_guardband_monotone_in_requirement():
    cfg = OfdmConfig(n_fft=64, n_cp=16)
    easy = analytic.min_guardband(5.0, 0.0, cfg, interferer_width=8)
    hard = analytic.min_guardband(20.0, 0.0, cfg, interferer_width=8)
    assert easy is not None and hard is not None
    assert hard >= easy
    # A stronger interferer needs at least as much guardband.
    strong = analytic.min_guardband(10.0, 9.0, cfg, interferer_width=8)
    assert strong >= analytic.min_guardband(10.0, 0.0, cfg, interferer_width=8)
    # An unreachable requirement reports no feasible gap.
    assert analytic.min_guardband(80.0, 9.0, cfg, interferer_width=8) is None


def test_power_spectrum_validation():
    with pytest.raises(ValueError):
        analytic.PowerSpectrum(np.arange(3.0), np.arange(4.0))
    with pytest.raises(ValueError):
        analytic.PowerSpectrum(np.arange(3.0), np.array([1.0, -1.0, 0.0]))
    spec = analytic.PowerSpectrum(np.arange(3.0), np.array([1.0, 0.0, 10.0]))
    assert spec.db()[2] == pytest.approx(10.0)
    assert spec.db()[1] <= -290.0  # floored, not -inf
