"""Closed-form cross-band interference, signal/ICI and mitigation spectra.

All frequencies are in subcarrier units; powers are linear unless a name
says otherwise.  Dirichlet-kernel ratios are evaluated by their limit at
on-carrier points, where the raw expressions are 0/0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

_SINGULAR_TOL = 1e-9


def _indices(omega) -> np.ndarray:
    """Accept a SubcarrierSet or any iterable of ints."""
    if hasattr(omega, "as_array"):
        return omega.as_array()
    return np.asarray(list(omega), dtype=int)


@dataclass(frozen=True)
class PowerSpectrum:
    """Power sampled on a continuous-frequency grid (subcarrier units)."""

    f_grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.f_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if f.shape != v.shape:
            raise ValueError("f_grid and values must have the same length")
        if np.any(v < 0):
            raise ValueError("power values must be non-negative")
        object.__setattr__(self, "f_grid", f)
        object.__setattr__(self, "values", v)

    def db(self, floor: float = 1e-30) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(self.values, floor))


@dataclass(frozen=True)
class CirProfile:
    """Carrier-to-interference ratio sampled on a frequency grid."""

    f_grid: np.ndarray
    cir_values: np.ndarray

    def db(self) -> np.ndarray:
        return 10.0 * np.log10(self.cir_values)


def dirichlet_power(x, n: int):
    """sin^2(pi x) / (n sin(pi x / n))^2 with the limit value 1 at x = 0 mod n."""
    x = np.asarray(x, dtype=float)
    wrapped = np.abs((x + n / 2) % n - n / 2)
    singular = wrapped < _SINGULAR_TOL
    safe = np.where(singular, 1.0, x)
    num = np.sin(np.pi * safe) ** 2
    den = (n * np.sin(np.pi * safe / n)) ** 2
    out = np.where(singular, 1.0, num / np.where(singular, 1.0, den))
    return out if out.ndim else float(out)


def cbi_case_a(f, omega1, p1: float, n: int):
    """Average cross-band interference under small temporal mismatch.

    Independent of the mismatch; zero at every integer f outside omega1.
    """
    ks = _indices(omega1)
    f = np.asarray(f, dtype=float)
    x = f[..., None] - ks
    out = p1 * np.sum(dirichlet_power(x, n), axis=-1)
    return out if out.ndim else float(out)


def _case_b_avg_term(x, n: int):
    """Per-subcarrier term of the mismatch-averaged large-offset spectrum.

    (1 - sin(2 pi x)/(2 pi x)) / (n sin(pi x / n))^2, limit 2/3 at x = 0 mod n.
    """
    x = np.asarray(x, dtype=float)
    wrapped = np.abs((x + n / 2) % n - n / 2)
    singular = wrapped < _SINGULAR_TOL
    safe = np.where(singular, 1.0, x)
    num = 1.0 - np.sinc(2.0 * safe)
    den = (n * np.sin(np.pi * safe / n)) ** 2
    return np.where(singular, 2.0 / 3.0, num / den)


def cbi_case_b_avg(f, omega1, p1: float, n: int):
    """Average cross-band interference under large mismatch, mismatch-averaged."""
    ks = _indices(omega1)
    f = np.asarray(f, dtype=float)
    x = f[..., None] - ks
    out = p1 * np.sum(_case_b_avg_term(x, n), axis=-1)
    return out if out.ndim else float(out)


def cbi_case_b_at_tau(
    f,
    tau_samples: float,
    omega1,
    p1: float,
    n: int,
    n_cp: int,
    continuous: bool = False,
):
    """Large-mismatch interference at a specific mismatch value.

    The exact form uses the integer split point M = ceil(tau - n_cp); the
    continuous flag substitutes the fractional split directly.
    """
    if not n_cp < tau_samples < n + n_cp:
        raise ValueError(
            f"tau={tau_samples} outside the large-mismatch range ({n_cp}, {n + n_cp})"
        )
    if continuous:
        m = tau_samples - n_cp
    else:
        m = min(max(math.ceil(tau_samples - n_cp), 1), n - 1)
    ks = _indices(omega1)
    f = np.asarray(f, dtype=float)
    x = f[..., None] - ks
    wrapped = np.abs((x + n / 2) % n - n / 2)
    singular = wrapped < _SINGULAR_TOL
    safe = np.where(singular, 1.0, x)
    num = np.sin(m / n * np.pi * safe) ** 2 + np.sin((n - m) / n * np.pi * safe) ** 2
    den = (n * np.sin(np.pi * safe / n)) ** 2
    limit = (m**2 + (n - m) ** 2) / n**2
    terms = np.where(singular, limit, num / den)
    out = p1 * np.sum(terms, axis=-1)
    return out if out.ndim else float(out)


def cbi_overall_rho(f, omega1, p1: float, n: int, rho: float):
    """Mixture of the small/large mismatch averages with explicit CP overhead."""
    return rho * cbi_case_a(f, omega1, p1, n) + (1.0 - rho) * cbi_case_b_avg(
        f, omega1, p1, n
    )


def cbi_overall(f, omega1, p1: float, n: int, n_cp: int):
    """Overall average interference, weighting the two mismatch cases by the
    CP overhead rho = n_cp / (n + n_cp)."""
    rho = n_cp / (n + n_cp)
    return cbi_overall_rho(f, omega1, p1, n, rho)


def signal_psd(f, omega2, p2: float, n: int):
    """Average signal strength of the victim link; same kernel as case A."""
    return cbi_case_a(f, omega2, p2, n)


def decompose_sig_ici(delta_f: float, l: int, omega2, p2: float, n: int):
    """Split the victim's power at f = l + delta_f into signal and ICI parts.

    The two parts sum exactly to signal_psd(l + delta_f).
    """
    ks = _indices(omega2)
    if l not in ks:
        raise ValueError(f"subcarrier {l} not in the victim set")
    if abs(delta_f) > 0.5:
        raise ValueError("fractional offset must satisfy |delta_f| <= 0.5")
    p_sig = p2 * dirichlet_power(delta_f, n)
    others = ks[ks != l]
    p_ici = p2 * float(np.sum(dirichlet_power(l + delta_f - others, n)))
    return float(p_sig), p_ici


def sync_error_std(m: int, sinr: float) -> float:
    """Standard deviation of the fractional frequency-offset estimate,
    normalized to the subcarrier spacing.  Valid at high SINR."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if sinr <= 0:
        raise ValueError("sinr must be positive (linear scale)")
    return math.sqrt(2.0) / (math.pi * math.sqrt(m * sinr))


def mean_interference_power(omega2, cbi: Callable[[float], float], epsilon: float) -> float:
    """Average interference over the victim's subcarriers at inter-link offset
    epsilon: mean over k in omega2 of cbi(epsilon + k)."""
    ks = _indices(omega2)
    return float(np.mean([cbi(epsilon + k) for k in ks]))


def cir(p_sig: float, p_ici: float, p_cbi: float) -> float:
    """Linear carrier-to-interference ratio; inf when the denominator is zero."""
    denom = p_ici + p_cbi
    if denom < 0:
        raise ValueError("interference powers must be non-negative")
    if denom == 0:
        return math.inf
    return p_sig / denom


def isc_pair_psd(f, k: int, p1: float, n: int):
    """Sum power spectrum of an antipodal-coded adjacent pair (k-1, k) at
    zero mismatch; decays one order faster in (f - k) than a lone subcarrier."""
    f = np.asarray(f, dtype=float)
    x = f - k
    near0 = np.abs(x) < _SINGULAR_TOL
    near1 = np.abs(x + 1) < _SINGULAR_TOL
    safe = np.where(near0 | near1, 0.5, x)
    val = p1 * (np.sin(np.pi * safe) / (np.pi * safe * (safe + 1))) ** 2
    out = np.where(near0 | near1, p1, val)
    return out if out.ndim else float(out)


def csc_subcarrier_psd(f, k: int, p1: float, n: int):
    """Per-subcarrier spectrum of a cross-symbol-coded interferer: the
    small-mismatch kernel, irrespective of the actual mismatch."""
    f = np.asarray(f, dtype=float)
    out = p1 * dirichlet_power(f - k, n)
    return out if np.ndim(out) else float(out)


def param_sensitivity(
    sweep: str,
    values: Iterable,
    f_grid,
    l: int = 8,
    rho: float = 0.2,
    n: int = 64,
    p1: float = 1.0,
) -> dict:
    """Overall average interference spectra while sweeping one of L, rho, N.

    The interferer occupies the l subcarriers just below the victim band
    (indices -(l-1)..0); f is measured from that band edge.
    """
    f_grid = np.asarray(f_grid, dtype=float)
    out = {}
    for v in values:
        if sweep == "L":
            omega1 = range(-(int(v) - 1), 1)
            spec = cbi_overall_rho(f_grid, omega1, p1, n, rho)
        elif sweep == "rho":
            omega1 = range(-(l - 1), 1)
            spec = cbi_overall_rho(f_grid, omega1, p1, n, float(v))
        elif sweep == "N":
            omega1 = range(-(l - 1), 1)
            spec = cbi_overall_rho(f_grid, omega1, p1, int(v), rho)
        else:
            raise ValueError(f"unknown sweep parameter {sweep!r}")
        out[v] = PowerSpectrum(f_grid, spec)
    return out


def min_guardband(
    cir_min_db: float,
    p_r_db: float,
    cfg,
    interferer_width: int,
    resolution: float = 0.1,
) -> float | None:
    """Smallest guardband (in subcarriers, at the given resolution) giving the
    victim's edge subcarrier at least cir_min_db of CIR.

    ICI is neglected; CIR = 1 / (p_r * P_CBI(1 + gap)) with unit powers.
    Returns None when no gap up to N/2 meets the requirement.
    """
    omega1 = range(-(interferer_width - 1), 1)
    p_r = 10.0 ** (p_r_db / 10.0)
    cir_min = 10.0 ** (cir_min_db / 10.0)
    steps = int(round((cfg.n_fft / 2) / resolution))
    for i in range(steps + 1):
        gap = i * resolution
        p_cbi = p_r * cbi_overall(1.0 + gap, omega1, 1.0, cfg.n_fft, cfg.n_cp)
        if p_cbi == 0 or 1.0 / p_cbi >= cir_min:
            return round(gap, 10)
    return None
