"""Interference factors: PSD mass landing in each PU band.

The interference factor of a (hole subband, PU band) pair is the cross
channel gain times the integral of the unit-power subband PSD over the
PU band, so it reads as watts received by the PU per watt transmitted on
the hole.  Integration is composite Simpson on the tabulated profile,
with at least :data:`MIN_QUADRATURE_POINTS` samples per band; the PSD is
treated as zero beyond its tabulated support.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import ChannelSet, Scenario
from .waveform import PsdProfile

__all__ = [
    "InterferenceFactors",
    "spectral_distance",
    "interference_factor",
    "interference_matrix",
    "total_interference",
    "MIN_QUADRATURE_POINTS",
]

MIN_QUADRATURE_POINTS = 1025


@dataclass(frozen=True)
class InterferenceFactors:
    """Leakage table: ``omega[j, l]`` couples hole ``subbands[j]`` to PU ``l``."""

    omega: np.ndarray = field(repr=False)
    subbands: tuple
    quadrature_points: int

    def __post_init__(self):
        if self.omega.ndim != 2 or self.omega.shape[0] != len(self.subbands):
            raise ValueError("omega must be (n_holes, k_pu)")
        if np.any(self.omega < 0):
            raise ValueError("interference factors must be >= 0")


def spectral_distance(n: int, l: int, scenario: Scenario) -> float:
    """Center-to-center distance (Hz) between hole subband ``n`` and PU ``l``."""
    if n not in scenario.sm_subbands:
        raise ValueError(f"subband {n} is not a hole subband")
    if not 0 <= l < scenario.k_pu:
        raise ValueError(f"unknown PU index {l}")
    start, length = scenario.pu_bands[l]
    center_sub = (n + 0.5) * scenario.delta_f_hz
    center_pu = (start + length / 2.0) * scenario.delta_f_hz
    return abs(center_sub - center_pu)


def _simpson(y: np.ndarray, step: float) -> float:
    # composite Simpson; len(y) must be odd
    return step / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def interference_factor(psd: PsdProfile, cross_gain: float, distance_hz: float,
                        pu_width_hz: float, min_points: int = MIN_QUADRATURE_POINTS) -> float:
    """cross_gain times the PSD mass over ``[D - W/2, D + W/2]``.

    The band is clipped to the tabulated support (zero tail beyond) and
    integrated with composite Simpson on at least ``min_points`` samples,
    never coarser than the profile's own grid.
    """
    if pu_width_hz <= 0:
        raise ValueError("pu_width_hz must be > 0")
    if cross_gain < 0:
        raise ValueError("cross_gain must be >= 0")
    if cross_gain == 0.0:
        return 0.0
    lo = max(distance_hz - pu_width_hz / 2.0, -psd.support_hz)
    hi = min(distance_hz + pu_width_hz / 2.0, psd.support_hz)
    if hi <= lo:
        return 0.0
    n_pts = max(min_points, int(np.ceil((hi - lo) / psd.grid_step_hz)) + 1)
    if n_pts % 2 == 0:
        n_pts += 1
    grid = np.linspace(lo, hi, n_pts)
    mass = _simpson(psd.density(grid), grid[1] - grid[0])
    return cross_gain * max(mass, 0.0)


def interference_matrix(scenario: Scenario, channels: ChannelSet,
                        psd: PsdProfile) -> InterferenceFactors:
    """Interference factor for every (hole subband, PU) pair."""
    if channels.sm_subbands != scenario.sm_subbands:
        raise ValueError("channel tables were drawn for a different layout")
    if channels.g_sp.shape != (scenario.n_sm, scenario.k_pu):
        raise ValueError("g_sp shape does not match the scenario")
    omega = np.zeros((scenario.n_sm, scenario.k_pu))
    for j, n in enumerate(scenario.sm_subbands):
        for l in range(scenario.k_pu):
            _, length = scenario.pu_bands[l]
            omega[j, l] = interference_factor(
                psd, channels.g_sp[j, l],
                spectral_distance(n, l, scenario),
                length * scenario.delta_f_hz)
    return InterferenceFactors(omega=omega, subbands=scenario.sm_subbands,
                               quadrature_points=MIN_QUADRATURE_POINTS)


def total_interference(allocation, omega: InterferenceFactors, l: int) -> float:
    """Linear sum of per-subband power times leakage into PU ``l`` (watts)."""
    if allocation.powers is None:
        raise ValueError("allocation has no powers set")
    powers = np.asarray(allocation.powers)
    if np.any(powers < 0):
        raise ValueError("powers must be >= 0")
    if not 0 <= l < omega.omega.shape[1]:
        raise ValueError(f"unknown PU index {l}")
    return float(powers @ omega.omega[:, l])
