"""Spectrum layout and channel generation.

A scenario is a grid of ``n_total`` subbands of width ``delta_f_hz``.
Licensed primary users (PUs) occupy disjoint contiguous bands; the
remaining "hole" subbands are available to the secondary machines (SMs).
All randomness is seeded (NumPy PCG64 via ``default_rng``), so every
layout and channel table is a pure function of its seed and parameters.

Squared channel magnitudes are drawn i.i.d. exponential with mean 1,
i.e. unit-mean-power Rayleigh fading.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "Scenario",
    "ChannelSet",
    "generate_spectrum",
    "generate_channels",
    "save_scenario",
    "load_scenario",
    "dbw_to_watts",
    "watts_to_dbw",
]

DEFAULT_DELTA_F_HZ = 312_500.0
DEFAULT_P_MAX_W = 1.0
DEFAULT_NOISE_VAR = 1e-6
DEFAULT_I_TH_DBW = -30.0


def dbw_to_watts(dbw: float) -> float:
    return 10.0 ** (dbw / 10.0)


def watts_to_dbw(watts: float) -> float:
    return 10.0 * np.log10(watts)


@dataclass(frozen=True)
class Scenario:
    """Subband grid, PU band layout and system-level constants.

    ``pu_bands`` is a tuple of ``(start_index, length)`` pairs, pairwise
    disjoint within ``[0, n_total)``.  ``sm_subbands`` is the ordered
    complement of their union: the hole subbands usable by the SMs.
    """

    n_total: int
    delta_f_hz: float
    pu_bands: tuple
    sm_subbands: tuple
    i_th_watts: float
    p_max_watts: float
    noise_variance: float

    def __post_init__(self):
        if self.n_total < 1:
            raise ValueError("n_total must be >= 1")
        if min(self.delta_f_hz, self.i_th_watts, self.p_max_watts,
               self.noise_variance) <= 0:
            raise ValueError("delta_f_hz, i_th_watts, p_max_watts and "
                             "noise_variance must all be > 0")
        occupied = set()
        for start, length in self.pu_bands:
            if length < 1 or start < 0 or start + length > self.n_total:
                raise ValueError(f"PU band {(start, length)} outside the grid")
            band = set(range(start, start + length))
            if band & occupied:
                raise ValueError("PU bands overlap")
            occupied |= band
        expected = tuple(n for n in range(self.n_total) if n not in occupied)
        if tuple(self.sm_subbands) != expected:
            raise ValueError("sm_subbands is not the complement of the PU bands")

    @property
    def n_sm(self) -> int:
        return len(self.sm_subbands)

    @property
    def k_pu(self) -> int:
        return len(self.pu_bands)

    def with_threshold(self, i_th_watts: float) -> "Scenario":
        return replace(self, i_th_watts=i_th_watts)

    def with_budget(self, p_max_watts: float) -> "Scenario":
        return replace(self, p_max_watts=p_max_watts)


@dataclass(frozen=True)
class ChannelSet:
    """Linear power gains for one channel realization.

    ``g_ss[k, j]`` is |H|^2 between the base station and SM ``k`` on hole
    subband ``sm_subbands[j]``; ``g_sp[j, l]`` is |H|^2 between the base
    station and PU ``l`` as seen from hole subband ``sm_subbands[j]``.
    The downlink has a single transmitter, so the cross gain toward a PU
    does not depend on which SM is served.
    """

    g_ss: np.ndarray = field(repr=False)
    g_sp: np.ndarray = field(repr=False)
    sm_subbands: tuple

    def __post_init__(self):
        if self.g_ss.ndim != 2 or self.g_sp.ndim != 2:
            raise ValueError("gain tables must be 2-D")
        if self.g_ss.shape[1] != len(self.sm_subbands) or \
                self.g_sp.shape[0] != len(self.sm_subbands):
            raise ValueError("gain tables do not match the hole subband count")
        if not (np.all(np.isfinite(self.g_ss)) and np.all(np.isfinite(self.g_sp))):
            raise ValueError("gains must be finite")
        if np.any(self.g_ss < 0) or np.any(self.g_sp < 0):
            raise ValueError("gains must be >= 0")

    @property
    def k_sm(self) -> int:
        return self.g_ss.shape[0]


def _composition(rng, total: int, parts: int, minimum: int) -> np.ndarray:
    """Uniform random composition of ``total`` into ``parts`` parts >= minimum."""
    free = total - minimum * parts
    if free < 0:
        raise ValueError("composition infeasible")
    if parts == 1:
        return np.array([total])
    if free == 0:
        return np.full(parts, minimum)
    dividers = np.sort(rng.choice(free + parts - 1, size=parts - 1, replace=False))
    edges = np.concatenate(([-1], dividers, [free + parts - 1]))
    return np.diff(edges) - 1 + minimum


def generate_spectrum(seed, n_total: int, k_pu: int, pu_total_range,
                      *, delta_f_hz: float = DEFAULT_DELTA_F_HZ,
                      i_th_watts: float = dbw_to_watts(DEFAULT_I_TH_DBW),
                      p_max_watts: float = DEFAULT_P_MAX_W,
                      noise_variance: float = DEFAULT_NOISE_VAR) -> Scenario:
    """Draw a random PU band layout.

    The total PU subband count is uniform on ``pu_total_range`` (an
    inclusive ``(low, high)`` pair), split into ``k_pu`` contiguous bands
    of at least one subband each by a uniform random composition.  The
    hole subbands are then distributed over the ``k_pu + 1`` gaps, with
    one hole reserved between consecutive bands whenever enough holes
    exist (bands may touch only when space does not permit a gap).

    Deterministic given ``seed``; raises ``ValueError`` on an infeasible
    packing (no hole subband would remain, or fewer PU subbands than
    bands).
    """
    low, high = int(pu_total_range[0]), int(pu_total_range[1])
    if k_pu < 1:
        raise ValueError("k_pu must be >= 1")
    if low > high or low < k_pu:
        raise ValueError("pu_total_range must satisfy k_pu <= low <= high")
    if high >= n_total:
        raise ValueError("pu_total_range max must leave at least one hole subband")

    rng = np.random.default_rng(seed)
    total_pu = int(rng.integers(low, high + 1))
    widths = _composition(rng, total_pu, k_pu, 1)

    n_holes = n_total - total_pu
    n_gaps = k_pu + 1
    interior_min = 1 if n_holes >= k_pu - 1 else 0
    gaps = np.zeros(n_gaps, dtype=int)
    gaps[1:-1] = interior_min
    remaining = n_holes - interior_min * (k_pu - 1)
    gaps += _composition(rng, int(remaining), n_gaps, 0)

    bands = []
    cursor = int(gaps[0])
    for width, gap_after in zip(widths, gaps[1:]):
        bands.append((cursor, int(width)))
        cursor += int(width) + int(gap_after)
    occupied = {n for start, length in bands for n in range(start, start + length)}
    holes = tuple(n for n in range(n_total) if n not in occupied)
    return Scenario(n_total=n_total, delta_f_hz=delta_f_hz,
                    pu_bands=tuple(bands), sm_subbands=holes,
                    i_th_watts=i_th_watts, p_max_watts=p_max_watts,
                    noise_variance=noise_variance)


def generate_channels(seed, scenario: Scenario, k_sm: int) -> ChannelSet:
    """Draw |H|^2 tables, i.i.d. exponential with mean 1.

    Deterministic given ``seed``.  Shapes: ``g_ss`` is
    ``(k_sm, n_sm)`` and ``g_sp`` is ``(n_sm, k_pu)``.
    """
    if k_sm < 1:
        raise ValueError("k_sm must be >= 1")
    rng = np.random.default_rng(seed)
    n_sm = scenario.n_sm
    g_ss = rng.exponential(1.0, size=(k_sm, n_sm))
    g_sp = rng.exponential(1.0, size=(n_sm, scenario.k_pu))
    return ChannelSet(g_ss=g_ss, g_sp=g_sp, sm_subbands=scenario.sm_subbands)


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario as flat key-value text."""
    lines = [
        f"n_total={scenario.n_total}",
        f"delta_f_hz={scenario.delta_f_hz:.10g}",
    ]
    lines += [f"pu_band={start}:{length}" for start, length in scenario.pu_bands]
    lines += [
        f"i_th_dbw={watts_to_dbw(scenario.i_th_watts):.10g}",
        f"p_max_w={scenario.p_max_watts:.10g}",
        f"noise_var={scenario.noise_variance:.10g}",
    ]
    Path(path).write_text("\n".join(lines) + "\n")


def load_scenario(path) -> Scenario:
    """Parse the flat key-value format written by :func:`save_scenario`."""
    values = {}
    bands = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "pu_band":
            start, _, length = value.partition(":")
            bands.append((int(start), int(length)))
        else:
            values[key] = value
    try:
        n_total = int(values["n_total"])
        delta_f = float(values.get("delta_f_hz", DEFAULT_DELTA_F_HZ))
        i_th = dbw_to_watts(float(values["i_th_dbw"]))
        p_max = float(values["p_max_w"])
        noise = float(values["noise_var"])
    except KeyError as missing:
        raise ValueError(f"scenario file is missing key {missing}") from None
    occupied = {n for start, length in bands for n in range(start, start + length)}
    holes = tuple(n for n in range(n_total) if n not in occupied)
    return Scenario(n_total=n_total, delta_f_hz=delta_f, pu_bands=tuple(bands),
                    sm_subbands=holes, i_th_watts=i_th, p_max_watts=p_max,
                    noise_variance=noise)
