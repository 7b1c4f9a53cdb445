"""Multicarrier single-subband power spectral density models.

Three waveforms are supported, each normalized to unit total power so
that downstream interference factors read as watts leaked per watt sent:

``ofdm``
    Squared-sinc subband spectrum of a rectangular-windowed carrier,
    ``T_s * sinc(f*T_s)**2`` with ``T_s = (1 + cp_fraction) / delta_f``.

``ufofdm``
    Squared magnitude of a Dolph-Chebyshev filter response fitted to the
    subband: the main lobe's first null sits at the subband edge and the
    sidelobes form the window's flat equiripple floor at ``-alpha_db``.
    Chebyshev windows keep the same sidelobe attenuation at all
    frequencies, unlike the decaying sidelobes of a rectangular window.

``fbmc``
    Sum of PHYDYAS prototype responses (overlap factor 4) for the active
    subcarriers of the subband.  A subband carries 12 subcarrier slots
    with one guard slot at each edge; offset-QAM block isolation needs
    that guard, and it keeps the prototype main lobes strictly inside
    the subband.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "OFDM",
    "FBMC",
    "UFOFDM",
    "WaveformSpec",
    "PsdProfile",
    "chebyshev_poly",
    "dolph_chebyshev_coeffs",
    "filter_frequency_response",
    "peak_sidelobe_db",
    "psd_profile",
]

OFDM = "ofdm"
FBMC = "fbmc"
UFOFDM = "ufofdm"

#: PHYDYAS frequency-sampling weights for overlap factor 4 (H0..H3).
PHYDYAS_WEIGHTS = (1.0, 0.971960, np.sqrt(2.0) / 2.0, 0.235147)

#: Subcarrier slots that make up one subband, and guard slots per edge,
#: used by the FBMC model.
SUBCARRIERS_PER_SUBBAND = 12
GUARD_SUBCARRIERS = 1

#: Default tabulation: step delta_f / 2048 resolves the narrowest PHYDYAS
#: sidelobes (width delta_f / 48); support +/- 32 subbands covers every
#: in-grid spectral distance of a 32-subband layout.
DEFAULT_GRID_DIVISOR = 2048
DEFAULT_SUPPORT_SUBBANDS = 32


@dataclass(frozen=True)
class WaveformSpec:
    """Which multicarrier scheme to model, plus its filter parameters.

    Parameters
    ----------
    kind : str
        One of ``"ofdm"``, ``"fbmc"``, ``"ufofdm"``.
    subband_width_hz : float
        Subband width (Hz), > 0.
    alpha_db : float, optional
        Sidelobe attenuation in dB (> 0).  UF-OFDM only.
    filter_len : int, optional
        Odd filter length ``N = 2M + 1``.  UF-OFDM only.
    cp_fraction : float
        Cyclic-prefix duration as a fraction of the symbol time (OFDM
        only, >= 0).
    overlap : int
        FBMC overlapping factor.
    """

    kind: str
    subband_width_hz: float
    alpha_db: float | None = None
    filter_len: int | None = None
    cp_fraction: float = 0.0
    overlap: int = 4

    def __post_init__(self):
        if self.kind not in (OFDM, FBMC, UFOFDM):
            raise ValueError(f"unknown waveform kind: {self.kind!r}")
        if self.subband_width_hz <= 0:
            raise ValueError("subband_width_hz must be > 0")
        if self.cp_fraction < 0:
            raise ValueError("cp_fraction must be >= 0")
        if self.overlap < 1:
            raise ValueError("overlap must be >= 1")
        if self.kind == UFOFDM:
            if self.alpha_db is None or self.filter_len is None:
                raise ValueError("ufofdm requires alpha_db and filter_len")
            if self.alpha_db <= 0:
                raise ValueError("alpha_db must be > 0")
            if self.filter_len < 1 or self.filter_len % 2 == 0:
                raise ValueError(
                    "filter_len must be odd and >= 1 (N = 2M + 1); "
                    f"got {self.filter_len}"
                )

    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class PsdProfile:
    """Tabulated single-subband PSD, normalized to unit total power.

    ``density_per_hz[i]`` is the spectral density (1/Hz) at frequency
    offset ``offsets_hz[i]`` from the subband center.  The table is
    symmetric about zero and its trapezoidal integral equals 1.
    """

    offsets_hz: np.ndarray = field(repr=False)
    density_per_hz: np.ndarray = field(repr=False)
    support_hz: float
    grid_step_hz: float

    def density(self, f_hz):
        """Density at arbitrary offsets; zero beyond the tabulated support."""
        return np.interp(f_hz, self.offsets_hz, self.density_per_hz,
                         left=0.0, right=0.0)


def chebyshev_poly(n: int, kappa):
    """Chebyshev polynomial of the first kind, C_n(kappa).

    Evaluates ``cos(n * arccos(kappa))`` for ``|kappa| <= 1`` and
    ``cosh(n * arccosh(|kappa|))`` with the parity sign ``(-1)**n`` for
    ``kappa < -1``, so the result is the true polynomial (continuous at
    ``|kappa| = 1`` and satisfying the three-term recurrence).
    """
    if n < 0:
        raise ValueError("polynomial order must be non-negative")
    kappa = np.asarray(kappa, dtype=float)
    out = np.empty_like(kappa)
    inside = np.abs(kappa) <= 1.0
    out[inside] = np.cos(n * np.arccos(kappa[inside]))
    grown = ~inside
    sign = np.where(kappa[grown] < 0, (-1.0) ** n, 1.0)
    out[grown] = sign * np.cosh(n * np.arccosh(np.abs(kappa[grown])))
    return out if out.ndim else float(out)


def _ripple_ratio(alpha_db: float) -> float:
    return 10.0 ** (alpha_db / 20.0)


def _kappa0(filter_len: int, alpha_db: float) -> float:
    m = (filter_len - 1) // 2
    return np.cosh(np.arccosh(_ripple_ratio(alpha_db)) / (2 * m))


def dolph_chebyshev_coeffs(filter_len: int, alpha_db: float) -> np.ndarray:
    """Dolph-Chebyshev filter taps with unit DC gain.

    Parameters
    ----------
    filter_len : int
        Odd length ``N = 2M + 1``; even lengths are rejected because the
        symmetric cosine-sum form below requires a center tap (73 is the
        nearest realizable length to a nominal 74).
    alpha_db : float
        Equiripple sidelobe attenuation in dB, > 0.

    Returns
    -------
    numpy.ndarray
        Even-symmetric taps indexed ``n = -M .. M``; ``sum(taps) == 1``,
        so the frequency-response peak is 0 dB and every sidelobe peaks
        at ``-alpha_db`` dB.

    Notes
    -----
    The taps are the inverse DFT of the Chebyshev frequency samples
    ``C_2M(kappa0 * cos(pi*k/N)) / R`` with
    ``kappa0 = cosh(arccosh(R) / 2M)`` and ``R = 10**(alpha_db/20)``:

        w[n] = 1/N + (2/(N*R)) * sum_m C_2M(kappa0 cos(pi m/N)) cos(2 pi m n/N)

    A length of 1 degenerates to the identity tap ``[1.0]``.
    """
    if filter_len < 1 or filter_len % 2 == 0:
        raise ValueError(f"filter_len must be odd and >= 1, got {filter_len}")
    if alpha_db <= 0:
        raise ValueError("alpha_db must be > 0")
    n_taps = int(filter_len)
    m_half = (n_taps - 1) // 2
    if m_half == 0:
        return np.array([1.0])
    ripple = _ripple_ratio(alpha_db)
    kappa0 = _kappa0(n_taps, alpha_db)
    n = np.arange(-m_half, m_half + 1)
    m = np.arange(1, m_half + 1)
    c = chebyshev_poly(2 * m_half, kappa0 * np.cos(np.pi * m / n_taps))
    cosines = np.cos(2.0 * np.pi * np.outer(n, m) / n_taps)
    return (1.0 + (2.0 / ripple) * cosines @ c) / n_taps


def filter_frequency_response(nu, filter_len: int, alpha_db: float):
    """DTFT magnitude of the Dolph-Chebyshev taps at ``nu`` cycles/sample.

    Equals ``C_2M(kappa0 * cos(pi * nu)) / R`` exactly: the response is a
    degree-M trigonometric polynomial, so the closed Chebyshev form and
    the tap DTFT coincide (tested against an explicit FFT).
    """
    if filter_len < 1 or filter_len % 2 == 0:
        raise ValueError(f"filter_len must be odd and >= 1, got {filter_len}")
    m_half = (filter_len - 1) // 2
    if m_half == 0:
        return np.ones_like(np.asarray(nu, dtype=float))
    kappa0 = _kappa0(filter_len, alpha_db)
    return chebyshev_poly(2 * m_half, kappa0 * np.cos(np.pi * np.asarray(nu))) \
        / _ripple_ratio(alpha_db)


def peak_sidelobe_db(coeffs: np.ndarray, n_fft: int = 2 ** 16) -> float:
    """Peak sidelobe level of a tap vector, dB relative to the main lobe.

    Evaluates |DTFT|^2 on an ``n_fft`` grid, walks from the peak to the
    first local minimum (main-lobe edge) and returns the maximum beyond.
    """
    spectrum = np.abs(np.fft.rfft(coeffs, n_fft))
    level_db = 20.0 * np.log10(np.maximum(spectrum / spectrum.max(), 1e-300))
    i = 1
    while i < len(level_db) - 1 and level_db[i + 1] <= level_db[i]:
        i += 1
    return float(level_db[i:].max())


def _first_null_cycles(filter_len: int, alpha_db: float) -> float:
    """First null of the Chebyshev response, in cycles/sample."""
    m_half = (filter_len - 1) // 2
    kappa0 = _kappa0(filter_len, alpha_db)
    return float(np.arccos(np.cos(np.pi / (4 * m_half)) / kappa0) / np.pi)


def _ufofdm_density(f: np.ndarray, spec: WaveformSpec) -> np.ndarray:
    """|Chebyshev response|^2 with the first null at the subband edge.

    The per-subband filter is designed so its transition ends at the
    subband edge; the ripple pattern runs out to the pattern's Nyquist
    point and continues as the flat ``-alpha_db`` floor beyond (the two
    join continuously at a ripple peak).  ``filter_len == 1`` degenerates
    to a plain (non-CP) OFDM subband.
    """
    if spec.filter_len == 1:
        return _ofdm_density(f, spec.subband_width_hz, 0.0)
    nu1 = _first_null_cycles(spec.filter_len, spec.alpha_db)
    f_sample = (spec.subband_width_hz / 2.0) / nu1
    nu = np.clip(np.abs(f) / f_sample, 0.0, 0.5)
    resp = filter_frequency_response(nu, spec.filter_len, spec.alpha_db)
    floor = 1.0 / _ripple_ratio(spec.alpha_db)
    return np.where(np.abs(f) <= f_sample / 2.0, resp, floor) ** 2


def _ofdm_density(f: np.ndarray, delta_f: float, cp_fraction: float) -> np.ndarray:
    t_sym = (1.0 + cp_fraction) / delta_f
    return t_sym * np.sinc(f * t_sym) ** 2


def _fbmc_density(f: np.ndarray, spec: WaveformSpec) -> np.ndarray:
    spacing = spec.subband_width_hz / SUBCARRIERS_PER_SUBBAND
    t_sym = 1.0 / spacing
    k_ov = spec.overlap
    slots = np.arange(GUARD_SUBCARRIERS, SUBCARRIERS_PER_SUBBAND - GUARD_SUBCARRIERS)
    offsets = (slots - (SUBCARRIERS_PER_SUBBAND - 1) / 2.0) * spacing
    total = np.zeros_like(f)
    for off in offsets:
        g = np.zeros_like(f)
        for k in range(-(k_ov - 1), k_ov):
            h = PHYDYAS_WEIGHTS[abs(k)] if abs(k) < len(PHYDYAS_WEIGHTS) else 0.0
            g += h * np.sinc(k_ov * t_sym * (f - off) - k)
        total += g ** 2
    return total


def psd_profile(spec: WaveformSpec, grid_step_hz: float | None = None,
                support_hz: float | None = None) -> PsdProfile:
    """Tabulate the normalized single-subband PSD of a waveform.

    Parameters
    ----------
    spec : WaveformSpec
    grid_step_hz : float, optional
        Sample spacing; defaults to ``subband_width_hz / 2048``.
    support_hz : float, optional
        Half-width of the tabulated support; defaults to 32 subband
        widths and must cover at least 16 on each side.

    Returns
    -------
    PsdProfile
        Symmetric table renormalized to unit trapezoidal integral.
    """
    delta_f = spec.subband_width_hz
    if grid_step_hz is None:
        grid_step_hz = delta_f / DEFAULT_GRID_DIVISOR
    if support_hz is None:
        support_hz = DEFAULT_SUPPORT_SUBBANDS * delta_f
    if grid_step_hz <= 0:
        raise ValueError("grid_step_hz must be > 0")
    if support_hz < 16 * delta_f:
        raise ValueError("support_hz must cover at least 16 subband widths")

    half = int(round(support_hz / grid_step_hz))
    offsets = np.arange(-half, half + 1) * grid_step_hz
    if spec.kind == OFDM:
        density = _ofdm_density(offsets, delta_f, spec.cp_fraction)
    elif spec.kind == UFOFDM:
        density = _ufofdm_density(offsets, spec)
    else:
        density = _fbmc_density(offsets, spec)
    density = density / np.trapezoid(density, offsets)
    return PsdProfile(offsets_hz=offsets, density_per_hz=density,
                      support_hz=half * grid_step_hz, grid_step_hz=grid_step_hz)
