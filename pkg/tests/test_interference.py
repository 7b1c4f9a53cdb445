import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cogm2m.allocator import Allocation
from cogm2m.interference import (InterferenceFactors, interference_factor,
                                 interference_matrix, spectral_distance,
                                 total_interference)
from cogm2m.scenario import ChannelSet, Scenario, generate_channels, generate_spectrum
from cogm2m.waveform import FBMC, OFDM, UFOFDM, WaveformSpec, psd_profile

DELTA_F = 312_500.0


def scenario_with(bands, n_total=8, i_th=1e-4):
    occupied = {n for s, L in bands for n in range(s, s + L)}
    holes = tuple(n for n in range(n_total) if n not in occupied)
    return Scenario(n_total=n_total, delta_f_hz=DELTA_F, pu_bands=tuple(bands),
                    sm_subbands=holes, i_th_watts=i_th, p_max_watts=1.0,
                    noise_variance=1e-6)


def unit_channels(scenario, k_sm=1):
    return ChannelSet(g_ss=np.ones((k_sm, scenario.n_sm)),
                      g_sp=np.ones((scenario.n_sm, scenario.k_pu)),
                      sm_subbands=scenario.sm_subbands)


class TestSpectralDistance:
    def test_adjacent_to_width_four_band(self):
        scn = scenario_with([(1, 4)], n_total=6)
        assert spectral_distance(0, 0, scn) == pytest.approx(2.5 * DELTA_F)

    def test_mirror_symmetry(self):
        scn = scenario_with([(3, 2)], n_total=8)
        assert spectral_distance(2, 0, scn) == pytest.approx(
            spectral_distance(5, 0, scn))

    def test_collinearity(self):
        # hole between two bands: distances sum to band-center separation
        scn = scenario_with([(0, 2), (5, 3)], n_total=8)
        d0 = spectral_distance(3, 0, scn)
        d1 = spectral_distance(3, 1, scn)
        centers = (0 + 1.0) * DELTA_F, (5 + 1.5) * DELTA_F
        assert d0 + d1 == pytest.approx(centers[1] - centers[0])

    def test_unknown_indices_rejected(self):
        scn = scenario_with([(1, 4)], n_total=6)
        with pytest.raises(ValueError):
            spectral_distance(1, 0, scn)   # a PU subband, not a hole
        with pytest.raises(ValueError):
            spectral_distance(0, 3, scn)


class TestInterferenceFactor:
    def test_zero_gain(self, ofdm_psd):
        assert interference_factor(ofdm_psd, 0.0, DELTA_F, DELTA_F) == 0.0

    def test_full_support_is_unit(self, ofdm_psd, fbmc_psd, uf40_psd):
        for psd in (ofdm_psd, fbmc_psd, uf40_psd):
            full = interference_factor(psd, 1.0, 0.0, 2 * psd.support_hz + DELTA_F)
            assert full == pytest.approx(1.0, abs=1e-6)

    def test_matches_refined_quadrature(self, ofdm_psd):
        # oracle: identical quadrature with 4x the samples
        coarse = interference_factor(ofdm_psd, 1.0, 3 * DELTA_F, 2 * DELTA_F)
        fine = interference_factor(ofdm_psd, 1.0, 3 * DELTA_F, 2 * DELTA_F,
                                   min_points=4 * 4096 + 1)
        assert coarse == pytest.approx(fine, rel=1e-6)

    def test_halving_grid_step_converged(self):
        for kind, kw in ((OFDM, {}), (FBMC, {}),
                         (UFOFDM, dict(alpha_db=40.0, filter_len=73))):
            spec = WaveformSpec(kind=kind, subband_width_hz=DELTA_F, **kw)
            base = psd_profile(spec)
            fine = psd_profile(spec, grid_step_hz=base.grid_step_hz / 2)
            for dist in (DELTA_F, 3 * DELTA_F, 10 * DELTA_F):
                o1 = interference_factor(base, 1.0, dist, DELTA_F)
                o2 = interference_factor(fine, 1.0, dist, DELTA_F)
                assert o1 == pytest.approx(o2, rel=1e-5)

    def test_negative_width_rejected(self, ofdm_psd):
        with pytest.raises(ValueError):
            interference_factor(ofdm_psd, 1.0, DELTA_F, -DELTA_F)

    def test_beyond_support_is_zero(self, ofdm_psd):
        assert interference_factor(
            ofdm_psd, 1.0, ofdm_psd.support_hz + 2 * DELTA_F, DELTA_F) == 0.0


class TestInterferenceMatrix:
    def test_single_pair_equals_scalar(self, ofdm_psd):
        scn = scenario_with([(1, 4)], n_total=5, i_th=1e-4)
        ch = unit_channels(scn)
        table = interference_matrix(scn, ch, ofdm_psd)
        assert table.omega.shape == (1, 1)
        direct = interference_factor(ofdm_psd, 1.0,
                                     spectral_distance(0, 0, scn), 4 * DELTA_F)
        assert table.omega[0, 0] == pytest.approx(direct, rel=1e-12)

    def test_alpha_60_below_40_everywhere(self, uf40_psd, uf60_psd):
        scn = generate_spectrum(2, 16, 2, (8, 10), delta_f_hz=DELTA_F)
        ch = unit_channels(scn)
        om40 = interference_matrix(scn, ch, uf40_psd).omega
        om60 = interference_matrix(scn, ch, uf60_psd).omega
        assert np.all(om60 < om40)

    def test_alpha_monotone_in_ten_db_steps(self):
        scn = generate_spectrum(7, 16, 2, (8, 10), delta_f_hz=DELTA_F)
        ch = unit_channels(scn)
        tables = []
        for alpha in (40.0, 50.0, 60.0, 70.0, 80.0):
            spec = WaveformSpec(kind=UFOFDM, subband_width_hz=DELTA_F,
                                alpha_db=alpha, filter_len=73)
            tables.append(interference_matrix(scn, ch, psd_profile(spec)).omega)
        for lo, hi in zip(tables, tables[1:]):
            assert np.all(hi <= lo)

    def test_matches_elementwise_recompute(self, uf40_psd):
        scn = generate_spectrum(4, 16, 2, (8, 10), delta_f_hz=DELTA_F)
        ch = generate_channels(9, scn, 2)
        table = interference_matrix(scn, ch, uf40_psd)
        for j, n in enumerate(scn.sm_subbands):
            for l in range(scn.k_pu):
                width = scn.pu_bands[l][1] * DELTA_F
                expected = interference_factor(
                    uf40_psd, ch.g_sp[j, l],
                    spectral_distance(n, l, scn), width)
                assert table.omega[j, l] == pytest.approx(expected, rel=1e-12)

    def test_zero_cross_gain_gives_zero_entry(self, ofdm_psd):
        scn = scenario_with([(2, 3)], n_total=6)
        ch = unit_channels(scn)
        g_sp = ch.g_sp.copy()
        g_sp[1, 0] = 0.0
        ch = ChannelSet(g_ss=ch.g_ss, g_sp=g_sp, sm_subbands=scn.sm_subbands)
        table = interference_matrix(scn, ch, ofdm_psd)
        assert table.omega[1, 0] == 0.0

    def test_waveform_ordering_one_subband_away(self, ofdm_psd, fbmc_psd, uf40_psd):
        # hole 0 and PU band at subband 1: centers one subband width apart
        scn = scenario_with([(1, 1)], n_total=40, i_th=1e-4)
        ch = unit_channels(scn)
        row = scn.sm_subbands.index(0)
        values = {}
        for name, psd in (("ofdm", ofdm_psd), ("fbmc", fbmc_psd), ("uf40", uf40_psd)):
            values[name] = interference_matrix(scn, ch, psd).omega[row, 0]
        assert values["fbmc"] < values["uf40"] < values["ofdm"]

    def test_dimension_mismatch_rejected(self, ofdm_psd):
        scn = scenario_with([(1, 4)], n_total=6)
        wrong_pu_count = ChannelSet(g_ss=np.ones((1, 2)), g_sp=np.ones((2, 2)),
                                    sm_subbands=(0, 5))
        with pytest.raises(ValueError):
            interference_matrix(scn, wrong_pu_count, ofdm_psd)
        wrong_layout = ChannelSet(g_ss=np.ones((1, 2)), g_sp=np.ones((2, 1)),
                                  sm_subbands=(0, 4))
        with pytest.raises(ValueError):
            interference_matrix(scn, wrong_layout, ofdm_psd)


class TestTotalInterference:
    @pytest.fixture()
    def table(self):
        rng = np.random.default_rng(1)
        return InterferenceFactors(omega=rng.exponential(1.0, (5, 2)) * 1e-3,
                                   subbands=(0, 1, 2, 3, 4),
                                   quadrature_points=1025)

    def allocation(self, powers):
        alloc = Allocation(assign=np.zeros(5, dtype=int),
                           subbands=(0, 1, 2, 3, 4), k_sm=1)
        alloc.powers = np.asarray(powers, dtype=float)
        return alloc

    def test_zero_power(self, table):
        assert total_interference(self.allocation(np.zeros(5)), table, 0) == 0.0

    def test_single_active_subband(self, table):
        p = np.zeros(5)
        p[2] = 0.7
        expected = 0.7 * table.omega[2, 1]
        assert total_interference(self.allocation(p), table, 1) == pytest.approx(expected)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10_000), scale=st.floats(0.1, 10.0))
    def test_linearity(self, table, seed, scale):
        rng = np.random.default_rng(seed)
        p = rng.exponential(0.1, 5)
        base = total_interference(self.allocation(p), table, 0)
        scaled = total_interference(self.allocation(scale * p), table, 0)
        assert scaled == pytest.approx(scale * base, rel=1e-12)

    def test_powers_required(self, table):
        alloc = Allocation(assign=np.zeros(5, dtype=int),
                           subbands=(0, 1, 2, 3, 4), k_sm=1)
        with pytest.raises(ValueError):
            total_interference(alloc, table, 0)
