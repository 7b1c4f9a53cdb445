import filecmp

import numpy as np
import pytest

from cogm2m.harness import (CSV_HEADER, SweepConfig, default_waveforms,
                            load_sweep_config, power_loss_percent,
                            pu_rate_loss_percent, rate_gain_percent, run_sweep,
                            write_records_csv)
from cogm2m.scenario import dbw_to_watts, generate_spectrum
from cogm2m.waveform import FBMC, OFDM, WaveformSpec

DELTA_F = 312_500.0


def mini_config(**kw):
    defaults = dict(waveforms=(WaveformSpec(kind=OFDM, subband_width_hz=DELTA_F),),
                    i_th_dbw_grid=(-40.0,), trials=1, base_seed=3,
                    n_total=16, pu_total_range=(8, 10), k_pu=2, k_sm=2)
    defaults.update(kw)
    return SweepConfig(**defaults)


class TestMetrics:
    def test_power_loss_endpoints(self):
        assert power_loss_percent(1.0, 1.0) == 0.0
        assert power_loss_percent(0.0, 1.0) == 100.0
        assert power_loss_percent(0.25, 1.0) == pytest.approx(75.0)

    def test_power_loss_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            power_loss_percent(1.1, 1.0)
        with pytest.raises(ValueError):
            power_loss_percent(-0.1, 1.0)

    def test_rate_gain(self):
        assert rate_gain_percent(2.0, 2.0) == 0.0
        assert rate_gain_percent(4.0, 2.0) == pytest.approx(100.0)
        with pytest.raises(ValueError):
            rate_gain_percent(1.0, 0.0)

    def test_pu_rate_loss_limits(self):
        scn = generate_spectrum(0, 16, 2, (8, 10), delta_f_hz=DELTA_F)
        zero = pu_rate_loss_percent(np.zeros(2), scn, 20.0)
        assert zero == pytest.approx(0.0)
        huge = pu_rate_loss_percent(np.full(2, 1e9), scn, 20.0)
        assert huge == pytest.approx(100.0, abs=0.5)

    def test_pu_rate_loss_strictly_increasing(self):
        scn = generate_spectrum(0, 16, 2, (8, 10), delta_f_hz=DELTA_F)
        grid = [pu_rate_loss_percent(np.full(2, i), scn, 20.0)
                for i in np.logspace(-8, -2, 13)]
        assert all(b > a for a, b in zip(grid, grid[1:]))


class TestRunSweep:
    def test_single_record(self):
        records = run_sweep(mini_config())
        assert len(records) == 1
        r = records[0]
        assert r.waveform == "ofdm" and r.trial == 0
        assert r.solver_status == "ok"
        assert r.feasible(dbw_to_watts(r.i_th_dbw), 1.0)

    def test_csv_determinism(self, tmp_path):
        config = mini_config(trials=2, i_th_dbw_grid=(-40.0, -20.0),
                             waveforms=default_waveforms(DELTA_F)[:2])
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records_csv(run_sweep(config), a)
        write_records_csv(run_sweep(config), b)
        assert filecmp.cmp(a, b, shallow=False)
        assert a.read_text().splitlines()[0] == CSV_HEADER

    def test_waveforms_see_paired_channels(self):
        # with a huge threshold nothing binds, so paired channels force
        # identical capacities across waveforms
        config = mini_config(i_th_dbw_grid=(30.0,),
                             waveforms=(WaveformSpec(kind=OFDM, subband_width_hz=DELTA_F),
                                        WaveformSpec(kind=FBMC, subband_width_hz=DELTA_F)))
        records = run_sweep(config)
        caps = [r.capacity_bps for r in records]
        assert caps[0] == pytest.approx(caps[1], rel=1e-6)

    def test_rate_gain_baseline_is_lowest_threshold(self):
        config = mini_config(i_th_dbw_grid=(-50.0, -20.0))
        records = run_sweep(config)
        by_th = {r.i_th_dbw: r for r in records}
        assert by_th[-50.0].rate_gain_pct == 0.0
        assert by_th[-20.0].rate_gain_pct >= 0.0

    def test_record_feasibility_invariants(self):
        config = mini_config(trials=3, i_th_dbw_grid=(-50.0, -30.0),
                             waveforms=default_waveforms(DELTA_F))
        for r in run_sweep(config):
            assert r.power_used_w <= 1.0 * (1 + 1e-9)
            assert max(r.pu_interference_w) <= dbw_to_watts(r.i_th_dbw) * (1 + 1e-6)


def test_load_sweep_config(tmp_path):
    path = tmp_path / "sweep.cfg"
    path.write_text("""
# comment
waveforms=ofdm,ufofdm:40,fbmc
i_th_dbw=-50,-30
trials=4
seed=9
k_sm=3
k_pu=2
n_total=16
pu_range=8:10
p_max_w=2.0
noise_var=1e-5
pu_snr_db=15
delta_f_hz=200000
""")
    config = load_sweep_config(path)
    assert len(config.waveforms) == 3
    assert config.waveforms[1].alpha_db == 40.0
    assert config.i_th_dbw_grid == (-50.0, -30.0)
    assert config.trials == 4 and config.base_seed == 9
    assert config.pu_total_range == (8, 10)
    assert config.p_max_watts == 2.0
    assert config.delta_f_hz == 200000.0
