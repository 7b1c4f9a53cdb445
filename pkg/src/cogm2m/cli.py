"""Command-line front end.

Subcommands: ``psd``, ``omega``, ``scenario``, ``allocate``, ``power``,
``oracle-compare`` and ``sweep``.  Everything is seeded, so repeated runs
with the same arguments produce identical output files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import allocator, harness, interference, oracle, power, scenario, waveform


def _waveform_spec(args, delta_f: float) -> waveform.WaveformSpec:
    kind = args.waveform
    if kind == waveform.UFOFDM:
        return waveform.WaveformSpec(kind=kind, subband_width_hz=delta_f,
                                     alpha_db=args.alpha,
                                     filter_len=args.filter_len)
    return waveform.WaveformSpec(kind=kind, subband_width_hz=delta_f)


def _add_waveform_args(parser):
    parser.add_argument("--waveform", required=True,
                        choices=[waveform.OFDM, waveform.FBMC, waveform.UFOFDM])
    parser.add_argument("--alpha", type=float, default=40.0,
                        help="sidelobe attenuation in dB (ufofdm)")
    parser.add_argument("--filter-len", type=int, default=73,
                        help="odd filter length (ufofdm)")


def cmd_psd(args) -> int:
    spec = _waveform_spec(args, args.delta_f)
    profile = waveform.psd_profile(spec)
    lines = ["offset_hz,density_per_hz"]
    lines += [f"{f:.10g},{d:.10g}" for f, d in
              zip(profile.offsets_hz, profile.density_per_hz)]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(profile.offsets_hz)} samples to {args.out}")
    return 0


def cmd_scenario(args) -> int:
    scn = scenario.generate_spectrum(
        args.seed, args.n_total, args.k_pu,
        (args.pu_min, args.pu_max), delta_f_hz=args.delta_f,
        i_th_watts=scenario.dbw_to_watts(args.i_th_dbw),
        p_max_watts=args.p_max, noise_variance=args.noise_var)
    scenario.save_scenario(scn, args.out)
    print(f"wrote scenario with {scn.k_pu} PU bands and {scn.n_sm} holes "
          f"to {args.out}")
    return 0


def cmd_omega(args) -> int:
    scn = scenario.load_scenario(args.scenario)
    channels = scenario.generate_channels(args.channels_seed, scn, args.k_sm)
    spec = _waveform_spec(args, scn.delta_f_hz)
    table = interference.interference_matrix(
        scn, channels, waveform.psd_profile(spec))
    lines = ["subband,pu,omega"]
    for j, n in enumerate(table.subbands):
        for l in range(table.omega.shape[1]):
            lines.append(f"{n},{l},{table.omega[j, l]:.10g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} interference factors to {args.out}")
    return 0


def cmd_allocate(args) -> int:
    scn = scenario.load_scenario(args.scenario)
    channels = scenario.generate_channels(args.channels_seed, scn, args.k_sm)
    allocation = allocator.allocate_subbands(channels, scn, args.k_sm)
    lines = ["subband,sm"]
    lines += [f"{n},{k}" for n, k in zip(allocation.subbands, allocation.assign)]
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"wrote assignment of {len(allocation.subbands)} subbands to {args.out}")
    return 0


def _read_assignment(path, scn) -> np.ndarray:
    rows = {}
    for line in Path(path).read_text().splitlines()[1:]:
        if not line.strip():
            continue
        n, _, k = line.partition(",")
        rows[int(n)] = int(k)
    try:
        return np.array([rows[n] for n in scn.sm_subbands])
    except KeyError as missing:
        raise ValueError(f"assignment is missing subband {missing}") from None


def cmd_power(args) -> int:
    scn = scenario.load_scenario(args.scenario)
    channels = scenario.generate_channels(args.channels_seed, scn, args.k_sm)
    assign = _read_assignment(args.assignment, scn)
    allocation = allocator.Allocation(assign=assign, subbands=scn.sm_subbands,
                                      k_sm=int(assign.max()) + 1)
    gains = allocator.aggregate_gains(allocation, channels, scn)
    spec = _waveform_spec(args, scn.delta_f_hz)
    table = interference.interference_matrix(
        scn, channels, waveform.psd_profile(spec))
    problem = power.PowerProblem(g=gains, omega=table.omega,
                                 p_max=scn.p_max_watts, i_th=scn.i_th_watts,
                                 delta_f_hz=scn.delta_f_hz)
    if args.method == "socp":
        powers = power.solve_power(power.build_socp(problem))
    else:
        powers = power.dual_waterfilling(problem)
    allocator.fill_allocation_results(allocation, gains, powers, scn.delta_f_hz)
    lines = ["subband,power_w,rate_bps"]
    for j, n in enumerate(allocation.subbands):
        rate = scn.delta_f_hz * np.log2(1.0 + powers[j] * gains[j])
        lines.append(f"{n},{powers[j]:.10g},{rate:.10g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    total = power.capacity(powers, gains, scn.delta_f_hz)
    print(f"total capacity {total:.6g} bits/s, power used {powers.sum():.6g} W")
    return 0


def cmd_oracle_compare(args) -> int:
    lines = ["oracle_bps,two_phase_bps,gap_percent"]
    spec = waveform.WaveformSpec(kind=args.waveform,
                                 subband_width_hz=args.delta_f) \
        if args.waveform != waveform.UFOFDM else _waveform_spec(args, args.delta_f)
    psd = waveform.psd_profile(spec)
    gaps = []
    for trial in range(args.trials):
        n_total = 2 * args.n_sm
        scn = scenario.generate_spectrum(
            (args.seed, trial, 0), n_total, args.k_pu,
            (n_total - args.n_sm, n_total - args.n_sm),
            delta_f_hz=args.delta_f,
            i_th_watts=scenario.dbw_to_watts(args.i_th_dbw),
            p_max_watts=args.p_max, noise_variance=args.noise_var)
        channels = scenario.generate_channels((args.seed, trial, 1), scn, args.k_sm)
        table = interference.interference_matrix(scn, channels, psd)
        best = oracle.exhaustive_best(channels, scn, args.k_sm, omega=table)
        allocation = allocator.allocate_subbands(channels, scn, args.k_sm)
        gains = allocator.aggregate_gains(allocation, channels, scn)
        problem = power.PowerProblem(g=gains, omega=table.omega,
                                     p_max=scn.p_max_watts,
                                     i_th=scn.i_th_watts,
                                     delta_f_hz=scn.delta_f_hz)
        two_phase = power.capacity(power.dual_waterfilling(problem), gains,
                                   scn.delta_f_hz)
        gap = 100.0 * (best.best_capacity - two_phase) / best.best_capacity
        gaps.append(gap)
        lines.append(f"{best.best_capacity:.10g},{two_phase:.10g},{gap:.10g}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    print(f"median gap {np.median(gaps):.3f}% over {args.trials} trials")
    return 0


def cmd_sweep(args) -> int:
    config = harness.load_sweep_config(args.config)
    records = harness.run_sweep(config)
    harness.write_records_csv(records, args.out)
    feasible = all(
        r.feasible(scenario.dbw_to_watts(r.i_th_dbw), config.p_max_watts)
        for r in records)
    print(f"wrote {len(records)} records to {args.out}; "
          f"{'all feasible' if feasible else 'INFEASIBLE RECORDS PRESENT'}")
    return 0 if feasible else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogm2m",
        description="Cognitive M2M downlink resource-allocation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("psd", help="tabulate a single-subband PSD")
    _add_waveform_args(p)
    p.add_argument("--delta-f", type=float, default=312_500.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("scenario", help="generate a random spectrum layout")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--n-total", type=int, default=32)
    p.add_argument("--k-pu", type=int, default=3)
    p.add_argument("--pu-min", type=int, default=16)
    p.add_argument("--pu-max", type=int, default=20)
    p.add_argument("--delta-f", type=float, default=312_500.0)
    p.add_argument("--i-th-dbw", type=float, default=-30.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--noise-var", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("omega", help="tabulate interference factors")
    p.add_argument("--scenario", required=True)
    _add_waveform_args(p)
    p.add_argument("--channels-seed", type=int, default=0)
    p.add_argument("--k-sm", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_omega)

    p = sub.add_parser("allocate", help="greedy fair subband assignment")
    p.add_argument("--scenario", required=True)
    p.add_argument("--channels-seed", type=int, default=0)
    p.add_argument("--k-sm", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("power", help="optimal powers for a fixed assignment")
    p.add_argument("--scenario", required=True)
    p.add_argument("--assignment", required=True)
    p.add_argument("--method", choices=["socp", "wf"], default="socp")
    _add_waveform_args(p)
    p.add_argument("--channels-seed", type=int, default=0)
    p.add_argument("--k-sm", type=int, default=4)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("oracle-compare",
                       help="exhaustive optimum vs the two-phase method")
    p.add_argument("--n-sm", type=int, required=True)
    p.add_argument("--k-sm", type=int, required=True)
    p.add_argument("--k-pu", type=int, default=2)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--waveform", default=waveform.OFDM,
                   choices=[waveform.OFDM, waveform.FBMC, waveform.UFOFDM])
    p.add_argument("--alpha", type=float, default=40.0)
    p.add_argument("--filter-len", type=int, default=73)
    p.add_argument("--delta-f", type=float, default=312_500.0)
    p.add_argument("--i-th-dbw", type=float, default=-30.0)
    p.add_argument("--p-max", type=float, default=1.0)
    p.add_argument("--noise-var", type=float, default=1e-6)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("sweep", help="Monte-Carlo experiment sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
