"""Cognitive M2M downlink throughput simulator.

Library and CLI for a secondary machine-to-machine downlink sharing
spectrum holes with licensed primary users: subband PSD models (OFDM,
FBMC, UF-OFDM), interference factors, fairness-aware greedy subband
assignment, geometric-mean SOCP power allocation with a water-filling
certificate, an exhaustive desk-scale oracle, and a Monte-Carlo sweep
harness.
"""

from .allocator import Allocation, allocate_subbands, aggregate_gains
from .harness import SweepConfig, SweepRecord, run_sweep
from .interference import (InterferenceFactors, interference_factor,
                           interference_matrix, spectral_distance,
                           total_interference)
from .oracle import OracleResult, exhaustive_best
from .power import (ConeProgram, PowerProblem, SolverError, build_cone_tree,
                    build_socp, capacity, dual_waterfilling, solve_certified,
                    solve_power)
from .scenario import (ChannelSet, Scenario, generate_channels,
                       generate_spectrum, load_scenario, save_scenario)
from .waveform import (FBMC, OFDM, UFOFDM, PsdProfile, WaveformSpec,
                       chebyshev_poly, dolph_chebyshev_coeffs,
                       peak_sidelobe_db, psd_profile)

__version__ = "0.1.0"

__all__ = [
    "Allocation", "allocate_subbands", "aggregate_gains",
    "SweepConfig", "SweepRecord", "run_sweep",
    "InterferenceFactors", "interference_factor", "interference_matrix",
    "spectral_distance", "total_interference",
    "OracleResult", "exhaustive_best",
    "ConeProgram", "PowerProblem", "SolverError", "build_cone_tree",
    "build_socp", "capacity", "dual_waterfilling", "solve_certified",
    "solve_power",
    "ChannelSet", "Scenario", "generate_channels", "generate_spectrum",
    "load_scenario", "save_scenario",
    "FBMC", "OFDM", "UFOFDM", "PsdProfile", "WaveformSpec",
    "chebyshev_poly", "dolph_chebyshev_coeffs", "peak_sidelobe_db",
    "psd_profile",
]
