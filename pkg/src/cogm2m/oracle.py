"""Exhaustive joint optimizer, usable only at desk scale.

Enumerates every one of the ``k_sm ** n_sm`` subband assignments, solves
the optimal power distribution for each via the water-filling dual (kept
independent of the cone-program code path it is used to judge), and
returns the best.  Ground truth for near-optimality checks of the
two-phase method.
"""

from __future__ import annotations

from dataclasses import dataclass
import itertools

import numpy as np

from .allocator import Allocation
from .interference import InterferenceFactors, interference_matrix
from .power import _waterfill_batch, capacity
from .scenario import ChannelSet, Scenario
from .waveform import OFDM, WaveformSpec, psd_profile

__all__ = ["OracleResult", "exhaustive_best", "ENUMERATION_CAP"]

ENUMERATION_CAP = 10 ** 6
_CHUNK = 2048


@dataclass(frozen=True)
class OracleResult:
    best_allocation: Allocation
    best_capacity: float
    assignments_enumerated: int


def exhaustive_best(channels: ChannelSet, scenario: Scenario, k_sm: int,
                    cap: int = ENUMERATION_CAP,
                    omega: InterferenceFactors | None = None) -> OracleResult:
    """Best capacity over every assignment; ties go to the first found.

    ``omega`` defaults to the OFDM leakage table for the scenario (pass
    the table of the waveform under study to compare like with like).
    Raises ``ValueError`` when ``k_sm ** n_sm`` exceeds ``cap``.
    """
    n_sm = scenario.n_sm
    if k_sm < 1:
        raise ValueError("k_sm must be >= 1")
    total = k_sm ** n_sm
    if total > cap:
        raise ValueError(f"{k_sm}^{n_sm} = {total} assignments exceed cap {cap}")
    if omega is None:
        psd = psd_profile(WaveformSpec(kind=OFDM,
                                       subband_width_hz=scenario.delta_f_hz))
        omega = interference_matrix(scenario, channels, psd)

    a = np.vstack([np.ones(n_sm), omega.omega.T])
    b = np.concatenate([[scenario.p_max_watts],
                        np.full(scenario.k_pu, scenario.i_th_watts)])
    cols = np.arange(n_sm)

    best_cap = -np.inf
    best_assign = None
    assignments = itertools.product(range(k_sm), repeat=n_sm)
    while True:
        chunk = np.array(list(itertools.islice(assignments, _CHUNK)), dtype=int)
        if chunk.size == 0:
            break
        gains = channels.g_ss[chunk, cols] / scenario.noise_variance
        powers = _waterfill_batch(gains, a, b, tol=1e-8)
        caps = scenario.delta_f_hz * np.log2(1.0 + powers * gains).sum(axis=1)
        i = int(np.argmax(caps))
        if caps[i] > best_cap:
            best_cap = float(caps[i])
            best_assign = chunk[i].copy()

    allocation = Allocation(assign=best_assign, subbands=scenario.sm_subbands,
                            k_sm=k_sm)
    gains = channels.g_ss[best_assign, cols] / scenario.noise_variance
    allocation.powers = _waterfill_batch(gains[None, :], a, b, tol=1e-8)[0]
    best_cap = capacity(allocation.powers, gains, scenario.delta_f_hz)
    return OracleResult(best_allocation=allocation, best_capacity=best_cap,
                        assignments_enumerated=total)
