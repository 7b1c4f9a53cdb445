"""Phase 1: fairness-aware greedy subband assignment.

Every hole subband goes to exactly one SM.  First each SM in index order
takes its best remaining subband; then the SM with the lowest
provisional rate repeatedly takes its best remaining subband until none
are left.  Provisional rates use the uniform bootstrap power
``p_max / n_sm`` on raw |H|^2 gains; they only steer the fairness
ordering, noise enters in the power-allocation phase.

Ties are broken deterministically: lowest subband index for equal gains,
lowest SM index for equal rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import ChannelSet, Scenario

__all__ = ["Allocation", "allocate_subbands", "aggregate_gains",
           "fill_allocation_results"]


@dataclass
class Allocation:
    """Subband-to-SM map plus (once computed) powers and per-SM rates.

    ``assign[j]`` is the SM index owning hole subband ``subbands[j]``.
    ``powers`` and ``per_sm_rate`` start as ``None`` and are filled by
    the power-allocation stage.
    """

    assign: np.ndarray = field(repr=False)
    subbands: tuple
    k_sm: int
    powers: np.ndarray | None = None
    per_sm_rate: np.ndarray | None = None

    def __post_init__(self):
        self.assign = np.asarray(self.assign, dtype=int)
        if self.assign.shape != (len(self.subbands),):
            raise ValueError("assign must map every hole subband")
        if np.any(self.assign < 0) or np.any(self.assign >= self.k_sm):
            raise ValueError("assign refers to an unknown SM")

    def indicator(self) -> np.ndarray:
        """0/1 matrix (k_sm, n_sm) with one 1 per column."""
        c = np.zeros((self.k_sm, len(self.subbands)))
        c[self.assign, np.arange(len(self.subbands))] = 1.0
        return c


def allocate_subbands(channels: ChannelSet, scenario: Scenario, k_sm: int) -> Allocation:
    """Greedy max-gain assignment with min-rate fairness.

    Raises ``ValueError`` when there are more SMs than hole subbands
    (the first round could not give every SM a subband).
    """
    n_sm = scenario.n_sm
    if not 1 <= k_sm <= n_sm:
        raise ValueError(f"need 1 <= k_sm <= {n_sm}, got {k_sm}")
    if channels.g_ss.shape[0] < k_sm:
        raise ValueError("channel table has fewer SMs than k_sm")
    gains = channels.g_ss
    boot_power = scenario.p_max_watts / n_sm

    available = np.ones(n_sm, dtype=bool)
    assign = np.full(n_sm, -1, dtype=int)
    rates = np.zeros(k_sm)

    def take_best(k: int) -> None:
        row = np.where(available, gains[k], -np.inf)
        j = int(np.argmax(row))          # argmax keeps the lowest index on ties
        assign[j] = k
        available[j] = False
        rates[k] += np.log2(1.0 + boot_power * gains[k, j])

    for k in range(k_sm):
        take_best(k)
    while available.any():
        take_best(int(np.argmin(rates)))  # argmin keeps the lowest index on ties

    return Allocation(assign=assign, subbands=scenario.sm_subbands, k_sm=k_sm)


def aggregate_gains(allocation: Allocation, channels: ChannelSet,
                    scenario: Scenario, pu_interference=None) -> np.ndarray:
    """Noise-normalized gain of the owning SM per hole subband.

    ``g[j] = |H|^2 / (noise_variance + J[j])`` where ``J`` is the
    interference power received from the primary system on that subband
    (zero by default: it is assumed negligible).
    """
    n_sm = len(allocation.subbands)
    j_terms = np.zeros(n_sm) if pu_interference is None else np.asarray(pu_interference, dtype=float)
    if j_terms.shape != (n_sm,):
        raise ValueError("pu_interference must have one entry per hole subband")
    own = channels.g_ss[allocation.assign, np.arange(n_sm)]
    return own / (scenario.noise_variance + j_terms)


def fill_allocation_results(allocation: Allocation, gains: np.ndarray,
                            powers: np.ndarray, delta_f_hz: float) -> Allocation:
    """Attach solved powers and the resulting per-SM rates in place."""
    powers = np.asarray(powers, dtype=float)
    if powers.shape != (len(allocation.subbands),):
        raise ValueError("powers must have one entry per hole subband")
    allocation.powers = powers
    rates = delta_f_hz * np.log2(1.0 + powers * np.asarray(gains))
    allocation.per_sm_rate = np.bincount(allocation.assign, weights=rates,
                                         minlength=allocation.k_sm)
    return allocation
