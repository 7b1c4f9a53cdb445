"""Phase 2: optimal power distribution for a fixed assignment.

The rate objective ``sum_n log2(1 + g_n P_n)`` is maximized under a
total power budget and one linear interference cap per PU.  Two
independent routes solve it:

* :func:`build_socp` + :func:`solve_power` recast the objective as the
  geometric mean of the rate terms ``z_n = 1 + g_n P_n`` (same argmax),
  encoded by a binary tree of hyperbolic constraints ``u^2 <= a*b``
  (each one a rotated second-order cone) and handed to a conic
  interior-point solver.

* :func:`dual_waterfilling` solves the same problem through its KKT
  conditions: ``P_n = max(0, 1 / (lam + sum_l mu_l W[n,l]) - 1/g_n)``
  with the multipliers found on the dual (projected subgradient with
  coordinate-wise bisection refinement, run until complementary
  slackness holds).

The second route certifies the first; :func:`solve_certified` runs both
and raises when they disagree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "PowerProblem",
    "ConeProgram",
    "HyperbolicConstraint",
    "LinearConstraint",
    "SolverError",
    "ROOT",
    "build_cone_tree",
    "build_socp",
    "solve_power",
    "dual_waterfilling",
    "capacity",
    "solve_certified",
    "constraint_matrix",
]

#: Node id of the tree root (the objective variable) in ``build_cone_tree``.
ROOT = -1

FEASIBILITY_TOL = 1e-8
GAP_TOL = 1e-6
CERTIFY_RTOL = 1e-4


class SolverError(RuntimeError):
    """A solver failed to converge or certification failed; never a silent
    wrong answer."""


@dataclass(frozen=True)
class PowerProblem:
    """Inputs of the power-only problem.

    ``g`` holds the noise-normalized effective gains per hole subband and
    ``omega`` the (n_sm, k_pu) leakage table; ``i_th`` is the common
    interference cap in watts.
    """

    g: np.ndarray = field(repr=False)
    omega: np.ndarray = field(repr=False)
    p_max: float
    i_th: float
    delta_f_hz: float

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        omega = np.asarray(self.omega, dtype=float)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "omega", omega)
        if g.ndim != 1 or np.any(g < 0):
            raise ValueError("g must be a 1-D vector of non-negative gains")
        if omega.ndim != 2 or omega.shape[0] != g.size:
            raise ValueError("omega must be (len(g), k_pu)")
        if self.p_max <= 0 or self.i_th <= 0 or self.delta_f_hz <= 0:
            raise ValueError("p_max, i_th and delta_f_hz must be > 0")


class HyperbolicConstraint(NamedTuple):
    """``var[out]**2 <= var[left] * var[right]`` with all three >= 0."""
    out: int
    left: int
    right: int


class LinearConstraint(NamedTuple):
    """``coeffs @ vars (<=|==) bound``."""
    coeffs: np.ndarray
    relation: str
    bound: float


@dataclass(frozen=True)
class ConeProgram:
    """Explicit conic form of one power problem.

    Variable layout: ``P_0 .. P_{n-1}``, then one rate term ``z_j`` per
    subband with positive gain, then the tree auxiliaries, then the
    objective ``t`` (last).  All variables are constrained non-negative;
    ``maximize t``.
    """

    var_names: tuple
    linear_constraints: tuple
    hyperbolic_constraints: tuple
    objective_index: int
    p_indices: tuple
    problem: PowerProblem

    @property
    def n_vars(self) -> int:
        return len(self.var_names)


def build_cone_tree(n_leaves: int):
    """Hyperbolic-constraint tree bounding ``t`` by a geometric mean.

    Returns ``(constraints, n_aux)`` where node ids are: ``0 ..
    n_leaves-1`` for the leaves, ``n_leaves .. n_leaves+n_aux-1`` for
    auxiliaries, and :data:`ROOT` for the root ``t``.  The leaf count is
    padded to the next power of two ``2**k`` with copies of the root
    itself, so ``t**n_leaves <= prod(leaves)`` at any feasible point and
    the padded tree has exactly ``2**k - 1`` constraints.  One leaf needs
    no cone at all (``t <= leaf`` is linear).
    """
    if n_leaves < 1:
        raise ValueError("n_leaves must be >= 1")
    if n_leaves == 1:
        return [], 0
    k = 1
    while 2 ** k < n_leaves:
        k += 1
    level = list(range(n_leaves)) + [ROOT] * (2 ** k - n_leaves)
    constraints = []
    n_aux = 0
    while len(level) > 2:
        next_level = []
        for i in range(0, len(level), 2):
            aux = n_leaves + n_aux
            n_aux += 1
            constraints.append(HyperbolicConstraint(aux, level[i], level[i + 1]))
            next_level.append(aux)
        level = next_level
    constraints.append(HyperbolicConstraint(ROOT, level[0], level[1]))
    return constraints, n_aux


def build_socp(problem: PowerProblem) -> ConeProgram:
    """Assemble the explicit cone program for one power problem.

    Linear rows: one rate-term definition ``z_j - g_j P_j == 1`` per
    subband with positive gain, the power budget, and one interference
    cap per PU.  Subbands with zero gain keep their power variable but
    get no rate term (their term is the constant 1, which would make a
    degenerate cone).
    """
    g = problem.g
    omega = problem.omega
    n = g.size
    active = np.flatnonzero(g > 0)
    m = active.size

    names = [f"p_{i}" for i in range(n)]
    z_index = {}
    for j, i in enumerate(active):
        z_index[i] = n + j
        names.append(f"z_{i}")
    tree, n_aux = build_cone_tree(m) if m else ([], 0)
    aux_base = n + m
    names += [f"u_{j}" for j in range(n_aux)]
    t_index = len(names)
    names.append("t")
    n_vars = len(names)

    linear = []
    for i in active:
        row = np.zeros(n_vars)
        row[z_index[i]] = 1.0
        row[i] = -g[i]
        linear.append(LinearConstraint(row, "==", 1.0))
    budget = np.zeros(n_vars)
    budget[:n] = 1.0
    linear.append(LinearConstraint(budget, "<=", problem.p_max))
    for l in range(omega.shape[1]):
        row = np.zeros(n_vars)
        row[:n] = omega[:, l]
        linear.append(LinearConstraint(row, "<=", problem.i_th))

    def node_var(node: int) -> int:
        if node == ROOT:
            return t_index
        if node < m:
            return z_index[active[node]]
        return aux_base + (node - m)

    cones = tuple(HyperbolicConstraint(node_var(c.out), node_var(c.left),
                                       node_var(c.right)) for c in tree)
    if m == 1:
        row = np.zeros(n_vars)
        row[t_index] = 1.0
        row[z_index[active[0]]] = -1.0
        linear.append(LinearConstraint(row, "<=", 0.0))
    elif m == 0:
        row = np.zeros(n_vars)
        row[t_index] = 1.0
        linear.append(LinearConstraint(row, "<=", 1.0))

    return ConeProgram(var_names=tuple(names), linear_constraints=tuple(linear),
                       hyperbolic_constraints=cones, objective_index=t_index,
                       p_indices=tuple(range(n)), problem=problem)


def constraint_matrix(problem: PowerProblem):
    """Stacked linear caps on P: budget row then one row per PU."""
    a = np.vstack([np.ones(problem.g.size), problem.omega.T])
    b = np.concatenate([[problem.p_max],
                        np.full(problem.omega.shape[1], problem.i_th)])
    return a, b


def _project_feasible(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Scale a nearly feasible power vector onto the feasible set."""
    p = np.maximum(p, 0.0)
    used = a @ p
    scale = 1.0
    for u, cap in zip(used, b):
        if u > cap:
            scale = min(scale, cap / u)
    return p * scale


_SOLVER_ORDER = ("CLARABEL", "ECOS", "SCS")


def solve_power(program: ConeProgram, tol: float = FEASIBILITY_TOL) -> np.ndarray:
    """Solve the cone program with a conic interior-point solver.

    The explicit hyperbolic constraints translate one-to-one into
    second-order cones ``||(2u, a-b)|| <= a+b``.  The returned powers are
    projected onto the feasible set so every cap is met to ``tol``
    exactly; a non-optimal solver status raises :class:`SolverError`.
    """
    import cvxpy as cp

    x = cp.Variable(program.n_vars, nonneg=True)
    constraints = []
    for row in program.linear_constraints:
        expr = row.coeffs @ x
        constraints.append(expr == row.bound if row.relation == "=="
                           else expr <= row.bound)
    for cone in program.hyperbolic_constraints:
        constraints.append(cp.SOC(x[cone.left] + x[cone.right],
                                  cp.vstack([2 * x[cone.out],
                                             x[cone.left] - x[cone.right]])))
    objective = cp.Maximize(x[program.objective_index])
    cvx_problem = cp.Problem(objective, constraints)

    status = None
    for solver in _SOLVER_ORDER:
        if solver not in cp.installed_solvers():
            continue
        try:
            cvx_problem.solve(solver=solver)
        except cp.error.SolverError:
            continue
        status = cvx_problem.status
        if status in ("optimal", "optimal_inaccurate"):
            break
    if status not in ("optimal", "optimal_inaccurate"):
        raise SolverError(f"conic solver failed with status {status!r}")

    p = np.asarray(x.value)[list(program.p_indices)]
    a, b = constraint_matrix(program.problem)
    p = _project_feasible(p, a, b)
    if np.any(a @ p > b * (1 + tol) + tol):
        raise SolverError("projected solution still violates a constraint")
    return p


def _waterfill_powers(mult: np.ndarray, a: np.ndarray, g: np.ndarray,
                      p_cap: float) -> np.ndarray:
    """Closed-form inner maximizer P(multipliers), boxed to [0, p_cap].

    Supports a batch: ``mult`` is (..., n_cons) and ``g`` (..., n); the
    box cap is redundant for the primal (no feasible P exceeds the
    budget) but keeps the dual finite while multipliers are still zero.
    """
    weight = mult @ a
    positive_gain = g > 0
    level = 1.0 / np.maximum(weight, 1e-300)
    floor = 1.0 / np.where(positive_gain, g, 1.0)
    p = np.clip(level - floor, 0.0, p_cap)
    return np.where(positive_gain, p, 0.0)


def _dual_value(mult, a, b, g, p_cap):
    p = _waterfill_powers(mult, a, g, p_cap)
    util = np.log1p(g * p).sum(axis=-1)
    return util + ((b - (p @ a.T)) * mult).sum(axis=-1)


def _project_rows(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise feasibility scaling for a batch of power vectors."""
    used = p @ a.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(used > b, b / np.maximum(used, 1e-300), 1.0)
    return p * np.minimum(ratios.min(axis=-1), 1.0)[..., None]


def _duality_gap(mult, a, b, g, p_cap):
    """Gap between the dual value at ``mult`` and the projected primal."""
    p_proj = _project_rows(_waterfill_powers(mult, a, g, p_cap), a, b)
    primal = np.log1p(g * p_proj).sum(axis=-1)
    return _dual_value(mult, a, b, g, p_cap) - primal, primal


def _waterfill_multipliers(g: np.ndarray, a: np.ndarray, b: np.ndarray,
                           tol: float, subgrad_iters: int = 20,
                           sweeps: int = 100, bisect_iters: int = 60):
    """Dual multipliers for a batch of water-filling problems.

    ``g`` is (batch, n); the constraint data ``a`` (n_cons, n), ``b``
    (n_cons,) are shared.  A short projected-subgradient phase localizes
    the multipliers; cyclic coordinate bisection then zeroes each
    coordinate's slack (the coordinate gradient ``b_i - a_i @ P`` is
    monotone in that multiplier), with a momentum extrapolation after
    every sweep to break the zigzag that plain coordinate descent
    develops on strongly coupled constraints.  Stops once every batch
    row's duality gap against its projected primal is within ``tol``.
    """
    batch, _ = g.shape
    n_cons = len(b)
    p_cap = b[0]
    mult = np.zeros((batch, n_cons))
    mult[:, 0] = g.shape[1] / p_cap

    def slack(mult):
        p = _waterfill_powers(mult, a, g, p_cap)
        return b - p @ a.T, p

    step = 1.0 / np.maximum(b, 1e-300)
    for it in range(subgrad_iters):
        s, _ = slack(mult)
        mult = np.maximum(mult - (0.5 / (1 + it)) * step * s, 0.0)

    prev = mult.copy()
    for sweep in range(sweeps):
        for i in range(n_cons):
            lo = np.zeros(batch)
            hi = np.maximum(2.0 * mult[:, i], 1.0)
            probe = mult.copy()
            probe[:, i] = 0.0
            s0, _ = slack(probe)
            done = s0[:, i] >= 0.0      # slack at zero: multiplier stays 0
            for _ in range(40):         # bracket the sign change
                probe[:, i] = np.where(done, 0.0, hi)
                s, _ = slack(probe)
                grown = (s[:, i] < 0.0) & ~done
                if not grown.any():
                    break
                hi = np.where(grown, hi * 4.0, hi)
            for _ in range(bisect_iters):
                mid = 0.5 * (lo + hi)
                probe[:, i] = np.where(done, 0.0, mid)
                s, _ = slack(probe)
                neg = s[:, i] < 0.0
                lo = np.where(neg & ~done, mid, lo)
                hi = np.where(neg | done, hi, mid)
            mult[:, i] = np.where(done, 0.0, 0.5 * (lo + hi))
        for gamma in (1.0, 3.0):        # momentum along the sweep direction
            trial = np.maximum(mult + gamma * (mult - prev), 0.0)
            better = _dual_value(trial, a, b, g, p_cap) < \
                _dual_value(mult, a, b, g, p_cap)
            mult = np.where(better[:, None], trial, mult)
        prev = mult.copy()
        gap, primal = _duality_gap(mult, a, b, g, p_cap)
        if np.all(gap <= 0.5 * tol * (1.0 + np.abs(primal))):
            break
    return mult


def _waterfill_batch(g: np.ndarray, a: np.ndarray, b: np.ndarray,
                     tol: float) -> np.ndarray:
    """Feasible near-optimal powers for a batch of gain vectors."""
    g = np.asarray(g, dtype=float)
    if np.all(g <= 0):
        return np.zeros_like(g)
    mult = _waterfill_multipliers(g, a, b, tol)
    p = _waterfill_powers(mult, a, g, b[0])
    used = p @ a.T
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(used > b, b / np.maximum(used, 1e-300), 1.0)
    return p * np.minimum(ratios.min(axis=-1), 1.0)[..., None]


def dual_waterfilling(problem: PowerProblem, tol: float = GAP_TOL) -> np.ndarray:
    """KKT route: water-filling against budget and interference caps.

    Returns a feasible power vector whose duality gap against the dual
    bound is at most ``tol`` relative; raises :class:`SolverError` when
    the multiplier search cannot close the gap.
    """
    if np.all(problem.g <= 0):
        return np.zeros_like(problem.g)
    a, b = constraint_matrix(problem)
    g = problem.g[None, :]
    mult = _waterfill_multipliers(g, a, b, tol)
    raw = _waterfill_powers(mult, a, g, b[0])[0]
    p = _project_feasible(raw, a, b)
    primal = np.log1p(problem.g * p).sum()
    dual = float(_dual_value(mult, a, b, g, b[0])[0])
    if dual - primal > tol * (1.0 + abs(primal)) + 1e-9:
        raise SolverError(
            f"water-filling gap {dual - primal:.3e} above tolerance")
    return p


def capacity(p: np.ndarray, g: np.ndarray, delta_f_hz: float) -> float:
    """Shannon sum rate ``delta_f * sum log2(1 + P g)`` in bits/s."""
    p = np.asarray(p, dtype=float)
    g = np.asarray(g, dtype=float)
    if p.shape != g.shape:
        raise ValueError("power and gain vectors must have equal length")
    if np.any(p < 0) or np.any(g < 0):
        raise ValueError("powers and gains must be >= 0")
    return float(delta_f_hz * np.log2(1.0 + p * g).sum())


def solve_certified(problem: PowerProblem, rtol: float = CERTIFY_RTOL):
    """Solve via the cone program and certify against the KKT route.

    Returns ``(P, capacity_bps)`` from the conic solution; raises
    :class:`SolverError` when the two independent routes disagree by
    more than ``rtol`` relative capacity.
    """
    p_socp = solve_power(build_socp(problem))
    p_wf = dual_waterfilling(problem)
    c_socp = capacity(p_socp, problem.g, problem.delta_f_hz)
    c_wf = capacity(p_wf, problem.g, problem.delta_f_hz)
    scale = max(abs(c_socp), abs(c_wf), 1e-300)
    if abs(c_socp - c_wf) > rtol * scale:
        raise SolverError(
            f"certification failed: SOCP {c_socp:.6e} vs water-filling "
            f"{c_wf:.6e} bits/s")
    return p_socp, c_socp
