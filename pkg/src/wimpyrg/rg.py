"""Backward/forward RG cycle for the dominant-point flow and the rate flow.

dP(s) obeys d dP/ds = -gamma_0 dP with dP(s_fin) = B dR(s_fin), integrated
backwards; dR(s) obeys d dR/ds = -gamma_1(s) dR with dR(0) = dR, integrated
forwards. The two passes alternate until dR(s_fin) settles.

The backward pass stores dP and gamma_1 on a node grid of spacing ds. The
forward pass steps by 2 ds so each RK4 midpoint lands on a stored node and no
interpolation is needed; the node count is therefore kept even.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from wimpyrg.errors import (
    DegenerateDenominator,
    NoConvergence,
    NonFiniteState,
    RGBreakdown,
    WimpyError,
)
from wimpyrg.noiseless import REGULARIZE_TOL, gamma0_delta

ABS_FLOOR = 1e-15
ORBIT_TOL = 1e-6


@dataclass
class RGConfig:
    s_fin: float = 7.5
    ds: float = 0.01
    max_cycles: int = 100
    cycle_rel_tol: float = 1e-3
    dR_fin_init: float = 1e-12
    t_order: int = 2
    include_u: bool = False
    phi_warn: float = 0.05

    def grid(self):
        """Node grid 0..s_fin with an even number of equal steps near ``ds``."""
        if self.s_fin < 0 or self.ds <= 0:
            raise ValueError("need s_fin >= 0 and ds > 0")
        steps = int(round(self.s_fin / self.ds))
        steps += steps % 2
        return np.linspace(0.0, self.s_fin, steps + 1)


@dataclass
class RGState:
    s_grid: np.ndarray
    dP_grid: np.ndarray  # one row per node
    gamma1_grid: np.ndarray
    dR_fin: float
    dR0: float
    dR_grid: np.ndarray = None


@dataclass
class DiagnosticsReport:
    cycles: int
    phi0_init: float
    phi0_fin: float
    phi1_init: float
    phi1_fin: float
    n_init: float
    n_fin: float
    dR_init: float
    dR_fin: float
    R: float
    perr_unren: float
    perr: float
    phig_init: float = 0.0  # |gamma_1 / gamma_0 - 1|
    phig_fin: float = 0.0
    clamped: bool = False
    warnings: list = field(default_factory=list)


def rk4_integrate(f, y0, s_from, s_to, ds):
    """Classical fixed-step RK4 from s_from to s_to; returns (s_nodes, trajectory).

    The step count is round(|s_to - s_from| / ds), with the step adjusted to
    land exactly on s_to. Rows of the trajectory follow the integration order.
    """
    if ds <= 0:
        raise ValueError("ds must be positive")
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    span = s_to - s_from
    steps = int(round(abs(span) / ds))
    nodes = np.linspace(s_from, s_to, steps + 1)
    traj = np.empty((steps + 1, y.size))
    traj[0] = y
    for i in range(steps):
        s = nodes[i]
        h = nodes[i + 1] - s
        k1 = f(s, y)
        k2 = f(s + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(s + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(s + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"non-finite state at s = {nodes[i + 1]}")
        traj[i + 1] = y
    return nodes, traj


def _breakdown(msg, cycle, s, quantity, value):
    return RGBreakdown(f"{msg} at s={s:.6g}", cycle=cycle, s=float(s), quantity=quantity, value=value)


def backward_pass(problem, dR_fin, cfg, cycle=None):
    """Integrate dP from s_fin down to 0 and sample gamma_1 at every node.

    Returns ``(s_grid, dP_grid, gamma1_grid)`` in increasing-s order.
    """
    q = problem.flow_q()
    grid = cfg.grid()

    def deriv(s, dp):
        # inlined gamma_0; this is the hot loop
        r = dp / q
        if r.min() <= -1.0 or (q + dp).max() >= 1.0:
            raise _breakdown("P left (0, 1) inside an RK4 stage", cycle, s, "P", float((q + dp).min()))
        if np.abs(dp).max() < REGULARIZE_TOL:
            return -0.5 * dp
        lg = np.log1p(r)
        fwd = max(float(((q + dp) * lg - dp).sum()), 0.0)
        rev = max(float((dp - q * lg).sum()), 0.0)
        return -(fwd / (fwd + rev)) * dp

    dp_fin = problem.flow_b() * dR_fin
    if len(grid) == 1:
        dp_grid = dp_fin[None, :]
    else:
        _, traj = rk4_integrate(deriv, dp_fin, cfg.s_fin, 0.0, cfg.s_fin / (len(grid) - 1))
        dp_grid = traj[::-1]
    g1 = np.empty(len(grid))
    for i, (s, dp) in enumerate(zip(grid, dp_grid)):
        p = q + dp
        if np.any(p < 0.0) or np.any(p > 1.0):
            bad = float(p.min()) if p.min() < 0 else float(p.max())
            raise _breakdown("P outside [0, 1]", cycle, s, "P", bad)
        try:
            g1[i] = problem.gamma1(dp, cfg.t_order)
        except WimpyError as exc:
            raise _breakdown(f"gamma_1 undefined ({exc})", cycle, s, "gamma1", math.nan) from exc
        if not math.isfinite(g1[i]) or g1[i] < 0.0:
            raise _breakdown("gamma_1 negative", cycle, s, "gamma1", float(g1[i]))
    return grid, dp_grid, g1


def forward_pass(gamma1_grid, dR0, cfg):
    """Integrate dR forwards over the stored gamma_1 nodes; returns (dR_fin, dR on even nodes)."""
    g1 = np.asarray(gamma1_grid, dtype=float)
    nodes = len(g1) - 1
    if nodes == 0:
        return float(dR0), np.array([dR0])
    if nodes % 2:
        raise ValueError("forward pass needs an even number of grid steps")
    h = cfg.s_fin / nodes

    def deriv(s, r):
        idx = int(round(s / h))
        return -g1[idx] * r

    _, traj = rk4_integrate(deriv, [dR0], 0.0, cfg.s_fin, 2.0 * h)
    return float(traj[-1, 0]), traj[:, 0]


def _fractions(problem, dp, cfg):
    if np.max(np.abs(dp)) < REGULARIZE_TOL:
        return 0.0, 0.0
    try:
        return problem.fractions(dp, cfg.t_order)
    except DegenerateDenominator:
        return 0.0, 0.0


def _gamma_ratio(problem, dp, cfg):
    if np.max(np.abs(dp)) < REGULARIZE_TOL:
        return 0.0
    g0 = gamma0_delta(problem.flow_q(), dp)
    return abs(problem.gamma1(dp, cfg.t_order) / g0 - 1.0)


def solve(problem, cfg=None):
    """Alternate backward and forward passes until dR(s_fin) settles.

    Returns ``(RGState, DiagnosticsReport)``. Raises RGBreakdown on an
    unphysical node, and NoConvergence (carrying state and report) when the
    cycle budget runs out.
    """
    cfg = cfg or RGConfig()
    dR0 = problem.delta_r
    dR_fin = cfg.dR_fin_init
    converged = False
    cycles = 0
    history = []
    orbit = False
    for cycles in range(1, cfg.max_cycles + 1):
        grid, dp_grid, g1 = backward_pass(problem, dR_fin, cfg, cycle=cycles)
        new, dr_traj = forward_pass(g1, dR0, cfg)
        converged = abs(new - dR_fin) <= max(cfg.cycle_rel_tol * abs(new), ABS_FLOOR)
        dR_fin = new
        history.append(new)
        if converged:
            break
        orbit = _locked_two_cycle(history)
        if orbit:
            break
    state = RGState(s_grid=grid, dP_grid=dp_grid, gamma1_grid=g1, dR_fin=dR_fin, dR0=dR0, dR_grid=dr_traj)
    report = _report(problem, state, cycles, cfg)
    if orbit:
        raise NoConvergence(
            f"dR(s_fin) locked into a two-cycle ({history[-2]:.6g}, {history[-1]:.6g})", state, report
        )
    if not converged:
        raise NoConvergence(f"dR(s_fin) still moving after {cfg.max_cycles} cycles", state, report)
    return state, report


def _locked_two_cycle(h, rel=ORBIT_TOL, repeats=3):
    # the cycle map alternates between two values that no longer move; it will never settle
    if len(h) < 2 + 2 * repeats:
        return False
    for k in range(1, repeats + 1):
        a, b = h[-k], h[-k - 2]
        if abs(a - b) > rel * abs(a):
            return False
    return True


def _report(problem, state, cycles, cfg):
    n_fin = math.exp(cfg.s_fin) * problem.n
    phi0_i, phi1_i = _fractions(problem, state.dP_grid[0], cfg)
    phi0_f, phi1_f = _fractions(problem, state.dP_grid[-1], cfg)
    unren, c1 = problem.closed_form(state.dR0, problem.n, cfg.include_u, return_clamp=True)
    ren, c2 = problem.closed_form(state.dR_fin, n_fin, cfg.include_u, return_clamp=True)
    warnings = []
    if max(phi0_f, phi1_f) > cfg.phi_warn:
        warnings.append(f"final test fractions ({phi0_f:.3g}, {phi1_f:.3g}) exceed {cfg.phi_warn}; raise s_fin")
    return DiagnosticsReport(
        cycles=cycles, phi0_init=phi0_i, phi0_fin=phi0_f, phi1_init=phi1_i, phi1_fin=phi1_f,
        n_init=float(problem.n), n_fin=n_fin, dR_init=state.dR0, dR_fin=state.dR_fin,
        R=float(problem.R), perr_unren=unren, perr=ren,
        phig_init=_gamma_ratio(problem, state.dP_grid[0], cfg),
        phig_fin=_gamma_ratio(problem, state.dP_grid[-1], cfg), clamped=c1 or c2, warnings=warnings,
    )


def perr_renormalized(problem, cfg=None):
    """Renormalized error probability and its diagnostics."""
    _, report = solve(problem, cfg)
    return report.perr, report
