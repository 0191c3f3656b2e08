"""Backward solvers for the regime-coupled value equations.

With deterministic piecewise-constant coefficients, the three backward
stochastic equations of the model collapse to coupled per-regime ODE systems
on [0, T] (Q is the chain generator, F the exit CDF, f its density):

* linear-layer weight   psi_i' = -(r_i psi_i + f) - sum_j q_ij psi_j,
  psi_i(T) = 1 - F(T);
* quadratic-layer state p_i'   = -(2 f + (2 r_i - |theta_i|^2) p_i)
  - sum_j q_ij p_j,  p_i(T) = 2 (1 - F(T));
* offset ratio          g_i'   = (r_i + 2 f / p_i) g_i - 2 f / p_i
  - (1/p_i) sum_{j != i} q_ij (p_j - p_i)(g_j - g_i) - sum_j q_ij g_j,
  g_i(T) = 1.

All three are integrated backward with the classical fourth-order scheme on
one shared uniform grid.  Within a step the coefficients are frozen at the
step midpoint; when schedule breakpoints sit on grid nodes (the supported
configuration) this is exact and the scheme keeps its full order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ValidatedGenerator
from .errors import BoundViolated, GridMismatch, PositivityLost, StepTooLarge
from .horizon import HorizonSpec
from .market import MarketModel

# Default step relative to the horizon length.
_DEFAULT_STEP_FRACTION = 1e-4

# Stability guard: the scaled one-sided Lipschitz bound h * L of the linear
# layers must stay below this before we even start integrating.
_STABILITY_LIMIT = 1.0

# Numerical slack for the g <= 1 upper bound.
_G_UPPER_SLACK = 1e-12


def shared_grid(horizon: float, h: float | None) -> np.ndarray:
    """Uniform, terminal-anchored grid on [0, horizon] with step <= h."""
    if h is None:
        h = _DEFAULT_STEP_FRACTION * horizon
    if not (0 < h <= horizon):
        raise StepTooLarge(f"step must lie in (0, {horizon}], got {h}")
    m = max(1, int(np.ceil(horizon / h - 1e-9)))
    return np.linspace(0.0, horizon, m + 1)


@dataclass(frozen=True)
class BackwardSolution:
    """Joint solve of the three backward systems on one grid.

    Attributes
    ----------
    grid : ndarray, shape (m+1,)
    psi, p, g : ndarray, shape (N, m+1)
        Per-regime trajectories; column k belongs to grid[k].
    p_lower, p_upper : float
        Empirical range of p, the uniform bounds used by verification
        arguments (p_lower > 0 is enforced here).
    """

    grid: np.ndarray
    psi: np.ndarray
    p: np.ndarray
    g: np.ndarray
    p_lower: float
    p_upper: float


@dataclass(frozen=True)
class DeltaValue:
    """Variance floor integral, split into its two nonnegative sources.

    ``f_part`` integrates f (g - 1)^2 (early-exit dispersion); ``jump_part``
    integrates p/2 times the quadratic variation of g across regime jumps.
    """

    delta: float
    f_part: float
    jump_part: float


# --- internal helpers ---------------------------------------------------------


def _step_midpoint_values(market: MarketModel, hor: HorizonSpec, grid: np.ndarray):
    """Per-step (midpoint) coefficient arrays and a reuse key per step.

    Returns (r, th2, f, key): r and th2 have shape (m, N), f has shape (m,),
    and key[k] identifies the coefficient-constant interval containing step k
    so one-step propagators can be cached.
    """
    mids = 0.5 * (grid[:-1] + grid[1:])
    n = market.n_regimes
    r = np.stack([np.asarray(market.rate(mids, i)) for i in range(n)], axis=1)
    th2 = np.stack([np.asarray(market.theta_sq(mids, i)) for i in range(n)], axis=1)
    f = np.asarray(hor.f(mids))
    cuts = [hor.density.breaks]
    for i in range(n):
        cuts.append(market.rate_schedules[i].breaks)
    cut = np.unique(np.concatenate(cuts))
    key = np.searchsorted(cut, mids, side="right")
    return r, th2, f, key


def _affine_rk4_maps(a: np.ndarray, b: np.ndarray, h: float):
    """One-step propagator (R, c) of the classical scheme for y' = A y + b.

    For a linear autonomous system the four-stage step reduces to
    R = sum_{j<=4} (hA)^j / j! and c = h (I + hA/2 + (hA)^2/6 + (hA)^3/24) b,
    so iterating y <- R y + c is bit-for-bit the RK4 recursion.
    """
    n = a.shape[0]
    ha = h * a
    eye = np.eye(n)
    ha2 = ha @ ha
    ha3 = ha2 @ ha
    r_map = eye + ha + ha2 / 2.0 + ha3 / 6.0 + ha2 @ ha2 / 24.0
    c_map = h * (eye + ha / 2.0 + ha2 / 6.0 + ha3 / 24.0) @ b
    return r_map, c_map


def _solve_linear_backward(market: MarketModel, hor: HorizonSpec,
                           gen: ValidatedGenerator, grid: np.ndarray,
                           terminal: float, a_diag, b_scale: float):
    """Backward solve of y_i' = -(b_scale f + a_i y_i) - (Q y)_i.

    ``a_diag(r, th2)`` maps per-step coefficient arrays to the diagonal A;
    the same routine therefore covers the psi layer (a = r, b_scale = 1) and
    the p layer (a = 2 r - th2, b_scale = 2).  In the backward variable the
    system is y' = (diag(a) + Q) y + b_scale f, integrated with cached
    one-step affine propagators.
    """
    _check_dimensions(market, gen)
    r, th2, f, key = _step_midpoint_values(market, hor, grid)
    m = len(grid) - 1
    n = market.n_regimes
    h = grid[1] - grid[0] if m >= 1 else 0.0
    a_steps = a_diag(r, th2)
    lip = np.abs(a_steps).max() + np.abs(gen.q).sum(axis=1).max()
    if h * lip > _STABILITY_LIMIT:
        raise StepTooLarge(
            f"step {h} too coarse for coefficient scale {lip}; reduce h"
        )
    out = np.empty((n, m + 1))
    out[:, m] = terminal
    ones = np.ones(n)
    cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for k in range(m - 1, -1, -1):
        maps = cache.get(key[k])
        if maps is None:
            a_mat = np.diag(a_steps[k]) + gen.q
            maps = _affine_rk4_maps(a_mat, b_scale * f[k] * ones, h)
            cache[key[k]] = maps
        r_map, c_map = maps
        out[:, k] = r_map @ out[:, k + 1] + c_map
    return out


def _check_dimensions(market: MarketModel, gen: ValidatedGenerator) -> None:
    if market.n_regimes != gen.n_regimes:
        raise GridMismatch(
            f"market has {market.n_regimes} regimes, generator {gen.n_regimes}"
        )


# --- public solvers -----------------------------------------------------------


def solve_psi(market: MarketModel, hor: HorizonSpec, gen: ValidatedGenerator,
              h: float | None = None, grid: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Solve the linear-layer weights psi on the shared grid.

    Returns (grid, psi) with psi of shape (N, m+1); psi_i(T) = 1 - F(T)
    exactly and psi stays strictly positive (violations raise StepTooLarge,
    since only an unstable step can produce them).
    """
    if grid is None:
        grid = shared_grid(market.horizon, h)
    psi = _solve_linear_backward(
        market, hor, gen, grid,
        terminal=1.0 - hor.terminal_mass,
        a_diag=lambda r, th2: r,
        b_scale=1.0,
    )
    if psi.min() <= 0.0:
        raise StepTooLarge(f"psi lost positivity (min {psi.min()}); reduce h")
    return grid, psi


def solve_p(market: MarketModel, hor: HorizonSpec, gen: ValidatedGenerator,
            h: float | None = None, grid: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Solve the quadratic-layer state p on the shared grid.

    Returns (grid, p) with p_i(T) = 2 (1 - F(T)) exactly; p must remain
    strictly positive (PositivityLost otherwise).
    """
    if grid is None:
        grid = shared_grid(market.horizon, h)
    p = _solve_linear_backward(
        market, hor, gen, grid,
        terminal=2.0 * (1.0 - hor.terminal_mass),
        a_diag=lambda r, th2: 2.0 * r - th2,
        b_scale=2.0,
    )
    if p.min() <= 0.0:
        raise PositivityLost(f"p lost positivity (min {p.min()})")
    return grid, p


def solve_g(market: MarketModel, hor: HorizonSpec, gen: ValidatedGenerator,
            grid: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Solve the offset ratio g given p on the same grid.

    The g system is linear in g but its coefficients run through p(t); each
    backward step therefore re-advances a local copy of p through the stage
    points so every stage sees fourth-order-consistent coefficient values.
    Returns g of shape (N, m+1) with g_i(T) = 1 exactly and 0 < g <= 1.

    Raises
    ------
    GridMismatch
        If p was not produced on ``grid``.
    BoundViolated
        If the solved g leaves (0, 1].
    """
    _check_dimensions(market, gen)
    grid = np.asarray(grid, dtype=float)
    m = len(grid) - 1
    n = market.n_regimes
    if p.shape != (n, m + 1):
        raise GridMismatch(f"p has shape {p.shape}, expected {(n, m + 1)}")
    if p.min() <= 0.0:
        raise PositivityLost(f"p must be strictly positive (min {p.min()})")
    r, th2, f, _ = _step_midpoint_values(market, hor, grid)
    h = grid[1] - grid[0] if m >= 1 else 0.0
    q = gen.q
    coupled = bool(np.any(q != 0.0))

    g = np.empty((n, m + 1))
    g[:, m] = 1.0

    def deriv(p_s, g_s, k):
        """Backward-variable derivatives (dp/ds, dg/ds) at stage values."""
        f2 = 2.0 * f[k]
        dp = f2 + (2.0 * r[k] - th2[k]) * p_s
        ratio = f2 / p_s
        dg = -(r[k] + ratio) * g_s + ratio
        if coupled:
            dp = dp + q @ p_s
            qp = q @ p_s
            qg = q @ g_s
            qpg = q @ (p_s * g_s)
            # sum_j q_ij (p_j - p_i)(g_j - g_i), using zero row sums of q
            dg = dg + (qpg - g_s * qp - p_s * qg) / p_s + qg
        return dp, dg

    for k in range(m - 1, -1, -1):
        p1, g1 = p[:, k + 1], g[:, k + 1]
        dp1, dg1 = deriv(p1, g1, k)
        dp2, dg2 = deriv(p1 + 0.5 * h * dp1, g1 + 0.5 * h * dg1, k)
        dp3, dg3 = deriv(p1 + 0.5 * h * dp2, g1 + 0.5 * h * dg2, k)
        _, dg4 = deriv(p1 + h * dp3, g1 + h * dg3, k)
        g[:, k] = g1 + (h / 6.0) * (dg1 + 2.0 * dg2 + 2.0 * dg3 + dg4)

    if g.min() <= 0.0 or g.max() > 1.0 + _G_UPPER_SLACK:
        raise BoundViolated(
            f"g left (0, 1]: range [{g.min()}, {g.max()}]"
        )
    return g


def solve_backward(market: MarketModel, hor: HorizonSpec,
                   gen: ValidatedGenerator, h: float | None = None) -> BackwardSolution:
    """Solve psi, p, and g together on one shared grid."""
    grid = shared_grid(market.horizon, h)
    _, psi = solve_psi(market, hor, gen, grid=grid)
    _, p = solve_p(market, hor, gen, grid=grid)
    g = solve_g(market, hor, gen, grid, p)
    return BackwardSolution(grid=grid, psi=psi, p=p, g=g,
                            p_lower=float(p.min()), p_upper=float(p.max()))


def compute_delta(grid: np.ndarray, p: np.ndarray, g: np.ndarray,
                  hor: HorizonSpec, occupation: np.ndarray,
                  gen: ValidatedGenerator) -> DeltaValue:
    """Variance floor Delta by trapezoidal quadrature on the shared grid.

        Delta = int_0^T sum_i pi_i(t) [ f(t) (g_i - 1)^2
                + (1/2) p_i sum_{j != i} q_ij (g_j - g_i)^2 ] dt,

    where pi(t) are the occupation probabilities of the chain.  The exit
    density is frozen at each step midpoint (exact for aligned breakpoints),
    the smooth factors are trapezoided on the grid nodes.

    Raises
    ------
    GridMismatch
        If the arrays were not produced on the same grid.
    """
    grid = np.asarray(grid, dtype=float)
    m = len(grid) - 1
    n = gen.n_regimes
    if p.shape != (n, m + 1) or g.shape != (n, m + 1):
        raise GridMismatch(
            f"p/g shapes {p.shape}/{g.shape} do not match grid ({n}, {m + 1})"
        )
    if occupation.shape != (m + 1, n):
        raise GridMismatch(
            f"occupation shape {occupation.shape}, expected {(m + 1, n)}"
        )
    if np.any(np.abs(occupation.sum(axis=1) - 1.0) > 1e-8):
        raise GridMismatch("occupation rows must sum to 1")

    occ = occupation.T                      # (N, m+1)
    seg_len = np.diff(grid)
    mids = 0.5 * (grid[:-1] + grid[1:])
    f_mid = np.asarray(hor.f(mids))         # (m,)

    # Early-exit dispersion: nodes carry pi (g-1)^2, the step carries f.
    w_nodes = (occ * (g - 1.0) ** 2).sum(axis=0)            # (m+1,)
    f_part = float(np.sum(f_mid * 0.5 * seg_len * (w_nodes[:-1] + w_nodes[1:])))

    # Jump dispersion: explicit nonnegative form, term by term over targets.
    jump_nodes = np.zeros(m + 1)
    for i in range(n):
        rates = gen.q[i].copy()
        rates[i] = 0.0
        quad = (rates[:, None] * (g - g[i]) ** 2).sum(axis=0)   # (m+1,)
        jump_nodes += occ[i] * 0.5 * p[i] * quad
    jump_part = float(np.sum(0.5 * seg_len * (jump_nodes[:-1] + jump_nodes[1:])))

    return DeltaValue(delta=f_part + jump_part, f_part=f_part, jump_part=jump_part)
