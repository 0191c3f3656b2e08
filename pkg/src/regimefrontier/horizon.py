"""Random exit-time horizon with a deterministic, piecewise-constant density.

The investor may be forced out of the market at a random time tau whose
conditional density f is a nonnegative step function of calendar time; the
mass F(T) placed before the terminal date must leave a survival margin
epsilon, i.e. F(T) <= 1 - epsilon.  The leftover probability 1 - F(T) is the
atom at "never exits early", realized as tau >= T.

Expectations of functionals stopped at tau ^ T reduce to deterministic
weights:  E[h(tau ^ T)] = integral_0^T f(t) h(t) dt + (1 - F(T)) h(T),
which is the identity the simulator's weighted estimators rely on.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeDensity, OutOfRangeTime, SurvivalMarginViolated
from .schedules import PiecewiseConstant, build_schedule

_DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class HorizonSpec:
    """Validated exit-time law on [0, T].

    Attributes
    ----------
    density : PiecewiseConstant
        The step-function density f >= 0.
    epsilon : float
        Required survival margin; F(T) <= 1 - epsilon holds by construction.
    nodes, cdf_nodes : ndarray
        Breakpoints (including T) and the exact running integral of f at
        them; the CDF is piecewise linear between consecutive nodes.
    """

    density: PiecewiseConstant
    epsilon: float
    nodes: np.ndarray
    cdf_nodes: np.ndarray

    @property
    def horizon(self) -> float:
        return self.density.t_end

    @property
    def terminal_mass(self) -> float:
        """F(T), the probability of exiting strictly before the final date."""
        return float(self.cdf_nodes[-1])

    def f(self, t):
        """Density value(s) at t (right-continuous step function)."""
        return self.density.value(t)

    def cdf(self, t):
        """Exact F(t) = integral of f from 0 to t; accepts arrays."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.horizon + 1e-12):
            raise OutOfRangeTime(f"cdf argument outside [0, {self.horizon}]")
        out = np.interp(np.clip(t_arr, 0.0, self.horizon), self.nodes, self.cdf_nodes)
        return out if t_arr.ndim else float(out)

    def sample_exit(self, u) -> float:
        """Map a uniform draw to an exit time by inverting the CDF.

        Draws with u >= F(T) land in the terminal atom and return T exactly;
        otherwise the unique time with F(t) = u is returned (the left edge of
        a zero-density plateau, a measure-zero case).
        """
        u = float(u)
        if not 0.0 <= u < 1.0:
            raise OutOfRangeTime(f"uniform draw must lie in [0, 1), got {u}")
        if u >= self.terminal_mass:
            return self.horizon
        k = int(np.searchsorted(self.cdf_nodes, u, side="left"))
        if self.cdf_nodes[k] == u:
            return float(self.nodes[k])
        # u sits strictly inside segment k-1, where the density is positive.
        f_val = self.density.values[k - 1]
        return float(self.nodes[k - 1] + (u - self.cdf_nodes[k - 1]) / f_val)


def build_horizon(density_segments, horizon: float,
                  epsilon: float = _DEFAULT_EPSILON) -> HorizonSpec:
    """Validate an exit-density schedule.

    Parameters
    ----------
    density_segments : sequence of mappings
        ``[{"t_start": 0.0, "f": 0.5}, ...]`` covering [0, horizon].
    horizon : float
        Terminal date T.
    epsilon : float
        Survival margin in (0, 1); validation requires F(T) <= 1 - epsilon.

    Raises
    ------
    NegativeDensity, SurvivalMarginViolated, ScheduleGap
    """
    if not 0.0 < epsilon < 1.0:
        raise SurvivalMarginViolated(f"epsilon must lie in (0, 1), got {epsilon}")
    sched = build_schedule(density_segments, horizon, "f")
    if np.any(sched.values < 0):
        raise NegativeDensity(f"density must be >= 0, got min {sched.values.min()}")
    nodes, cdf_nodes = sched.integral_nodes()
    terminal_mass = float(cdf_nodes[-1])
    if terminal_mass > 1.0 - epsilon:
        raise SurvivalMarginViolated(
            f"exit mass F(T) = {terminal_mass} exceeds 1 - epsilon = {1.0 - epsilon}"
        )
    return HorizonSpec(density=sched, epsilon=float(epsilon),
                       nodes=nodes, cdf_nodes=cdf_nodes)


def constant_horizon(f: float, horizon: float,
                     epsilon: float = _DEFAULT_EPSILON) -> HorizonSpec:
    """Exit law with a constant density on [0, horizon]."""
    return build_horizon([{"t_start": 0.0, "f": float(f)}], horizon, epsilon)
