"""Efficient frontier, Lagrange multiplier, and feedback portfolio laws.

Given the backward solve (psi, p, g), the chain occupation probabilities and
the variance floor Delta, every frontier quantity is a closed-form function
of four scalars evaluated at time zero in the starting regime i0:

    p0 = p_{i0}(0),  g0 = g_{i0}(0),  Delta,  x0,

subject to the well-posedness condition  (1/2) p0 g0^2 + Delta - 1 < 0.
Writing D = p0 g0^2 + 2 Delta - 2 (strictly negative under the condition):

    lambda*(z)  = z + (2 z - p0 g0 x0) / D,
    Var(z)      = ((2 Delta + p0 g0^2) / (-D)) (z - z_min)^2 + Var_min,
    z_min       = p0 g0 x0 / (2 Delta + p0 g0^2),
    Var_min     = p0 Delta x0^2 / (2 Delta + p0 g0^2).

The variance-optimal feedback for a target z is affine in wealth:

    pi*(t, x, i) = -sigma(t,i)^{-1} theta(t,i) [ x + (lambda* - z) g_i(t) ],

and any two frontier laws span the rest (mutual-fund property).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bsde import BackwardSolution
from .errors import (
    DenominatorNonNegative,
    DimensionMismatch,
    InfeasibleMarket,
    NegativeBeta,
    OutOfRangeTime,
    ZBelowMinimum,
)
from .market import MarketModel

# Relative slack when comparing a requested z against z_min.
_Z_MIN_SLACK = 1e-12


@dataclass(frozen=True)
class FrontierInputs:
    """Time-zero scalars that determine the whole frontier."""

    p0: float
    g0: float
    delta: float
    x0: float

    def __post_init__(self):
        if self.p0 <= 0.0:
            raise DimensionMismatch(f"p0 must be positive, got {self.p0}")
        if not 0.0 < self.g0 <= 1.0:
            raise DimensionMismatch(f"g0 must lie in (0, 1], got {self.g0}")
        if self.delta < 0.0:
            raise DimensionMismatch(f"delta must be >= 0, got {self.delta}")

    @property
    def denominator(self) -> float:
        """D = p0 g0^2 + 2 Delta - 2; well-posed frontiers have D < 0."""
        return self.p0 * self.g0 ** 2 + 2.0 * self.delta - 2.0

    @property
    def wellposedness_margin(self) -> float:
        """(1/2) p0 g0^2 + Delta - 1, strictly negative when well posed."""
        return 0.5 * self.denominator

    def require_wellposed(self) -> None:
        if self.denominator >= 0.0:
            raise DenominatorNonNegative(
                f"(1/2) p0 g0^2 + Delta - 1 = {self.wellposedness_margin} >= 0"
            )


def frontier_inputs(solution: BackwardSolution, delta: float,
                    x0: float, initial_regime: int) -> FrontierInputs:
    """Extract the frontier scalars from a backward solve."""
    if not 0 <= initial_regime < solution.p.shape[0]:
        raise DimensionMismatch(f"regime {initial_regime} out of range")
    return FrontierInputs(
        p0=float(solution.p[initial_regime, 0]),
        g0=float(solution.g[initial_regime, 0]),
        delta=float(delta),
        x0=float(x0),
    )


@dataclass(frozen=True)
class FrontierPoint:
    """One point of the frontier: target mean, multiplier, and risk."""

    z: float
    lambda_star: float
    variance: float

    @property
    def std_dev(self) -> float:
        return float(np.sqrt(self.variance))


# --- scalar frontier formulas ---------------------------------------------...


def lambda_star(inputs: FrontierInputs, z: float) -> float:
    """Optimal Lagrange multiplier attaining E[x(tau ^ T)] = z."""
    inputs.require_wellposed()
    return z + (2.0 * z - inputs.p0 * inputs.g0 * inputs.x0) / inputs.denominator


def z_minimum(inputs: FrontierInputs) -> float:
    """Target mean of the least-variance frontier point."""
    inputs.require_wellposed()
    return inputs.p0 * inputs.g0 * inputs.x0 / (2.0 * inputs.delta + inputs.p0 * inputs.g0 ** 2)


def variance_minimum(inputs: FrontierInputs) -> float:
    """Variance at the vertex; zero exactly when Delta = 0."""
    inputs.require_wellposed()
    return inputs.p0 * inputs.delta * inputs.x0 ** 2 / (
        2.0 * inputs.delta + inputs.p0 * inputs.g0 ** 2
    )


def variance_at(inputs: FrontierInputs, z: float) -> FrontierPoint:
    """Frontier variance of the optimal law with target mean z."""
    inputs.require_wellposed()
    s = 2.0 * inputs.delta + inputs.p0 * inputs.g0 ** 2
    var = (s / -inputs.denominator) * (z - z_minimum(inputs)) ** 2 + variance_minimum(inputs)
    return FrontierPoint(z=float(z), lambda_star=lambda_star(inputs, z), variance=float(var))


# --- feedback laws ----------------------------------------------------------

# Every law exposes coefficients(t, regime) -> (slope, intercept), both of
# shape (..., n_assets) for scalar or 1-d t, with pi = slope * x + intercept.
# Affinity in wealth is what the simulator exploits to vectorize over paths.


@dataclass(frozen=True)
class FeedbackLaw:
    """Variance-optimal feedback for one frontier target.

    pi*(t, x, i) = -(sigma sigma^T)^{-1} B [ x + (lambda_star - z) g_i(t) ];
    g is interpolated linearly on the solver grid.
    """

    solution: BackwardSolution
    market: MarketModel
    lambda_star: float
    z: float

    def coefficients(self, t, regime: int):
        gain = np.asarray(self.market.gain(t, regime))
        g_val = np.interp(t, self.solution.grid, self.solution.g[regime])
        offset = (self.lambda_star - self.z) * np.asarray(g_val)
        return -gain, -gain * offset[..., None]

    def __call__(self, t, x, regime: int):
        slope, intercept = self.coefficients(t, regime)
        return slope * np.asarray(x)[..., None] + intercept


@dataclass(frozen=True)
class FeasiblePortfolioLaw:
    """Deterministic law moving the mean to z along the linear layer.

    pi~(t, i) = ((z - z0) / gamma) psi_i(t) B(t, i); independent of wealth,
    so the slope is identically zero.
    """

    solution: BackwardSolution
    market: MarketModel
    scale: float
    z: float

    def coefficients(self, t, regime: int):
        b = np.asarray(self.market.excess_return(t, regime))
        psi_val = np.interp(t, self.solution.grid, self.solution.psi[regime])
        intercept = self.scale * np.asarray(psi_val)[..., None] * b
        return np.zeros_like(intercept), intercept

    def __call__(self, t, x, regime: int):
        slope, intercept = self.coefficients(t, regime)
        return slope * np.asarray(x)[..., None] + intercept


@dataclass(frozen=True)
class MutualFundLaw:
    """Convex-beyond-one mixture of two frontier laws.

    Evaluates (1 - beta) law_a + beta law_b pointwise in (t, x, i); by the
    two-fund property this reproduces the optimal law for the blended target
    z = (1 - beta) z_a + beta z_b.
    """

    law_a: FeedbackLaw
    law_b: FeedbackLaw
    beta: float

    @property
    def z(self) -> float:
        return (1.0 - self.beta) * self.law_a.z + self.beta * self.law_b.z

    def coefficients(self, t, regime: int):
        sa, ia = self.law_a.coefficients(t, regime)
        sb, ib = self.law_b.coefficients(t, regime)
        w = self.beta
        return (1.0 - w) * sa + w * sb, (1.0 - w) * ia + w * ib

    def __call__(self, t, x, regime: int):
        slope, intercept = self.coefficients(t, regime)
        return slope * np.asarray(x)[..., None] + intercept


def optimal_control(law, t: float, x: float, regime: int) -> np.ndarray:
    """Evaluate a feedback law at one state (validating the time range)."""
    horizon = law.market.horizon if hasattr(law, "market") else law.law_a.market.horizon
    if not -1e-12 <= t <= horizon + 1e-12:
        raise OutOfRangeTime(f"time {t} outside [0, {horizon}]")
    return law(t, x, regime)


def build_law(solution: BackwardSolution, market: MarketModel,
              inputs: FrontierInputs, z: float) -> FeedbackLaw:
    """Optimal feedback law for target mean z."""
    return FeedbackLaw(solution=solution, market=market,
                       lambda_star=lambda_star(inputs, z), z=float(z))


def min_variance(solution: BackwardSolution, market: MarketModel,
                 inputs: FrontierInputs):
    """Vertex of the frontier: (z_min, Var_min, law with lambda* = 0).

    At the vertex the multiplier vanishes identically, so the law is built
    with lambda_star = 0 rather than through the generic formula.
    """
    inputs.require_wellposed()
    z_min = z_minimum(inputs)
    law = FeedbackLaw(solution=solution, market=market, lambda_star=0.0, z=z_min)
    return z_min, variance_minimum(inputs), law


def mutual_fund(law_a: FeedbackLaw, law_b: FeedbackLaw, beta: float) -> MutualFundLaw:
    """Blend two frontier laws; beta >= 0 (beta > 1 leverages law_b)."""
    if beta < 0.0:
        raise NegativeBeta(f"beta must be >= 0, got {beta}")
    return MutualFundLaw(law_a=law_a, law_b=law_b, beta=float(beta))


# --- feasibility ------------------------------------------------------------


def feasibility_gamma(grid: np.ndarray, psi: np.ndarray, market: MarketModel,
                      occupation: np.ndarray) -> float:
    """gamma = int_0^T sum_i pi_i(t) psi_i(t)^2 |B(t, i)|^2 dt.

    gamma > 0 is equivalent to the mean constraint being attainable for every
    target; gamma = 0 characterizes a market whose excess return vanishes
    almost everywhere along the chain.  Quadrature matches compute_delta:
    trapezoid in the smooth factors with |B|^2 frozen per step.
    """
    grid = np.asarray(grid, dtype=float)
    m = len(grid) - 1
    n = market.n_regimes
    if psi.shape != (n, m + 1) or occupation.shape != (m + 1, n):
        raise DimensionMismatch(
            f"psi {psi.shape} / occupation {occupation.shape} inconsistent with grid"
        )
    mids = 0.5 * (grid[:-1] + grid[1:])
    seg_len = np.diff(grid)
    total = 0.0
    occ = occupation.T
    for i in range(n):
        b_mid = np.asarray(market.excess_return(mids, i))
        b_sq = (b_mid ** 2).sum(axis=-1)                    # (m,)
        w = occ[i] * psi[i] ** 2                            # (m+1,)
        total += float(np.sum(b_sq * 0.5 * seg_len * (w[:-1] + w[1:])))
    return total


def z_zero(psi: np.ndarray, x0: float, initial_regime: int) -> float:
    """Mean of the stopped wealth under the pure bond strategy."""
    return float(psi[initial_regime, 0] * x0)


def feasible_portfolio(solution: BackwardSolution, market: MarketModel,
                       gamma: float, x0: float, initial_regime: int,
                       z: float) -> FeasiblePortfolioLaw:
    """Deterministic law with E[x(tau ^ T)] = z (existence needs gamma > 0).

    Raises
    ------
    InfeasibleMarket
        If gamma = 0 while z differs from the bond mean z0.
    """
    z0 = z_zero(solution.psi, x0, initial_regime)
    if gamma <= 0.0:
        if z != z0:
            raise InfeasibleMarket(
                f"gamma = 0: no portfolio can move the mean from {z0} to {z}"
            )
        scale = 0.0
    else:
        scale = (z - z0) / gamma
    return FeasiblePortfolioLaw(solution=solution, market=market,
                                scale=scale, z=float(z))


def frontier_curve(solution: BackwardSolution, market: MarketModel,
                   inputs: FrontierInputs, z_values) -> list[FrontierPoint]:
    """Frontier points for a grid of target means (each must be >= z_min).

    Raises
    ------
    ZBelowMinimum
        Listing every offending target.
    """
    inputs.require_wellposed()
    z_values = np.asarray(z_values, dtype=float)
    z_min = z_minimum(inputs)
    tol = _Z_MIN_SLACK * max(1.0, abs(z_min))
    bad = z_values[z_values < z_min - tol]
    if bad.size:
        raise ZBelowMinimum(
            f"targets below z_min = {z_min}: {', '.join(str(v) for v in bad)}"
        )
    return [variance_at(inputs, float(z)) for z in z_values]
