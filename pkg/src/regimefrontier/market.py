"""Regime-conditional market coefficients and wealth dynamics.

Each regime carries piecewise-constant-in-time coefficients: a short rate
r > 0, drift vector mu, and a square volatility matrix sigma whose Gram
matrix sigma sigma^T must stay uniformly positive definite.  The module also
provides the market price of risk theta = sigma^{-1} (mu - r 1) and the
one-step Euler update for the self-financing wealth equation

    dx = (r x + B' pi) dt + pi' sigma dW,      B = mu - r 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateVolatility,
    DimensionMismatch,
    NonPositiveRate,
    OutOfRangeTime,
)
from .schedules import PiecewiseConstant, build_schedule

# Default uniform ellipticity floor for sigma sigma^T.
_DEFAULT_VOL_FLOOR = 1e-10


@dataclass(frozen=True)
class WealthState:
    """Wealth snapshot: time, wealth level, and the prevailing regime."""

    t: float
    x: float
    regime: int


@dataclass(frozen=True, eq=False)
class MarketModel:
    """Validated market with per-regime coefficient schedules.

    Attributes
    ----------
    n_assets, n_regimes : int
    horizon : float
        Terminal date T; every schedule covers [0, T].
    delta : float
        Smallest eigenvalue of sigma sigma^T over all regimes and segments
        (the realized ellipticity constant).
    rate_schedules, mu_schedules, sigma_schedules : tuple of PiecewiseConstant
        One schedule per regime.
    """

    n_assets: int
    n_regimes: int
    horizon: float
    delta: float
    rate_schedules: tuple
    mu_schedules: tuple
    sigma_schedules: tuple
    # Per-regime derived schedules, aligned with sigma_schedules' segments.
    theta_schedules: tuple
    theta_sq_schedules: tuple
    gain_schedules: tuple

    # --- coefficient access (t may be a scalar or 1-d array) -----------------

    def rate(self, t, regime: int):
        self._check_regime(regime)
        return self.rate_schedules[regime].value(t)

    def drift(self, t, regime: int):
        self._check_regime(regime)
        return self.mu_schedules[regime].value(t)

    def volatility(self, t, regime: int):
        self._check_regime(regime)
        return self.sigma_schedules[regime].value(t)

    def excess_return(self, t, regime: int):
        """B(t, i) = mu - r 1, the appreciation above the short rate."""
        r = np.asarray(self.rate(t, regime))
        return self.drift(t, regime) - r[..., None]

    def theta(self, t, regime: int):
        """Market price of risk theta = sigma^{-1} B."""
        self._check_regime(regime)
        return self.theta_schedules[regime].value(t)

    def theta_sq(self, t, regime: int):
        """|theta|^2 = B' (sigma sigma^T)^{-1} B."""
        self._check_regime(regime)
        return self.theta_sq_schedules[regime].value(t)

    def gain(self, t, regime: int):
        """(sigma sigma^T)^{-1} B, the feedback direction of the optimal control."""
        self._check_regime(regime)
        return self.gain_schedules[regime].value(t)

    # --- dynamics -------------------------------------------------------------

    def wealth_step(self, state: WealthState, portfolio: np.ndarray,
                    dt: float, dw: np.ndarray) -> WealthState:
        """One Euler step of the wealth equation from ``state``.

        Coefficients are frozen at the step's left endpoint and the prevailing
        regime, matching the predictable evaluation used by the simulator.
        """
        if dt < 0:
            raise OutOfRangeTime(f"dt must be >= 0, got {dt}")
        portfolio = np.asarray(portfolio, dtype=float)
        dw = np.asarray(dw, dtype=float)
        if portfolio.shape != (self.n_assets,) or dw.shape != (self.n_assets,):
            raise DimensionMismatch(
                f"portfolio and dW must have shape ({self.n_assets},)"
            )
        r = self.rate(state.t, state.regime)
        b = self.excess_return(state.t, state.regime)
        sig = self.volatility(state.t, state.regime)
        drift = r * state.x + b @ portfolio
        noise = portfolio @ sig @ dw
        return WealthState(t=state.t + dt, x=state.x + drift * dt + noise,
                           regime=state.regime)

    def _check_regime(self, i: int) -> None:
        if not 0 <= i < self.n_regimes:
            raise DimensionMismatch(
                f"regime index {i} out of range for {self.n_regimes} regimes"
            )

    def to_config(self) -> dict:
        """Serialize back to the plain-dict form accepted by build_market."""
        regimes = []
        for i in range(self.n_regimes):
            segs = []
            for k, t0 in enumerate(self.rate_schedules[i].breaks):
                segs.append({
                    "t_start": float(t0),
                    "r": float(self.rate_schedules[i].values[k]),
                    "mu": self.mu_schedules[i].values[k].tolist(),
                    "sigma": self.sigma_schedules[i].values[k].tolist(),
                })
            regimes.append(segs)
        return {"n_assets": self.n_assets, "T": self.horizon, "regimes": regimes}


def build_market(config, vol_floor: float = _DEFAULT_VOL_FLOOR) -> MarketModel:
    """Validate a market description and precompute derived coefficients.

    Parameters
    ----------
    config : mapping or MarketModel
        ``{"n_assets": n, "T": T, "regimes": [[{t_start, r, mu, sigma}, ...],
        ...]}``.  Passing an already-validated model re-runs validation on its
        serialized form and returns an equivalent model (idempotence).
    vol_floor : float
        Uniform ellipticity floor; the smallest eigenvalue of sigma sigma^T
        must reach it on every segment of every regime.

    Raises
    ------
    NonPositiveRate, DegenerateVolatility, ScheduleGap, DimensionMismatch
    """
    if isinstance(config, MarketModel):
        config = config.to_config()
    n_assets = int(config["n_assets"])
    horizon = float(config["T"])
    regimes = config["regimes"]
    if n_assets < 1:
        raise DimensionMismatch(f"n_assets must be >= 1, got {n_assets}")
    if not regimes:
        raise DimensionMismatch("at least one regime is required")

    rate_scheds, mu_scheds, sigma_scheds = [], [], []
    theta_scheds, theta_sq_scheds, gain_scheds = [], [], []
    delta = np.inf
    for i, segments in enumerate(regimes):
        r_sched = build_schedule(segments, horizon, "r")
        mu_sched = build_schedule(segments, horizon, "mu", value_shape=(n_assets,))
        sig_sched = build_schedule(segments, horizon, "sigma",
                                   value_shape=(n_assets, n_assets))
        if np.any(r_sched.values <= 0):
            raise NonPositiveRate(
                f"regime {i}: rate must be > 0, got min {r_sched.values.min()}"
            )
        if np.any(sig_sched.values < 0):
            warnings.warn(
                f"regime {i}: negative volatility entries; the Gram matrix "
                "is what matters, but check the sign convention",
                stacklevel=2,
            )
        # Per-segment derived quantities (constant where sigma, mu, r are).
        thetas = np.empty((len(r_sched.values), n_assets))
        gains = np.empty_like(thetas)
        theta_sqs = np.empty(len(r_sched.values))
        for k in range(len(r_sched.values)):
            sig = sig_sched.values[k]
            gram = sig @ sig.T
            eigs = np.linalg.eigvalsh(gram)
            if eigs[0] < vol_floor:
                raise DegenerateVolatility(
                    f"regime {i} segment {k}: min eigenvalue of sigma sigma^T "
                    f"is {eigs[0]}, below the floor {vol_floor}"
                )
            delta = min(delta, eigs[0])
            b = mu_sched.values[k] - r_sched.values[k]
            theta = np.linalg.solve(sig, b)
            thetas[k] = theta
            theta_sqs[k] = theta @ theta
            gains[k] = np.linalg.solve(sig.T, theta)
        rate_scheds.append(r_sched)
        mu_scheds.append(mu_sched)
        sigma_scheds.append(sig_sched)
        theta_scheds.append(PiecewiseConstant(r_sched.breaks, thetas, horizon))
        theta_sq_scheds.append(PiecewiseConstant(r_sched.breaks, theta_sqs, horizon))
        gain_scheds.append(PiecewiseConstant(r_sched.breaks, gains, horizon))

    return MarketModel(
        n_assets=n_assets,
        n_regimes=len(regimes),
        horizon=horizon,
        delta=float(delta),
        rate_schedules=tuple(rate_scheds),
        mu_schedules=tuple(mu_scheds),
        sigma_schedules=tuple(sigma_scheds),
        theta_schedules=tuple(theta_scheds),
        theta_sq_schedules=tuple(theta_sq_scheds),
        gain_schedules=tuple(gain_scheds),
    )


def constant_market(r, mu, sigma, horizon: float, n_regimes: int = None) -> MarketModel:
    """Convenience builder for time-constant coefficients.

    ``r``, ``mu``, ``sigma`` may be single values (shared by every regime) or
    sequences with one entry per regime.  Scalars are promoted to the
    one-asset shapes.
    """
    def as_regime_list(v):
        if n_regimes is None:
            return [v]
        if np.isscalar(v):
            return [v] * n_regimes
        v = list(v)
        if len(v) != n_regimes:
            raise DimensionMismatch(f"expected {n_regimes} per-regime values")
        return v

    rs, mus, sigs = as_regime_list(r), as_regime_list(mu), as_regime_list(sigma)
    regimes = []
    n_assets = None
    for r_i, mu_i, sig_i in zip(rs, mus, sigs):
        mu_vec = np.atleast_1d(np.asarray(mu_i, dtype=float))
        sig_mat = np.asarray(sig_i, dtype=float)
        if sig_mat.ndim == 0:
            sig_mat = sig_mat.reshape(1, 1)
        n_assets = len(mu_vec)
        regimes.append([{"t_start": 0.0, "r": float(r_i),
                         "mu": mu_vec.tolist(), "sigma": sig_mat.tolist()}])
    return build_market({"n_assets": n_assets, "T": horizon, "regimes": regimes})
