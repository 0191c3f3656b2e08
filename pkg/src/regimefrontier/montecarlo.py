"""Path simulation and statistical validation of the analytic frontier.

The simulator draws, per path, a private random stream seeded by
(base_seed, path index): first the regime path, then the exit time, then the
Brownian increments.  Wealth follows the Euler scheme on the union of a
uniform grid and the path's own event times (regime jumps and the exit), so
coefficients and the feedback law are frozen over sub-steps on which nothing
moves; the law always sees the pre-step wealth and the regime prevailing at
the sub-step's left endpoint.

Two cost estimators are produced for every run: the "sampled" one evaluates
(x - z)^2 at the drawn exit time, the "weighted" one integrates against the
exit density and terminal atom.  They estimate the same number; their
agreement (dual_cost_check) is a sharp end-to-end test of the exit-time
plumbing.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ValidatedGenerator
from .errors import DimensionMismatch, NumericalBlowup, StepTooLarge
from .frontier import build_law, variance_at
from .horizon import HorizonSpec
from .market import MarketModel

# Paths per vectorized batch; results are independent of this because every
# draw comes from a per-path stream and reductions run over concatenated
# per-path arrays.
_BATCH_SIZE = 5000

# Wealth overflow guard.
_BLOWUP_LIMIT = 1e12


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    ``antithetic`` pairs pathstreams: pair k simulates with the normals of
    stream k and their negation (chain path and exit time shared), which
    cancels the leading odd term of the Euler noise in smooth functionals.
    """

    n_paths: int
    euler_step: float
    base_seed: int
    antithetic: bool = False


@dataclass(frozen=True)
class SimResult:
    """Estimates from one simulation run.

    ``mean_terminal`` and ``var_terminal`` describe x(tau ^ T); standard
    errors use pair means under antithetic sampling.  ``j_mv_sampled`` and
    ``j_mv_weighted`` are the two estimators of E[(x(tau ^ T) - z)^2];
    ``se_jmv_diff`` is the standard error of their per-path difference, the
    scale on which they must agree.  ``se_var`` uses the fourth-central-
    moment asymptotics and treats paths as independent (it is reported but
    approximate under antithetic pairing).
    """

    n_paths: int
    z_ref: float
    mean_terminal: float
    var_terminal: float
    se_mean: float
    se_var: float
    j_mv_sampled: float
    j_mv_weighted: float
    se_jmv_sampled: float
    se_jmv_weighted: float
    se_jmv_diff: float
    j1_weighted: float
    se_j1_weighted: float
    exit_times: np.ndarray = field(repr=False)
    exit_wealth: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ZeroLaw:
    """All-bond strategy: no risky holdings at any state."""

    n_assets: int
    z: float = 0.0

    def coefficients(self, t, regime: int):
        shape = np.shape(t) + (self.n_assets,)
        return np.zeros(shape), np.zeros(shape)

    def __call__(self, t, x, regime: int):
        slope, intercept = self.coefficients(t, regime)
        return slope * np.asarray(x)[..., None] + intercept


# --- batch machinery ----------------------------------------------------------


def _draw_batch(gen: ValidatedGenerator, hor: HorizonSpec, market: MarketModel,
                initial_regime: int, cfg: SimConfig, path_ids: np.ndarray,
                uniform_nodes: np.ndarray, n_assets: int):
    """Sample chains, exits, and normals for one batch of paths.

    Returns padded arrays (padding repeats the terminal node, so padded
    sub-steps have zero length and never move wealth):

    times   (B, R+1)   sub-step node times
    regimes (B, R)     regime on [times[:, r], times[:, r+1])
    normals (B, R, n)  standard normals (zero on padding)
    exits   (B,)       exit times tau ^ T
    exit_rounds (B,)   node index at which the exit is recorded
    """
    horizon = market.horizon
    n_real = len(path_ids)
    node_lists, regime_lists, exit_times, exit_idx = [], [], [], []
    rngs = []
    for pid in path_ids:
        rng = np.random.default_rng([cfg.base_seed, int(pid)])
        path = gen.sample_path(initial_regime, horizon, rng)
        tau = hor.sample_exit(rng.random())
        events = path.jump_times
        if 0.0 < tau < horizon:
            events = np.sort(np.append(events, tau))
        if len(events):
            # Sorted insert; a coincidence with a grid node just yields a
            # zero-length sub-step, which the round loop treats as a no-op.
            nodes = np.insert(uniform_nodes, np.searchsorted(uniform_nodes, events), events)
        else:
            nodes = uniform_nodes
        node_lists.append(nodes)
        regime_lists.append(path.regime_at(nodes[:-1]))
        exit_times.append(tau)
        exit_idx.append(int(np.searchsorted(nodes, tau)))
        rngs.append(rng)

    r_max = max(len(nd) - 1 for nd in node_lists)
    times = np.full((n_real, r_max + 1), horizon)
    regimes = np.zeros((n_real, r_max), dtype=np.int16)
    normals = np.zeros((n_real, r_max, n_assets))
    for k, (nodes, regs, rng) in enumerate(zip(node_lists, regime_lists, rngs)):
        r_k = len(nodes) - 1
        times[k, : r_k + 1] = nodes
        regimes[k, :r_k] = regs
        regimes[k, r_k:] = regs[-1]
        normals[k, :r_k, :] = rng.standard_normal((r_k, n_assets))
    return times, regimes, normals, np.array(exit_times), np.array(exit_idx)


def _advance(x: np.ndarray, t: np.ndarray, sdt: np.ndarray, reg: np.ndarray,
             dw: np.ndarray, market: MarketModel, law) -> None:
    """One Euler sub-step, in place, grouped by prevailing regime."""
    for i in range(market.n_regimes):
        mask = (reg == i) & (sdt > 0.0)
        if not mask.any():
            continue
        t_i = t[mask]
        x_i = x[mask]
        dw_i = dw[mask]
        slope, intercept = law.coefficients(t_i, i)
        pi = slope * x_i[:, None] + intercept
        rate = np.asarray(market.rate(t_i, i))
        b = np.asarray(market.excess_return(t_i, i))
        sig = np.asarray(market.volatility(t_i, i))
        drift = rate * x_i + (b * pi).sum(axis=-1)
        if pi.shape[-1] == 1:
            noise = pi[:, 0] * sig[:, 0, 0] * dw_i[:, 0]
        else:
            noise = np.einsum("mi,mij,mj->m", pi, sig, dw_i)
        x[mask] = x_i + drift * sdt[mask] + noise


def _check_blowup(x: np.ndarray, path_ids: np.ndarray) -> None:
    bad = np.abs(x) > _BLOWUP_LIMIT
    if bad.any():
        pid = int(path_ids[np.argmax(bad)])
        raise NumericalBlowup(f"|wealth| exceeded {_BLOWUP_LIMIT} on path {pid}")


def _validate(market: MarketModel, cfg: SimConfig) -> None:
    if cfg.n_paths < 2:
        raise DimensionMismatch(f"n_paths must be >= 2, got {cfg.n_paths}")
    if cfg.antithetic and cfg.n_paths % 2:
        raise DimensionMismatch("antithetic sampling needs an even n_paths")
    if not 0.0 < cfg.euler_step <= market.horizon / 100.0:
        raise StepTooLarge(
            f"euler_step must lie in (0, T/100], got {cfg.euler_step}"
        )


def _uniform_nodes(horizon: float, dt: float) -> np.ndarray:
    m = max(100, int(np.ceil(horizon / dt - 1e-9)))
    return np.linspace(0.0, horizon, m + 1)


def simulate(market: MarketModel, hor: HorizonSpec, gen: ValidatedGenerator,
             law, x0: float, initial_regime: int, cfg: SimConfig,
             z: float | None = None) -> SimResult:
    """Simulate the wealth equation under ``law`` and estimate the cost pair.

    Parameters
    ----------
    law : object with ``coefficients(t, regime) -> (slope, intercept)``
        Feedback affine in wealth (all laws in this package are).
    z : float, optional
        Reference target for the quadratic cost; defaults to ``law.z`` when
        the law carries one, else 0.

    Raises
    ------
    NumericalBlowup
        If any path's |wealth| passes 1e12 (reports the path id).
    """
    _validate(market, cfg)
    if market.n_regimes != gen.n_regimes:
        raise DimensionMismatch("market and generator regime counts differ")
    z_ref = float(z) if z is not None else float(getattr(law, "z", 0.0))
    horizon = market.horizon
    uniform = _uniform_nodes(horizon, cfg.euler_step)
    survival = 1.0 - hor.terminal_mass

    n_streams = cfg.n_paths // 2 if cfg.antithetic else cfg.n_paths
    exit_t_parts, exit_x_parts, jmv_parts, j1_parts = [], [], [], []
    for start in range(0, n_streams, _BATCH_SIZE):
        ids = np.arange(start, min(start + _BATCH_SIZE, n_streams))
        times, regimes, normals, taus, exit_rounds = _draw_batch(
            gen, hor, market, initial_regime, cfg, ids, uniform, market.n_assets
        )
        if cfg.antithetic:
            # interleave (+Z, -Z) twins sharing the chain and exit draws
            times = np.repeat(times, 2, axis=0)
            regimes = np.repeat(regimes, 2, axis=0)
            taus = np.repeat(taus, 2)
            exit_rounds = np.repeat(exit_rounds, 2)
            signed = np.empty((2 * len(ids),) + normals.shape[1:])
            signed[0::2] = normals
            signed[1::2] = -normals
            normals = signed
            pids = np.repeat(ids, 2)
        else:
            pids = ids

        n_b = times.shape[0]
        x = np.full(n_b, float(x0))
        x_exit = np.full(n_b, np.nan)
        jmv_acc = np.zeros(n_b)
        j1_acc = np.zeros(n_b)
        record_now = exit_rounds == 0
        x_exit[record_now] = x[record_now]
        cdf_prev = np.interp(times[:, 0], hor.nodes, hor.cdf_nodes)
        for r in range(times.shape[1] - 1):
            a = times[:, r]
            b = times[:, r + 1]
            sdt = b - a
            # Trapezoid the density-weighted functionals over the sub-step:
            # half the exit mass is charged at the pre-step state, half at
            # the post-step state, keeping the quadrature second order.
            cdf_next = np.interp(b, hor.nodes, hor.cdf_nodes)
            half_df = 0.5 * (cdf_next - cdf_prev)
            cdf_prev = cdf_next
            jmv_acc += (x - z_ref) ** 2 * half_df
            j1_acc += x * half_df
            dw = normals[:, r, :] * np.sqrt(sdt)[:, None]
            _advance(x, a, sdt, regimes[:, r], dw, market, law)
            jmv_acc += (x - z_ref) ** 2 * half_df
            j1_acc += x * half_df
            hit = exit_rounds == r + 1
            if hit.any():
                x_exit[hit] = x[hit]
            _check_blowup(x, pids)
        jmv_acc += survival * (x - z_ref) ** 2
        j1_acc += survival * x
        exit_t_parts.append(taus)
        exit_x_parts.append(x_exit)
        jmv_parts.append(jmv_acc)
        j1_parts.append(j1_acc)

    exit_times = np.concatenate(exit_t_parts)
    exit_wealth = np.concatenate(exit_x_parts)
    jmv_weighted = np.concatenate(jmv_parts)
    j1_weighted = np.concatenate(j1_parts)
    assert not np.any(np.isnan(exit_wealth))
    return _collect(exit_times, exit_wealth, jmv_weighted, j1_weighted,
                    z_ref, cfg.antithetic)


def _mean_se(values: np.ndarray, antithetic: bool) -> tuple[float, float]:
    """Mean and its standard error; antithetic pairs collapse to pair means."""
    if antithetic:
        values = values.reshape(-1, 2).mean(axis=1)
    n = len(values)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(n))


def _collect(exit_times, exit_wealth, jmv_weighted, j1_weighted,
             z_ref: float, antithetic: bool) -> SimResult:
    n = len(exit_wealth)
    mean_terminal, se_mean = _mean_se(exit_wealth, antithetic)
    centered = exit_wealth - exit_wealth.mean()
    m2 = float((centered ** 2).mean())
    m4 = float((centered ** 4).mean())
    var_terminal = float(exit_wealth.var(ddof=1))
    se_var = float(np.sqrt(max(m4 - (n - 3) / (n - 1) * m2 ** 2, 0.0) / n))

    jmv_sampled = (exit_wealth - z_ref) ** 2
    js_mean, js_se = _mean_se(jmv_sampled, antithetic)
    jw_mean, jw_se = _mean_se(jmv_weighted, antithetic)
    _, jd_se = _mean_se(jmv_sampled - jmv_weighted, antithetic)
    j1_mean, j1_se = _mean_se(j1_weighted, antithetic)
    return SimResult(
        n_paths=n,
        z_ref=z_ref,
        mean_terminal=mean_terminal,
        var_terminal=var_terminal,
        se_mean=se_mean,
        se_var=se_var,
        j_mv_sampled=js_mean,
        j_mv_weighted=jw_mean,
        se_jmv_sampled=js_se,
        se_jmv_weighted=jw_se,
        se_jmv_diff=jd_se,
        j1_weighted=j1_mean,
        se_j1_weighted=j1_se,
        exit_times=exit_times,
        exit_wealth=exit_wealth,
    )


# --- validation reports -------------------------------------------------------


@dataclass(frozen=True)
class DualCostReport:
    """Agreement between the sampled and weighted cost estimators."""

    difference: float
    se: float
    n_se: float
    passed: bool


def dual_cost_check(result: SimResult, se_budget: float = 3.0) -> DualCostReport:
    """PASS iff the two cost estimators differ by at most ``se_budget`` SEs.

    A zero standard error (e.g. no early-exit mass, where the estimators
    coincide path by path) passes exactly when the difference is zero.
    """
    diff = result.j_mv_sampled - result.j_mv_weighted
    if result.se_jmv_diff == 0.0:
        passed = diff == 0.0
        n_se = 0.0 if passed else np.inf
    else:
        n_se = abs(diff) / result.se_jmv_diff
        passed = bool(n_se <= se_budget)
    return DualCostReport(difference=float(diff), se=result.se_jmv_diff,
                          n_se=float(n_se), passed=passed)


@dataclass(frozen=True)
class FrontierCheckRow:
    """Analytic frontier point against its simulated counterpart."""

    z: float
    lambda_star: float
    var_analytic: float
    mean_sim: float
    se_mean: float
    var_sim: float
    se_var: float
    z_score_mean: float
    z_score_var: float
    passed: bool


def frontier_validation(market: MarketModel, hor: HorizonSpec,
                        gen: ValidatedGenerator, solution, inputs,
                        z_values, x0: float, initial_regime: int,
                        cfg: SimConfig, se_budget: float = 3.0) -> list[FrontierCheckRow]:
    """Simulate the optimal law per target and compare with the formulas."""
    rows = []
    for z in z_values:
        law = build_law(solution, market, inputs, float(z))
        point = variance_at(inputs, float(z))
        res = simulate(market, hor, gen, law, x0, initial_regime, cfg)
        zs_mean = (res.mean_terminal - z) / res.se_mean if res.se_mean else np.inf
        zs_var = ((res.var_terminal - point.variance) / res.se_var
                  if res.se_var else np.inf)
        rows.append(FrontierCheckRow(
            z=float(z),
            lambda_star=point.lambda_star,
            var_analytic=point.variance,
            mean_sim=res.mean_terminal,
            se_mean=res.se_mean,
            var_sim=res.var_terminal,
            se_var=res.se_var,
            z_score_mean=float(zs_mean),
            z_score_var=float(zs_var),
            passed=bool(abs(zs_mean) <= se_budget and abs(zs_var) <= se_budget),
        ))
    return rows


# --- discretization probe -----------------------------------------------------


@dataclass(frozen=True)
class EulerBiasReport:
    """Coupled comparison of one Euler step against its half-step refinement.

    Both discretizations consume the same Brownian path (coarse increments
    are sums of fine ones), so ``mean_diff`` estimates the discretization
    bias change itself instead of burying it in independent sampling noise.
    """

    mean_coarse: float
    mean_fine: float
    mean_diff: float
    se_diff: float
    se_mean: float


def euler_bias_probe(market: MarketModel, hor: HorizonSpec,
                     gen: ValidatedGenerator, law, x0: float,
                     initial_regime: int, cfg: SimConfig) -> EulerBiasReport:
    """Estimate how much halving the Euler step moves the terminal mean."""
    _validate(market, cfg)
    horizon = market.horizon
    m_coarse = max(100, int(np.ceil(horizon / cfg.euler_step - 1e-9)))
    fine_uniform = np.linspace(0.0, horizon, 2 * m_coarse + 1)
    coarse_uniform = fine_uniform[::2]

    diff_parts, coarse_parts = [], []
    for start in range(0, cfg.n_paths, _BATCH_SIZE):
        ids = np.arange(start, min(start + _BATCH_SIZE, cfg.n_paths))
        times, regimes, normals, taus, exit_rounds = _draw_batch(
            gen, hor, market, initial_regime, cfg, ids, fine_uniform,
            market.n_assets
        )
        n_b = times.shape[0]
        # Coarse nodes: every other uniform node plus all event nodes (jumps
        # and exits are not on the uniform grid).  Padding repeats T, so only
        # the first occurrence of each time counts.
        is_coarse = np.isin(times, coarse_uniform) | ~np.isin(times, fine_uniform)
        first_occurrence = np.ones(times.shape, dtype=bool)
        first_occurrence[:, 1:] = times[:, 1:] != times[:, :-1]
        is_coarse &= first_occurrence

        x_f = np.full(n_b, float(x0))
        x_c = np.full(n_b, float(x0))
        xf_exit = np.full(n_b, np.nan)
        xc_exit = np.full(n_b, np.nan)
        t_cs = times[:, 0].copy()
        reg_cs = regimes[:, 0].copy()
        acc = np.zeros((n_b, market.n_assets))
        hit0 = exit_rounds == 0
        xf_exit[hit0] = x_f[hit0]
        xc_exit[hit0] = x_c[hit0]
        for r in range(times.shape[1] - 1):
            a = times[:, r]
            b = times[:, r + 1]
            sdt = b - a
            dw = normals[:, r, :] * np.sqrt(sdt)[:, None]
            _advance(x_f, a, sdt, regimes[:, r], dw, market, law)
            acc += dw
            sync = is_coarse[:, r + 1] & (b > t_cs)
            if sync.any():
                csdt = np.where(sync, b - t_cs, 0.0)
                _advance(x_c, t_cs, csdt, reg_cs, acc, market, law)
                t_cs = np.where(sync, b, t_cs)
                reg_next = regimes[:, min(r + 1, regimes.shape[1] - 1)]
                reg_cs = np.where(sync, reg_next, reg_cs)
                acc[sync] = 0.0
            hit = exit_rounds == r + 1
            if hit.any():
                xf_exit[hit] = x_f[hit]
                xc_exit[hit] = x_c[hit]
            _check_blowup(x_f, ids)
            _check_blowup(x_c, ids)
        assert not (np.any(np.isnan(xf_exit)) or np.any(np.isnan(xc_exit)))
        diff_parts.append(xf_exit - xc_exit)
        coarse_parts.append(xc_exit)

    diffs = np.concatenate(diff_parts)
    coarse = np.concatenate(coarse_parts)
    mean_c, se_mean = _mean_se(coarse, antithetic=False)
    mean_d, se_d = _mean_se(diffs, antithetic=False)
    return EulerBiasReport(mean_coarse=mean_c, mean_fine=mean_c + mean_d,
                           mean_diff=mean_d, se_diff=se_d, se_mean=se_mean)
