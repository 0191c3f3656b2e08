"""Model configuration files: one JSON document describing a full problem.

A config bundles everything needed to solve and simulate one market::

    {
      "generator": [[-1.0, 1.0], [0.8, -0.8]],
      "market": {
        "n_assets": 1,
        "T": 1.0,
        "regimes": [
          [{"t_start": 0.0, "r": 0.1, "mu": [0.3], "sigma": [[0.5]]}],
          [{"t_start": 0.0, "r": 0.15, "mu": [0.25], "sigma": [[0.45]]}]
        ]
      },
      "horizon": {"epsilon": 0.05, "density": [{"t_start": 0.0, "f": 0.5}]},
      "initial": {"x0": 1.0, "regime": 0},
      "run": {"step": null,
              "sim": {"n_paths": 100000, "euler_step": 0.001,
                      "base_seed": 1234, "antithetic": false}},
      "z_targets": [1.15, 1.2, 1.3]
    }

All rates are per-year; times are in years from 0 to the market horizon T.
``run`` and ``z_targets`` are optional; defaults keep a full validation run
within a few minutes.  Structural problems raise :class:`InvalidConfig`,
while domain violations raise the specific error of the component that
rejected the value (for example ``SurvivalMarginViolated`` when the exit
density puts too much mass before T).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .chain import ValidatedGenerator, validate_generator
from .errors import InvalidConfig
from .horizon import HorizonSpec, build_horizon
from .market import MarketModel, build_market
from .montecarlo import SimConfig

_DEFAULT_EPSILON = 0.05
_DEFAULT_N_PATHS = 100_000
_DEFAULT_EULER_STEP = 1e-3
_DEFAULT_BASE_SEED = 1234


@dataclass(frozen=True)
class ModelConfig:
    """A fully validated problem description.

    Attributes
    ----------
    generator : ValidatedGenerator
        Regime-switching generator matrix.
    market : MarketModel
        Per-regime piecewise-constant market coefficients on [0, T].
    exit_law : HorizonSpec
        Exit-time density and its exact cumulative distribution.
    x0 : float
        Initial wealth.
    initial_regime : int
        Regime occupied at time zero.
    step : float or None
        Backward solver grid step; None selects the default 1e-4 * T.
    sim : SimConfig
        Monte Carlo run parameters.
    z_targets : tuple of float
        Expected-terminal-wealth targets used by frontier and simulate runs.
    """

    generator: ValidatedGenerator
    market: MarketModel
    exit_law: HorizonSpec
    x0: float
    initial_regime: int
    step: float | None
    sim: SimConfig
    z_targets: tuple[float, ...]


def _section(raw: dict, key: str, kind: type, required: bool = True):
    if key not in raw:
        if required:
            raise InvalidConfig(f"missing required section {key!r}")
        return None
    value = raw[key]
    if not isinstance(value, kind):
        raise InvalidConfig(
            f"section {key!r} must be a {kind.__name__}, got {type(value).__name__}")
    return value


def _finite_number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidConfig(f"{where} must be a number, got {type(value).__name__}")
    out = float(value)
    if not math.isfinite(out):
        raise InvalidConfig(f"{where} must be finite, got {out}")
    return out


def parse_config(raw: dict) -> ModelConfig:
    """Validate a raw config mapping and build all model components.

    Parameters
    ----------
    raw : dict
        Parsed JSON document as described in the module docstring.

    Returns
    -------
    ModelConfig

    Raises
    ------
    InvalidConfig
        On missing sections or malformed values.
    ModelError
        Whatever the component validators raise for domain violations.
    """
    if not isinstance(raw, dict):
        raise InvalidConfig(f"config root must be an object, got {type(raw).__name__}")

    generator = validate_generator(_section(raw, "generator", list))

    market_raw = _section(raw, "market", dict)
    for key in ("n_assets", "T", "regimes"):
        if key not in market_raw:
            raise InvalidConfig(f"market section must define {key!r}")
    n_assets_raw = market_raw["n_assets"]
    if isinstance(n_assets_raw, bool) or not isinstance(n_assets_raw, int):
        raise InvalidConfig("market.n_assets must be an integer")
    _finite_number(market_raw["T"], "market.T")
    if not isinstance(market_raw["regimes"], list):
        raise InvalidConfig("market.regimes must be a list")
    market = build_market(market_raw)
    if market.n_regimes != generator.n_regimes:
        raise InvalidConfig(
            f"market defines {market.n_regimes} regimes but the generator "
            f"is {generator.n_regimes}x{generator.n_regimes}")

    hor_raw = _section(raw, "horizon", dict)
    if "density" not in hor_raw:
        raise InvalidConfig("horizon section must define 'density'")
    if not isinstance(hor_raw["density"], list):
        raise InvalidConfig("horizon.density must be a list")
    epsilon = _finite_number(hor_raw.get("epsilon", _DEFAULT_EPSILON), "horizon.epsilon")
    exit_law = build_horizon(hor_raw["density"], market.horizon, epsilon=epsilon)

    initial = _section(raw, "initial", dict)
    x0 = _finite_number(_require(initial, "x0", "initial"), "initial.x0")
    regime_raw = _require(initial, "regime", "initial")
    if isinstance(regime_raw, bool) or not isinstance(regime_raw, int):
        raise InvalidConfig("initial.regime must be an integer")
    if not 0 <= regime_raw < market.n_regimes:
        raise InvalidConfig(
            f"initial.regime {regime_raw} outside [0, {market.n_regimes})")

    run = _section(raw, "run", dict, required=False) or {}
    step = run.get("step")
    if step is not None:
        step = _finite_number(step, "run.step")
        if step <= 0:
            raise InvalidConfig(f"run.step must be positive, got {step}")
    sim_raw = run.get("sim", {})
    if not isinstance(sim_raw, dict):
        raise InvalidConfig("run.sim must be an object")
    sim = _parse_sim(sim_raw)

    z_raw = _section(raw, "z_targets", list, required=False) or []
    z_targets = tuple(_finite_number(z, f"z_targets[{k}]") for k, z in enumerate(z_raw))

    return ModelConfig(generator=generator, market=market, exit_law=exit_law,
                       x0=x0, initial_regime=regime_raw, step=step, sim=sim,
                       z_targets=z_targets)


def _require(mapping: dict, key: str, section: str):
    if key not in mapping:
        raise InvalidConfig(f"missing required field {section}.{key}")
    return mapping[key]


def _parse_sim(sim_raw: dict) -> SimConfig:
    n_paths = sim_raw.get("n_paths", _DEFAULT_N_PATHS)
    if isinstance(n_paths, bool) or not isinstance(n_paths, int):
        raise InvalidConfig("run.sim.n_paths must be an integer")
    euler_step = _finite_number(
        sim_raw.get("euler_step", _DEFAULT_EULER_STEP), "run.sim.euler_step")
    base_seed = sim_raw.get("base_seed", _DEFAULT_BASE_SEED)
    if isinstance(base_seed, bool) or not isinstance(base_seed, int) or base_seed < 0:
        raise InvalidConfig("run.sim.base_seed must be a nonnegative integer")
    antithetic = sim_raw.get("antithetic", False)
    if not isinstance(antithetic, bool):
        raise InvalidConfig("run.sim.antithetic must be a boolean")
    return SimConfig(n_paths=n_paths, euler_step=euler_step,
                     base_seed=base_seed, antithetic=antithetic)


def load_config(path: str) -> ModelConfig:
    """Read and validate a JSON model config from ``path``.

    Raises
    ------
    InvalidConfig
        If the file is unreadable or not valid JSON, or the structure is
        malformed.
    ModelError
        For domain violations found by the component validators.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(raw)
