"""Exit-time law: validation, CDF, inverse sampling, weighting identity."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from regimefrontier import (
    NegativeDensity,
    OutOfRangeTime,
    SurvivalMarginViolated,
    build_horizon,
    constant_horizon,
)


# --- construction and validation -----------------------------------------------


def test_constant_density_mass():
    hor = constant_horizon(0.5, 1.0)
    assert hor.terminal_mass == pytest.approx(0.5, abs=1e-15)
    assert hor.horizon == 1.0
    assert hor.epsilon == 0.05


def test_zero_density_is_valid():
    hor = constant_horizon(0.0, 1.0)
    assert hor.terminal_mass == 0.0
    assert hor.f(0.3) == 0.0


def test_mass_above_margin_rejected():
    with pytest.raises(SurvivalMarginViolated):
        constant_horizon(1.2, 1.0, epsilon=0.1)


def test_boundary_mass_allowed():
    # F(T) = 1 - epsilon exactly is the largest admissible mass.
    hor = constant_horizon(0.95, 1.0, epsilon=0.05)
    assert hor.terminal_mass == pytest.approx(0.95, abs=1e-15)


def test_negative_density_rejected():
    with pytest.raises(NegativeDensity):
        build_horizon([{"t_start": 0.0, "f": -0.1}], 1.0)


@pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.2, 1.5])
def test_bad_epsilon_rejected(epsilon):
    with pytest.raises(SurvivalMarginViolated):
        constant_horizon(0.1, 1.0, epsilon=epsilon)


# --- cdf ------------------------------------------------------------------------


def test_cdf_at_zero_is_zero():
    hor = constant_horizon(0.5, 1.0)
    assert hor.cdf(0.0) == 0.0


def test_cdf_piecewise_values():
    hor = build_horizon(
        [{"t_start": 0.0, "f": 0.8}, {"t_start": 0.5, "f": 0.0}], 1.0
    )
    assert_allclose(hor.cdf(0.25), 0.2, atol=1e-15)
    assert_allclose(hor.cdf(0.5), 0.4, atol=1e-15)
    assert_allclose(hor.cdf(1.0), 0.4, atol=1e-15)
    assert hor.terminal_mass == pytest.approx(0.4, abs=1e-15)


def test_cdf_accepts_arrays():
    hor = constant_horizon(0.5, 1.0)
    assert_allclose(hor.cdf(np.array([0.0, 0.4, 1.0])), [0.0, 0.2, 0.5], atol=1e-15)


def test_cdf_rejects_out_of_range():
    hor = constant_horizon(0.5, 1.0)
    with pytest.raises(OutOfRangeTime):
        hor.cdf(-0.1)
    with pytest.raises(OutOfRangeTime):
        hor.cdf(1.5)


# --- inverse sampling -----------------------------------------------------------


def test_sample_zero_density_always_terminal():
    hor = constant_horizon(0.0, 1.0)
    for u in [0.0, 0.3, 0.999]:
        assert hor.sample_exit(u) == 1.0


def test_sample_inverts_cdf():
    hor = constant_horizon(0.5, 1.0)
    assert hor.sample_exit(0.25) == pytest.approx(0.5, abs=1e-15)
    # Draws at or beyond the early-exit mass land in the terminal atom.
    assert hor.sample_exit(0.5) == 1.0
    assert hor.sample_exit(0.7) == 1.0


def test_sample_monotone_in_uniform():
    hor = build_horizon(
        [{"t_start": 0.0, "f": 0.8}, {"t_start": 0.5, "f": 0.2}], 1.0
    )
    us = np.linspace(0.0, 0.999, 200)
    taus = np.array([hor.sample_exit(u) for u in us])
    assert np.all(np.diff(taus) >= 0)
    assert_allclose(hor.cdf(taus[us < hor.terminal_mass]),
                    us[us < hor.terminal_mass], atol=1e-12)


def test_sample_plateau_returns_left_edge():
    # Density vanishes on [0.25, 0.75]: F is flat there, and the draw that
    # hits the plateau level maps to its left edge.
    hor = build_horizon(
        [
            {"t_start": 0.0, "f": 0.8},
            {"t_start": 0.25, "f": 0.0},
            {"t_start": 0.75, "f": 0.8},
        ],
        1.0,
    )
    assert hor.sample_exit(0.2) == pytest.approx(0.25, abs=1e-15)


def test_sample_rejects_bad_uniform():
    hor = constant_horizon(0.5, 1.0)
    with pytest.raises(OutOfRangeTime):
        hor.sample_exit(1.0)
    with pytest.raises(OutOfRangeTime):
        hor.sample_exit(-0.01)


# --- the weighting identity -----------------------------------------------------


def test_weighted_functional_identity():
    # E[h(tau ^ T)] = int_0^T f h dt + (1 - F(T)) h(T) with h(t) = t^2:
    # 0.5 * 1/3 + 0.5 * 1 = 2/3.
    hor = constant_horizon(0.5, 1.0)
    expected = 0.5 / 3.0 + 0.5 * 1.0
    rng = np.random.default_rng(4242)
    u = rng.random(100_000)
    taus = np.array([hor.sample_exit(ui) for ui in u])
    h = taus**2
    se = h.std(ddof=1) / np.sqrt(h.size)
    assert abs(h.mean() - expected) <= 3.0 * se
