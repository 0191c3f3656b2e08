"""Piecewise-constant schedules: lookup, integration, validation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from regimefrontier import OutOfRangeTime, ScheduleGap, build_schedule


def two_piece():
    # value 2.0 on [0, 0.4), 5.0 on [0.4, 1]
    return build_schedule(
        [{"t_start": 0.0, "v": 2.0}, {"t_start": 0.4, "v": 5.0}],
        t_end=1.0, value_key="v")


def test_value_lookup_scalar_and_array():
    sched = two_piece()
    assert sched.value(0.0) == 2.0
    assert sched.value(0.39999) == 2.0
    assert sched.value(0.4) == 5.0
    assert sched.value(1.0) == 5.0
    assert_allclose(sched.value(np.array([0.0, 0.5, 1.0])), [2.0, 5.0, 5.0])


def test_single_segment_value_broadcasts():
    sched = build_schedule([{"t_start": 0.0, "v": 3.0}], t_end=2.0, value_key="v")
    out = sched.value(np.linspace(0.0, 2.0, 7))
    assert out.shape == (7,)
    assert np.all(out == 3.0)


def test_value_rejects_out_of_range_times():
    sched = two_piece()
    with pytest.raises(OutOfRangeTime):
        sched.value(1.5)
    with pytest.raises(OutOfRangeTime):
        sched.value(np.array([0.2, -0.1]))


def test_integral_is_exact():
    sched = two_piece()
    # int_0^t: linear in each piece, kink at 0.4
    assert_allclose(sched.integral(0.4), 0.8, atol=1e-15)
    assert_allclose(sched.integral(1.0), 0.8 + 0.6 * 5.0, atol=1e-15)
    assert_allclose(sched.integral(0.7), 0.8 + 0.3 * 5.0, atol=1e-15)


def test_build_requires_cover_from_zero():
    with pytest.raises(ScheduleGap):
        build_schedule([{"t_start": 0.2, "v": 1.0}], t_end=1.0, value_key="v")


def test_build_requires_increasing_breakpoints():
    with pytest.raises(ScheduleGap):
        build_schedule([{"t_start": 0.0, "v": 1.0}, {"t_start": 0.0, "v": 2.0}],
                       t_end=1.0, value_key="v")


def test_build_rejects_breakpoint_at_or_past_end():
    with pytest.raises(ScheduleGap):
        build_schedule([{"t_start": 0.0, "v": 1.0}, {"t_start": 1.0, "v": 2.0}],
                       t_end=1.0, value_key="v")


def test_build_rejects_nonfinite_values():
    with pytest.raises(ScheduleGap):
        build_schedule([{"t_start": 0.0, "v": np.inf}], t_end=1.0, value_key="v")


def test_vector_values_keep_shape():
    sched = build_schedule(
        [{"t_start": 0.0, "v": [1.0, 2.0]}, {"t_start": 0.5, "v": [3.0, 4.0]}],
        t_end=1.0, value_key="v", value_shape=(2,))
    assert_allclose(sched.value(0.75), [3.0, 4.0])
    out = sched.value(np.array([0.0, 0.75]))
    assert out.shape == (2, 2)
    assert_allclose(out, [[1.0, 2.0], [3.0, 4.0]])
