"""Right-continuous piecewise-constant schedules on a bounded interval.

Market coefficients and the exit density are step functions of calendar time.
This module centralizes segment lookup, exact integration, and validation so
the solvers never re-derive breakpoint arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OutOfRangeTime, ScheduleGap

# Slack for classifying a time as inside [0, T]; callers pass exact grid
# endpoints, so this only absorbs accumulated round-off.
_TIME_TOL = 1e-12


@dataclass(frozen=True)
class PiecewiseConstant:
    """Step function t -> values[k] on [breaks[k], breaks[k+1]).

    ``breaks`` is strictly increasing, starts at 0, and is interpreted
    against a terminal time ``t_end``; the last segment extends through
    ``t_end`` inclusive.  ``values`` may be scalar per segment or carry
    trailing dimensions (vectors, matrices).
    """

    breaks: np.ndarray        # (S,), breaks[0] == 0.0
    values: np.ndarray        # (S, ...) one entry per segment
    t_end: float

    def _check_range(self, t: np.ndarray) -> None:
        if t.size and (t.min() < -_TIME_TOL or t.max() > self.t_end + _TIME_TOL):
            raise OutOfRangeTime(
                f"time outside [0, {self.t_end}]: range [{t.min()}, {t.max()}]"
            )

    def segment_index(self, t):
        """Index of the segment containing each time (right-continuous)."""
        t = np.asarray(t, dtype=float)
        self._check_range(t)
        idx = np.searchsorted(self.breaks, t, side="right") - 1
        return np.clip(idx, 0, len(self.breaks) - 1)

    def value(self, t):
        """Evaluate the step function; scalar in, scalar out.

        Single-segment schedules return a read-only broadcast view (constant
        coefficients are the common case on simulator hot paths).
        """
        t_arr = np.asarray(t, dtype=float)
        self._check_range(t_arr)
        if len(self.breaks) == 1:
            return np.broadcast_to(self.values[0], t_arr.shape + self.values.shape[1:])
        idx = np.searchsorted(self.breaks, t_arr, side="right") - 1
        return self.values[np.clip(idx, 0, len(self.breaks) - 1)]

    def integral_nodes(self):
        """Breakpoints (with t_end appended) and the exact running integral.

        Only meaningful for scalar-valued schedules.  The running integral is
        piecewise linear, so linear interpolation between these nodes
        reproduces it exactly.
        """
        nodes = np.append(self.breaks, self.t_end)
        seg_len = np.diff(nodes)
        cum = np.concatenate([[0.0], np.cumsum(seg_len * self.values)])
        return nodes, cum

    def integral(self, t):
        """Exact integral of the step function from 0 to each time."""
        nodes, cum = self.integral_nodes()
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.t_end)
        return np.interp(t, nodes, cum)


def build_schedule(segments, t_end, value_key, value_shape=None) -> PiecewiseConstant:
    """Assemble a validated PiecewiseConstant from {t_start, value} records.

    Parameters
    ----------
    segments : sequence of mappings
        Each record holds ``t_start`` and the entry named by ``value_key``.
    t_end : float
        End of the covered interval; every t_start must lie in [0, t_end).
    value_key : str
        Key of the per-segment value.
    value_shape : tuple, optional
        Required trailing shape of each value (vectors/matrices).

    Raises
    ------
    ScheduleGap
        Empty schedule, first segment not at 0, unsorted or duplicated
        breakpoints, or a breakpoint at/after ``t_end``.
    """
    if t_end <= 0:
        raise ScheduleGap(f"interval end must be positive, got {t_end}")
    if not segments:
        raise ScheduleGap("schedule has no segments")
    starts = np.array([float(seg["t_start"]) for seg in segments])
    if starts[0] != 0.0:
        raise ScheduleGap(f"first segment must start at 0, got {starts[0]}")
    if np.any(np.diff(starts) <= 0):
        raise ScheduleGap("segment starts must be strictly increasing")
    if starts[-1] >= t_end:
        raise ScheduleGap(f"segment start {starts[-1]} is at or past the end {t_end}")
    vals = np.array([np.asarray(seg[value_key], dtype=float) for seg in segments])
    if not np.all(np.isfinite(vals)):
        raise ScheduleGap(f"non-finite {value_key} in schedule")
    if value_shape is not None and vals.shape[1:] != tuple(value_shape):
        raise ScheduleGap(
            f"{value_key} entries must have shape {tuple(value_shape)}, got {vals.shape[1:]}"
        )
    return PiecewiseConstant(breaks=starts, values=vals, t_end=float(t_end))
