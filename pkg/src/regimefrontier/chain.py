"""Continuous-time Markov chain: generator, transition law, paths, counters.

The market regime follows a finite-state chain with a constant generator Q
(off-diagonal entries are jump rates, rows sum to zero).  Transition and
occupation probabilities are obtained by integrating the forward Kolmogorov
system dP/dt = P Q with a fixed-step fourth-order scheme; path sampling uses
exponential holding times, and counting processes track jumps into each state
together with their compensators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadGrid,
    DimensionMismatch,
    NegativeOffDiagonal,
    NegativeTime,
    NotSquare,
    RowSumViolation,
)

# Row sums within this of zero are silently re-centered onto the diagonal;
# anything larger is treated as a corrupt generator.
_ROW_SUM_RECENTER = 1e-9
_ROW_SUM_FINAL = 1e-12

# Step ceiling for the forward Kolmogorov integration (years).  Fourth-order
# error at this step is far below every downstream tolerance for the rate
# magnitudes this package targets (|q_ij| <= 10 per year).
_KOLMOGOROV_MAX_STEP = 1e-3


def _rk4_matrix_map(q: np.ndarray, h: float) -> np.ndarray:
    """One-step propagator of dP/dt = P Q for the classical RK4 scheme.

    For a linear autonomous system the four-stage step collapses to the
    degree-4 Taylor polynomial of exp(hQ); iterating this map is bit-for-bit
    the fixed-step RK4 recursion.
    """
    n = q.shape[0]
    hq = h * q
    term = np.eye(n)
    out = np.eye(n)
    for k in range(1, 5):
        term = term @ hq / k
        out = out + term
    return out


@dataclass(frozen=True)
class ValidatedGenerator:
    """Generator matrix that passed structural validation.

    Attributes
    ----------
    q : ndarray, shape (N, N)
        Re-centered generator: off-diagonal >= 0, every row sums to zero
        within 1e-12.
    n_regimes : int
        Number of chain states N (states are indexed 0..N-1).
    """

    q: np.ndarray
    n_regimes: int

    def transition_matrix(self, t: float, max_step: float = _KOLMOGOROV_MAX_STEP) -> np.ndarray:
        """Transition probabilities P(t) with P(0) = I.

        Integrates the forward system dP/dt = P Q from 0 to t with a uniform
        RK4 step no larger than ``max_step``.
        """
        if t < 0:
            raise NegativeTime(f"transition time must be >= 0, got {t}")
        if t == 0.0:
            return np.eye(self.n_regimes)
        n_steps = max(1, int(np.ceil(t / max_step)))
        step = _rk4_matrix_map(self.q, t / n_steps)
        out = np.eye(self.n_regimes)
        for _ in range(n_steps):
            out = out @ step
        return out

    def occupation_probabilities(self, initial_regime: int, grid: np.ndarray,
                                 max_step: float = _KOLMOGOROV_MAX_STEP) -> np.ndarray:
        """Marginal state probabilities along a time grid.

        Returns an array of shape (len(grid), N) whose row k is the
        distribution of the regime at grid[k] started from ``initial_regime``;
        equal to row ``initial_regime`` of the transition matrix at each time.

        Raises
        ------
        BadGrid
            If the grid is empty, unsorted, or does not start at 0.
        """
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or len(grid) == 0:
            raise BadGrid("grid must be a nonempty 1-d array")
        if grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise BadGrid("grid must start at 0 and be strictly increasing")
        self._check_regime(initial_regime)
        out = np.empty((len(grid), self.n_regimes))
        pi = np.zeros(self.n_regimes)
        pi[initial_regime] = 1.0
        out[0] = pi
        for k in range(1, len(grid)):
            dt = grid[k] - grid[k - 1]
            n_steps = max(1, int(np.ceil(dt / max_step)))
            step = _rk4_matrix_map(self.q, dt / n_steps)
            for _ in range(n_steps):
                pi = pi @ step
            out[k] = pi
        return out

    def sample_path(self, initial_regime: int, horizon: float,
                    rng: np.random.Generator) -> "ChainPath":
        """Draw one chain trajectory on [0, horizon].

        Holding times are exponential with rate -q[i, i]; the destination of
        each jump is chosen with probability q[i, j] / (-q[i, i]).  The
        supplied ``rng`` is the path's private stream, so batches seeded per
        path reproduce independently of scheduling.
        """
        if horizon < 0:
            raise NegativeTime(f"horizon must be >= 0, got {horizon}")
        self._check_regime(initial_regime)
        times = []
        states = []
        t = 0.0
        i = initial_regime
        while True:
            rate = -self.q[i, i]
            if rate <= 0.0:
                break  # absorbing state
            t += rng.exponential(1.0 / rate)
            if t >= horizon:
                break
            probs = self.q[i].copy()
            probs[i] = 0.0
            cum = np.cumsum(probs / rate)
            j = int(np.searchsorted(cum, rng.random(), side="right"))
            j = min(j, self.n_regimes - 1)
            times.append(t)
            states.append(j)
            i = j
        return ChainPath(
            initial_regime=initial_regime,
            jump_times=np.array(times),
            post_jump_regimes=np.array(states, dtype=int),
            horizon=float(horizon),
        )

    def _check_regime(self, i: int) -> None:
        if not 0 <= i < self.n_regimes:
            raise DimensionMismatch(
                f"regime index {i} out of range for {self.n_regimes} states"
            )


def validate_generator(raw) -> ValidatedGenerator:
    """Validate and re-center a raw generator matrix.

    Off-diagonal entries must be nonnegative and each row must sum to zero
    within 1e-9; row sums inside that band are absorbed into the diagonal so
    the stored generator is exact to 1e-12.

    Raises
    ------
    NotSquare, NegativeOffDiagonal, RowSumViolation
    """
    q = np.array(raw, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise NotSquare(f"generator must be square, got shape {q.shape}")
    if not np.all(np.isfinite(q)):
        raise RowSumViolation("generator has non-finite entries")
    n = q.shape[0]
    off = q[~np.eye(n, dtype=bool)]
    if np.any(off < 0):
        raise NegativeOffDiagonal(f"negative off-diagonal rate: {off.min()}")
    row_sums = q.sum(axis=1)
    if np.any(np.abs(row_sums) >= _ROW_SUM_RECENTER):
        raise RowSumViolation(
            f"row sums too far from zero to re-center: max |sum| = {np.abs(row_sums).max()}"
        )
    q[np.diag_indices(n)] -= row_sums
    assert np.all(np.abs(q.sum(axis=1)) < _ROW_SUM_FINAL)
    q.setflags(write=False)
    return ValidatedGenerator(q=q, n_regimes=n)


@dataclass(frozen=True)
class ChainPath:
    """One right-continuous chain trajectory on [0, horizon].

    ``jump_times`` are strictly increasing and lie in (0, horizon);
    ``post_jump_regimes[k]`` is the state entered at ``jump_times[k]`` and
    always differs from the state held just before.
    """

    initial_regime: int
    jump_times: np.ndarray
    post_jump_regimes: np.ndarray
    horizon: float

    def regime_at(self, t):
        """State occupied at each time (right-continuous in t)."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > self.horizon):
            raise BadGrid(f"time outside [0, {self.horizon}]")
        if len(self.jump_times) == 0:
            return np.full(t.shape, self.initial_regime, dtype=int) if t.ndim else self.initial_regime
        idx = np.searchsorted(self.jump_times, t, side="right")
        states = np.concatenate([[self.initial_regime], self.post_jump_regimes])
        out = states[idx]
        return out if t.ndim else int(out)


@dataclass(frozen=True)
class CountingRecord:
    """Jump counters and compensators for one path.

    For each target state j, ``counts(t)[j]`` is the number of jumps into j
    up to and including t, and ``compensators(t)[j]`` is the exact integral
    of the pre-jump intensity q[regime(s-), j] over (0, t].  Both are
    evaluated from stored segment nodes, so queries are exact.
    """

    nodes: np.ndarray            # (K+1,) segment boundaries: 0, jumps..., horizon
    counts_at_nodes: np.ndarray  # (K+1, N) right-continuous jump counts
    comp_at_nodes: np.ndarray    # (K+1, N) compensator values (piecewise linear)

    def counts(self, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self.nodes, t, side="right")) - 1
        idx = min(max(idx, 0), len(self.nodes) - 1)
        return self.counts_at_nodes[idx].copy()

    def compensators(self, t: float) -> np.ndarray:
        out = np.empty(self.comp_at_nodes.shape[1])
        for j in range(len(out)):
            out[j] = np.interp(t, self.nodes, self.comp_at_nodes[:, j])
        return out


def counting_processes(path: ChainPath, gen: ValidatedGenerator) -> CountingRecord:
    """Per-state jump counters and compensators along one path.

    The compensator of the counter for state j accrues at rate q[i, j]
    whenever the chain sits in state i != j, which makes the compensated
    counter a martingale under the chain law.
    """
    if len(path.post_jump_regimes) and path.post_jump_regimes.max() >= gen.n_regimes:
        raise DimensionMismatch("path states exceed generator dimension")
    n = gen.n_regimes
    nodes = np.concatenate([[0.0], path.jump_times, [path.horizon]])
    seg_states = np.concatenate([[path.initial_regime], path.post_jump_regimes]).astype(int)
    counts = np.zeros((len(nodes), n))
    comp = np.zeros((len(nodes), n))
    for k in range(len(nodes) - 1):
        i = seg_states[k]
        lam = gen.q[i].copy()
        lam[i] = 0.0
        comp[k + 1] = comp[k] + (nodes[k + 1] - nodes[k]) * lam
        counts[k + 1] = counts[k]
        if k + 1 <= len(path.jump_times):
            counts[k + 1, path.post_jump_regimes[k]] += 1
    return CountingRecord(nodes=nodes, counts_at_nodes=counts, comp_at_nodes=comp)
