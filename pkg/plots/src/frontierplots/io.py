"""Readers for the CSV/JSON artifacts produced by the regimefrontier CLI.

Only the published file contract is consumed here; there is no shared code
with the solver package, so these plots work on any files with the same
columns.
"""
import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import EmptySeries, MissingColumn, NegativeVariance


@dataclass(frozen=True)
class FrontierSeries:
    """One frontier curve: target means with their variances, sorted by z."""

    label: str
    z: np.ndarray
    variance: np.ndarray
    std_dev: np.ndarray

    def __post_init__(self):
        if self.z.size == 0:
            raise ValueError("a frontier series needs at least one row")
        if np.any(np.diff(self.z) < 0):
            raise ValueError("frontier rows must be sorted by z")
        if np.any(self.variance < 0):
            raise ValueError("variance must be nonnegative")


@dataclass(frozen=True)
class SolutionTable:
    """Backward-solution trajectories keyed by regime index."""

    regimes: tuple[int, ...]
    t: dict
    psi: dict
    p: dict
    g: dict


def _read_rows(path, required):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumn(path, column)
        rows = list(reader)
    if not rows:
        raise EmptySeries(path)
    return rows


def _series_label(path: Path) -> str:
    """Label from the sibling JSON header when present, else the file stem."""
    sibling = path.with_suffix(".json")
    if sibling.exists():
        try:
            header = json.loads(sibling.read_text())
        except (OSError, json.JSONDecodeError):
            return path.stem
        if isinstance(header, dict) and isinstance(header.get("density"),
                                                   (int, float)):
            return f"f = {header['density']:g}"
    return path.stem


def read_frontier_csv(path) -> FrontierSeries:
    """Load one frontier curve, sorting rows by target mean."""
    path = Path(path)
    rows = _read_rows(path, ("z", "variance", "std_dev"))
    z = np.array([float(r["z"]) for r in rows])
    variance = np.array([float(r["variance"]) for r in rows])
    std_dev = np.array([float(r["std_dev"]) for r in rows])
    if np.any(variance < 0):
        raise NegativeVariance(path, float(variance[variance < 0][0]))
    order = np.argsort(z, kind="stable")
    return FrontierSeries(label=_series_label(path), z=z[order],
                          variance=variance[order], std_dev=std_dev[order])


def read_solutions_csv(path) -> SolutionTable:
    """Load psi/p/g trajectories grouped by regime and sorted in time."""
    path = Path(path)
    rows = _read_rows(path, ("t", "regime", "psi", "p", "g"))
    by_regime = {}
    for r in rows:
        by_regime.setdefault(int(r["regime"]), []).append(
            (float(r["t"]), float(r["psi"]), float(r["p"]), float(r["g"])))
    regimes = tuple(sorted(by_regime))
    t, psi, p, g = {}, {}, {}, {}
    for i in regimes:
        data = np.array(sorted(by_regime[i]))
        t[i], psi[i], p[i], g[i] = data.T
    return SolutionTable(regimes=regimes, t=t, psi=psi, p=p, g=g)
