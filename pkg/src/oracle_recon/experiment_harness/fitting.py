"""Least-squares line fits, including log-log scaling exponents."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r2: float
    points: int

    def predict(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def fit_line(xs: Sequence[float], ys: Sequence[float]) -> LineFit:
    """Ordinary least squares ``y = slope * x + intercept``.

    R^2 is 1.0 when y is constant and exactly fitted.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-d and of equal length")
    if x.size < 2 or np.ptp(x) == 0:
        raise ValueError("need at least two distinct x values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("fit inputs must be finite")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LineFit(float(slope), float(intercept), r2, int(x.size))


def _field(rec, name):
    return rec[name] if isinstance(rec, dict) else getattr(rec, name)


def cell_means(records: Iterable, x_field: str, y_field: str) -> tuple[np.ndarray, np.ndarray]:
    """Mean of ``y_field`` grouped by ``x_field``, sorted by x."""
    groups: dict[float, list[float]] = defaultdict(list)
    for r in records:
        groups[float(_field(r, x_field))].append(float(_field(r, y_field)))
    xs = np.array(sorted(groups))
    ys = np.array([np.mean(groups[x]) for x in xs])
    return xs, ys


def fit_scaling_exponent(records: Iterable, x_field: str = "n",
                         y_field: str = "queries_distinct_total") -> LineFit:
    """Slope of ``log y`` against ``log x`` over per-cell means.

    Needs at least three distinct positive x values with positive means.
    """
    xs, ys = cell_means(records, x_field, y_field)
    keep = (xs > 0) & (ys > 0)
    xs, ys = xs[keep], ys[keep]
    if xs.size < 3:
        raise ValueError(f"scaling fit needs >= 3 distinct positive {x_field} values, "
                         f"got {xs.size}")
    return fit_line(np.log(xs), np.log(ys))
