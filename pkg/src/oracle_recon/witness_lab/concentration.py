"""Chernoff tail bounds and Monte-Carlo checks of degree concentration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..graph_core import GraphParams, gnp_edges

TWO_SIDED = "two_sided"
UPPER = "upper"


def chernoff_tail(delta: float, mu: float, form: str = TWO_SIDED) -> float:
    """Chernoff bound for a sum of independent 0/1 variables with mean ``mu``.

    ``two_sided``: P(|X - mu| >= delta mu) <= 2 exp(-delta^2 mu / 3), 0 < delta < 1.
    ``upper``:     P(X >= (1 + delta) mu) <= exp(-delta^2 mu / (2 + delta)), delta >= 0.
    """
    if mu < 0:
        raise ValueError(f"mu must be non-negative, got {mu}")
    if form == TWO_SIDED:
        if not 0.0 < delta < 1.0:
            raise ValueError(f"two-sided bound needs 0 < delta < 1, got {delta}")
        return 2.0 * math.exp(-delta * delta * mu / 3.0)
    if form == UPPER:
        if delta < 0.0:
            raise ValueError(f"upper bound needs delta >= 0, got {delta}")
        return math.exp(-delta * delta * mu / (2.0 + delta))
    raise ValueError(f"unknown form {form!r}; expected {TWO_SIDED!r} or {UPPER!r}")


def _trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


@dataclass
class DegreeConcentrationReport:
    n: int
    p: float
    delta: float
    trials: int
    out_of_band: np.ndarray     # per trial: vertices with degree outside [delta/2, 3 delta/2]
    fractions: np.ndarray
    budget: float               # per-vertex bound 2 exp(-delta / 12)

    @property
    def mean_fraction(self) -> float:
        return float(self.fractions.mean())

    @property
    def expected_out_of_band(self) -> float:
        return self.n * self.budget

    def share_below(self, factor: float = 10.0) -> float:
        """Share of trials whose out-of-band fraction is below ``factor * budget``."""
        return float(np.mean(self.fractions < factor * self.budget))


def degree_concentration_check(params: GraphParams, trials: int) -> DegreeConcentrationReport:
    """Count vertices whose degree leaves ``[delta/2, 3 delta/2]`` in unconditioned G(n, p)."""
    delta = params.delta
    if delta < 1.0:
        raise ValueError(f"degree check needs p (n - 1) >= 1, got {delta:.4g}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    n = params.n
    out = np.empty(trials, dtype=np.int64)
    for t, rng in enumerate(_trial_rngs(params.seed, trials)):
        lo, hi = gnp_edges(n, params.p, rng)
        deg = np.bincount(lo, minlength=n) + np.bincount(hi, minlength=n)
        out[t] = np.count_nonzero((deg < 0.5 * delta) | (deg > 1.5 * delta))
    return DegreeConcentrationReport(n, params.p, delta, trials, out, out / n,
                                     chernoff_tail(0.5, delta, TWO_SIDED))


@dataclass
class IsolatedVertexReport:
    N: int
    delta: float
    p: float
    trials: int
    non_isolated: np.ndarray
    bound: float                # 4 N / delta
    failure_bound: float        # 2 exp(-N / (3 delta))

    @property
    def exceedances(self) -> int:
        return int(np.count_nonzero(self.non_isolated > self.bound))

    @property
    def exceedance_frequency(self) -> float:
        return self.exceedances / self.trials


def isolated_vertex_check(N: int, delta: float, trials: int, seed: int = 0,
                          p: float | None = None) -> IsolatedVertexReport:
    """Non-isolated vertex counts of G(N, p) against the ``4N/delta`` bound.

    ``p`` defaults to ``1 / (N delta)``, the largest value the bound covers.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if p is None:
        p = 1.0 / (N * delta)
    if not 0.0 <= p <= min(1.0, 1.0 / (N * delta)):
        raise ValueError(f"p={p} outside [0, 1/(N delta)]")
    counts = np.empty(trials, dtype=np.int64)
    for t, rng in enumerate(_trial_rngs(seed, trials)):
        lo, hi = gnp_edges(N, p, rng)
        counts[t] = np.unique(np.concatenate([lo, hi])).size
    return IsolatedVertexReport(N, delta, p, trials, counts, 4.0 * N / delta,
                                2.0 * math.exp(-N / (3.0 * delta)))
