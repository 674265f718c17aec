"""Sweep configuration, per-trial seeding and the CSV record schema."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from ..graph_core import p_from_c

log = logging.getLogger(__name__)

MODES = ("reconstruct", "witness", "partition", "concentration")


@dataclass
class ExperimentConfig:
    """One sweep: the product of ``n_list`` and (for reconstruction) ``alpha_list``.

    Exactly one of ``p``, ``c`` (``p = c ln n / n``) and ``gamma``
    (``p = n ** -gamma``) fixes the edge probability. The analysed regime
    corresponds to ``gamma`` in (1/2, 1).
    """

    n_list: list[int]
    p: float | None = None
    c: float | None = None
    gamma: float | None = None
    alpha_list: list[float] = field(default_factory=lambda: [3.0])
    trials: int = 1
    master_seed: int = 0
    mode: str = "reconstruct"
    out_dir: Path | str | None = None
    threads: int = 1
    require_connected: bool = True
    max_resamples: int = 100
    pair_samples: int = 100
    witness_threshold: float = 0.3
    min_layer_size: int = 8
    record_timing: bool = False

    def __post_init__(self):
        given = [x is not None for x in (self.p, self.c, self.gamma)]
        if sum(given) != 1:
            raise ValueError("exactly one of p, c, gamma must be set")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        if any(a <= 0 for a in self.alpha_list):
            raise ValueError("alpha values must be positive")
        if self.gamma is not None and not 0.5 < self.gamma < 1.0:
            log.warning("gamma=%s is outside (1/2, 1), where the query bound is stated",
                        self.gamma)
        for n in self.n_list:
            p = self.p_for(n)
            if not 0.0 < p <= 1.0:
                raise ValueError(f"derived p={p} for n={n} is outside (0, 1]")

    def p_for(self, n: int) -> float:
        if self.p is not None:
            return float(self.p)
        if self.c is not None:
            return p_from_c(n, self.c)
        return float(n) ** (-self.gamma)

    @property
    def c_or_gamma(self) -> float | None:
        return self.c if self.c is not None else self.gamma

    def cells(self) -> list[tuple[int, float | None]]:
        """``(n, alpha)`` grid in a fixed order; alpha is None outside reconstruction."""
        if self.mode == "reconstruct":
            return [(n, a) for n in self.n_list for a in self.alpha_list]
        return [(n, None) for n in self.n_list]


def trial_seed(master_seed: int, cell_index: int, trial_index: int) -> int:
    """64-bit seed derived from ``(master, cell, trial)``; cells replay independently."""
    ss = np.random.SeedSequence([master_seed, cell_index, trial_index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ExperimentRecord:
    trial_id: int
    seed: int
    n: int
    p: float
    c_or_gamma: float | None
    delta_nominal: float
    delta_realized: float
    s: int
    alpha: float
    queries_phase1: int
    queries_phase2: int
    queries_distinct_total: int
    pseudo_edges: int
    true_edges: int
    residual: int
    exact: bool
    fallback_used: bool
    resamples: int
    wall_ms: float | None

    @classmethod
    def header(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def validate(self) -> None:
        if not self.exact:
            raise ValueError(f"record {self.trial_id} is not exact (seed {self.seed})")
        if self.residual != self.pseudo_edges - self.true_edges or self.residual < 0:
            raise ValueError(f"record {self.trial_id} has inconsistent residual")
        if self.queries_distinct_total > self.n * (self.n - 1) // 2:
            raise ValueError(f"record {self.trial_id} exceeds the n choose 2 baseline")

    def row(self) -> list:
        return [_fmt(v) for v in asdict(self).values()]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)
