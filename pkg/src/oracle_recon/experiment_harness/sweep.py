"""Parallel sweep runner with deterministic CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

import numpy as np

from ..distance_oracle import DistanceOracle
from ..errors import InexactReconstructionError
from ..graph_core import GraphParams, gnp_generate, realized_delta
from ..reconstructor import reconstruct, sample_landmarks
from ..witness_lab import (
    degree_concentration_check,
    partition_census,
    sample_non_edges,
    witness_census,
)
from .config import ExperimentConfig, ExperimentRecord, _fmt, trial_seed

log = logging.getLogger(__name__)

WITNESS_HEADER = ["trial_id", "seed", "n", "p", "pair_id", "u", "v", "dist_uv",
                  "witness_count", "density_ratio"]
PARTITION_HEADER = ["trial_id", "seed", "n", "p", "pair_id", "k", "layer_size",
                    "a_size", "b_size", "b1", "b2", "b3"]
CONCENTRATION_HEADER = ["trial_id", "seed", "n", "p", "delta", "out_of_band",
                        "fraction", "budget"]


@dataclass(frozen=True)
class Trial:
    trial_id: int
    cell_index: int
    trial_index: int
    n: int
    alpha: float | None
    seed: int


def plan_trials(cfg: ExperimentConfig) -> list[Trial]:
    out = []
    for ci, (n, alpha) in enumerate(cfg.cells()):
        for t in range(cfg.trials):
            out.append(Trial(len(out), ci, t, n, alpha,
                             trial_seed(cfg.master_seed, ci, t)))
    return out


def _streams(seed: int, k: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(k)]


def _graph(cfg: ExperimentConfig, trial: Trial, rng):
    params = GraphParams(trial.n, cfg.p_for(trial.n), trial.seed,
                         cfg.require_connected, cfg.max_resamples)
    return gnp_generate(params, rng)


def run_reconstruct_trial(cfg: ExperimentConfig, trial: Trial) -> ExperimentRecord:
    g_rng, l_rng = _streams(trial.seed, 2)
    p = cfg.p_for(trial.n)
    g, resamples = _graph(cfg, trial, g_rng)
    rep = reconstruct(DistanceOracle(g), sample_landmarks(trial.n, p, trial.alpha, l_rng))
    if not rep.exact:
        raise InexactReconstructionError(
            f"inexact reconstruction in trial {trial.trial_id} (seed {trial.seed})",
            seed=trial.seed)
    rec = ExperimentRecord(
        trial_id=trial.trial_id, seed=trial.seed, n=trial.n, p=p,
        c_or_gamma=cfg.c_or_gamma, delta_nominal=(trial.n - 1) * p,
        delta_realized=realized_delta(g), s=rep.s, alpha=float(trial.alpha),
        queries_phase1=rep.queries_phase1, queries_phase2=rep.queries_phase2,
        queries_distinct_total=rep.queries_distinct_total,
        pseudo_edges=rep.pseudo_edge_count, true_edges=g.m,
        residual=rep.pseudo_edge_count - g.m, exact=rep.exact,
        fallback_used=rep.fallback_used, resamples=resamples,
        wall_ms=rep.wall_ms if cfg.record_timing else None)
    rec.validate()
    return rec


def run_witness_trial(cfg: ExperimentConfig, trial: Trial) -> list[list]:
    g_rng, s_rng = _streams(trial.seed, 2)
    p = cfg.p_for(trial.n)
    g, _ = _graph(cfg, trial, g_rng)
    census = witness_census(g, cfg.pair_samples, s_rng, p=p, threshold=cfg.witness_threshold)
    return [[trial.trial_id, trial.seed, trial.n, p, *row] for row in census.rows()]


def run_partition_trial(cfg: ExperimentConfig, trial: Trial) -> list[list]:
    g_rng, s_rng = _streams(trial.seed, 2)
    p = cfg.p_for(trial.n)
    g, _ = _graph(cfg, trial, g_rng)
    pairs = [(u, v) for u, v, du, _, _ in
             sample_non_edges(g, s_rng, cfg.pair_samples, far_only=True) if du[v] >= 3]
    if not pairs:
        return []
    census = partition_census(g, pairs, min_layer_size=cfg.min_layer_size)
    return [[trial.trial_id, trial.seed, trial.n, p, *row] for row in census.layer_rows]


def run_concentration_trial(cfg: ExperimentConfig, trial: Trial) -> list[list]:
    p = cfg.p_for(trial.n)
    rep = degree_concentration_check(GraphParams(trial.n, p, trial.seed), 1)
    return [[trial.trial_id, trial.seed, trial.n, p, rep.delta,
             int(rep.out_of_band[0]), float(rep.fractions[0]), rep.budget]]


_RUNNERS: dict[str, tuple[Callable, list[str]]] = {
    "reconstruct": (run_reconstruct_trial, ExperimentRecord.header()),
    "witness": (run_witness_trial, WITNESS_HEADER),
    "partition": (run_partition_trial, PARTITION_HEADER),
    "concentration": (run_concentration_trial, CONCENTRATION_HEADER),
}


def header_for(mode: str) -> list[str]:
    return _RUNNERS[mode][1]


def iter_sweep(cfg: ExperimentConfig) -> Iterator[list]:
    """Yield output rows in ``(cell, trial)`` order, whatever the thread count.

    Reconstruction rows are :class:`ExperimentRecord` objects; other modes
    yield plain lists matching :func:`header_for`.
    """
    runner = _RUNNERS[cfg.mode][0]
    trials = plan_trials(cfg)

    def one(trial):
        return runner(cfg, trial)

    if cfg.threads <= 1:
        results = map(one, trials)
        for r in results:
            yield from (r if isinstance(r, list) else [r])
        return
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        # map() hands results back in submission order.
        for r in pool.map(one, trials):
            yield from (r if isinstance(r, list) else [r])


def _cells(row) -> list[str]:
    if isinstance(row, ExperimentRecord):
        return row.row()
    return [_fmt(v) for v in row]


def as_dict(header: list[str], row) -> dict:
    if isinstance(row, ExperimentRecord):
        return {k: getattr(row, k) for k in header}
    return {k: (v.item() if isinstance(v, np.generic) else v) for k, v in zip(header, row)}


def default_output(cfg: ExperimentConfig, fmt: str = "csv") -> Path | None:
    if cfg.out_dir is None:
        return None
    return Path(cfg.out_dir) / f"sweep_{cfg.mode}.{fmt}"


def run_sweep(cfg: ExperimentConfig, out: Path | str | None = None, fmt: str = "csv") -> list:
    """Run every trial, writing rows as they complete (CSV) or at the end (JSON).

    Output goes to ``out`` or, failing that, ``<out_dir>/sweep_<mode>.<fmt>``.
    Any inexact reconstruction aborts the sweep.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(out) if out is not None else default_output(cfg, fmt)
    header = header_for(cfg.mode)
    rows: list = []
    fh: io.TextIOBase | None = None
    writer = None
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = open(path, "w", encoding="utf-8", newline="")
        if fmt == "csv":
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
    try:
        for row in iter_sweep(cfg):
            rows.append(row)
            if writer is not None:
                writer.writerow(_cells(row))
                fh.flush()
        if fh is not None and fmt == "json":
            json.dump([as_dict(header, r) for r in rows], fh, indent=1)
            fh.write("\n")
    finally:
        if fh is not None:
            fh.close()
    log.info("sweep %s: %d rows%s", cfg.mode, len(rows), f" -> {path}" if path else "")
    return rows


def sweep_csv_text(rows: list, mode: str) -> str:
    """Render rows exactly as :func:`run_sweep` writes them."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header_for(mode))
    for r in rows:
        w.writerow(_cells(r))
    return buf.getvalue()
