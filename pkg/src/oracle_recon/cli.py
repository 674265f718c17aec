"""Command-line entry point: ``oracle-recon <subcommand> [flags]``.

Errors go to stderr as a single ``error: <Kind>: <message>`` line and the
process exits nonzero (2 for usage errors, 1 otherwise).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from contextlib import contextmanager
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .distance_oracle import DistanceOracle
from .errors import OracleReconError
from .experiment_harness import (
    MODES,
    ExperimentConfig,
    PlotSpec,
    as_dict,
    emit_plot,
    fit_scaling_exponent,
    header_for,
    run_sweep,
    sweep_csv_text,
)
from .graph_core import (
    GraphParams,
    gnp_generate,
    p_from_c,
    read_edgelist,
    write_edgelist,
)
from .reconstructor import DEFAULT_ALPHA, reconstruct, sample_landmarks
from .witness_lab import (
    degree_concentration_check,
    isolated_vertex_check,
    partition_census,
    profile_census,
    sample_non_edges,
    sphere_partition,
    witness_census,
)
from .witness_lab.witnesses import EXACT_CENSUS_MAX_N

SEED_ENV = "ORACLE_RECON_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _add_graph_args(sp, multi_n: bool = False) -> None:
    if multi_n:
        sp.add_argument("--n", type=int, nargs="+", required=True, help="vertex counts")
    else:
        sp.add_argument("--n", type=int, help="number of vertices")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--p", type=float, help="edge probability")
    g.add_argument("--c", type=float, help="p = c ln(n) / n")
    g.add_argument("--gamma", type=float, help="p = n^-gamma")
    sp.add_argument("--seed", type=int, default=0,
                    help=f"random seed (overridden by ${SEED_ENV})")
    sp.add_argument("--require-connected", type=_bool, default=True, metavar="{true,false}",
                    help="resample until connected (default true)")


def _add_output_args(sp, formats=("csv", "json")) -> None:
    sp.add_argument("--out", help="output path (default stdout)")
    sp.add_argument("--format", choices=formats, default=formats[0])


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="oracle-recon", allow_abbrev=False,
                 description="Graph reconstruction from distance queries on random graphs.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("gen", help="sample G(n, p) and write an edge list")
    _add_graph_args(sp)
    sp.add_argument("--out", help="edge list path (default stdout)")

    sp = sub.add_parser("reconstruct", help="run the landmark reconstruction on one graph")
    _add_graph_args(sp)
    sp.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    sp.add_argument("--graph", help="read the hidden graph from an edge list instead")
    sp.add_argument("--out", help="report JSON path (default stdout)")

    sp = sub.add_parser("witness-census", help="witness counts over sampled non-edges")
    _add_graph_args(sp)
    _add_output_args(sp)
    sp.add_argument("--pairs", type=int, default=100)
    sp.add_argument("--far-only", action="store_true", help="count only pairs at distance >= 3")
    sp.add_argument("--exact", action="store_true", help="enumerate every non-edge")
    sp.add_argument("--exact-census-max-n", type=int, default=EXACT_CENSUS_MAX_N)
    sp.add_argument("--threshold", type=float, default=0.3)
    sp.add_argument("--delta", type=float, help="degree scale (default: realised 2m/n)")

    sp = sub.add_parser("sphere-partition", help="A/B layer sizes around far pairs")
    _add_graph_args(sp)
    _add_output_args(sp)
    sp.add_argument("--u", type=int)
    sp.add_argument("--v", type=int)
    sp.add_argument("--pairs", type=int, default=10, help="far pairs to sample without --u/--v")
    sp.add_argument("--delta", type=float)
    sp.add_argument("--min-layer-size", type=int, default=8)

    sp = sub.add_parser("profile-census", help="(d(u,x), d(v,x)) histogram for one pair")
    _add_graph_args(sp)
    _add_output_args(sp)
    sp.add_argument("--u", type=int)
    sp.add_argument("--v", type=int)

    sp = sub.add_parser("concentration-check", help="Monte-Carlo degree/isolation checks")
    _add_graph_args(sp)
    _add_output_args(sp)
    sp.add_argument("--kind", choices=("degree", "isolated"), default="degree")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--delta", type=float, help="isolated kind: the Delta in p = 1/(N Delta)")

    sp = sub.add_parser("sweep", help="run a parameter sweep and write CSV/JSON")
    _add_graph_args(sp, multi_n=True)
    _add_output_args(sp)
    sp.add_argument("--mode", choices=MODES, default="reconstruct")
    sp.add_argument("--alpha", type=float, nargs="+", default=[DEFAULT_ALPHA])
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--pairs", type=int, default=100)
    sp.add_argument("--threshold", type=float, default=0.3)
    sp.add_argument("--min-layer-size", type=int, default=8)
    sp.add_argument("--timing", action="store_true",
                    help="record wall_ms (makes output run-dependent)")
    sp.add_argument("--plot", help="also write an SVG chart to this path")
    sp.add_argument("--fit", action="store_true",
                    help="print the log-log slope of distinct queries vs n to stderr")
    return ap


# ---------------------------------------------------------------- helpers

def _p(args, n: int) -> float:
    if args.p is not None:
        return args.p
    if args.c is not None:
        return p_from_c(n, args.c)
    if args.gamma is not None:
        return float(n) ** (-args.gamma)
    raise UsageError("one of --p, --c, --gamma is required")


def _need_n(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    return args.n


def _generate(args):
    n = _need_n(args)
    params = GraphParams(n, _p(args, n), args.seed, args.require_connected)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed).spawn(2)[0])
    g, resamples = gnp_generate(params, rng)
    logging.getLogger(__name__).info("generated n=%d m=%d after %d resamples",
                                     g.n, g.m, resamples)
    return g, params


def _aux_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed).spawn(2)[1])


@contextmanager
def _sink(path: str | None):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _emit_table(args, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    rows = [[(v.item() if isinstance(v, np.generic) else v) for v in r] for r in rows]
    with _sink(args.out) as fh:
        if args.format == "json":
            json.dump([dict(zip(header, r)) for r in rows], fh, indent=1)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)


def _far_pairs(g, rng, k: int) -> list[tuple[int, int]]:
    pairs = [(u, v) for u, v, du, _, _ in sample_non_edges(g, rng, k, far_only=True)
             if du[v] >= 3]
    if not pairs:
        raise OracleReconError("graph has no pair at distance >= 3")
    return pairs


def _pairs_from_args(args, g, k: int) -> list[tuple[int, int]]:
    if (args.u is None) != (args.v is None):
        raise UsageError("--u and --v must be given together")
    if args.u is not None:
        for x in (args.u, args.v):
            if not 0 <= x < g.n:
                raise UsageError(f"vertex {x} out of range [0, {g.n})")
        return [(args.u, args.v)]
    return _far_pairs(g, _aux_rng(args.seed), k)


# ------------------------------------------------------------ subcommands

def cmd_gen(args) -> None:
    g, _ = _generate(args)
    with _sink(args.out) as fh:
        write_edgelist(g, fh)


def cmd_reconstruct(args) -> None:
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            g = read_edgelist(fh)
        p = _p(args, g.n) if any(x is not None for x in (args.p, args.c, args.gamma)) \
            else (2.0 * g.m / (g.n * (g.n - 1)) if g.n > 1 else 1.0)
    else:
        g, params = _generate(args)
        p = params.p
    plan = sample_landmarks(g.n, p, args.alpha, _aux_rng(args.seed))
    report = reconstruct(DistanceOracle(g), plan)
    with _sink(args.out) as fh:
        json.dump(report.to_dict(), fh)
        fh.write("\n")
    if not report.exact:
        raise OracleReconError(f"reconstruction was not exact (seed {args.seed})")


def cmd_witness_census(args) -> None:
    g, params = _generate(args)
    census = witness_census(g, args.pairs, _aux_rng(args.seed), p=params.p, delta=args.delta,
                            threshold=args.threshold, far_only=args.far_only,
                            exact=args.exact, exact_max_n=args.exact_census_max_n)
    _emit_table(args, ["pair_id", "u", "v", "dist_uv", "witness_count", "density_ratio"],
                census.rows())
    if census.far_count:
        print(f"far pairs: {census.far_count}/{census.sampled}, "
              f"share with ratio >= {census.threshold}: {census.far_fraction_dense:.4f}",
              file=sys.stderr)


def cmd_sphere_partition(args) -> None:
    g, _ = _generate(args)
    pairs = _pairs_from_args(args, g, args.pairs)
    if len(pairs) == 1:
        sphere_partition(g, *pairs[0], args.delta)  # surfaces NearPairError early
    census = partition_census(g, pairs, args.delta, args.min_layer_size)
    _emit_table(args, ["pair_id", "k", "layer_size", "a_size", "b_size", "b1", "b2", "b3"],
                census.layer_rows)


def cmd_profile_census(args) -> None:
    g, _ = _generate(args)
    (u, v), = _pairs_from_args(args, g, 1)[:1]
    census = profile_census(g, u, v)
    _emit_table(args, ["i", "j", "count"], census.rows())


def cmd_concentration_check(args) -> None:
    if args.kind == "degree":
        n = _need_n(args)
        rep = degree_concentration_check(GraphParams(n, _p(args, n), args.seed), args.trials)
        rows = [(t, int(c), float(f), rep.budget)
                for t, (c, f) in enumerate(zip(rep.out_of_band, rep.fractions))]
        _emit_table(args, ["trial", "out_of_band", "fraction", "budget"], rows)
        print(f"mean fraction {rep.mean_fraction:.6g} vs budget {rep.budget:.6g}",
              file=sys.stderr)
    else:
        N = _need_n(args)
        if args.delta is None:
            raise UsageError("--delta is required for --kind isolated")
        rep = isolated_vertex_check(N, args.delta, args.trials, args.seed, p=args.p)
        rows = [(t, int(c), rep.bound) for t, c in enumerate(rep.non_isolated)]
        _emit_table(args, ["trial", "non_isolated", "bound"], rows)
        print(f"exceedances {rep.exceedances}/{rep.trials} "
              f"(bound {rep.bound:.6g}, failure bound {rep.failure_bound:.3g})",
              file=sys.stderr)


def cmd_sweep(args) -> None:
    cfg = ExperimentConfig(
        n_list=args.n, p=args.p, c=args.c, gamma=args.gamma, alpha_list=args.alpha,
        trials=args.trials, master_seed=args.seed, mode=args.mode, threads=args.threads,
        require_connected=args.require_connected, pair_samples=args.pairs,
        witness_threshold=args.threshold, min_layer_size=args.min_layer_size,
        record_timing=args.timing)
    if args.out is None:
        # Stream CSV to stdout; JSON needs the full list first.
        rows = run_sweep(cfg, out=None)
        if args.format == "csv":
            sys.stdout.write(sweep_csv_text(rows, cfg.mode))
        else:
            json.dump([as_dict(header_for(cfg.mode), r) for r in rows], sys.stdout, indent=1)
            sys.stdout.write("\n")
    else:
        rows = run_sweep(cfg, out=args.out, fmt=args.format)
    if args.fit and cfg.mode == "reconstruct":
        fit = fit_scaling_exponent(rows, "n", "queries_distinct_total")
        print(f"scaling exponent {fit.slope:.4f} (R^2 {fit.r2:.4f})", file=sys.stderr)
    if args.plot:
        _sweep_plot(cfg.mode, rows, args.plot)


def _sweep_plot(mode: str, rows: list, path: str) -> None:
    recs = [as_dict(header_for(mode), r) for r in rows]
    if mode == "reconstruct":
        spec = PlotSpec(kind="line", x_field="n", log_x=True, log_y=True,
                        y_fields=[("algorithm", lambda r: r["queries_distinct_total"]),
                                  ("n choose 2", lambda r: r["n"] * (r["n"] - 1) / 2)],
                        y_label="distinct queries")
    elif mode == "witness":
        spec = PlotSpec(kind="histogram", x_field="density_ratio")
    elif mode == "partition":
        spec = PlotSpec(kind="scatter", x_field="k",
                        y_fields=[("b fraction",
                                   lambda r: r["b_size"] / r["layer_size"]
                                   if r["layer_size"] else 0.0)])
    else:
        spec = PlotSpec(kind="histogram", x_field="fraction")
    emit_plot(recs, spec, path)


COMMANDS = {
    "gen": cmd_gen,
    "reconstruct": cmd_reconstruct,
    "witness-census": cmd_witness_census,
    "sphere-partition": cmd_sphere_partition,
    "profile-census": cmd_profile_census,
    "concentration-check": cmd_concentration_check,
    "sweep": cmd_sweep,
}


def _one_line(msg: str) -> str:
    return " ".join(str(msg).split())


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        env = os.environ.get(SEED_ENV)
        if env is not None and hasattr(args, "seed"):
            try:
                args.seed = int(env)
            except ValueError:
                raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
        COMMANDS[args.command](args)
    except BrokenPipeError:
        # Downstream closed the pipe (e.g. `| head`); nothing useful left to say.
        sys.stdout = open(os.devnull, "w")
        return 1
    except UsageError as e:
        print(f"error: UsageError: {_one_line(e)}", file=sys.stderr)
        return 2
    except (OracleReconError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {_one_line(e)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
