"""Witness sets, common spheres and distance-profile censuses.

A vertex ``x`` is a witness of the non-edge ``uv`` when
``|d(x, u) - d(x, v)| >= 2``: querying ``x`` against both endpoints is
enough to rule the edge out.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import DisconnectedGraphError
from ..graph_core import UNREACHABLE, Graph, bfs_distances, distance_matrix, realized_delta

DEFAULT_DENSITY_THRESHOLD = 0.3
EXACT_CENSUS_MAX_N = 2048


def pair_distances(g: Graph, u: int, v: int) -> tuple[np.ndarray, np.ndarray]:
    """BFS rows from ``u`` and ``v`` (int64), rejecting disconnected graphs."""
    du = bfs_distances(g, u).dist
    if np.any(du == UNREACHABLE):
        raise DisconnectedGraphError("witness analysis needs a connected graph")
    dv = bfs_distances(g, v).dist
    return du.astype(np.int64), dv.astype(np.int64)


def witness_mask(du: np.ndarray, dv: np.ndarray) -> np.ndarray:
    return np.abs(du - dv) >= 2


def density_scale(n: int, delta: float) -> float:
    """The reference witness count ``n / delta**2``."""
    return n / (delta * delta) if delta > 0 else math.inf


@dataclass
class WitnessProfile:
    u: int
    v: int
    dist_uv: int
    witnesses: np.ndarray
    count: int
    density_ratio: float


def witness_set(g: Graph, u: int, v: int, delta: float | None = None) -> WitnessProfile:
    """Exact witness set of the non-edge ``uv`` (two BFS runs).

    ``density_ratio`` is ``|W_uv| / (n / delta^2)`` with ``delta`` defaulting
    to the realised average degree ``2m/n``.
    """
    if u == v:
        raise ValueError("witnesses are defined for pairs of distinct vertices")
    if g.has_edge(u, v):
        raise ValueError(f"{u}-{v} is an edge; witnesses are defined only for non-edges")
    du, dv = pair_distances(g, u, v)
    return _profile(g, u, v, du, dv, realized_delta(g) if delta is None else delta)


def _profile(g, u, v, du, dv, delta) -> WitnessProfile:
    w = np.flatnonzero(witness_mask(du, dv))
    return WitnessProfile(int(u), int(v), int(du[v]), w, int(w.size),
                          w.size / density_scale(g.n, delta))


def common_sphere(g: Graph, u: int, v: int, k: int) -> np.ndarray:
    """Vertices at distance exactly ``k`` from the nearer of ``u`` and ``v``."""
    du, dv = pair_distances(g, u, v)
    return np.flatnonzero(np.minimum(du, dv) == k)


@dataclass
class ProfileCensus:
    """Counts ``|{x : d(u,x) = i and d(v,x) = j}|`` keyed by ``(i, j)``."""

    u: int
    v: int
    dist_uv: int
    cells: dict[tuple[int, int], int]

    def cell(self, i: int, j: int) -> int:
        return self.cells.get((i, j), 0)

    @property
    def total(self) -> int:
        return sum(self.cells.values())

    def row_sums(self) -> dict[int, int]:
        out: Counter = Counter()
        for (i, _), c in self.cells.items():
            out[i] += c
        return dict(out)

    def col_sums(self) -> dict[int, int]:
        out: Counter = Counter()
        for (_, j), c in self.cells.items():
            out[j] += c
        return dict(out)

    def rows(self) -> list[tuple[int, int, int]]:
        return [(i, j, c) for (i, j), c in sorted(self.cells.items())]


def profile_census(g: Graph, u: int, v: int) -> ProfileCensus:
    du, dv = pair_distances(g, u, v)
    keys, counts = np.unique(np.column_stack([du, dv]), axis=0, return_counts=True)
    cells = {(int(i), int(j)): int(c) for (i, j), c in zip(keys, counts)}
    return ProfileCensus(int(u), int(v), int(du[v]), cells)


def near_pair_count(g: Graph) -> int:
    """Number of unordered pairs at distance 1 or 2.

    Sums ``|N^{<=2}(x) \\ {x}|`` over all vertices and halves the total.
    """
    adj = g.matrix.astype(bool)
    reach = (adj @ adj + adj).tocsr()
    reach.setdiag(False)
    reach.eliminate_zeros()
    return int(reach.nnz // 2)


@dataclass
class WitnessCensus:
    """Witness counts over a sample of non-adjacent pairs.

    Pair data are kept column-wise (``u``, ``v``, ``dist_uv``, ``count``,
    ``density_ratio``) in sampling order.
    """

    n: int
    p: float | None
    delta_nominal: float | None
    delta_realized: float
    delta_used: float
    threshold: float
    exact: bool
    u: np.ndarray
    v: np.ndarray
    dist_uv: np.ndarray
    count: np.ndarray
    density_ratio: np.ndarray
    attempts: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def sampled(self) -> int:
        return int(self.u.size)

    @property
    def near_count(self) -> int:
        return int(np.count_nonzero(self.dist_uv <= 2))

    @property
    def far_count(self) -> int:
        return self.sampled - self.near_count

    @property
    def near_fraction(self) -> float:
        return self.near_count / self.sampled if self.sampled else 0.0

    @property
    def far_fraction(self) -> float:
        return self.far_count / self.sampled if self.sampled else 0.0

    @property
    def far_mask(self) -> np.ndarray:
        return self.dist_uv >= 3

    @property
    def far_fraction_dense(self) -> float:
        """Share of far pairs whose density ratio reaches ``threshold``."""
        far = self.far_mask
        if not far.any():
            return 0.0
        return float(np.mean(self.density_ratio[far] >= self.threshold))

    def far_quantiles(self, qs=(0.05, 0.25, 0.5, 0.75, 0.95)) -> dict[float, float]:
        far = self.density_ratio[self.far_mask]
        if far.size == 0:
            return {}
        return {q: float(np.quantile(far, q)) for q in qs}

    def rows(self):
        """CSV rows ``(pair_id, u, v, dist_uv, witness_count, density_ratio)``."""
        for i in range(self.sampled):
            yield (i, int(self.u[i]), int(self.v[i]), int(self.dist_uv[i]),
                   int(self.count[i]), float(self.density_ratio[i]))


def sample_non_edges(g: Graph, rng: np.random.Generator, k: int, far_only: bool = False,
                     max_attempts: int | None = None):
    """Rejection-sample distinct non-adjacent pairs, yielding ``(u, v, du, dv, attempts)``.

    Uniform vertex pairs are drawn and edges rejected, which is unbiased over
    non-edges. With ``far_only`` the ``k`` quota counts only pairs at
    distance >= 3; nearer pairs are still yielded. Sampling stops early once
    every non-edge has been seen or ``max_attempts`` draws were spent.
    """
    n = g.n
    available = n * (n - 1) // 2 - g.m
    if max_attempts is None:
        max_attempts = 1000 * max(k, 1) + 10 * n
    seen: set[tuple[int, int]] = set()
    got = attempts = 0
    while got < k and len(seen) < available and attempts < max_attempts:
        attempts += 1
        u, v = (int(x) for x in rng.integers(0, n, size=2))
        if u == v:
            continue
        u, v = min(u, v), max(u, v)
        if (u, v) in seen or g.has_edge(u, v):
            continue
        seen.add((u, v))
        du, dv = pair_distances(g, u, v)
        if not far_only or du[v] >= 3:
            got += 1
        yield u, v, du, dv, attempts


def witness_census(g: Graph, n_pairs: int, rng: np.random.Generator, *,
                   p: float | None = None, delta: float | None = None,
                   threshold: float = DEFAULT_DENSITY_THRESHOLD, far_only: bool = False,
                   exact: bool = False, exact_max_n: int = EXACT_CENSUS_MAX_N,
                   max_attempts: int | None = None) -> WitnessCensus:
    """Witness-density census of ``g``.

    Samples ``n_pairs`` non-adjacent pairs (or, with ``far_only``, samples
    until ``n_pairs`` of them are at distance >= 3). ``exact`` instead
    enumerates every non-edge and is only allowed for ``n <= exact_max_n``.
    ``delta`` defaults to the realised average degree.
    """
    if n_pairs < 1 and not exact:
        raise ValueError("pair sample size must be at least 1")
    d_real = realized_delta(g)
    d_used = d_real if delta is None else delta
    d_nom = None if p is None else (g.n - 1) * p
    scale = density_scale(g.n, d_used)
    if exact:
        if g.n > exact_max_n:
            raise ValueError(f"exact census is limited to n <= {exact_max_n}, got n={g.n}")
        us, vs, dist, cnt = _exact_counts(g)
        attempts = 0
    else:
        cols: list[tuple[int, int, int, int]] = []
        attempts = 0
        for u, v, du, dv, attempts in sample_non_edges(g, rng, n_pairs, far_only, max_attempts):
            cols.append((u, v, int(du[v]), int(np.count_nonzero(witness_mask(du, dv)))))
        arr = np.array(cols, dtype=np.int64).reshape(-1, 4)
        us, vs, dist, cnt = arr.T
    return WitnessCensus(
        n=g.n, p=p, delta_nominal=d_nom, delta_realized=d_real, delta_used=d_used,
        threshold=threshold, exact=exact, u=us, v=vs, dist_uv=dist, count=cnt,
        density_ratio=cnt / scale, attempts=attempts)


def _exact_counts(g: Graph):
    D = distance_matrix(g).astype(np.int64)
    if np.any(D == UNREACHABLE):
        raise DisconnectedGraphError("witness analysis needs a connected graph")
    us, vs, dist, cnt = [], [], [], []
    for u in range(g.n - 1):
        others = np.arange(u + 1, g.n)
        others = others[D[u, others] >= 2]
        if others.size == 0:
            continue
        # D is symmetric, so column u of the witness test is row u.
        c = np.count_nonzero(np.abs(D[others] - D[u]) >= 2, axis=1)
        us.append(np.full(others.size, u))
        vs.append(others)
        dist.append(D[u, others])
        cnt.append(c)
    if not us:
        e = np.empty(0, dtype=np.int64)
        return e, e, e, e
    return tuple(np.concatenate(x).astype(np.int64) for x in (us, vs, dist, cnt))
