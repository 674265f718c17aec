"""Hidden-graph representation, generators and breadth-first search.

Vertices are the dense integers ``0..n-1``. Adjacency is stored in CSR form
(``indptr``/``indices``) with each neighbour list sorted, which keeps BFS
vectorisable and makes two graphs with the same edge set compare equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, NamedTuple

import numpy as np
from scipy import sparse

from .errors import ConnectivityError, DisconnectedGraphError

#: Distance assigned to vertices a BFS cannot reach. Larger than any hop count.
UNREACHABLE = np.iinfo(np.int32).max

DIST_DTYPE = np.int32

# BFS switches to a mat-vec step once the frontier exceeds n / ratio.
_BOTTOM_UP_RATIO = 16


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``."""

    __slots__ = ("n", "m", "indptr", "indices", "_matrix", "_edges")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        # Trusted constructor: callers go through from_edges or the generators.
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.m = int(indices.size // 2)
        self._matrix = None
        self._edges = None

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build a graph from an iterable of ``(u, v)`` pairs.

        Duplicate pairs (in either orientation) are merged; self-loops and
        out-of-range ids raise ``ValueError``.
        """
        if n < 0:
            raise ValueError(f"vertex count must be non-negative, got {n}")
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("edges must be a sequence of (u, v) pairs")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint out of range for n={n}")
        if np.any(arr[:, 0] == arr[:, 1]):
            raise ValueError("self-loops are not allowed")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        return cls._from_canonical(n, lo, hi)

    @classmethod
    def _from_canonical(cls, n: int, lo: np.ndarray, hi: np.ndarray) -> "Graph":
        keys = np.unique(np.concatenate([lo * n + hi, hi * n + lo]))
        rows = keys // n if n else keys
        cols = (keys % n).astype(np.int32) if n else keys.astype(np.int32)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        return cls(n, indptr, cols)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(u).tolist() for u in range(self.n)]

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < nbrs.size and nbrs[i] == v)

    def edges(self) -> np.ndarray:
        """All edges as an ``(m, 2)`` array with ``u < v``, sorted ascending."""
        if self._edges is None:
            rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
            cols = self.indices.astype(np.int64)
            keep = rows < cols
            e = np.column_stack([rows[keep], cols[keep]])
            e.setflags(write=False)
            self._edges = e
        return self._edges

    def edge_keys(self) -> np.ndarray:
        """Sorted ``u * n + v`` keys (``u < v``) for vectorised membership tests."""
        e = self.edges()
        return e[:, 0] * self.n + e[:, 1]

    @property
    def matrix(self) -> sparse.csr_matrix:
        """Adjacency as an int32 CSR matrix (built lazily)."""
        if self._matrix is None:
            data = np.ones(self.indices.size, dtype=np.int32)
            self._matrix = sparse.csr_matrix(
                (data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._matrix

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class DistanceVector:
    source: int
    dist: np.ndarray

    def __post_init__(self):
        self.dist.setflags(write=False)

    @property
    def reachable(self) -> np.ndarray:
        return self.dist != UNREACHABLE


@dataclass(frozen=True)
class GraphParams:
    """Parameters of one G(n, p) draw.

    ``p`` can also be given as ``c * ln(n) / n`` via :meth:`from_c` or as
    ``n ** -gamma`` via :meth:`from_gamma`. The proven regime is roughly
    ``2000 ln(n)/n <= p <= n**(-1/2 - eps)``; it is not enforced here.
    """

    n: int
    p: float
    seed: int = 0
    require_connected: bool = True
    max_resamples: int = 100

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.max_resamples < 0:
            raise ValueError("max_resamples must be non-negative")

    @property
    def delta(self) -> float:
        """Expected average degree (n - 1) p."""
        return (self.n - 1) * self.p

    @classmethod
    def from_c(cls, n: int, c: float, **kw) -> "GraphParams":
        return cls(n=n, p=p_from_c(n, c), **kw)

    @classmethod
    def from_gamma(cls, n: int, gamma: float, **kw) -> "GraphParams":
        return cls(n=n, p=float(n) ** (-gamma), **kw)


def p_from_c(n: int, c: float) -> float:
    if n < 2:
        raise ValueError("c-parametrisation needs n >= 2")
    p = c * math.log(n) / n
    if not 0.0 < p <= 1.0:
        raise ValueError(f"c={c} gives p={p:.4g} outside (0, 1] for n={n}")
    return p


def _pair_from_index(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Pairs i < j enumerated as k = j(j-1)/2 + i.
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * k.astype(np.float64))) / 2.0).astype(np.int64)
    j -= (j * (j - 1) // 2 > k)
    j += ((j + 1) * j // 2 <= k)
    i = k - j * (j - 1) // 2
    return i, j


def _bernoulli_positions(total: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices in ``range(total)`` kept independently with probability p."""
    if total <= 0 or p <= 0.0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(total, dtype=np.int64)
    chunks = []
    pos = -1
    expected = total * p
    batch = int(expected + 6.0 * math.sqrt(expected) + 64)
    while True:
        cs = pos + np.cumsum(rng.geometric(p, size=batch))
        if cs[-1] >= total:
            chunks.append(cs[cs < total])
            break
        chunks.append(cs)
        pos = int(cs[-1])
        batch = int((total - pos) * p + 6.0 * math.sqrt((total - pos) * p) + 64)
    return np.concatenate(chunks)


def gnp_edges(n: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Endpoints ``(lo, hi)`` of one G(n, p) draw, without building a Graph."""
    return _pair_from_index(_bernoulli_positions(n * (n - 1) // 2, p, rng))


def gnp_generate(params: GraphParams, rng: np.random.Generator | None = None
                 ) -> tuple[Graph, int]:
    """Sample G(n, p); returns the graph and the number of resamples used.

    With ``require_connected`` the draw is repeated on the same RNG stream
    until connected, which samples G(n, p) conditioned on connectivity.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    resamples = 0
    while True:
        lo, hi = gnp_edges(params.n, params.p, rng)
        g = Graph._from_canonical(params.n, lo, hi)
        if not params.require_connected or is_connected(g):
            return g, resamples
        if resamples >= params.max_resamples:
            threshold = math.log(params.n) / params.n if params.n > 1 else 0.0
            raise ConnectivityError(
                f"no connected G(n={params.n}, p={params.p:.4g}) after "
                f"{resamples} resamples; p is {params.p / threshold:.3g}x the "
                f"connectivity threshold ln(n)/n={threshold:.4g}"
                if threshold else
                f"no connected G(n={params.n}, p={params.p}) after {resamples} resamples")
        resamples += 1


def path_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("path_graph needs n >= 1")
    i = np.arange(n - 1)
    return Graph.from_edges(n, np.column_stack([i, i + 1]))


def cycle_graph(n: int) -> Graph:
    if n < 3:
        raise ValueError(f"cycle_graph needs n >= 3, got {n}")
    i = np.arange(n)
    return Graph.from_edges(n, np.column_stack([i, (i + 1) % n]))


def complete_graph(n: int) -> Graph:
    if n < 1:
        raise ValueError("complete_graph needs n >= 1")
    iu = np.triu_indices(n, 1)
    return Graph.from_edges(n, np.column_stack(iu))


def bfs_distances(g: Graph, src: int) -> DistanceVector:
    """Hop counts from ``src``; unreachable vertices get ``UNREACHABLE``."""
    if not 0 <= src < g.n:
        raise IndexError(f"source {src} out of range for n={g.n}")
    indptr, indices = g.indptr, g.indices
    dist = np.full(g.n, UNREACHABLE, dtype=DIST_DTYPE)
    dist[src] = 0
    frontier = np.array([src], dtype=np.int64)
    level = 0
    while frontier.size:
        level += 1
        if frontier.size * _BOTTOM_UP_RATIO > g.n:
            # Wide frontier: one sparse mat-vec beats gathering every slice.
            mask = np.zeros(g.n, dtype=np.int32)
            mask[frontier] = 1
            hit = (g.matrix @ mask) > 0
            frontier = np.flatnonzero(hit & (dist == UNREACHABLE))
            dist[frontier] = level
            continue
        starts = indptr[frontier]
        lengths = indptr[frontier + 1] - starts
        total = int(lengths.sum())
        if total == 0:
            break
        # Gather every frontier vertex's neighbour slice in one shot.
        offsets = np.repeat(starts - (np.cumsum(lengths) - lengths), lengths)
        nbrs = indices[offsets + np.arange(total)]
        nbrs = nbrs[dist[nbrs] == UNREACHABLE]
        if nbrs.size == 0:
            break
        dist[nbrs] = level
        frontier = np.unique(nbrs)
    return DistanceVector(src, dist)


def distance_matrix(g: Graph, sources=None) -> np.ndarray:
    """Stack of BFS rows, one per source (all vertices by default)."""
    if sources is None:
        sources = range(g.n)
    sources = list(sources)
    out = np.empty((len(sources), g.n), dtype=DIST_DTYPE)
    for r, s in enumerate(sources):
        out[r] = bfs_distances(g, int(s)).dist
    return out


class DegreeStats(NamedTuple):
    min: int
    max: int
    mean: float


def degree_stats(g: Graph) -> DegreeStats:
    deg = g.degrees
    if g.n == 0:
        return DegreeStats(0, 0, 0.0)
    return DegreeStats(int(deg.min()), int(deg.max()), float(deg.mean()))


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    return bool(np.all(bfs_distances(g, 0).dist != UNREACHABLE))


def eccentricity(g: Graph, v: int) -> int:
    d = bfs_distances(g, v).dist
    if np.any(d == UNREACHABLE):
        raise DisconnectedGraphError("eccentricity is undefined on a disconnected graph")
    return int(d.max())


def diameter(g: Graph) -> int:
    if not is_connected(g):
        raise DisconnectedGraphError("diameter is undefined on a disconnected graph")
    return max((int(bfs_distances(g, v).dist.max()) for v in range(g.n)), default=0)


def realized_delta(g: Graph) -> float:
    """Observed average degree 2m/n."""
    return 2.0 * g.m / g.n if g.n else 0.0


def write_edgelist(g: Graph, fh: IO[str]) -> None:
    """Plain-text edge list: an ``n m`` header, then ascending ``u v`` lines."""
    fh.write(f"{g.n} {g.m}\n")
    for u, v in g.edges():
        fh.write(f"{u} {v}\n")


def read_edgelist(fh: IO[str]) -> Graph:
    header = fh.readline().split()
    if len(header) != 2:
        raise ValueError("edge list must start with an 'n m' header line")
    n, m = int(header[0]), int(header[1])
    pairs = [tuple(map(int, line.split())) for line in fh if line.strip()]
    if len(pairs) != m:
        raise ValueError(f"header announces {m} edges, found {len(pairs)}")
    return Graph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))
