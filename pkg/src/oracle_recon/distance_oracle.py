"""Metered distance oracle over a hidden graph.

Every call is charged to a :class:`QueryLedger`. The headline metric is the
number of *distinct* unordered pairs ``{u, v}`` with ``u != v`` ever asked;
repeats and self-queries cost nothing. How answers are computed (memoised
BFS rows, adjacency and two-hop lookups) is invisible to the ledger.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import DisconnectedGraphError
from .graph_core import DIST_DTYPE, Graph, bfs_distances, is_connected

DEFAULT_PHASE = "default"

# When a pair batch would need BFS rows from more sources than this, it first
# settles distances 1 and 2 from the adjacency and two-hop matrices.
_TWO_HOP_MIN_SOURCES = 64


@dataclass
class QueryLedger:
    n: int
    distinct_pairs: int = 0
    requested: int = 0
    per_phase: dict[str, int] = field(default_factory=dict)
    requested_per_phase: dict[str, int] = field(default_factory=dict)

    def copy(self) -> "QueryLedger":
        return QueryLedger(self.n, self.distinct_pairs, self.requested,
                           dict(self.per_phase), dict(self.requested_per_phase))

    def _charge(self, phase: str, distinct: int, requested: int) -> None:
        self.distinct_pairs += distinct
        self.requested += requested
        self.per_phase[phase] = self.per_phase.get(phase, 0) + distinct
        self.requested_per_phase[phase] = self.requested_per_phase.get(phase, 0) + requested


class DistanceOracle:
    """Answers ``d_G(u, v)`` for a connected hidden graph and meters queries.

    Safe to query from several threads: ledger updates and memo insertions
    happen under one lock, BFS itself runs outside it.
    """

    def __init__(self, g: Graph, memoize: bool = True):
        if not is_connected(g):
            raise DisconnectedGraphError(
                "the distance-query model requires a connected hidden graph")
        self.__graph = g
        self._memoize = memoize
        self._memo: dict[int, np.ndarray] = {}
        self._ledger = QueryLedger(g.n)
        self._seen: np.ndarray | None = None
        self._two_hop = None
        self._lock = threading.RLock()

    @property
    def n(self) -> int:
        return self.__graph.n

    def ledger_snapshot(self) -> QueryLedger:
        with self._lock:
            return self._ledger.copy()

    # -- public queries -------------------------------------------------

    def query(self, u: int, v: int, phase: str = DEFAULT_PHASE) -> int:
        self._check_vertices(np.array([u, v]))
        u, v = int(u), int(v)
        with self._lock:
            new = 0
            if u != v:
                seen = self._seen_matrix()
                if not seen[u, v]:
                    seen[u, v] = seen[v, u] = True
                    new = 1
            self._ledger._charge(phase, new, 1)
        if u == v:
            return 0
        return int(self._row(u)[v])

    def query_block(self, A, B, phase: str = DEFAULT_PHASE) -> np.ndarray:
        """Distance table ``T[i, j] = d(A[i], B[j])``.

        One BFS row is computed per element of the smaller side; each distinct
        unordered pair in ``A x B`` is charged once.
        """
        A = np.asarray(A, dtype=np.int64).ravel()
        B = np.asarray(B, dtype=np.int64).ravel()
        if A.size == 0 or B.size == 0:
            raise ValueError("query_block needs nonempty vertex sets")
        self._check_vertices(A)
        self._check_vertices(B)
        self._charge_block(A, B, phase)
        if A.size <= B.size:
            return np.stack([self._row(int(a))[B] for a in A])
        return np.stack([self._row(int(b))[A] for b in B]).T.copy()

    def query_pairs(self, us, vs, phase: str = DEFAULT_PHASE) -> np.ndarray:
        """Batched ``query``: returns ``d(us[i], vs[i])`` for each i."""
        us = np.asarray(us, dtype=np.int64).ravel()
        vs = np.asarray(vs, dtype=np.int64).ravel()
        if us.shape != vs.shape:
            raise ValueError("query_pairs needs equally long endpoint arrays")
        if us.size == 0:
            return np.empty(0, dtype=DIST_DTYPE)
        self._check_vertices(us)
        self._check_vertices(vs)
        self._charge_pairs(us, vs, phase)
        return self._pair_distances(us, vs)

    # -- ledger ---------------------------------------------------------

    def _seen_matrix(self) -> np.ndarray:
        if self._seen is None:
            self._seen = np.zeros((self.n, self.n), dtype=bool)
        return self._seen

    def _charge_block(self, A: np.ndarray, B: np.ndarray, phase: str) -> None:
        Bu = np.unique(B)
        with self._lock:
            seen = self._seen_matrix()
            new = 0
            for a in np.unique(A):
                row = seen[a, Bu]
                fresh = Bu[~row & (Bu != a)]
                new += fresh.size
                seen[a, fresh] = True
                seen[fresh, a] = True
            self._ledger._charge(phase, new, A.size * B.size)

    def _charge_pairs(self, us: np.ndarray, vs: np.ndarray, phase: str) -> None:
        n = self.n
        lo, hi = np.minimum(us, vs), np.maximum(us, vs)
        keys = np.unique((lo * n + hi)[lo != hi])
        lo, hi = keys // n, keys % n
        with self._lock:
            seen = self._seen_matrix()
            fresh = ~seen[lo, hi]
            lo, hi = lo[fresh], hi[fresh]
            seen[lo, hi] = True
            seen[hi, lo] = True
            self._ledger._charge(phase, int(lo.size), us.size)

    def _check_vertices(self, xs: np.ndarray) -> None:
        if xs.size and (xs.min() < 0 or xs.max() >= self.n):
            raise IndexError(f"vertex id out of range for n={self.n}")

    # -- answering ------------------------------------------------------

    def _row(self, src: int) -> np.ndarray:
        if not self._memoize:
            return bfs_distances(self.__graph, src).dist
        row = self._memo.get(src)
        if row is None:
            row = bfs_distances(self.__graph, src).dist
            with self._lock:
                row = self._memo.setdefault(src, row)
        return row

    def _pair_distances(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        out = np.full(us.size, -1, dtype=DIST_DTYPE)
        if not self._memoize:
            for i, (u, v) in enumerate(zip(us.tolist(), vs.tolist())):
                out[i] = 0 if u == v else self._row(u)[v]
            return out
        out[us == vs] = 0
        todo = np.flatnonzero(out < 0)
        if todo.size and self._memo:
            cached = np.zeros(self.n, dtype=bool)
            with self._lock:
                cached[list(self._memo)] = True
            hit_u = todo[cached[us[todo]]]
            self._fill_grouped(us, vs, hit_u, out)
            rest = todo[~cached[us[todo]]]
            self._fill_grouped(vs, us, rest[cached[vs[rest]]], out)
            todo = np.flatnonzero(out < 0)
        if todo.size and np.unique(self._route(us, vs, todo)).size > _TWO_HOP_MIN_SOURCES:
            adj, two = self._two_hop_index()
            a = _entries(adj, us[todo], vs[todo])
            out[todo[a]] = 1
            todo = todo[~a]
            t = _entries(two, us[todo], vs[todo])
            out[todo[t]] = 2
            todo = todo[~t]
        if todo.size:
            src = self._route(us, vs, todo)
            flip = src != us[todo]
            self._fill_grouped(us, vs, todo[~flip], out)
            self._fill_grouped(vs, us, todo[flip], out)
        return out

    def _route(self, us, vs, todo) -> np.ndarray:
        # Send each pair through whichever endpoint more pending pairs share.
        freq = np.bincount(np.concatenate([us[todo], vs[todo]]), minlength=self.n)
        fu, fv = freq[us[todo]], freq[vs[todo]]
        flip = (fv > fu) | ((fv == fu) & (vs[todo] < us[todo]))
        return np.where(flip, vs[todo], us[todo])

    def _fill_grouped(self, src: np.ndarray, dst: np.ndarray, idx: np.ndarray,
                      out: np.ndarray) -> None:
        if idx.size == 0:
            return
        idx = idx[np.argsort(src[idx], kind="stable")]
        keys = src[idx]
        cuts = np.flatnonzero(np.diff(keys)) + 1
        for group in np.split(idx, cuts):
            out[group] = self._row(int(src[group[0]]))[dst[group]]

    def _two_hop_index(self):
        if self._two_hop is None:
            adj = self.__graph.matrix.astype(bool)
            two = (adj @ adj).tocsr()
            with self._lock:
                if self._two_hop is None:
                    self._two_hop = (adj, two)
        return self._two_hop


def _entries(mat, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # Sparse fancy indexing returns a matrix (not an array) for empty input.
    if rows.size == 0:
        return np.zeros(0, dtype=bool)
    return np.asarray(mat[rows, cols]).ravel().astype(bool)


def _reveal_hidden(oracle: DistanceOracle) -> Graph:
    """Simulator privilege: the hidden graph, for out-of-band verification only."""
    return oracle._DistanceOracle__graph
