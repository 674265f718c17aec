"""Layered A/B decomposition of the common spheres around a far pair.

For a pair ``u, v`` at distance >= 3 the common sphere ``N^k(u, v)`` (the
vertices whose nearer endpoint is ``k`` hops away) is split into a clean
part ``A_k`` and a contaminated part ``B_k``. ``A_1 = N^1(u, v)``,
``B_1 = {}``, and for ``k >= 2`` a vertex of ``N^k(u, v)`` is contaminated
when it lies in

* ``bad1``: the neighbourhood of ``B_{k-1}``;
* ``bad2``: the neighbourhood of those ``A_{k-1}`` vertices that have a
  neighbour inside ``N^{k-1}(u, v)``;
* ``bad3``: the vertices with at least two neighbours in ``A_{k-1}``.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field

import numpy as np

from ..errors import NearPairError
from ..graph_core import Graph, realized_delta
from .witnesses import density_scale, pair_distances, witness_mask

DEFAULT_MIN_LAYER_SIZE = 8


@dataclass
class SphereLayer:
    k: int
    sphere: np.ndarray
    a: np.ndarray
    b: np.ndarray
    bad1: np.ndarray   # each bad set already intersected with the sphere
    bad2: np.ndarray
    bad3: np.ndarray

    @property
    def b_fraction(self) -> float:
        return self.b.size / self.sphere.size if self.sphere.size else 0.0


@dataclass
class SpherePartition:
    u: int
    v: int
    dist_uv: int
    delta: float
    horizon: float          # n / delta^2
    ell: int                # 0 when even N^0 = {u, v} exceeds the horizon
    layers: list[SphereLayer]
    sizes: list[int] = field(default_factory=list)   # |N^k| for k = 0, 1, ...

    def layer(self, k: int) -> SphereLayer:
        return self.layers[k - 1]


def _masks(n: int, idx: np.ndarray) -> np.ndarray:
    m = np.zeros(n, dtype=np.int32)
    m[idx] = 1
    return m


def horizon_index(sizes: list[int], horizon: float) -> int:
    """Largest ``k`` with ``|N^{j-1}| <= horizon`` for every ``j <= k``.

    Only the growing prefix of spheres counts; the shrinking tail near the
    far side of the graph is ignored. Capped at the last nonempty layer.
    """
    ell = 0
    for k in range(1, len(sizes)):
        if sizes[k - 1] > horizon:
            break
        ell = k
    return ell


def sphere_partition(g: Graph, u: int, v: int, delta: float | None = None,
                     dists: tuple[np.ndarray, np.ndarray] | None = None) -> SpherePartition:
    """Build every layer of the A/B decomposition for the far pair ``(u, v)``.

    ``delta`` sets the horizon ``n / delta^2`` and defaults to the realised
    average degree. Raises :class:`NearPairError` when ``d(u, v) <= 2``.
    """
    du, dv = dists if dists is not None else pair_distances(g, u, v)
    d_uv = int(du[v])
    if d_uv <= 2:
        raise NearPairError(f"d({u},{v}) = {d_uv} <= 2: near pair, no sphere partition")
    if delta is None:
        delta = realized_delta(g)
    n = g.n
    adj = g.matrix
    level = np.minimum(du, dv)
    top = int(level.max())
    spheres = [np.flatnonzero(level == k) for k in range(top + 1)]

    layers = []
    a_prev = spheres[1]
    empty = np.empty(0, dtype=np.int64)
    layers.append(SphereLayer(1, spheres[1], a_prev, empty, empty, empty, empty))
    b_prev = empty
    for k in range(2, top + 1):
        sphere = spheres[k]
        in_sphere = np.zeros(n, dtype=bool)
        in_sphere[sphere] = True
        in_a_prev = _masks(n, a_prev)
        near1 = (adj @ _masks(n, b_prev)) > 0
        touches_prev = (adj @ _masks(n, spheres[k - 1])) > 0
        seeds2 = np.flatnonzero(in_a_prev.astype(bool) & touches_prev)
        near2 = (adj @ _masks(n, seeds2)) > 0
        multi3 = (adj @ in_a_prev) >= 2
        bad1 = np.flatnonzero(in_sphere & near1)
        bad2 = np.flatnonzero(in_sphere & near2)
        bad3 = np.flatnonzero(in_sphere & multi3)
        in_b = in_sphere & (near1 | near2 | multi3)
        b = np.flatnonzero(in_b)
        a = np.flatnonzero(in_sphere & ~in_b)
        layers.append(SphereLayer(k, sphere, a, b, bad1, bad2, bad3))
        a_prev, b_prev = a, b

    sizes = [int(s.size) for s in spheres]
    horizon = density_scale(n, delta)
    return SpherePartition(int(u), int(v), d_uv, float(delta), horizon,
                           horizon_index(sizes, horizon), layers, sizes)


def isolated_clean_vertices(g: Graph, layer: SphereLayer) -> np.ndarray:
    """Vertices of ``A_k`` with no neighbour inside ``N^k(u, v)``."""
    if layer.a.size == 0:
        return layer.a
    hits = g.matrix[layer.a] @ _masks(g.n, layer.sphere)
    return layer.a[np.asarray(hits).ravel() == 0]


def isolated_non_witnesses(g: Graph, part: SpherePartition,
                           witnesses: np.ndarray | None = None) -> list[tuple[int, int]]:
    """``(k, x)`` for every clean vertex with no in-sphere neighbour that is
    nevertheless not a witness. Always empty for a correct partition.
    """
    if witnesses is None:
        du, dv = pair_distances(g, part.u, part.v)
        witnesses = witness_mask(du, dv)
    bad = []
    for layer in part.layers:
        for x in isolated_clean_vertices(g, layer):
            if not witnesses[x]:
                bad.append((layer.k, int(x)))
    return bad


@dataclass
class PairPartitionSummary:
    pair_id: int
    u: int
    v: int
    dist_uv: int
    ell: int
    b_fraction_at_ell: float | None
    a_witness_fraction_at_ell: float | None
    half_witness_violation: bool
    isolated_non_witnesses: int


@dataclass
class PartitionCensus:
    pairs: list[PairPartitionSummary]
    layer_rows: list[tuple]          # (pair_id, k, layer_size, a_size, b_size, b1, b2, b3)
    min_layer_size: int
    excluded_layers: int
    b_fraction_by_k: dict[int, list[float]]
    b_fraction_at_ell: list[float]
    a_witness_fraction_at_ell: list[float]

    @property
    def median_b_fraction_at_ell(self) -> float | None:
        return statistics.median(self.b_fraction_at_ell) if self.b_fraction_at_ell else None

    def median_b_fraction_by_k(self) -> dict[int, float]:
        return {k: statistics.median(v) for k, v in sorted(self.b_fraction_by_k.items()) if v}

    @property
    def half_witness_violations(self) -> list[PairPartitionSummary]:
        return [p for p in self.pairs if p.half_witness_violation]

    @property
    def total_isolated_non_witnesses(self) -> int:
        return sum(p.isolated_non_witnesses for p in self.pairs)


def partition_census(g: Graph, pairs, delta: float | None = None,
                     min_layer_size: int = DEFAULT_MIN_LAYER_SIZE) -> PartitionCensus:
    """Per-layer contamination statistics over a sample of far pairs.

    Layers with fewer than ``min_layer_size`` vertices are kept in
    ``layer_rows`` but left out of the fraction aggregates.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("partition census needs at least one pair")
    summaries, rows = [], []
    by_k: dict[int, list[float]] = {}
    at_ell, a_wit = [], []
    excluded = 0
    for pid, (u, v) in enumerate(pairs):
        du, dv = pair_distances(g, u, v)
        part = sphere_partition(g, u, v, delta, dists=(du, dv))
        wit = witness_mask(du, dv)
        for L in part.layers:
            rows.append((pid, L.k, L.sphere.size, L.a.size, L.b.size,
                         L.bad1.size, L.bad2.size, L.bad3.size))
            if L.sphere.size < min_layer_size:
                excluded += 1
            else:
                by_k.setdefault(L.k, []).append(L.b_fraction)
        bf = awf = None
        if part.ell >= 1:
            L = part.layer(part.ell)
            bf = L.b_fraction
            if L.sphere.size >= min_layer_size:
                at_ell.append(bf)
            if L.a.size:
                awf = float(np.count_nonzero(wit[L.a])) / L.a.size
                if L.a.size >= min_layer_size:
                    a_wit.append(awf)
        summaries.append(PairPartitionSummary(
            pid, int(u), int(v), part.dist_uv, part.ell, bf, awf,
            awf is not None and awf < 0.5, len(isolated_non_witnesses(g, part, wit))))
    return PartitionCensus(summaries, rows, min_layer_size, excluded, by_k, at_ell, a_wit)
