"""Shared strategies and slow-but-obvious reference implementations."""

from __future__ import annotations

import itertools
import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from oracle_recon.graph_core import Graph

INF = np.iinfo(np.int64).max // 4


def floyd_warshall(g: Graph) -> np.ndarray:
    """All-pairs hop counts by Floyd-Warshall on a dense matrix (INF if unreachable)."""
    n = g.n
    D = np.full((n, n), INF, dtype=np.int64)
    np.fill_diagonal(D, 0)
    for u, v in g.edges():
        D[u, v] = D[v, u] = 1
    for k in range(n):
        D = np.minimum(D, D[:, k:k + 1] + D[k:k + 1, :])
    return D


def brute_pseudo_edges(D: np.ndarray) -> set[tuple[int, int]]:
    """Pairs whose landmark coordinates differ by at most one everywhere."""
    n = D.shape[1]
    return {(u, v) for u, v in itertools.combinations(range(n), 2)
            if all(abs(int(r[u]) - int(r[v])) <= 1 for r in D)}


def reference_partition(g: Graph, u: int, v: int):
    """Set-based A/B recursion, written directly from the definitions.

    Returns a list of dicts with keys sphere, a, b, bad1, bad2, bad3
    (all Python sets), one per layer k = 1, 2, ...
    """
    D = floyd_warshall(g)
    adj = [set(x) for x in g.adjacency]
    mind = {x: min(D[u, x], D[v, x]) for x in range(g.n) if min(D[u, x], D[v, x]) < INF}
    top = max(mind.values())
    spheres = {k: {x for x, d in mind.items() if d == k} for k in range(top + 1)}

    def nbhd(xs):
        out = set()
        for x in xs:
            out |= adj[x]
        return out

    layers = []
    a_prev = b_prev = None
    for k in range(1, top + 1):
        Nk = spheres[k]
        if k == 1:
            L = dict(sphere=Nk, a=set(Nk), b=set(), bad1=set(), bad2=set(), bad3=set())
        else:
            Nk1 = spheres[k - 1]
            bad1 = nbhd(b_prev) & Nk
            bad2 = nbhd({x for x in a_prev if adj[x] & Nk1}) & Nk
            bad3 = {x for x in Nk if len(adj[x] & a_prev) >= 2}
            b = bad1 | bad2 | bad3
            L = dict(sphere=Nk, a=Nk - b, b=b, bad1=bad1, bad2=bad2, bad3=bad3)
        layers.append(L)
        a_prev, b_prev = L["a"], L["b"]
    return layers


@st.composite
def graphs(draw, min_n=1, max_n=24, connected=False):
    """Random simple graphs; with ``connected`` a random spanning tree is added."""
    n = draw(st.integers(min_n, max_n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), max_size=3 * n)) if pairs else []
    edges = set(chosen)
    if connected and n > 1:
        order = draw(st.permutations(range(n)))
        for i in range(1, n):
            parent = order[draw(st.integers(0, i - 1))]
            a, b = sorted((order[i], parent))
            edges.add((a, b))
    return Graph.from_edges(n, sorted(edges))


def random_connected(rng: np.random.Generator, n: int, p: float) -> Graph:
    """G(n, p) plus a random spanning tree: always connected, cheap to draw."""
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges = set(zip(iu[keep].tolist(), ju[keep].tolist()))
    perm = rng.permutation(n)
    for i in range(1, n):
        a, b = int(perm[i]), int(perm[rng.integers(0, i)])
        edges.add((min(a, b), max(a, b)))
    return Graph.from_edges(n, sorted(edges))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
