"""Seeded instance builders for the verification suites.

Everything here is deterministic given the supplied generator stream, so
suites can be replayed exactly from a seed.
"""

from __future__ import annotations

import math

import numpy as np

from .graph import Graph, generate
from .kernel import DEFAULT_SOLVE, LocalSolveConfig, local_argmin
from .rng import SplitMix64


def _has_tied_interior_edge(graph: Graph) -> bool:
    """Structural symmetries that force exactly equal extension values across
    an interior edge: a degree-1 interior vertex hanging off the interior
    (it copies its neighbor), or adjacent interior twins (same neighborhoods
    up to each other). Such ties make the p < 2 envelope certificate decay
    only polynomially, so tight-tolerance corpora exclude them.
    """
    interior = graph.boundary_mask == False  # noqa: E712 (bool array)
    for u, v in graph.edges.tolist():
        if not (interior[u] and interior[v]):
            continue
        nu = set(graph.adjacency[u])
        nv = set(graph.adjacency[v])
        if len(nu) == 1 or len(nv) == 1:
            return True
        if nu - {v} == nv - {u}:
            return True
    return False


def random_connected_graph(rng: SplitMix64, n_min: int = 4, n_max: int = 12,
                           max_boundary_frac: float = 0.5,
                           avoid_tied_interior_edges: bool = True,
                           sparse: bool = False,
                           max_retries: int = 1000) -> Graph:
    """Connected Erdos-Renyi graph with a random nonempty boundary.

    Edge probability is drawn above the connectivity threshold so the
    conditional-on-connected resampling terminates quickly. By default the
    sample is also conditioned on having no structurally tied interior edge
    (see :func:`_has_tied_interior_edge`). ``sparse`` keeps the density close
    to the threshold: dense samples have many near-identical neighborhoods,
    whose cascading near-equal extension values make tight p < 2 envelope
    certificates crawl.
    """
    for _ in range(max_retries):
        n = n_min + rng.next_below(n_max - n_min + 1)
        thr = min(1.0, 1.1 * math.log(max(n, 2)) / n)
        if sparse:
            prob = rng.uniform(thr, min(1.0, 1.9 * thr))
        else:
            prob = rng.uniform(min(1.0, 1.5 * thr), 1.0)
        b_count = 1 + rng.next_below(max(1, int(n * max_boundary_frac)))
        boundary = sorted(_sample_without_replacement(rng, n, min(b_count, n - 1)))
        try:
            g = generate("erdos_renyi", n=n, prob=prob, seed=rng.next_u64(),
                         boundary=boundary, max_retries=200)[0]
        except RuntimeError:
            continue
        if not avoid_tied_interior_edges or not _has_tied_interior_edge(g):
            return g
    raise RuntimeError("no acceptable random graph in retry budget")


def _sample_without_replacement(rng: SplitMix64, n: int, k: int) -> list[int]:
    pool = list(range(n))
    out = []
    for _ in range(k):
        out.append(pool.pop(rng.next_below(len(pool))))
    return out


def random_profile(graph: Graph, rng: SplitMix64, lo: float = 0.0,
                   hi: float = 1.0) -> np.ndarray:
    return np.array([rng.uniform(lo, hi) for _ in range(graph.n)])


def zero_boundary_profile(graph: Graph, rng: SplitMix64, lo: float = 0.0,
                          hi: float = 1.0) -> np.ndarray:
    f = random_profile(graph, rng, lo, hi)
    f[graph.boundary] = 0.0
    return f


def superharmonic_profile(graph: Graph, rng: SplitMix64, p: float,
                          relax_steps: int = 0,
                          cfg: LocalSolveConfig = DEFAULT_SOLVE) -> np.ndarray:
    """Profile in [0, 1] that is superharmonic in the interior.

    Boundary values are uniform in [0, 0.8]; the interior starts at the max
    boundary value plus headroom (superharmonic by construction) and is then
    optionally relaxed by random single-vertex updates, which preserve
    superharmonicity and keep values inside the boundary hull.
    """
    f = np.zeros(graph.n)
    for b in graph.boundary:
        f[int(b)] = rng.uniform(0.0, 0.8)
    top = min(1.0, float(f[graph.boundary].max()) + rng.uniform(0.1, 0.2))
    f[graph.interior] = top
    interior = [int(v) for v in graph.interior]
    for _ in range(relax_steps):
        v = interior[rng.next_below(len(interior))]
        f[v] = local_argmin([float(f[w]) for w in graph.adjacency[v]], p, cfg)
    return f


def corpus_graphs(seed: int, count: int, n_min: int, n_max: int) -> list[Graph]:
    rng = SplitMix64(seed)
    return [random_connected_graph(rng, n_min, n_max) for _ in range(count)]
