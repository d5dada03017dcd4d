"""Pointwise machinery for local lp-energy minimization.

For an exponent p > 1, the local energy of a candidate value y against a
neighbor multiset {a_1, ..., a_d} is sum_i |y - a_i|^p. Its derivative is
p * Phi(y) with Phi(y) = sum_i U(y - a_i), where U(x) = sign(x)|x|^(p-1) is
odd and strictly increasing, so the minimizer is the unique root of Phi in
[min a_i, max a_i].

The root-finder is guarded bisection with an optional Newton step that is
accepted only when it stays inside the current bracket and p >= 2 (for p < 2
the derivative of Phi blows up near ties with neighbor values). At p = 2 the
minimizer is the arithmetic mean and is returned in closed form.

Exponents are clamped to [1.05, 16]: outside that range binary64
exponentiation of small differences loses all significance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph

P_MIN = 1.05
P_MAX = 16.0

# relative residual target: |Phi(y*)| <= REL_RESIDUAL * sum_i |U(max - min)|
REL_RESIDUAL = 1e-10


def validate_p(p: float) -> float:
    p = float(p)
    if not (P_MIN <= p <= P_MAX):
        raise ValueError(f"exponent p={p} outside supported range [{P_MIN}, {P_MAX}]")
    return p


@dataclass(frozen=True)
class LocalSolveConfig:
    """Bracket width target and iteration cap for the scalar root solve."""
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise ValueError("abs_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


DEFAULT_SOLVE = LocalSolveConfig()


def u_func(x: float, p: float) -> float:
    """Odd power map sign(x)|x|^(p-1)."""
    if x > 0.0:
        return math.pow(x, p - 1.0)
    if x < 0.0:
        return -math.pow(-x, p - 1.0)
    return 0.0


def first_order_sum(y: float, values, p: float) -> float:
    """Phi(y) = sum over neighbor values a of U(y - a)."""
    pm1 = p - 1.0
    total = 0.0
    for a in values:
        d = y - a
        if d > 0.0:
            total += math.pow(d, pm1)
        elif d < 0.0:
            total -= math.pow(-d, pm1)
    return total


def local_energy(y: float, values, p: float) -> float:
    return sum(abs(y - a) ** p for a in values)


def local_argmin(values, p: float, cfg: LocalSolveConfig = DEFAULT_SOLVE) -> float:
    """Unique minimizer of sum |y - a|^p over the neighbor values ``a``.

    The result lies in [min(values), max(values)]. For p = 2 this is the
    arithmetic mean (closed form, correctly rounded via fsum). Otherwise the
    bracket is bisected until it is narrower than ``cfg.abs_tol`` and the
    residual |Phi| is below REL_RESIDUAL times the scale sum |U(max - min)|,
    or until binary64 is exhausted.
    """
    values = list(values)
    if not values:
        raise ValueError("local_argmin requires at least one neighbor value")
    for a in values:
        if not math.isfinite(a):
            raise ValueError(f"non-finite neighbor value {a}")
    lo = min(values)
    hi = max(values)
    if lo == hi:
        return lo
    if p == 2.0:
        return math.fsum(values) / len(values)

    pm1 = p - 1.0
    pm2 = p - 2.0
    scale = len(values) * math.pow(hi - lo, pm1)
    res_tol = REL_RESIDUAL * scale
    use_newton = p >= 2.0

    x = 0.5 * (lo + hi)
    for _ in range(cfg.max_iter):
        phi = first_order_sum(x, values, p)
        if phi == 0.0:
            return x
        if phi > 0.0:
            hi = x
        else:
            lo = x
        width = hi - lo
        if width <= cfg.abs_tol and abs(phi) <= res_tol:
            return x  # an endpoint of a bracket narrower than abs_tol
        nxt = 0.5 * (lo + hi)
        if use_newton:
            dphi = 0.0
            for a in values:
                d = abs(x - a)
                if d > 0.0:
                    dphi += math.pow(d, pm2)
            dphi *= pm1
            if dphi > 0.0:
                cand = x - phi / dphi
                # accept only well inside the bracket, so the width shrinks
                # by at least 25% per iteration and Newton cannot stall on
                # one side while the far endpoint stays put
                margin = 0.25 * width
                if lo + margin <= cand <= hi - margin:
                    nxt = cand
        if nxt == lo or nxt == hi:  # bracket narrower than one ulp
            break
        x = nxt
    return 0.5 * (lo + hi)


def p_laplacian(graph: Graph, f, v: int, p: float,
                cfg: LocalSolveConfig = DEFAULT_SOLVE) -> float:
    """f(v) minus the local minimizer at v; zero by convention on boundary."""
    if graph.boundary_mask[v]:
        return 0.0
    nbrs = graph.adjacency[v]
    return float(f[v]) - local_argmin([float(f[w]) for w in nbrs], p, cfg)


@dataclass(frozen=True)
class Classification:
    """Per-interior-vertex sign classification of the first-order sum.

    ``labels[v]`` is one of 'harmonic', 'superharmonic', 'subharmonic',
    'neither' for interior v and the empty string on boundary vertices.
    The global flags treat 'harmonic' as belonging to both one-sided classes.
    """
    labels: tuple[str, ...]
    sums: np.ndarray
    slacks: np.ndarray

    @property
    def is_harmonic_in_interior(self) -> bool:
        return all(l in ("harmonic", "") for l in self.labels)

    @property
    def is_superharmonic_in_interior(self) -> bool:
        return all(l in ("harmonic", "superharmonic", "") for l in self.labels)

    @property
    def is_subharmonic_in_interior(self) -> bool:
        return all(l in ("harmonic", "subharmonic", "") for l in self.labels)


def classify(graph: Graph, f, p: float, slack_rel: float = 1e-9) -> Classification:
    """Classify each interior vertex from the sign of Phi(f(v)).

    The tolerance at v is ``slack_rel`` times the local scale
    sum_w |U(f(v) - f(w))|, which makes the classification invariant under
    rescaling f.
    """
    if slack_rel < 0:
        raise ValueError("slack must be nonnegative")
    labels = []
    sums = np.zeros(graph.n)
    slacks = np.zeros(graph.n)
    for v in range(graph.n):
        if graph.boundary_mask[v]:
            labels.append("")
            continue
        total = 0.0
        scale = 0.0
        fv = float(f[v])
        for w in graph.adjacency[v]:
            u = u_func(fv - float(f[w]), p)
            total += u
            scale += abs(u)
        slack = slack_rel * scale
        sums[v] = total
        slacks[v] = slack
        if not math.isfinite(total):
            labels.append("neither")
        elif abs(total) <= slack:
            labels.append("harmonic")
        elif total > 0.0:
            labels.append("superharmonic")
        else:
            labels.append("subharmonic")
    return Classification(labels=tuple(labels), sums=sums, slacks=slacks)


class WitnessNotFound(RuntimeError):
    """No monotone boundary-to-vertex path: slack too tight or the profile
    is not superharmonic in the interior."""


def monotone_path_witness(graph: Graph, f, u: int, p: float,
                          tol: float = 0.0) -> list[int]:
    """Simple path from some boundary vertex to ``u`` with nondecreasing f.

    Grows the set of reachable vertices greedily: a vertex joins as soon as
    it has a reached neighbor with value <= its own (up to ``tol``). For a
    profile that is superharmonic in the interior this reaches every vertex.
    """
    if graph.boundary_mask[u]:
        return [u]
    if graph.boundary.size == 0:
        raise WitnessNotFound("graph has no boundary vertices")
    parent = {int(b): -1 for b in graph.boundary}
    frontier = [int(b) for b in graph.boundary]
    while frontier:
        grown = []
        for z in frontier:
            fz = float(f[z])
            for w in graph.adjacency[z]:
                if w not in parent and fz <= float(f[w]) + tol:
                    parent[w] = z
                    grown.append(w)
        if u in parent:
            path = [u]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            path.reverse()
            return path
        frontier = grown
    raise WitnessNotFound(
        f"no nondecreasing path from the boundary to vertex {u}")
