"""Certified p-harmonic extension of boundary data.

The solver evolves two envelope profiles with identical cyclic sweeps: an
upper one started at the max boundary value on the interior (superharmonic)
and a lower one started at the min (subharmonic). Both converge monotonically
to the unique p-harmonic extension h of the boundary data, and they sandwich
it at every sweep, so ``max(upper - lower)`` is a computable sup-norm error
certificate. The returned profile is the midpoint of the envelopes, which
halves the certified error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .graph import Graph, require_valid
from .kernel import DEFAULT_SOLVE, LocalSolveConfig, local_argmin, p_laplacian, validate_p


class InvalidBoundary(ValueError):
    pass


class NonConvergence(RuntimeError):
    def __init__(self, message, gap=None, sweeps=None):
        super().__init__(message)
        self.gap = gap
        self.sweeps = sweeps


@dataclass(frozen=True)
class ExtensionResult:
    """p-harmonic extension with certificate.

    ``h`` matches the boundary data exactly on boundary vertices and is within
    ``cert_gap / 2`` of the true extension in sup norm. ``residual`` is the
    max interior |p-Laplacian| of ``h`` as a secondary diagnostic.
    """
    h: np.ndarray
    cert_gap: float
    residual: float
    sweeps: int


def _boundary_array(graph: Graph, boundary_values) -> np.ndarray:
    if isinstance(boundary_values, Mapping):
        vals = {}
        for k, x in boundary_values.items():
            k = int(k)
            if not (0 <= k < graph.n) or not graph.boundary_mask[k]:
                raise InvalidBoundary(f"vertex {k} is not a boundary vertex")
            vals[k] = float(x)
        missing = [int(b) for b in graph.boundary if int(b) not in vals]
        if missing:
            raise InvalidBoundary(f"boundary vertices without a value: {missing}")
        out = np.zeros(graph.n)
        for k, x in vals.items():
            out[k] = x
        return out
    arr = np.asarray(boundary_values, dtype=float)
    if arr.shape != (graph.n,):
        raise InvalidBoundary(
            f"profile has shape {arr.shape}, expected ({graph.n},)")
    return arr


def p_harmonic_extension(graph: Graph, boundary_values, p: float,
                         tol: float = 1e-8, *,
                         cfg: LocalSolveConfig = DEFAULT_SOLVE,
                         max_updates: int = 10_000_000) -> ExtensionResult:
    """Compute the p-harmonic extension of boundary data with a certificate.

    Parameters
    ----------
    boundary_values : mapping {boundary vertex: value} or length-n profile
        With a full profile, only the boundary entries are read.
    tol : float
        Termination threshold on the envelope gap; the returned ``h`` is then
        within ``tol / 2`` of the true extension in sup norm.

    Raises
    ------
    InvalidBoundary
        If a boundary vertex lacks a value or a value is not finite.
    NonConvergence
        If the update budget is exhausted before the gap reaches ``tol``.
    """
    require_valid(graph)
    p = validate_p(p)
    if not (tol > 0):
        raise ValueError("tol must be positive")
    full = _boundary_array(graph, boundary_values)
    bvals = full[graph.boundary]
    if not np.all(np.isfinite(bvals)):
        raise InvalidBoundary("boundary values must be finite")

    lo = float(bvals.min())
    hi = float(bvals.max())
    upper = np.where(graph.boundary_mask, full, hi)
    lower = np.where(graph.boundary_mask, full, lo)

    order = [int(v) for v in graph.interior]
    adjacency = graph.adjacency
    mono_slack = 4.0 * cfg.abs_tol

    gap = float(np.max(upper - lower))
    sweeps = 0
    updates = 0
    while gap > tol:
        if updates >= max_updates:
            raise NonConvergence(
                f"envelope gap {gap:.3e} > tol {tol:.3e} after {updates} updates",
                gap=gap, sweeps=sweeps)
        for v in order:
            nbrs = adjacency[v]
            up = local_argmin([upper[w] for w in nbrs], p, cfg)
            dn = local_argmin([lower[w] for w in nbrs], p, cfg)
            if up > upper[v] + mono_slack:
                raise AssertionError(
                    f"upper envelope increased at vertex {v}: {upper[v]} -> {up}")
            if dn < lower[v] - mono_slack:
                raise AssertionError(
                    f"lower envelope decreased at vertex {v}: {lower[v]} -> {dn}")
            upper[v] = up
            lower[v] = dn
        updates += len(order)
        sweeps += 1
        diff = upper - lower
        gap = float(diff.max())
        if gap < -mono_slack:
            raise AssertionError(f"envelope ordering violated: gap {gap}")

    h = 0.5 * (upper + lower)
    h[graph.boundary] = full[graph.boundary]
    res = residual(graph, h, p, cfg)
    return ExtensionResult(h=h, cert_gap=max(gap, 0.0), residual=res, sweeps=sweeps)


def residual(graph: Graph, f, p: float,
             cfg: LocalSolveConfig = DEFAULT_SOLVE) -> float:
    """Max over interior vertices of |p-Laplacian of f|; ~0 iff p-harmonic."""
    worst = 0.0
    for v in graph.interior:
        worst = max(worst, abs(p_laplacian(graph, f, int(v), p, cfg)))
    return worst
