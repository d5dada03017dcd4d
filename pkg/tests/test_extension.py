import math

import numpy as np
import pytest

from lprelax.analysis import energy
from lprelax.corpus import random_connected_graph
from lprelax.extension import (InvalidBoundary, NonConvergence,
                               p_harmonic_extension, residual)
from lprelax.graph import generate
from lprelax.kernel import classify, local_argmin
from lprelax.rng import SplitMix64


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0, 4.0])
def test_path5_linear_extension(p):
    g, _ = generate("path", n=5, boundary=[0, 4])
    res = p_harmonic_extension(g, {0: 0.0, 4: 1.0}, p, tol=1e-8)
    assert np.max(np.abs(res.h - np.array([0, 0.25, 0.5, 0.75, 1]))) <= 1e-8
    assert res.cert_gap <= 1e-8
    assert res.h[0] == 0.0 and res.h[4] == 1.0  # boundary exact


def test_k4_extension():
    g, _ = generate("k4_lower_bound")
    for p in (2.0, 3.0):
        res = p_harmonic_extension(g, {0: 0.0, 1: 1.0}, p, tol=1e-8)
        assert np.max(np.abs(res.h - np.array([0, 1, 0.5, 0.5]))) <= 1e-8


def test_k4_extension_p_below_2_is_slow_but_correct():
    # the two interior vertices tie in the extension, and for p < 2 any
    # relaxation schedule needs ~eps^-(2-p)/(p-1) updates through such a tie,
    # so only a coarse certificate is reachable at sane budgets
    g, _ = generate("k4_lower_bound")
    res = p_harmonic_extension(g, {0: 0.0, 1: 1.0}, 1.5, tol=1e-3)
    assert np.max(np.abs(res.h - np.array([0, 1, 0.5, 0.5]))) <= 1e-3
    with pytest.raises(NonConvergence):
        p_harmonic_extension(g, {0: 0.0, 1: 1.0}, 1.5, tol=1e-8,
                             max_updates=10_000)


def test_star_single_vertex_closed_form():
    # one interior vertex: the extension is the local minimizer of its leaves
    g, _ = generate("star", leaves=3, boundary=[1, 2, 3])
    res = p_harmonic_extension(g, {1: 0.0, 2: 0.0, 3: 1.0}, 3.0, tol=1e-10)
    assert res.h[0] == pytest.approx(math.sqrt(2) - 1, abs=1e-10)


def test_residual_examples():
    g, f0 = generate("k4_lower_bound")
    assert residual(g, f0, 2.0) == pytest.approx(1 / 3, abs=1e-15)
    assert residual(g, np.full(4, 0.3), 2.0) == 0.0
    res = p_harmonic_extension(g, f0, 3.0, tol=1e-9)
    assert residual(g, res.h, 3.0) <= 1e-9


def test_extension_accepts_full_profile():
    g, f0 = generate("k4_lower_bound")
    res = p_harmonic_extension(g, f0, 2.0, tol=1e-9)
    assert res.h == pytest.approx([0, 1, 0.5, 0.5], abs=1e-9)


def test_invalid_boundary():
    g, _ = generate("path", n=4, boundary=[0, 3])
    with pytest.raises(InvalidBoundary, match="without a value"):
        p_harmonic_extension(g, {0: 0.0}, 2.0)
    with pytest.raises(InvalidBoundary, match="not a boundary vertex"):
        p_harmonic_extension(g, {0: 0.0, 3: 1.0, 1: 0.5}, 2.0)
    with pytest.raises(InvalidBoundary):
        p_harmonic_extension(g, {0: math.inf, 3: 1.0}, 2.0)


def test_nonconvergence_budget():
    g, _ = generate("path", n=30, boundary=[0, 29])
    with pytest.raises(NonConvergence):
        p_harmonic_extension(g, {0: 0.0, 29: 1.0}, 2.0, tol=1e-12, max_updates=28)


def test_boundary_outside_unit_interval():
    g, _ = generate("path", n=4, boundary=[0, 3])
    res = p_harmonic_extension(g, {0: -3.0, 3: 6.0}, 2.0, tol=1e-9)
    assert res.h == pytest.approx([-3, 0, 3, 6], abs=1e-8)


def test_comparison_superharmonic_dominates():
    rng = SplitMix64(5)
    for i in range(6):
        g = random_connected_graph(rng, 6, 10)
        p = (1.5, 2.0, 3.0)[i % 3]
        f = np.ones(g.n)
        for b in g.boundary:
            f[int(b)] = rng.uniform(0, 1)
        for _ in range(4):
            v = int(g.interior[rng.next_below(g.n_star)])
            f[v] = local_argmin([float(f[w]) for w in g.adjacency[v]], p)
        assert classify(g, f, p).is_superharmonic_in_interior
        h = p_harmonic_extension(g, f, p, tol=1e-9).h
        assert np.all(f >= h - 1e-9)


def test_energy_optimality_among_matching_boundary():
    rng = SplitMix64(9)
    g = random_connected_graph(rng, 7, 9)
    bvals = {int(b): rng.uniform(0, 1) for b in g.boundary}
    for p in (1.5, 2.0, 3.0):
        res = p_harmonic_extension(g, bvals, p, tol=1e-10)
        e_h = energy(g, res.h, p)
        for _ in range(100):
            f = res.h.copy()
            for v in g.interior:
                f[int(v)] = rng.uniform(-0.5, 1.5)
            assert energy(g, f, p) >= e_h - 1e-9


def test_uniqueness_cyclic_relaxation_from_other_starts():
    # relaxing from unrelated interior initializations converges to the same
    # extension: the fixed point is unique
    g, _ = generate("erdos_renyi", n=8, prob=0.6, seed=4, boundary=[0, 5])
    rng = SplitMix64(12)
    for p in (1.5, 3.0):
        h = p_harmonic_extension(g, {0: 0.1, 5: 0.8}, p, tol=1e-10).h
        for _ in range(2):
            f = h.copy()
            for v in g.interior:
                f[int(v)] = rng.uniform(0.1, 0.8)
            for _ in range(400):
                for v in g.interior:
                    v = int(v)
                    f[v] = local_argmin([float(f[w]) for w in g.adjacency[v]], p)
            assert np.max(np.abs(f - h)) <= 1e-8


def test_rejects_invalid_graph():
    g, _ = generate("path", n=3, boundary=[], allow_empty_boundary=True)
    with pytest.raises(ValueError, match="validation"):
        p_harmonic_extension(g, {}, 2.0)
