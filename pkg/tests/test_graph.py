import numpy as np
import pytest

from lprelax.graph import (DuplicateEdgeError, Graph, MalformedHeaderError,
                           SelfLoopError, VertexIndexError, average_degree,
                           double_cover, generate, parse_graph, parse_profile,
                           serialize_graph, serialize_profile, validate)

K4_TEXT = "4 6\nB 2 0 1\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n"


def test_validate_k4_all_pass():
    g, _ = generate("k4_lower_bound")
    rep = validate(g)
    assert rep.all_pass


def test_validate_disconnected():
    g = Graph(4, [(0, 1), (2, 3)], [0])
    rep = validate(g)
    assert not rep.connected
    assert rep.failures() == ["connected"]


def test_validate_empty_boundary():
    g, _ = generate("path", n=3, boundary=[], allow_empty_boundary=True)
    rep = validate(g)
    assert not rep.nonempty_boundary and not rep.all_pass


def test_average_degree():
    assert average_degree(generate("k4_lower_bound")[0]) == 3.0
    assert average_degree(generate("path", n=3, boundary=[0])[0]) == pytest.approx(4 / 3)
    assert average_degree(generate("star", leaves=4, boundary=[0])[0]) == pytest.approx(8 / 5)


def test_generate_k4_instance():
    g, f0 = generate("k4_lower_bound")
    assert g.n == 4 and g.m == 6
    assert g.boundary.tolist() == [0, 1]
    assert f0.tolist() == [0.0, 1.0, 1.0, 1.0]


def test_generate_path_degrees():
    g, _ = generate("path", n=5, boundary=[0, 4])
    assert g.degree.tolist() == [1, 2, 2, 2, 1]


def test_generate_complete():
    g, _ = generate("complete", n=4, boundary=[0])
    assert average_degree(g) == 3.0 and g.n_star == 3


def test_generate_cycle():
    g, _ = generate("cycle", n=5, boundary=[2])
    assert g.degree.tolist() == [2] * 5
    assert (0, 4) in {tuple(e) for e in g.edges.tolist()}
    assert g.is_connected and not g.is_bipartite  # odd cycle


def test_generate_param_validation():
    with pytest.raises(ValueError):
        generate("path", n=1, boundary=[0])
    with pytest.raises(ValueError):
        generate("cycle", n=2, boundary=[0])
    with pytest.raises(ValueError):
        generate("star", leaves=0, boundary=[0])
    with pytest.raises(ValueError):
        generate("nope", n=3, boundary=[0])
    with pytest.raises(ValueError):
        generate("path", n=4, boundary=None)  # boundary required


def test_degree_sum_and_sorted_adjacency():
    for seed in range(5):
        g, _ = generate("erdos_renyi", n=12, prob=0.4, seed=seed, boundary=[0, 3])
        assert int(g.degree.sum()) == 2 * g.m
        for v in range(g.n):
            nbrs = list(g.neighbors(v))
            assert nbrs == sorted(nbrs)
            for w in nbrs:
                assert v in g.neighbors(w)


def test_erdos_renyi_reproducible():
    a, _ = generate("erdos_renyi", n=15, prob=0.3, seed=99, boundary=[1])
    b, _ = generate("erdos_renyi", n=15, prob=0.3, seed=99, boundary=[1])
    assert a.structurally_equal(b)
    assert serialize_graph(a) == serialize_graph(b)
    assert a.is_connected


def test_construction_errors():
    with pytest.raises(SelfLoopError):
        Graph(3, [(1, 1)], [0])
    with pytest.raises(DuplicateEdgeError):
        Graph(3, [(0, 1), (1, 0)], [0])
    with pytest.raises(VertexIndexError):
        Graph(3, [(0, 5)], [0])
    with pytest.raises(VertexIndexError):
        Graph(3, [(0, 1)], [7])


def test_parse_k4():
    g = parse_graph(K4_TEXT)
    assert g.n == 4 and g.n_star == 2
    assert g.structurally_equal(generate("k4_lower_bound")[0])


def test_serialize_parse_round_trip_byte_identical():
    assert serialize_graph(parse_graph(K4_TEXT)) == K4_TEXT


def test_parse_round_trip_structural():
    for seed in range(4):
        g, _ = generate("erdos_renyi", n=9, prob=0.5, seed=seed, boundary=[0, 2, 4])
        assert parse_graph(serialize_graph(g)).structurally_equal(g)


def test_parse_errors_name_line():
    with pytest.raises(SelfLoopError, match="line 3"):
        parse_graph("3 1\nB 1 0\n2 2\n")
    with pytest.raises(DuplicateEdgeError, match="line 4"):
        parse_graph("3 2\nB 1 0\n0 1\n1 0\n")
    with pytest.raises(MalformedHeaderError):
        parse_graph("x y\nB 1 0\n")
    with pytest.raises(VertexIndexError):
        parse_graph("3 1\nB 1 0\n0 9\n")
    with pytest.raises(MalformedHeaderError):
        parse_graph("3 1\nB 2 0\n0 1\n")  # boundary count mismatch
    with pytest.raises(VertexIndexError):
        parse_graph("3 1\nB 1 5\n0 1\n")


def test_parse_comments_ignored():
    g = parse_graph("# a comment\n3 2\nB 1 0\n# another\n0 1\n1 2\n")
    assert g.n == 3 and g.m == 2


def test_profile_round_trip_full_precision():
    vals = np.array([0.0, 1 / 3, -2.75, 1e-17, 0.1 + 0.2])
    text = serialize_profile(vals)
    back = parse_profile(text, 5)
    assert back.tolist() == vals.tolist()


def test_profile_errors():
    with pytest.raises(MalformedHeaderError):
        parse_profile("0 0.5\n", 2)  # missing vertex
    with pytest.raises(VertexIndexError):
        parse_profile("0 0.5\n7 0.1\n", 2)


# -- double cover ------------------------------------------------------------


def test_double_cover_k4():
    g, _ = generate("k4_lower_bound")
    dc = double_cover(g)
    cover = dc.cover
    assert cover.n == 8 and cover.m == 12
    assert cover.degree.tolist() == [3] * 8
    assert cover.is_connected  # K4 is non-bipartite
    # oracle: enumerate edges and confirm the plus/minus classes 2-color it
    plus = set(dc.phi_plus.tolist())
    minus = set(dc.phi_minus.tolist())
    for u, v in cover.edges.tolist():
        assert (u in plus) != (v in plus)
        assert (u in minus) != (v in minus)
    assert cover.is_bipartite
    # cover edges are exactly the lifts of original edges
    lifted = set()
    for u, v in g.edges.tolist():
        lifted.add(tuple(sorted((dc.phi_plus[u], dc.phi_minus[v]))))
        lifted.add(tuple(sorted((dc.phi_plus[v], dc.phi_minus[u]))))
    assert lifted == {tuple(e) for e in cover.edges.tolist()}


def test_double_cover_bipartite_splits():
    p3, _ = generate("path", n=3, boundary=[0])
    cover = double_cover(p3).cover
    color = cover.bipartition
    assert color is not None
    comp = _components(cover)
    assert len(comp) == 2
    assert sorted(len(c) for c in comp) == [3, 3]
    for c in comp:  # each component is a 3-vertex path
        degs = sorted(int(cover.degree[v]) for v in c)
        assert degs == [1, 1, 2]


def test_double_cover_single_edge():
    g = Graph(2, [(0, 1)], [0])
    cover = double_cover(g).cover
    assert cover.m == 2
    assert len(_components(cover)) == 2


def test_double_cover_degrees_and_boundary():
    g, _ = generate("erdos_renyi", n=8, prob=0.5, seed=3, boundary=[0, 5])
    dc = double_cover(g)
    for v in range(g.n):
        assert dc.cover.degree[dc.phi_plus[v]] == g.degree[v]
        assert dc.cover.degree[dc.phi_minus[v]] == g.degree[v]
        both = (dc.cover.boundary_mask[dc.phi_plus[v]],
                dc.cover.boundary_mask[dc.phi_minus[v]])
        assert both == (g.boundary_mask[v], g.boundary_mask[v])
    assert dc.cover.m == 2 * g.m


def _components(graph):
    seen = set()
    comps = []
    for s in range(graph.n):
        if s in seen:
            continue
        stack, comp = [s], set()
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(int(w) for w in graph.neighbors(v))
        seen |= comp
        comps.append(comp)
    return comps
