"""Immutable simple graphs with an interior/boundary vertex split.

Vertices are dense integer ids ``0..n-1``. The boundary is a boolean mask
(``True`` = boundary); profiles are plain float arrays indexed by vertex id.
Adjacency is stored CSR-style (``indptr``/``indices``) with sorted neighbor
lists. Graphs are immutable after construction (the backing arrays are marked
read-only) and safe to share across threads and worker processes.

File formats
------------
Graph (UTF-8 text, ``#`` starts a comment line)::

    n m
    B k b_1 ... b_k
    u v          (m lines, u < v)

Profile: ``n`` lines ``v value``, one per vertex, where ``value`` is a
decimal float serialized with shortest round-trip formatting so parsing
recovers the exact binary64 value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .rng import SplitMix64


class GraphFormatError(ValueError):
    """Malformed graph/profile text; ``line_no`` is 1-based when known."""

    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


class MalformedHeaderError(GraphFormatError):
    pass


class VertexIndexError(GraphFormatError):
    pass


class SelfLoopError(GraphFormatError):
    pass


class DuplicateEdgeError(GraphFormatError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    simple: bool
    connected: bool
    nonempty_interior: bool
    nonempty_boundary: bool
    degrees_consistent: bool

    @property
    def all_pass(self) -> bool:
        return (self.simple and self.connected and self.nonempty_interior
                and self.nonempty_boundary and self.degrees_consistent)

    def failures(self) -> list[str]:
        out = []
        for name in ("simple", "connected", "nonempty_interior",
                     "nonempty_boundary", "degrees_consistent"):
            if not getattr(self, name):
                out.append(name)
        return out


class Graph:
    """Finite simple undirected graph with a pinned boundary vertex set.

    Parameters
    ----------
    n : int
        Number of vertices.
    edges : iterable of (u, v)
        Unordered vertex pairs. Normalized to u < v and sorted
        lexicographically; self-loops and duplicates are rejected.
    boundary : iterable of int
        Boundary vertex ids. May be empty only for explicitly flagged
        no-boundary comparison graphs; the dynamics reject such graphs.
    """

    __slots__ = ("n", "m", "edges", "indptr", "indices", "degree",
                 "boundary_mask", "interior", "boundary", "n_star",
                 "__dict__")

    def __init__(self, n: int, edges, boundary):
        if n < 1:
            raise ValueError("graph needs at least one vertex")
        norm = []
        for (u, v) in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n) or not (0 <= v < n):
                raise VertexIndexError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise SelfLoopError(f"self-loop at vertex {u}")
            norm.append((u, v) if u < v else (v, u))
        norm.sort()
        for a, b in zip(norm, norm[1:]):
            if a == b:
                raise DuplicateEdgeError(f"duplicate edge {a}")
        self.n = n
        self.m = len(norm)
        self.edges = np.array(norm, dtype=np.int64).reshape(self.m, 2)

        degree = np.zeros(n, dtype=np.int64)
        for u, v in norm:
            degree[u] += 1
            degree[v] += 1
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degree, out=indptr[1:])
        indices = np.zeros(self.m * 2, dtype=np.int64)
        fill = indptr[:-1].copy()
        for u, v in norm:
            indices[fill[u]] = v
            fill[u] += 1
            indices[fill[v]] = u
            fill[v] += 1
        # neighbor lists are sorted because edges were processed in lex order
        self.indptr = indptr
        self.indices = indices
        self.degree = degree

        mask = np.zeros(n, dtype=bool)
        for b in boundary:
            b = int(b)
            if not (0 <= b < n):
                raise VertexIndexError(f"boundary vertex {b} out of range")
            mask[b] = True
        self.boundary_mask = mask
        self.boundary = np.flatnonzero(mask)
        self.interior = np.flatnonzero(~mask)
        self.n_star = int(self.interior.size)

        for arr in (self.edges, self.indptr, self.indices, self.degree,
                    self.boundary_mask, self.boundary, self.interior):
            arr.setflags(write=False)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        """Per-vertex sorted neighbor tuples (fast to index from pure Python)."""
        return tuple(tuple(int(w) for w in self.neighbors(v)) for v in range(self.n))

    @cached_property
    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        seen = np.zeros(self.n, dtype=bool)
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for w in self.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    count += 1
                    stack.append(int(w))
        return count == self.n

    @cached_property
    def bipartition(self) -> np.ndarray | None:
        """Two-coloring (0/1 per vertex) if bipartite, else None."""
        color = np.full(self.n, -1, dtype=np.int64)
        for s in range(self.n):
            if color[s] >= 0:
                continue
            color[s] = 0
            stack = [s]
            while stack:
                v = stack.pop()
                for w in self.neighbors(v):
                    if color[w] < 0:
                        color[w] = 1 - color[v]
                        stack.append(int(w))
                    elif color[w] == color[v]:
                        return None
        return color

    @property
    def is_bipartite(self) -> bool:
        return self.bipartition is not None

    def structurally_equal(self, other: "Graph") -> bool:
        return (self.n == other.n
                and np.array_equal(self.edges, other.edges)
                and np.array_equal(self.boundary_mask, other.boundary_mask))

    def __repr__(self):
        return (f"Graph(n={self.n}, m={self.m}, "
                f"boundary={self.boundary.tolist()})")


def validate(graph: Graph) -> ValidationReport:
    """Check the standing assumptions: simple, connected, I and B nonempty.

    Construction already rejects self-loops and duplicate edges, so the
    simplicity and degree checks re-verify stored invariants; connectivity
    and the nonempty-part checks can genuinely fail.
    """
    edges = [tuple(e) for e in graph.edges.tolist()]
    simple = all(u < v for u, v in edges) and len(set(edges)) == len(edges)
    degrees_consistent = bool(
        np.array_equal(
            graph.degree,
            np.diff(graph.indptr))) and int(graph.degree.sum()) == 2 * graph.m
    return ValidationReport(
        simple=simple,
        connected=graph.is_connected,
        nonempty_interior=graph.n_star > 0,
        nonempty_boundary=graph.boundary.size > 0,
        degrees_consistent=degrees_consistent,
    )


def require_valid(graph: Graph) -> None:
    rep = validate(graph)
    if not rep.all_pass:
        raise ValueError(f"graph fails validation: {', '.join(rep.failures())}")


def average_degree(graph: Graph) -> float:
    """Mean vertex degree, 2|E|/n."""
    return 2.0 * graph.m / graph.n


@dataclass(frozen=True)
class DoubleCoverMap:
    """Bipartite double cover together with the two lifting injections.

    ``phi_plus[v]`` and ``phi_minus[v]`` are the cover ids of the two copies
    of ``v``; every original edge {v, w} lifts to the pair of cover edges
    {phi_plus(v), phi_minus(w)} and {phi_plus(w), phi_minus(v)}.
    """
    cover: Graph
    phi_plus: np.ndarray
    phi_minus: np.ndarray


def double_cover(graph: Graph) -> DoubleCoverMap:
    """Build the bipartite double cover of ``graph``.

    The cover has 2n vertices and 2|E| edges, preserves degrees under both
    injections, and its boundary is the union of both copies of the original
    boundary. It is connected iff the input is connected and non-bipartite;
    for a bipartite input it splits into two components, each isomorphic to
    the input.
    """
    n = graph.n
    cover_edges = []
    for u, v in graph.edges.tolist():
        cover_edges.append((u, v + n))
        cover_edges.append((v, u + n))
    cover_boundary = list(graph.boundary) + [int(b) + n for b in graph.boundary]
    cover = Graph(2 * n, cover_edges, cover_boundary)
    phi_plus = np.arange(n, dtype=np.int64)
    phi_minus = np.arange(n, 2 * n, dtype=np.int64)
    return DoubleCoverMap(cover=cover, phi_plus=phi_plus, phi_minus=phi_minus)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

GENERATOR_KINDS = ("path", "cycle", "complete", "star", "erdos_renyi",
                   "k4_lower_bound")


def generate(kind: str, *, n: int | None = None, boundary=None,
             leaves: int | None = None, prob: float | None = None,
             seed: int | None = None, max_retries: int = 1000,
             allow_empty_boundary: bool = False):
    """Build a named graph instance.

    Returns ``(graph, f0)`` where ``f0`` is a canonical initial profile for
    kinds that define one (only ``k4_lower_bound``: the 0/1 indicator profile
    that is 1 everywhere except the first boundary vertex) and None otherwise.

    ``boundary`` is an explicit id list for every kind except
    ``k4_lower_bound`` (fixed B = {0, 1}). The Erdos-Renyi generator redraws
    whole graphs until connected (up to ``max_retries``) so the law is the
    conditional-on-connected one; a fixed seed reproduces the graph bitwise.
    """
    if kind not in GENERATOR_KINDS:
        raise ValueError(f"unknown generator kind {kind!r}")
    if kind == "k4_lower_bound":
        g = Graph(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], [0, 1])
        f0 = np.array([0.0, 1.0, 1.0, 1.0])
        return g, f0

    boundary = [] if boundary is None else list(boundary)
    if not boundary and not allow_empty_boundary:
        raise ValueError(f"kind {kind!r} requires a nonempty boundary list")

    if kind == "path":
        if n is None or n < 2:
            raise ValueError("path requires n >= 2")
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "cycle":
        if n is None or n < 3:
            raise ValueError("cycle requires n >= 3")
        edges = [(i, i + 1) for i in range(n - 1)] + [(0, n - 1)]
    elif kind == "complete":
        if n is None or n < 2:
            raise ValueError("complete requires n >= 2")
        edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    elif kind == "star":
        if leaves is None or leaves < 1:
            raise ValueError("star requires leaves >= 1")
        n = leaves + 1
        edges = [(0, i) for i in range(1, n)]
    else:  # erdos_renyi
        if n is None or n < 2:
            raise ValueError("erdos_renyi requires n >= 2")
        if prob is None or not (0.0 <= prob <= 1.0):
            raise ValueError("erdos_renyi requires edge probability in [0, 1]")
        if seed is None:
            raise ValueError("erdos_renyi requires a seed")
        rng = SplitMix64(seed)
        for _ in range(max_retries):
            edges = [(i, j) for i in range(n) for j in range(i + 1, n)
                     if rng.next_float() < prob]
            g = Graph(n, edges, boundary)
            if g.is_connected:
                return g, None
        raise RuntimeError(
            f"erdos_renyi: no connected sample in {max_retries} retries "
            f"(n={n}, prob={prob})")

    return Graph(n, edges, boundary), None


# ---------------------------------------------------------------------------
# Text serialization
# ---------------------------------------------------------------------------

def _content_lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield i, line


def parse_graph(text: str) -> Graph:
    """Parse the graph file format; raises a typed error naming the bad line."""
    lines = list(_content_lines(text))
    if not lines:
        raise MalformedHeaderError("empty graph file")

    line_no, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise MalformedHeaderError(f"expected 'n m', got {header!r}", line_no)
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise MalformedHeaderError(f"non-integer header {header!r}", line_no) from None
    if n < 1 or m < 0:
        raise MalformedHeaderError(f"invalid sizes n={n}, m={m}", line_no)

    if len(lines) < 2:
        raise MalformedHeaderError("missing boundary line", line_no)
    line_no, bline = lines[1]
    bparts = bline.split()
    if not bparts or bparts[0] != "B":
        raise MalformedHeaderError(f"expected boundary line 'B k ...', got {bline!r}", line_no)
    try:
        k = int(bparts[1])
        bnd = [int(x) for x in bparts[2:]]
    except (IndexError, ValueError):
        raise MalformedHeaderError(f"malformed boundary line {bline!r}", line_no) from None
    if len(bnd) != k:
        raise MalformedHeaderError(
            f"boundary line announces {k} ids but carries {len(bnd)}", line_no)
    for b in bnd:
        if not (0 <= b < n):
            raise VertexIndexError(f"boundary vertex {b} out of range", line_no)

    edge_lines = lines[2:]
    if len(edge_lines) != m:
        raise MalformedHeaderError(
            f"header announces {m} edges but file carries {len(edge_lines)}")
    seen: set[tuple[int, int]] = set()
    edges = []
    for line_no, eline in edge_lines:
        eparts = eline.split()
        if len(eparts) != 2:
            raise MalformedHeaderError(f"expected 'u v', got {eline!r}", line_no)
        try:
            u, v = int(eparts[0]), int(eparts[1])
        except ValueError:
            raise MalformedHeaderError(f"non-integer edge {eline!r}", line_no) from None
        if not (0 <= u < n) or not (0 <= v < n):
            raise VertexIndexError(f"edge ({u}, {v}) out of range", line_no)
        if u == v:
            raise SelfLoopError(f"self-loop edge {eline!r}", line_no)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {eline!r}", line_no)
        seen.add(key)
        edges.append(key)
    return Graph(n, edges, bnd)


def serialize_graph(graph: Graph) -> str:
    """Canonical text form: edges sorted lexicographically, u < v."""
    out = [f"{graph.n} {graph.m}"]
    bnd = " ".join(str(int(b)) for b in graph.boundary)
    out.append(f"B {graph.boundary.size}" + (f" {bnd}" if bnd else ""))
    for u, v in graph.edges.tolist():
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


def parse_profile(text: str, n: int) -> np.ndarray:
    """Parse an ``n``-line profile file into a float array."""
    values = np.full(n, np.nan)
    seen = np.zeros(n, dtype=bool)
    count = 0
    for line_no, line in _content_lines(text):
        parts = line.split()
        if len(parts) != 2:
            raise MalformedHeaderError(f"expected 'v value', got {line!r}", line_no)
        try:
            v = int(parts[0])
            x = float(parts[1])
        except ValueError:
            raise MalformedHeaderError(f"malformed profile line {line!r}", line_no) from None
        if not (0 <= v < n):
            raise VertexIndexError(f"profile vertex {v} out of range", line_no)
        if seen[v]:
            raise DuplicateEdgeError(f"repeated profile vertex {v}", line_no)
        seen[v] = True
        values[v] = x
        count += 1
    if count != n:
        raise MalformedHeaderError(f"profile covers {count} of {n} vertices")
    return values


def serialize_profile(values) -> str:
    """One ``v value`` line per vertex; values round-trip at full precision."""
    return "".join(f"{v} {float(x)!r}\n" for v, x in enumerate(values))
