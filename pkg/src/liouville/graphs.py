"""Finite weighted graphs and their discrete calculus.

A weighted graph carries symmetric positive edge weights mu_xy.  The vertex
measure is mu(x) = sum of incident edge weights, the Laplacian is the
mu-normalized difference operator, and the gradient norm is the square root
of the quadratic form sum_y (mu_xy / 2 mu(x)) (u(y) - u(x))^2.

Graphs and functions are immutable once built; every operation here is a
pure read, safe to call concurrently.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import mpmath as mp

from .errors import InputError, IsolatedVertexError
from .numerics import check_le, to_mpf


class WeightedGraph:
    """Undirected graph with dense integer vertex ids and positive edge weights.

    Edges are canonicalized to (min, max) pairs, so symmetry of the weight
    is structural.  Self-loops, repeated edges, nonpositive weights, and
    isolated vertices are rejected at construction.
    """

    __slots__ = ("_n", "_adj", "_edges", "_measures", "_dist_cache")

    def __init__(self, n_vertices: int, edges: Iterable[tuple[int, int, object]]):
        if n_vertices <= 0:
            raise InputError("graph needs at least one vertex")
        canonical: dict[tuple[int, int], mp.mpf] = {}
        for x, y, w in edges:
            if not (0 <= x < n_vertices and 0 <= y < n_vertices):
                raise InputError(f"edge ({x},{y}) references an unknown vertex")
            if x == y:
                raise InputError(f"self-loop at vertex {x}")
            key = (x, y) if x < y else (y, x)
            if key in canonical:
                raise InputError(f"duplicate edge {key}")
            weight = to_mpf(w)
            if not weight > 0:
                raise InputError(f"edge {key} has nonpositive weight {w}")
            canonical[key] = weight
        adj: list[list[tuple[int, mp.mpf]]] = [[] for _ in range(n_vertices)]
        for (x, y), w in sorted(canonical.items()):
            adj[x].append((y, w))
            adj[y].append((x, w))
        for v, nbrs in enumerate(adj):
            if not nbrs:
                raise IsolatedVertexError(
                    f"vertex {v} is isolated; the Laplacian is undefined there"
                )
        self._n = n_vertices
        self._adj = tuple(tuple(sorted(nbrs)) for nbrs in adj)
        self._edges = tuple(sorted(canonical.items()))
        self._measures = tuple(mp.fsum(w for _, w in nbrs) for nbrs in self._adj)
        self._dist_cache: dict[int, tuple[int, ...]] = {}

    @property
    def n_vertices(self) -> int:
        return self._n

    def vertices(self) -> range:
        return range(self._n)

    def edges(self) -> tuple[tuple[tuple[int, int], mp.mpf], ...]:
        """Canonical (x, y) with x < y, paired with the weight."""
        return self._edges

    def neighbors(self, x: int) -> tuple[tuple[int, mp.mpf], ...]:
        self._check_vertex(x)
        return self._adj[x]

    def degree(self, x: int) -> int:
        return len(self.neighbors(x))

    def weight(self, x: int, y: int) -> mp.mpf:
        for z, w in self.neighbors(x):
            if z == y:
                return w
        return mp.mpf(0)

    def _check_vertex(self, x: int) -> None:
        if not (isinstance(x, int) and 0 <= x < self._n):
            raise InputError(f"unknown vertex {x}")

    def distances_from(self, o: int) -> tuple[int, ...]:
        """BFS distances from o; unreachable vertices get -1.  Cached per root."""
        self._check_vertex(o)
        cached = self._dist_cache.get(o)
        if cached is not None:
            return cached
        dist = [-1] * self._n
        dist[o] = 0
        queue = deque([o])
        while queue:
            x = queue.popleft()
            for y, _ in self._adj[x]:
                if dist[y] < 0:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        result = tuple(dist)
        self._dist_cache[o] = result
        return result

    def is_connected(self) -> bool:
        return all(d >= 0 for d in self.distances_from(0))

    def ball(self, o: int, radius: int) -> list[int]:
        if radius < 0:
            raise InputError("radius must be nonnegative")
        dist = self.distances_from(o)
        return [v for v in self.vertices() if 0 <= dist[v] <= radius]


class GraphFunction:
    """A real-valued function defined on every vertex of a graph."""

    __slots__ = ("_values",)

    def __init__(self, values: Sequence):
        self._values = tuple(to_mpf(v) for v in values)

    @classmethod
    def constant(cls, g: WeightedGraph, value) -> "GraphFunction":
        return cls([value] * g.n_vertices)

    @classmethod
    def from_callable(cls, g: WeightedGraph, fn: Callable[[int], object]) -> "GraphFunction":
        return cls([fn(x) for x in g.vertices()])

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, x: int) -> mp.mpf:
        return self._values[x]

    def values(self) -> tuple[mp.mpf, ...]:
        return self._values

    def is_positive(self) -> bool:
        return all(v > 0 for v in self._values)

    def combine(self, a, other: "GraphFunction", b) -> "GraphFunction":
        """Pointwise a*self + b*other."""
        a, b = to_mpf(a), to_mpf(b)
        return GraphFunction([a * u + b * v for u, v in zip(self._values, other._values)])


def _require_total(g: WeightedGraph, u: GraphFunction) -> None:
    if len(u) != g.n_vertices:
        raise InputError(f"function defined on {len(u)} vertices, graph has {g.n_vertices}")


def vertex_measure(g: WeightedGraph, x: int) -> mp.mpf:
    """mu(x) = sum of weights of edges at x.  Positive by construction."""
    g._check_vertex(x)
    m = g._measures[x]
    if not m > 0:
        raise IsolatedVertexError(f"vertex {x} has measure zero")
    return m


def laplacian(g: WeightedGraph, u: GraphFunction, x: int) -> mp.mpf:
    """Delta u(x) = sum_y (mu_xy / mu(x)) (u(y) - u(x))."""
    _require_total(g, u)
    m = vertex_measure(g, x)
    return mp.fsum(w * (u[y] - u[x]) for y, w in g.neighbors(x)) / m


def gradient_form(g: WeightedGraph, u: GraphFunction, v: GraphFunction, x: int) -> mp.mpf:
    """Bilinear form Gamma(u, v)(x) = sum_y (mu_xy / 2 mu(x)) (u(y)-u(x))(v(y)-v(x))."""
    _require_total(g, u)
    _require_total(g, v)
    m = vertex_measure(g, x)
    return mp.fsum(w * (u[y] - u[x]) * (v[y] - v[x]) for y, w in g.neighbors(x)) / (2 * m)


def gradient_norm(g: WeightedGraph, u: GraphFunction, x: int) -> mp.mpf:
    """|grad u|(x) = sqrt(Gamma(u, u)(x))."""
    return mp.sqrt(gradient_form(g, u, u, x))


def restricted_gradient_norm(
    g: WeightedGraph, u: GraphFunction, x: int, omega: Iterable[int]
) -> mp.mpf:
    """Gradient norm keeping only neighbors inside omega.

    The normalization stays the full vertex measure mu(x), so this is a lower
    bound for the true gradient norm, not the gradient of the induced
    subgraph.
    """
    _require_total(g, u)
    omega_set = set(omega)
    if x not in omega_set:
        raise InputError(f"vertex {x} is outside the restriction set")
    m = vertex_measure(g, x)
    acc = mp.fsum(w * (u[y] - u[x]) ** 2 for y, w in g.neighbors(x) if y in omega_set)
    return mp.sqrt(acc / (2 * m))


def p0_of(g: WeightedGraph) -> mp.mpf:
    """Smallest p0 with mu_xy / mu(x) >= 1/p0 on every directed edge.

    Equals the maximum of mu(x)/mu_xy over both orientations of all edges;
    always at least 1.
    """
    worst = mp.mpf(1)
    for (x, y), w in g.edges():
        worst = max(worst, vertex_measure(g, x) / w, vertex_measure(g, y) / w)
    return worst


def ball_volume(g: WeightedGraph, o: int, n: int) -> mp.mpf:
    """mu(B(o, n)): total vertex measure within graph distance n of o."""
    if n < 0:
        raise InputError("radius must be nonnegative")
    return mp.fsum(vertex_measure(g, x) for x in g.ball(o, n))


def nash_williams_partial(
    volume_profile: Callable[[int], object], n_max: int, n_min: int = 1
) -> mp.mpf:
    """Partial sum of n / mu(B(o, n)) for n in [n_min, n_max].

    Divergence of the full series certifies parabolicity: every nonnegative
    supersolution of the Laplace inequality is constant.
    """
    if n_min < 1 or n_max < n_min:
        raise InputError("need 1 <= n_min <= n_max")
    total = mp.mpf(0)
    for n in range(n_min, n_max + 1):
        vol = to_mpf(volume_profile(n))
        if not vol > 0:
            raise InputError(f"volume profile must be positive, got {vol} at n={n}")
        total += n / vol
    return total


@dataclass(frozen=True)
class HarnackReport:
    holds: bool
    worst_edge: tuple[int, int] | None
    worst_ratio: mp.mpf
    p0: mp.mpf


def harnack_check(g: WeightedGraph, u: GraphFunction, p0) -> HarnackReport:
    """Scan all edges for 1/p0 <= u(x)/u(y) <= p0.

    Requires u > 0; reports the extremal adjacent ratio and the edge where
    it occurs.
    """
    _require_total(g, u)
    p0 = to_mpf(p0)
    if p0 < 1:
        raise InputError("p0 must be at least 1")
    worst_ratio = mp.mpf(1)
    worst_edge: tuple[int, int] | None = None
    for (x, y), _ in g.edges():
        if not (u[x] > 0 and u[y] > 0):
            raise InputError(f"harnack_check needs positive values, edge ({x},{y})")
        ratio = max(u[x] / u[y], u[y] / u[x])
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst_edge = (x, y)
    holds = check_le(worst_ratio, p0).holds
    return HarnackReport(holds=holds, worst_edge=worst_edge, worst_ratio=worst_ratio, p0=p0)


# Edge-list text format: header "graph v=<count>", then "x y mu" lines.
# Lines starting with '#' are comments.

def format_graph_text(g: WeightedGraph, digits: int = 30) -> str:
    lines = [f"graph v={g.n_vertices}"]
    for (x, y), w in g.edges():
        lines.append(f"{x} {y} {mp.nstr(w, digits, strip_zeros=True)}")
    return "\n".join(lines) + "\n"


def parse_graph_text(text: str) -> WeightedGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise InputError("empty graph file")
    header = lines[0].split()
    if len(header) != 2 or header[0] != "graph" or not header[1].startswith("v="):
        raise InputError(f"bad graph header: {lines[0]!r}")
    try:
        n = int(header[1][2:])
    except ValueError:
        raise InputError(f"bad vertex count in header: {lines[0]!r}")
    edges = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 3:
            raise InputError(f"bad edge line: {ln!r}")
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"bad vertex id in line: {ln!r}")
        edges.append((x, y, mp.mpf(parts[2])))
    return WeightedGraph(n, edges)
