"""Immutable graph and colored-bipartite-graph types with file I/O.

Vertex ids are dense integers 0..n-1.  Adjacency is stored as sorted
neighbor tuples plus (for small graphs) one Python-int bitset per vertex
for O(1) probes; decoders and brute-force oracles probe adjacency heavily.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Sequence

#: Build per-vertex bitsets only below this vertex count.
BITSET_THRESHOLD = 4096

#: Guardrail on product vertex counts.
VERTEX_CAP = 1 << 22


class GraphFormatError(ValueError):
    """Raised on malformed graph/realization/label files."""


class Graph:
    """Simple undirected graph: no loops, no multi-edges, ids 0..n-1."""

    __slots__ = ("n", "_nbrs", "_rows")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]], *, strict: bool = False):
        if n < 0:
            raise ValueError("negative vertex count")
        self.n = n
        seen = set()
        adj: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u},{v}) out of range [0,{n})")
            if u == v:
                raise ValueError(f"self-loop at {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                if strict:
                    raise ValueError(f"duplicate edge {key}")
                continue
            seen.add(key)
            adj[u].append(v)
            adj[v].append(u)
        self._nbrs = tuple(tuple(sorted(a)) for a in adj)
        if n <= BITSET_THRESHOLD:
            rows = []
            for a in self._nbrs:
                row = 0
                for w in a:
                    row |= 1 << w
                rows.append(row)
            self._rows = tuple(rows)
        else:
            self._rows = None

    @property
    def m(self) -> int:
        return sum(len(a) for a in self._nbrs) // 2

    def has_edge(self, u: int, v: int) -> bool:
        if self._rows is not None:
            return bool(self._rows[u] >> v & 1)
        a = self._nbrs[u]
        lo, hi = 0, len(a)
        while lo < hi:
            mid = (lo + hi) // 2
            if a[mid] < v:
                lo = mid + 1
            else:
                hi = mid
        return lo < len(a) and a[lo] == v

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def edges(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n):
            for v in self._nbrs[u]:
                if u < v:
                    yield (u, v)

    def vertices(self) -> range:
        return range(self.n)

    def neighbor_set(self, v: int) -> frozenset[int]:
        return frozenset(self._nbrs[v])

    def __eq__(self, other) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self._nbrs == other._nbrs

    def __hash__(self):
        return hash((self.n, self._nbrs))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"

    def complement(self) -> Graph:
        edges = [(u, v) for u in range(self.n) for v in range(u + 1, self.n)
                 if not self.has_edge(u, v)]
        return Graph(self.n, edges)

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            comp = [s]
            seen[s] = True
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self._nbrs[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n <= 1 or len(self.connected_components()) == 1

    def bfs_distances(self, source: int) -> list[int]:
        """BFS distance from `source`; -1 for unreachable vertices."""
        dist = [-1] * self.n
        dist[source] = 0
        frontier = [source]
        d = 0
        while frontier:
            d += 1
            nxt = []
            for u in frontier:
                for w in self._nbrs[u]:
                    if dist[w] < 0:
                        dist[w] = d
                        nxt.append(w)
            frontier = nxt
        return dist


def induced_subgraph(g: Graph, vs: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """Subgraph induced by `vs`, plus the old-id -> new-id remap."""
    order = sorted(set(vs))
    for v in order:
        if not (0 <= v < g.n):
            raise ValueError(f"vertex {v} out of range")
    remap = {v: i for i, v in enumerate(order)}
    edges = []
    for i, v in enumerate(order):
        for w in g.neighbors(v):
            if w in remap and v < w:
                edges.append((i, remap[w]))
    return Graph(len(order), edges), remap


class ColoredBipartiteGraph:
    """Colored bipartite graph (X, Y, E): parts fixed, edges cross only.

    X vertices are addressed 0..nx-1 and Y vertices 0..ny-1, each in its
    own index space.
    """

    __slots__ = ("nx", "ny", "_adj_x", "_adj_y", "_rows_x")

    def __init__(self, nx: int, ny: int, edges: Iterable[tuple[int, int]], *, strict: bool = False):
        if nx < 0 or ny < 0:
            raise ValueError("negative part size")
        self.nx = nx
        self.ny = ny
        seen = set()
        ax: list[list[int]] = [[] for _ in range(nx)]
        ay: list[list[int]] = [[] for _ in range(ny)]
        for x, y in edges:
            if not (0 <= x < nx and 0 <= y < ny):
                raise ValueError(f"edge ({x},{y}) out of range {nx}x{ny}")
            if (x, y) in seen:
                if strict:
                    raise ValueError(f"duplicate edge ({x},{y})")
                continue
            seen.add((x, y))
            ax[x].append(y)
            ay[y].append(x)
        self._adj_x = tuple(tuple(sorted(a)) for a in ax)
        self._adj_y = tuple(tuple(sorted(a)) for a in ay)
        if max(nx, ny) <= BITSET_THRESHOLD:
            rows = []
            for a in self._adj_x:
                row = 0
                for w in a:
                    row |= 1 << w
                rows.append(row)
            self._rows_x = tuple(rows)
        else:
            self._rows_x = None

    @property
    def m(self) -> int:
        return sum(len(a) for a in self._adj_x)

    def has_edge(self, x: int, y: int) -> bool:
        if self._rows_x is not None:
            return bool(self._rows_x[x] >> y & 1)
        return y in self._adj_x[x]

    def neighbors_x(self, x: int) -> tuple[int, ...]:
        """Neighbors of X-vertex x, as Y-ids."""
        return self._adj_x[x]

    def neighbors_y(self, y: int) -> tuple[int, ...]:
        """Neighbors of Y-vertex y, as X-ids."""
        return self._adj_y[y]

    def deg_x(self, x: int) -> int:
        return len(self._adj_x[x])

    def deg_y(self, y: int) -> int:
        return len(self._adj_y[y])

    def edges(self) -> Iterator[tuple[int, int]]:
        for x in range(self.nx):
            for y in self._adj_x[x]:
                yield (x, y)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ColoredBipartiteGraph) and self.nx == other.nx
                and self.ny == other.ny and self._adj_x == other._adj_x)

    def __hash__(self):
        return hash((self.nx, self.ny, self._adj_x))

    def __repr__(self):
        return f"ColoredBipartiteGraph(nx={self.nx}, ny={self.ny}, m={self.m})"

    def induced(self, xs: Iterable[int], ys: Iterable[int]) -> "ColoredBipartiteGraph":
        """Sub-bigraph on the given X and Y subsets (ids remapped by sort order)."""
        xs = sorted(set(xs))
        ys = sorted(set(ys))
        ymap = {y: j for j, y in enumerate(ys)}
        edges = []
        for i, x in enumerate(xs):
            for y in self._adj_x[x]:
                if y in ymap:
                    edges.append((i, ymap[y]))
        return ColoredBipartiteGraph(len(xs), len(ys), edges)

    def to_graph(self) -> Graph:
        """Uncolored view: X-vertex x -> x, Y-vertex y -> nx + y."""
        return Graph(self.nx + self.ny, [(x, self.nx + y) for x, y in self.edges()])

    def connected_components(self) -> list[tuple[list[int], list[int]]]:
        """Components as ([X-ids], [Y-ids]) pairs; isolated vertices count."""
        comps = []
        seen_x = [False] * self.nx
        seen_y = [False] * self.ny
        for sx in range(self.nx):
            if seen_x[sx]:
                continue
            cx, cy = [sx], []
            seen_x[sx] = True
            stack = [("x", sx)]
            while stack:
                side, u = stack.pop()
                if side == "x":
                    for w in self._adj_x[u]:
                        if not seen_y[w]:
                            seen_y[w] = True
                            cy.append(w)
                            stack.append(("y", w))
                else:
                    for w in self._adj_y[u]:
                        if not seen_x[w]:
                            seen_x[w] = True
                            cx.append(w)
                            stack.append(("x", w))
            comps.append((sorted(cx), sorted(cy)))
        for sy in range(self.ny):
            if not seen_y[sy]:
                comps.append(([], [sy]))
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) <= 1

    def is_biclique(self) -> bool:
        return self.m == self.nx * self.ny

    def is_cobiclique(self) -> bool:
        return self.m == 0


def bipartite_complement(g: ColoredBipartiteGraph) -> ColoredBipartiteGraph:
    edges = [(x, y) for x in range(g.nx) for y in range(g.ny) if not g.has_edge(x, y)]
    return ColoredBipartiteGraph(g.nx, g.ny, edges)


def bip_transform(g: Graph) -> ColoredBipartiteGraph:
    """bip(G): parts are two copies of V; (x, y') is an edge iff (x,y) in E."""
    edges = []
    for u, v in g.edges():
        edges.append((u, v))
        edges.append((v, u))
    return ColoredBipartiteGraph(g.n, g.n, edges)


def cartesian_product(gs: Sequence[Graph], cap: int = VERTEX_CAP) -> tuple[Graph, list[tuple[int, ...]]]:
    """Cartesian product of `gs`.

    Returns (product graph, vertex-id -> coordinate tuple).  Adjacent iff
    exactly one coordinate pair is an edge of its factor and the rest are
    equal.
    """
    if not gs:
        raise ValueError("empty factor list")
    total = 1
    for g in gs:
        if g.n == 0:
            raise ValueError("empty factor")
        total *= g.n
        if total > cap:
            raise ValueError(f"product vertex count exceeds cap {cap}")
    coords = [tuple(t) for t in itertools.product(*[range(g.n) for g in gs])]
    index = {t: i for i, t in enumerate(coords)}
    edges = []
    for i, t in enumerate(coords):
        for pos, g in enumerate(gs):
            for w in g.neighbors(t[pos]):
                if w > t[pos]:
                    s = t[:pos] + (w,) + t[pos + 1:]
                    edges.append((i, index[s]))
    return Graph(total, edges), coords


# ---------------------------------------------------------------------------
# Text format:  line 1 `graph <name> <n>` or `bigraph <name> <nx> <ny>`,
# then `e <u> <v>` lines; `#` comments; 0-based ids.
# ---------------------------------------------------------------------------

def write_graph(g: Graph | ColoredBipartiteGraph, name: str) -> str:
    lines = []
    if isinstance(g, Graph):
        lines.append(f"graph {name} {g.n}")
    else:
        lines.append(f"bigraph {name} {g.nx} {g.ny}")
    for u, v in g.edges():
        lines.append(f"e {u} {v}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> tuple[Graph | ColoredBipartiteGraph, str]:
    """Parse the text graph format; returns (graph, name).

    Rejects duplicate and self edges so that round-trips are lossless.
    """
    header = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if header is None:
            if parts[0] == "graph" and len(parts) == 3:
                header = ("graph", parts[1], int(parts[2]))
            elif parts[0] == "bigraph" and len(parts) == 4:
                header = ("bigraph", parts[1], int(parts[2]), int(parts[3]))
            else:
                raise GraphFormatError(f"line {lineno}: bad header {line!r}")
            continue
        if parts[0] != "e" or len(parts) != 3:
            raise GraphFormatError(f"line {lineno}: expected 'e <u> <v>', got {line!r}")
        edges.append((int(parts[1]), int(parts[2])))
    if header is None:
        raise GraphFormatError("empty graph file")
    try:
        if header[0] == "graph":
            return Graph(header[2], edges, strict=True), header[1]
        return ColoredBipartiteGraph(header[2], header[3], edges, strict=True), header[1]
    except ValueError as e:
        raise GraphFormatError(str(e)) from e
