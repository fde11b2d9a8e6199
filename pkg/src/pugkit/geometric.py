"""Interval-graph and permutation-graph schemes built from geometric
realizations.

Realizations are inputs, not computed; a cross-validator asserts the
realization matches the graph before any scheme runs.  Endpoint and
coordinate ties are broken by perturbing to distinct integers via stable
rank.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .bipartite import chain_graph_labels
from .combinators import _bits, _unbits, _width_for
from .graphs import ColoredBipartiteGraph, Graph, GraphFormatError
from .labels import EqualityScheme, LabelNode, SchemeError, build_walker, register_walker
from .rng import rng_for
from .sketch import arboricity_scheme
from .structure import interval_clique_number, twin_partition


# ---------------------------------------------------------------------------
# Realizations.
# ---------------------------------------------------------------------------

Interval = tuple[float, float]
Point = tuple[float, float]


def interval_graph_from(realization: Sequence[Interval]) -> Graph:
    n = len(realization)
    edges = []
    for u in range(n):
        lu, ru = realization[u]
        if lu > ru:
            raise ValueError(f"malformed interval at {u}")
        for v in range(u + 1, n):
            lv, rv = realization[v]
            if lu <= rv and lv <= ru:
                edges.append((u, v))
    return Graph(n, edges)


def permutation_graph_from(points: Sequence[Point]) -> Graph:
    """Adjacency = comparability under the coordinatewise partial order."""
    n = len(points)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            (x1, y1), (x2, y2) = points[u], points[v]
            if (x1 <= x2 and y1 <= y2) or (x2 <= x1 and y2 <= y1):
                edges.append((u, v))
    return Graph(n, edges)


def distinct_ranks(points: Sequence[Point]) -> list[tuple[int, int]]:
    """Perturb coordinates to distinct integers by stable rank per axis."""
    xs = sorted(range(len(points)), key=lambda i: (points[i][0], i))
    ys = sorted(range(len(points)), key=lambda i: (points[i][1], i))
    rx = {v: r for r, v in enumerate(xs)}
    ry = {v: r for r, v in enumerate(ys)}
    return [(rx[i], ry[i]) for i in range(len(points))]


def random_intervals(n: int, seed: int, span: int | None = None) -> list[Interval]:
    rng = rng_for(seed, "intervals", n)
    span = span or 3 * n
    out = []
    for _ in range(n):
        a = rng.randrange(span)
        out.append((float(a), float(a + rng.randrange(1, max(span // 3, 2)))))
    return out


def random_points(n: int, seed: int) -> list[Point]:
    rng = rng_for(seed, "points", n)
    perm = list(range(n))
    rng.shuffle(perm)
    return [(float(i), float(perm[i])) for i in range(n)]


def write_realization(kind: str, items, name: str) -> str:
    if kind == "intervals":
        lines = [f"intervals {name}"]
        lines += [f"i {i} {l:g} {r:g}" for i, (l, r) in enumerate(items)]
    elif kind == "points":
        lines = [f"points {name}"]
        lines += [f"p {i} {x:g} {y:g}" for i, (x, y) in enumerate(items)]
    else:
        raise ValueError(kind)
    return "\n".join(lines) + "\n"


def parse_realization(text: str):
    """Returns (kind, items, name)."""
    kind = name = None
    items: dict[int, tuple[float, float]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if kind is None:
            if parts[0] not in ("intervals", "points") or len(parts) != 2:
                raise GraphFormatError(f"line {lineno}: bad realization header")
            kind, name = parts[0], parts[1]
            continue
        want = "i" if kind == "intervals" else "p"
        if parts[0] != want or len(parts) != 4:
            raise GraphFormatError(f"line {lineno}: expected '{want} <id> <a> <b>'")
        items[int(parts[1])] = (float(parts[2]), float(parts[3]))
    if kind is None:
        raise GraphFormatError("empty realization file")
    return kind, [items[i] for i in range(len(items))], name


# ---------------------------------------------------------------------------
# Interval scheme: true-twin reduction, clique bound, arboricity labels.
# ---------------------------------------------------------------------------

def interval_scheme(g: Graph, realization: Sequence[Interval], k: int) -> EqualityScheme:
    """Equality scheme for an interval graph with declared chain bound k.

    Reduces true twins (identical-neighborhood cliques), checks the
    quotient's clique number against 4(k+1)^2 (a violation refutes the
    chain bound), then labels the quotient by its degeneracy forests.
    """
    if interval_graph_from(realization) != g:
        raise SchemeError("realization does not match the graph")
    from .combinators import twin_reduce_scheme

    cap = 4 * (k + 1) ** 2

    def base_builder(quotient: Graph, remap: dict[int, int]) -> EqualityScheme:
        inv = {i: v for v, i in remap.items()}
        sub_real = [realization[inv[i]] for i in range(quotient.n)]
        tp = twin_partition(quotient, "true")
        if any(len(c) > 1 for c in tp.classes):
            raise SchemeError("quotient is not true-twin-free")
        clique = interval_clique_number(list(sub_real))
        if clique > cap:
            raise SchemeError(
                f"quotient clique number {clique} exceeds 4(k+1)^2={cap}; "
                "the declared chain bound is violated")
        return arboricity_scheme(quotient)

    scheme, _ = twin_reduce_scheme(g, "true", base_builder)
    return scheme


# ---------------------------------------------------------------------------
# Permutation decomposition (anchor staircase) and labels.
# ---------------------------------------------------------------------------

@dataclass
class PermDecomposition:
    parts: list[tuple[int, ...]]  # V_1..V_m as original vertex ids
    j_sets: dict[int, tuple[int, ...]]  # part index -> at most 4 part indices
    mirrored: bool  # True: non-J cross pairs are bicliques; else co-bicliques


def _strip(pts: dict[int, tuple[int, int]], axis: int, lo: float, hi: float) -> set[int]:
    return {v for v, p in pts.items() if lo < p[axis] < hi}


def permutation_decompose(points: Sequence[Point],
                          vertex_ids: Sequence[int] | None = None,
                          g: Graph | None = None) -> PermDecomposition:
    """The staircase decomposition of a permutation graph whose graph and
    complement are both connected.

    Anchors a^(i) (minimal) and b^(i) (maximal) alternate until they
    repeat; each part is an anchor plus an axis-aligned open box.  In the
    mirrored case (top vertex right of the bottom vertex) the points are
    reflected, which realizes the complement, and the same procedure runs
    there.
    """
    ids = list(vertex_ids) if vertex_ids is not None else list(range(len(points)))
    ranked = distinct_ranks(points)
    pts = {v: ranked[i] for i, v in enumerate(ids)}
    if g is not None:
        if not g.is_connected() or not g.complement().is_connected():
            raise SchemeError("decomposition requires G and co-G connected")

    INF = float("inf")
    a1 = min(pts, key=lambda v: pts[v][1])
    btop = max(pts, key=lambda v: pts[v][1])
    mirrored = pts[btop][0] > pts[a1][0]
    if mirrored:
        pts = {v: (-x, y) for v, (x, y) in pts.items()}
        a1 = min(pts, key=lambda v: pts[v][1])

    a_seq = [a1]
    b_seq: list[int] = []
    while True:
        if len(a_seq) > len(pts) + 1:
            raise SchemeError("staircase fails to stabilize")
        cand = [v for v in pts if pts[v][0] > pts[a_seq[-1]][0]]
        if not cand:
            raise SchemeError("b-anchor undefined: graph is disconnected")
        b_i = max(cand, key=lambda v: pts[v][1])
        if b_seq and b_i == b_seq[-1]:
            break
        b_seq.append(b_i)
        cand_a = [v for v in pts if pts[v][1] < pts[b_seq[-1]][1]]
        a_next = min(cand_a, key=lambda v: pts[v][0])
        if a_next == a_seq[-1]:
            break
        a_seq.append(a_next)

    def x(v):
        return pts[v][0]

    def y(v):
        return pts[v][1]

    parts: list[set[int]] = []
    names: list[str] = []
    m = len(a_seq)
    t = len(b_seq)
    if m < 2 or t < 1:
        raise SchemeError("degenerate staircase (graph or complement disconnected)")
    a0_box = _strip(pts, 0, x(a_seq[0]), x(b_seq[0])) & _strip(pts, 1, y(a_seq[0]), y(a_seq[1]))
    parts.append({a_seq[0]} | a0_box)
    names.append("A0")
    a1_box = _strip(pts, 0, x(a_seq[1]), x(a_seq[0])) & _strip(pts, 1, y(a_seq[0]), y(b_seq[0]))
    parts.append({a_seq[1]} | a1_box)
    names.append("A1")
    for i in range(2, m):
        box = _strip(pts, 0, x(a_seq[i]), x(a_seq[i - 1])) & \
            _strip(pts, 1, y(b_seq[i - 2]), y(b_seq[i - 1]))
        parts.append({a_seq[i]} | box)
        names.append(f"A{i}")
    b0_box = _strip(pts, 0, x(b_seq[0]), INF) & _strip(pts, 1, y(a_seq[0]), y(a_seq[1]))
    parts.append(set(b0_box))
    names.append("B0")
    b1_box = _strip(pts, 0, x(a_seq[0]), INF) & _strip(pts, 1, y(a_seq[1]), y(b_seq[0]))
    parts.append({b_seq[0]} | b1_box)
    names.append("B1")
    for i in range(2, t + 1):
        box = _strip(pts, 0, x(a_seq[i - 1]), x(a_seq[i - 2])) & \
            _strip(pts, 1, y(b_seq[i - 2]), y(b_seq[i - 1]))
        parts.append({b_seq[i - 1]} | box)
        names.append(f"B{i}")

    # partition sanity (claimed by the construction; verified, not trusted)
    claimed = [v for p in parts for v in p]
    if sorted(claimed) != sorted(ids):
        raise SchemeError("staircase parts do not partition the vertex set")

    index = {nm: i for i, nm in enumerate(names)}

    def jset(nm: str) -> list[str]:
        if nm == "A1":
            return ["A0", "B0", "B1", "B2"]
        if nm in ("A0", "B0", "B1"):
            return [o for o in ("A0", "B0", "A1", "B1") if o != nm]
        kind, idx = nm[0], int(nm[1:])
        if kind == "A":
            return [f"B{idx}", f"B{idx + 1}"]
        return [f"A{idx}", f"A{idx - 1}"]

    j_sets: dict[int, set[int]] = {i: set() for i in range(len(parts))}
    for nm in names:
        for other in jset(nm):
            if other in index and other != nm:
                j_sets[index[nm]].add(index[other])
    for i in list(j_sets):  # symmetrize
        for j in j_sets[i]:
            j_sets[j].add(i)
    keep = [i for i, p in enumerate(parts) if p]
    remap = {i: r for r, i in enumerate(keep)}
    out_parts = [tuple(sorted(parts[i])) for i in keep]
    out_j = {remap[i]: tuple(sorted(remap[j] for j in j_sets[i] if j in remap))
             for i in keep}
    for i, js in out_j.items():
        if len(js) > 4:
            raise SchemeError(f"J-set of part {i} has {len(js)} > 4 entries")
    return PermDecomposition(out_parts, out_j, mirrored)


def _bipartition_as_chain(g: Graph, vs: Sequence[int]):
    """2-color the induced subgraph; None if not bipartite."""
    vs = sorted(vs)
    pos = {v: i for i, v in enumerate(vs)}
    color = {}
    for s in vs:
        if s in color:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for w in g.neighbors(u):
                if w not in pos:
                    continue
                if w not in color:
                    color[w] = 1 - color[u]
                    stack.append(w)
                elif color[w] == color[u]:
                    return None
    xs = [v for v in vs if color[v] == 0]
    ys = [v for v in vs if color[v] == 1]
    return xs, ys


def _cross_bigraph(g: Graph, xs: Sequence[int], ys: Sequence[int]) -> ColoredBipartiteGraph:
    xs, ys = sorted(xs), sorted(ys)
    ymap = {y: j for j, y in enumerate(ys)}
    edges = []
    for i, x in enumerate(xs):
        for w in g.neighbors(x):
            if w in ymap:
                edges.append((i, ymap[w]))
    return ColoredBipartiteGraph(len(xs), len(ys), edges)


PERM_TAG_L = (0, 0)
PERM_TAG_D = (0, 1)
PERM_TAG_DBAR = (1, 0)
PERM_TAG_P = (1, 1)


def _perm_walker_factory(spec: dict):
    chain = build_walker({"name": "chain-graph", "bits": spec["chain_bits"]})

    def rec(nx, ny, eq) -> int:
        kx = (nx.tag[0], nx.tag[1])
        ky = (ny.tag[0], ny.tag[1])
        if kx != ky:
            raise SchemeError("misaligned permutation labels")
        if kx == PERM_TAG_L:
            return chain(nx.children[0], ny.children[0], eq)
        if kx == PERM_TAG_D:
            if not eq(nx.slot0, ny.slot0):
                return 0
            return rec(nx.children[0], ny.children[0], eq)
        if kx == PERM_TAG_DBAR:
            if not eq(nx.slot0, ny.slot0):
                return 1
            return rec(nx.children[0], ny.children[0], eq)
        b = nx.tag[2]
        if eq(nx.slot0, ny.slot0):
            return rec(nx.children[4], ny.children[4], eq)
        s = next((u for u in range(4) if eq(nx.slot0, ny.slot0 + 1 + u)), None)
        t = next((u for u in range(4) if eq(nx.slot0 + 1 + u, ny.slot0)), None)
        if s is None or t is None:
            return b
        return chain(nx.children[t], ny.children[s], eq)

    def walk(sx, sy, eq) -> int:
        return rec(sx, sy, eq)

    return walk


register_walker("permutation", _perm_walker_factory)


def permutation_labels(g: Graph, points: Sequence[Point], k: int) -> EqualityScheme:
    """Equality labels for a permutation graph of chain number at most k.

    The decomposition tree has chain-graph leaves, D/D-bar nodes, and
    staircase P-nodes whose tuples carry the biclique flag, up to four
    chain-graph labels in the prefix, and part plus J-set ids as codes.
    Depth is bounded by 2(2k+1).
    """
    if permutation_graph_from(points) != g:
        raise SchemeError("realization does not match the graph")
    chain_bits = _width_for(k + 2)
    max_depth = 2 * (2 * k + 1)

    def chain_leaf_label(sub: ColoredBipartiteGraph, xs, ys) -> dict[int, LabelNode]:
        scheme = chain_graph_labels(sub, k)
        out = {}
        for i, v in enumerate(sorted(xs)):
            out[v] = scheme.labels[i]
        for j, w in enumerate(sorted(ys)):
            out[w] = scheme.labels[sub.nx + j]
        return out

    def try_chain_leaf(vs: Sequence[int]) -> dict[int, LabelNode] | None:
        bip = _bipartition_as_chain(g, vs)
        if bip is None:
            return None
        xs, ys = bip
        sub = _cross_bigraph(g, xs, ys)
        try:
            return chain_leaf_label(sub, xs, ys)
        except SchemeError:
            return None

    def build(vs: tuple[int, ...], depth: int) -> dict[int, LabelNode]:
        if depth > max_depth:
            raise SchemeError(f"decomposition depth exceeds 2(2k+1)={max_depth}")
        leaf = try_chain_leaf(vs)
        if leaf is not None:
            return {v: LabelNode(tag=PERM_TAG_L, children=(leaf[v],)) for v in vs}
        from .graphs import induced_subgraph

        sub, remap = induced_subgraph(g, vs)
        inv = {i: v for v, i in remap.items()}
        comps = sub.connected_components()
        if len(comps) > 1:
            return _branch(vs, comps, inv, PERM_TAG_D, depth)
        co = sub.complement()
        cocomps = co.connected_components()
        if len(cocomps) > 1:
            return _branch(vs, cocomps, inv, PERM_TAG_DBAR, depth)
        dec = permutation_decompose([points[v] for v in sorted(vs)],
                                    vertex_ids=sorted(vs))
        return _pnode(vs, dec, depth)

    def _branch(vs, comps, inv, tag, depth):
        out = {}
        comps = sorted([sorted(inv[i] for i in c) for c in comps])
        for code, comp in enumerate(comps):
            child = build(tuple(comp), depth + 1)
            for v in comp:
                out[v] = LabelNode(tag=tag, codes=(code,), children=(child[v],))
        return out

    def _pnode(vs, dec: PermDecomposition, depth):
        nparts = len(dec.parts)
        bflag = 1 if dec.mirrored else 0
        # verify the non-J cross pairs are uniformly pure
        for i in range(nparts):
            for j in range(i + 1, nparts):
                if j in dec.j_sets.get(i, ()):
                    continue
                for u in dec.parts[i]:
                    for w in dec.parts[j]:
                        if g.has_edge(u, w) != bool(bflag):
                            raise SchemeError(
                                "non-J cross pair is not uniformly pure")
        chain_schemes: dict[tuple[int, int], dict[int, LabelNode]] = {}
        for i in range(nparts):
            for j in dec.j_sets.get(i, ()):
                key = (min(i, j), max(i, j))
                if key in chain_schemes:
                    continue
                xs, ys = dec.parts[key[0]], dec.parts[key[1]]
                sub = _cross_bigraph(g, xs, ys)
                labels = chain_leaf_label(sub, xs, ys)
                chain_schemes[key] = labels
        dummy_chain = LabelNode(tag=(0,) + _bits(0, chain_bits))
        out = {}
        for i, part in enumerate(dec.parts):
            js = list(dec.j_sets.get(i, ()))
            child = build(tuple(part), depth + 1)
            for v in part:
                kids = []
                codes = [i]
                for slot in range(4):
                    if slot < len(js):
                        j = js[slot]
                        key = (min(i, j), max(i, j))
                        kids.append(chain_schemes[key][v])
                        codes.append(j)
                    else:
                        kids.append(dummy_chain)
                        codes.append(nparts + slot)  # sentinel, never matches
                kids.append(child[v])
                out[v] = LabelNode(tag=PERM_TAG_P + (bflag,), codes=tuple(codes),
                                   children=tuple(kids))
        return out

    labels_map = build(tuple(range(g.n)), 0)
    spec = {"name": "permutation", "chain_bits": chain_bits}
    return EqualityScheme([labels_map[v] for v in range(g.n)],
                          _perm_walker_factory(spec), decoder_spec=spec,
                          name="permutation")
