"""Labeling schemes for the monogenic bipartite families: equivalence and
chain-graph leaves, one-sided T_p-free, one-sided F_{p,p}-free, F*_{p,q},
and P7-free graphs.

Family membership is verified where cheap (P3/P4/2K2-freeness, degree
conditions); the structural procedures carry runtime invariant checks that
flag inputs outside the declared family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .combinators import (
    DTNode,
    _bits,
    _unbits,
    _width_for,
    assemble_decomposition_labels,
)
from .graphs import ColoredBipartiteGraph, Graph, bipartite_complement
from .labels import EqualityScheme, LabelNode, SchemeError, register_walker


# ---------------------------------------------------------------------------
# Equivalence graphs (P3-free) and bipartite equivalence graphs (P4-free).
# ---------------------------------------------------------------------------

def _equivalence_walker(sx, sy, eq) -> int:
    return int(eq(sx.slot0, sy.slot0))


def _bip_equivalence_walker(sx, sy, eq) -> int:
    if sx.tag[0] == sy.tag[0]:
        return 0
    return int(eq(sx.slot0, sy.slot0))


register_walker("equivalence", lambda spec: _equivalence_walker)
register_walker("bip-equivalence", lambda spec: _bip_equivalence_walker)


def equivalence_labels(g: Graph) -> EqualityScheme:
    """One code per vertex: its clique id.  Rejects non-P3-free inputs."""
    comps = g.connected_components()
    for comp in comps:
        for u, v in itertools.combinations(comp, 2):
            if not g.has_edge(u, v):
                raise SchemeError("input is not an equivalence graph (induced P3)")
    cls = [0] * g.n
    for i, comp in enumerate(comps):
        for v in comp:
            cls[v] = i
    labels = [LabelNode(codes=(cls[v],)) for v in range(g.n)]
    return EqualityScheme(labels, _equivalence_walker,
                          decoder_spec={"name": "equivalence"}, name="equivalence")


def bipartite_equivalence_labels(g: ColoredBipartiteGraph) -> EqualityScheme:
    """One code per vertex: its biclique id; decode = cross-part equality.

    Vertices are indexed X first (0..nx-1) then Y (nx..nx+ny-1).
    """
    comps = g.connected_components()
    for cx, cy in comps:
        for x in cx:
            for y in cy:
                if not g.has_edge(x, y):
                    raise SchemeError("input is not a bipartite equivalence graph")
    labels: list[LabelNode | None] = [None] * (g.nx + g.ny)
    for i, (cx, cy) in enumerate(comps):
        for x in cx:
            labels[x] = LabelNode(tag=(0,), codes=(i,))
        for y in cy:
            labels[g.nx + y] = LabelNode(tag=(1,), codes=(i,))
    return EqualityScheme(labels, _bip_equivalence_walker,
                          decoder_spec={"name": "bip-equivalence"},
                          name="bip-equivalence")


# ---------------------------------------------------------------------------
# Chain graphs: (O(log k), 0)-labels via maximal interval indices.
# ---------------------------------------------------------------------------

def _chain_walker_factory(spec: dict):
    bits = spec["bits"]

    def walk(sx, sy, eq) -> int:
        if sx.tag[0] == sy.tag[0]:
            return 0
        a, b = (sx, sy) if sx.tag[0] == 0 else (sy, sx)
        i = _unbits(a.tag[1:1 + bits])
        j = _unbits(b.tag[1:1 + bits])
        return int(i <= j)

    return walk


register_walker("chain-graph", _chain_walker_factory)


def chain_graph_labels(g: ColoredBipartiteGraph, k: int) -> EqualityScheme:
    """Deterministic labels (side bit, interval index) for a 2K2-free
    bipartite graph with chain number at most k; decode is i <= j.

    In a chain graph the Y-side neighborhoods are nested, so each X-vertex
    is adjacent to a suffix of Y sorted by degree.  Interleaving X by
    non-neighbor count and Y by degree gives the total order behind the
    maximal intervals.
    """
    rank = sorted(range(g.ny), key=lambda y: (g.deg_y(y), y))
    rank_of = {y: r + 1 for r, y in enumerate(rank)}
    order = []
    for x in range(g.nx):
        order.append((g.ny - g.deg_x(x), 1, x))
    for y in range(g.ny):
        order.append((rank_of[y], 0, y))
    order.sort(key=lambda t: (t[0], t[1]))

    idx_x: dict[int, int] = {}
    idx_y: dict[int, int] = {}
    a_runs = 0
    prev_side = None
    for _, side, v in order:
        if side == 1:
            if prev_side != 1:
                a_runs += 1
            idx_x[v] = a_runs
        else:
            idx_y[v] = a_runs
        prev_side = side
    p = a_runs
    q = len(set(idx_y.values()))
    if max(p, q) > k + 1:
        raise SchemeError(f"more than k+1={k + 1} maximal intervals (chain number > {k})")

    bits = _width_for(k + 2)
    labels: list[LabelNode] = []
    for x in range(g.nx):
        labels.append(LabelNode(tag=(0,) + _bits(idx_x[x], bits)))
    for y in range(g.ny):
        labels.append(LabelNode(tag=(1,) + _bits(idx_y[y], bits)))
    spec = {"name": "chain-graph", "bits": bits}
    scheme = EqualityScheme(labels, _chain_walker_factory(spec), decoder_spec=spec,
                            name="chain-graph")
    for x in range(g.nx):
        for y in range(g.ny):
            if scheme.decode(x, g.nx + y) != int(g.has_edge(x, y)):
                raise SchemeError("input is not a chain graph (2K2 found)")
    return scheme


def is_chain_graph(g: ColoredBipartiteGraph) -> bool:
    try:
        chain_graph_labels(g, k=max(g.nx, g.ny))
        return True
    except SchemeError:
        return False


# ---------------------------------------------------------------------------
# One-sided T_p-free structure and labels.
# ---------------------------------------------------------------------------

def find_one_sided_tp(g: ColoredBipartiteGraph, p: int):
    """An induced T_p with both centers in X, or None."""
    nbr = [set(g.neighbors_x(x)) for x in range(g.nx)]
    for x1, x2 in itertools.combinations(range(g.nx), 2):
        only1 = nbr[x1] - nbr[x2]
        only2 = nbr[x2] - nbr[x1]
        if len(only1) >= p and len(only2) >= p:
            return (x1, x2, sorted(only1)[:p], sorted(only2)[:p])
    return None


def find_one_sided_fpp(g: ColoredBipartiteGraph, p: int):
    """An induced F_{p,p} with the degree-2 side in X, or None."""
    nbr = [set(g.neighbors_x(x)) for x in range(g.nx)]
    for x1, x2 in itertools.combinations(range(g.nx), 2):
        common = nbr[x1] & nbr[x2]
        if not common:
            continue
        only1 = nbr[x1] - nbr[x2]
        only2 = nbr[x2] - nbr[x1]
        if len(only1) >= p and len(only2) >= p:
            return (x1, x2, min(common), sorted(only1)[:p], sorted(only2)[:p])
    return None


@dataclass
class TpStructure:
    """The anchored partition of a one-sided T_p-free bipartite graph."""

    k: int
    anchors: tuple[int, ...]  # a_1..a_m
    a_parts: tuple[tuple[int, ...], ...]  # A_0..A_m
    b_parts: tuple[tuple[int, ...], ...]  # B_1..B_{m+1}

    @property
    def m(self) -> int:
        return len(self.anchors)

    def serialize(self) -> str:
        a = " ".join("A%d=%s" % (i, ",".join(map(str, p)) or "-")
                     for i, p in enumerate(self.a_parts))
        b = " ".join("B%d=%s" % (i + 1, ",".join(map(str, p)) or "-")
                     for i, p in enumerate(self.b_parts))
        return f"tp-structure k={self.k} anchors={','.join(map(str, self.anchors)) or '-'} {a} {b}"


def tp_structure(g: ColoredBipartiteGraph, k: int) -> TpStructure:
    """The iterative anchor decomposition: A_0 holds the degree-<k vertices,
    then round i anchors the minimum-degree vertex a_i of the remainder,
    removes its neighborhood B_i and the vertices left with degree < k."""
    a0 = tuple(x for x in range(g.nx) if g.deg_x(x) < k)
    if len(a0) == g.nx:
        return TpStructure(k, (), (a0,), (tuple(range(g.ny)),))
    xs = set(range(g.nx)) - set(a0)
    ys = set(range(g.ny))
    anchors: list[int] = []
    a_parts: list[tuple[int, ...]] = [a0]
    b_parts: list[tuple[int, ...]] = []
    while xs:
        a_i = min(xs, key=lambda x: (len(set(g.neighbors_x(x)) & ys), x))
        b_i = set(g.neighbors_x(a_i)) & ys
        if not b_i:
            raise SchemeError("anchor with empty residual neighborhood "
                              "(violates the degree invariant)")
        rest = ys - b_i
        a_i_part = {x for x in xs if len(set(g.neighbors_x(x)) & rest) < k}
        anchors.append(a_i)
        a_parts.append(tuple(sorted(a_i_part)))
        b_parts.append(tuple(sorted(b_i)))
        xs -= a_i_part
        ys = rest
    b_parts.append(tuple(sorted(ys)))
    return TpStructure(k, tuple(anchors), tuple(a_parts), tuple(b_parts))


def check_tp_structure(g: ColoredBipartiteGraph, st: TpStructure, p: int) -> None:
    """Verify the degree and non-neighbour invariants of the anchor decomposition."""
    m = st.m
    for i in range(m):
        if len(st.b_parts[i]) < st.k:
            raise SchemeError(f"|B_{i + 1}| < k")
    for j in range(m + 1):
        forward = set().union(*[set(b) for b in st.b_parts[j:]]) if j < len(st.b_parts) else set()
        for x in st.a_parts[j]:
            if len(set(g.neighbors_x(x)) & forward) >= st.k:
                raise SchemeError(f"condition (2) fails for x={x} in A_{j}")
    for i in range(1, m + 1):
        bi = set(st.b_parts[i - 1])
        for j in range(i, m + 1):
            for x in st.a_parts[j]:
                if len(set(g.neighbors_x(x)) & bi) <= len(bi) - p:
                    raise SchemeError(f"condition (3) fails for x={x}, B_{i}")


def extract_z_witness(g: ColoredBipartiteGraph, st: TpStructure, q: int, p: int):
    """When m >= q, the anchors and trimmed B-parts induce Z_{q,k-qp}."""
    s = st.k - q * p
    if st.m < q or s < 1:
        return None
    anchors = st.anchors[:q]
    b_trim = []
    for i in range(q):
        bi = set(st.b_parts[i])
        for j in range(i, q):
            bi &= set(g.neighbors_x(st.anchors[j]))
        if len(bi) < s:
            return None
        b_trim.append(tuple(sorted(bi)[:s]))
    return anchors, tuple(b_trim)


def _tp_walker_factory(spec: dict):
    bits = spec["idx_bits"]

    def walk(sx, sy, eq) -> int:
        if sx.tag[0] == sy.tag[0]:
            return 0
        if sx.tag[0] == 1:
            return walk(sy, sx, lambda i, j: eq(j, i))
        i = _unbits(sx.tag[1:1 + bits])
        j = _unbits(sy.tag[1:1 + bits])
        if j <= i:
            block = sx.children[j - 1]
            for t in range(block.arity):
                if eq(block.slot0 + t, sy.slot0):
                    return 0  # y is a listed non-neighbor
            return 1
        fwd = sx.children[i]
        for t in range(fwd.arity):
            if eq(fwd.slot0 + t, sy.slot0):
                return 1  # y is a listed forward neighbor
        return 0

    return walk


register_walker("tp-free", _tp_walker_factory)


def tp_free_labels(g: ColoredBipartiteGraph, p: int, q: int,
                   y_ids: Sequence[int] | None = None) -> EqualityScheme:
    """Equality labels for a one-sided T_p-free graph with no half-graph of
    order q: k = qp+1; X-labels list the few non-neighbors per earlier
    B-block plus the <k forward neighbors; Y-labels carry their block index
    and identity.

    `y_ids` renames Y codes (used when the graph is an induced piece of a
    larger one and codes must live in the root id space).
    """
    k = q * p + 1
    st = tp_structure(g, k)
    if st.m >= q:
        w = extract_z_witness(g, st, q, p)
        detail = f" (Z_{{{q},{k - q * p}}} witness: {w})" if w else ""
        raise SchemeError(f"anchor rounds m={st.m} >= q={q}: graph is not "
                          f"H_q-free{detail}")
    check_tp_structure(g, st, p)
    ymap = list(range(g.ny)) if y_ids is None else list(y_ids)
    bits = _width_for(q + 2)

    part_of_x = {}
    for i, part in enumerate(st.a_parts):
        for x in part:
            part_of_x[x] = i
    part_of_y = {}
    for j, part in enumerate(st.b_parts):
        for y in part:
            part_of_y[y] = j + 1  # B-parts are 1-indexed

    labels: list[LabelNode] = []
    for x in range(g.nx):
        i = part_of_x[x]
        nbrs = set(g.neighbors_x(x))
        kids = []
        for j in range(i):  # non-neighbors in B_1..B_i
            non = tuple(ymap[y] for y in st.b_parts[j] if y not in nbrs)
            if len(non) >= p:
                raise SchemeError("condition (3) violated while labeling")
            kids.append(LabelNode(codes=non))
        forward = tuple(ymap[y] for y in sorted(nbrs) if part_of_y[y] > i)
        if len(forward) >= k:
            raise SchemeError("condition (2) violated while labeling")
        kids.append(LabelNode(codes=forward))
        labels.append(LabelNode(tag=(0,) + _bits(i, bits), children=tuple(kids)))
    for y in range(g.ny):
        labels.append(LabelNode(tag=(1,) + _bits(part_of_y[y], bits),
                                codes=(ymap[y],)))
    spec = {"name": "tp-free", "idx_bits": bits}
    return EqualityScheme(labels, _tp_walker_factory(spec), decoder_spec=spec,
                          name="tp-free")


# ---------------------------------------------------------------------------
# One-sided F_{p,p}-free decomposition and labels.
# ---------------------------------------------------------------------------

def _is_one_sided_tk_free(g: ColoredBipartiteGraph, xs: Sequence[int],
                          ys: Sequence[int], k: int) -> bool:
    yset = set(ys)
    nbr = {x: set(g.neighbors_x(x)) & yset for x in xs}
    for x1, x2 in itertools.combinations(xs, 2):
        if len(nbr[x1] - nbr[x2]) >= k and len(nbr[x2] - nbr[x1]) >= k:
            return False
    return True


def _left_components(g: ColoredBipartiteGraph, xs: Sequence[int],
                     ys: Sequence[int]) -> list[tuple[list[int], list[int]]]:
    sub = g.induced(xs, ys)
    xs_s, ys_s = sorted(xs), sorted(ys)
    return [([xs_s[i] for i in cx], [ys_s[j] for j in cy])
            for cx, cy in sub.connected_components()]


def fpp_decomposition(g: ColoredBipartiteGraph, p: int, q: int) -> DTNode:
    """Decomposition tree for a one-sided F_{p,p}-free, H_q-free graph:
    leaves are one-sided T_k-free pieces (k = (q+1)p), D-nodes split
    components, and P-nodes split off the left-disconnected high-degree
    part.  Depth is bounded by 2q."""
    k = (q + 1) * p

    def build(xs: tuple[int, ...], ys: tuple[int, ...], depth: int) -> DTNode:
        if depth > 2 * q:
            raise SchemeError(f"decomposition depth exceeds 2q={2 * q} "
                              "(graph outside the declared family)")
        if _is_one_sided_tk_free(g, xs, ys, k):
            return DTNode("L", xs, ys)
        comps = _left_components(g, xs, ys)
        if len(comps) > 1:
            children = tuple(build(tuple(cx), tuple(cy), depth + 1) for cx, cy in comps)
            return DTNode("D", xs, ys, children)
        yset = set(ys)
        x0 = tuple(x for x in xs if len(set(g.neighbors_x(x)) & yset) < k)
        rest = [x for x in xs if x not in set(x0)]
        deg = {x: len(set(g.neighbors_x(x)) & yset) for x in rest}

        def left_disconnected(sub_xs: list[int]) -> bool:
            if len(sub_xs) < 2:
                return False
            comps = _left_components(g, sub_xs, ys)
            return sum(1 for cx, _ in comps if cx) > 1

        x1: list[int] = []
        pool = list(rest)
        while pool and not left_disconnected(pool):
            top = max(pool, key=lambda x: (deg[x], -x))
            x1.append(top)
            pool.remove(top)
        x2 = tuple(sorted(pool))
        if not x2:
            raise SchemeError("X2 exhausted: input violates the F_{p,p}-free "
                              "decomposition invariants")
        left = tuple(sorted(x0 + tuple(x1)))
        if not left:
            raise SchemeError("empty X0 u X1 at a connected node")
        child_leaf = build(left, ys, depth + 1)
        if child_leaf.kind != "L":
            raise SchemeError("X0 u X1 child is not one-sided T_k-free")
        child_rest = build(x2, ys, depth + 1)
        return DTNode("P", xs, ys, (child_leaf, child_rest),
                      x_parts=(left, x2), y_parts=(ys,))

    return build(tuple(range(g.nx)), tuple(range(g.ny)), 0)


def _tp_leaf_labeler(g: ColoredBipartiteGraph, p: int, q: int):
    k = (q + 1) * p

    def labeler(node: DTNode):
        xs, ys = sorted(node.xs), sorted(node.ys)
        sub = g.induced(xs, ys)
        scheme = tp_free_labels(sub, p=k, q=q, y_ids=ys)
        out = {}
        for i, x in enumerate(xs):
            out[("x", x)] = scheme.labels[i]
        for j, y in enumerate(ys):
            out[("y", y)] = scheme.labels[len(xs) + j]
        return out

    spec = {"name": "tp-free", "idx_bits": _width_for(q + 2)}
    return labeler, spec


def fpp_labels(g: ColoredBipartiteGraph, p: int, q: int) -> EqualityScheme:
    """Full one-sided F_{p,p}-free pipeline: decomposition tree plus the
    T_k-free leaf labeling, assembled into one equality scheme."""
    tree = fpp_decomposition(g, p, q)
    labeler, leaf_spec = _tp_leaf_labeler(g, p, q)
    return assemble_decomposition_labels(g, tree, labeler, leaf_spec, name="fpp")


# ---------------------------------------------------------------------------
# F*_{p,q}: Allen partition search plus the two F_{p,p} sub-pipelines.
# ---------------------------------------------------------------------------

@dataclass
class AllenPartition:
    x1: tuple[int, ...]
    x2: tuple[int, ...]
    y1: tuple[int, ...]
    y2: tuple[int, ...]  # at most one vertex


def _fpp_conflicts(g: ColoredBipartiteGraph, xs: list[int], y1: set[int], p: int):
    """Pairs of X-vertices witnessing F_{p,p} in G[.,Y1] and in bc(G[.,Y1])."""
    nbr = {x: set(g.neighbors_x(x)) & y1 for x in xs}
    direct = set()
    compl = set()
    for a, b in itertools.combinations(xs, 2):
        only_a = nbr[a] - nbr[b]
        only_b = nbr[b] - nbr[a]
        if len(only_a) >= p and len(only_b) >= p:
            if nbr[a] & nbr[b]:
                direct.add((a, b))
            if y1 - (nbr[a] | nbr[b]):
                compl.add((a, b))
    return direct, compl


def find_allen_partition(g: ColoredBipartiteGraph, p: int,
                         exhaustive_limit: int = 20) -> AllenPartition | None:
    """Search for (X1, X2, Y1, Y2): |Y2| <= 1, G[X1,Y1] and bc(G[X2,Y1])
    one-sided F_{p,p}-free.  Greedy split first, exhaustive for small X."""
    xs = list(range(g.nx))
    for y2 in [None] + list(range(g.ny)):
        y1 = set(range(g.ny)) - ({y2} if y2 is not None else set())
        direct, compl = _fpp_conflicts(g, xs, y1, p)

        def ok(x1: set[int], x2: set[int]) -> bool:
            return not any((a, b) in direct for a, b in itertools.combinations(sorted(x1), 2)) \
                and not any((a, b) in compl for a, b in itertools.combinations(sorted(x2), 2))

        # greedy by degree
        x1: set[int] = set()
        x2: set[int] = set()
        feasible = True
        for x in sorted(xs, key=lambda v: (-g.deg_x(v), v)):
            if not any(tuple(sorted((x, o))) in direct for o in x1):
                x1.add(x)
            elif not any(tuple(sorted((x, o))) in compl for o in x2):
                x2.add(x)
            else:
                feasible = False
                break
        if feasible and ok(x1, x2):
            return AllenPartition(tuple(sorted(x1)), tuple(sorted(x2)),
                                  tuple(sorted(y1)),
                                  (y2,) if y2 is not None else ())
        if g.nx <= exhaustive_limit:
            for mask in range(1 << g.nx):
                s1 = {x for x in xs if mask >> x & 1}
                s2 = set(xs) - s1
                if ok(s1, s2):
                    return AllenPartition(tuple(sorted(s1)), tuple(sorted(s2)),
                                          tuple(sorted(y1)),
                                          (y2,) if y2 is not None else ())
    return None


def _fstar_walker_factory(spec: dict):
    from .labels import build_walker

    sub1 = build_walker(spec["sub1"])
    sub2 = build_walker(spec["sub2"])

    def walk(sx, sy, eq) -> int:
        if sx.tag[0] == sy.tag[0]:
            return 0
        if sx.tag[0] == 1:
            return walk(sy, sx, lambda i, j: eq(j, i))
        if sy.tag[1] == 1:  # y is the Y2 vertex
            return sx.tag[1]
        if sx.tag[2] == 0:  # x in X1
            return sub1(sx.children[0], sy.children[0], eq)
        return 1 - sub2(sx.children[0], sy.children[1], eq)

    return walk


register_walker("fstar", _fstar_walker_factory)


def fstar_labels(g: ColoredBipartiteGraph, p: int, q: int,
                 partition: AllenPartition | None = None) -> EqualityScheme:
    """Scheme for an F*_{p,p'}-free graph (p = max(p,p')): partition per
    Allen, label G[X1,Y1] and bc(G[X2,Y1]) with the F_{p,p} pipeline, and
    flip the output on the complemented branch."""
    if partition is None:
        partition = find_allen_partition(g, p)
        if partition is None:
            raise SchemeError("no Allen partition found (desk-scale search limit)")
    x1, x2, y1, y2 = (list(partition.x1), list(partition.x2),
                      list(partition.y1), list(partition.y2))
    sub1_graph = g.induced(x1, y1)
    sub2_graph = bipartite_complement(g.induced(x2, y1))
    tree1 = fpp_decomposition(sub1_graph, p, q)
    tree2 = fpp_decomposition(sub2_graph, p, q)
    lab1, spec1 = _tp_leaf_labeler(sub1_graph, p, q)
    lab2, spec2 = _tp_leaf_labeler(sub2_graph, p, q)
    s1 = assemble_decomposition_labels(sub1_graph, tree1, lab1, spec1, name="fpp1")
    s2 = assemble_decomposition_labels(sub2_graph, tree2, lab2, spec2, name="fpp2")

    pos_x1 = {x: i for i, x in enumerate(sorted(x1))}
    pos_x2 = {x: i for i, x in enumerate(sorted(x2))}
    pos_y1 = {y: j for j, y in enumerate(sorted(y1))}
    y2v = y2[0] if y2 else None

    labels: list[LabelNode] = []
    for x in range(g.nx):
        adj2 = int(y2v is not None and g.has_edge(x, y2v))
        if x in pos_x1:
            sub = s1.labels[pos_x1[x]]
            labels.append(LabelNode(tag=(0, adj2, 0), children=(sub,)))
        else:
            sub = s2.labels[pos_x2[x]]
            labels.append(LabelNode(tag=(0, adj2, 1), children=(sub,)))
    for y in range(g.ny):
        if y == y2v:
            labels.append(LabelNode(tag=(1, 1)))
        else:
            l1 = s1.labels[len(x1) + pos_y1[y]]
            l2 = s2.labels[len(x2) + pos_y1[y]]
            labels.append(LabelNode(tag=(1, 0), children=(l1, l2)))
    spec = {"name": "fstar", "sub1": s1.decoder_spec, "sub2": s2.decoder_spec}
    return EqualityScheme(labels, _fstar_walker_factory(spec), decoder_spec=spec,
                          name="fstar")


# ---------------------------------------------------------------------------
# Chain decompositions (P7-free machinery).
# ---------------------------------------------------------------------------

@dataclass
class ChainDecomposition:
    k: int
    a_parts: tuple[tuple[int, ...], ...]  # A_1..A_k (X side)
    c_parts: tuple[tuple[int, ...], ...]  # C_1..C_k (X side)
    b_parts: tuple[tuple[int, ...], ...]  # B_1..B_k (Y side)
    d_parts: tuple[tuple[int, ...], ...]  # D_1..D_k (Y side)

    def serialize(self) -> str:
        def fmt(tag, parts):
            return " ".join(f"{tag}{i + 1}={','.join(map(str, p)) or '-'}"
                            for i, p in enumerate(parts))

        return (f"chain-decomposition k={self.k} {fmt('A', self.a_parts)} "
                f"{fmt('C', self.c_parts)} {fmt('B', self.b_parts)} {fmt('D', self.d_parts)}")


def verify_chain_decomposition(g: ColoredBipartiteGraph, cd: ChainDecomposition,
                               reasons: list[str] | None = None) -> bool:
    """Check every bullet of the chain-decomposition definition."""
    out = reasons if reasons is not None else []
    k = cd.k

    def fail(msg: str) -> bool:
        out.append(msg)
        return False

    xs = sorted(v for p in cd.a_parts + cd.c_parts for v in p)
    ys = sorted(v for p in cd.b_parts + cd.d_parts for v in p)
    if xs != list(range(g.nx)) or ys != list(range(g.ny)):
        return fail("parts do not partition the sides")
    if len(cd.a_parts) != k or len(cd.c_parts) != k or len(cd.b_parts) != k \
            or len(cd.d_parts) != k:
        return fail("part-list lengths differ from k")
    for i in range(k - 1):
        if not (cd.a_parts[i] and cd.b_parts[i] and cd.c_parts[i] and cd.d_parts[i]):
            return fail(f"empty part at level {i + 1} < k")
    if not (cd.a_parts[k - 1] or cd.b_parts[k - 1] or cd.c_parts[k - 1] or cd.d_parts[k - 1]):
        return fail("all level-k parts empty")

    def complete(us, vs) -> bool:
        return all(g.has_edge(u, v) for u in us for v in vs)

    def anticomplete(us, vs) -> bool:
        return not any(g.has_edge(u, v) for u in us for v in vs)

    for i in range(k):
        for b in cd.b_parts[i]:
            if not any(g.has_edge(a, b) for a in cd.a_parts[i]):
                return fail(f"vertex {b} of B_{i + 1} has no neighbour in A_{i + 1}")
        for d in cd.d_parts[i]:
            if not any(g.has_edge(c, d) for c in cd.c_parts[i]):
                return fail(f"vertex {d} of D_{i + 1} has no neighbour in C_{i + 1}")
    for i in range(1, k - 1):
        for a in cd.a_parts[i]:
            if all(g.has_edge(a, b) for b in cd.b_parts[i - 1]):
                return fail(f"vertex {a} of A_{i + 1} lacks a non-neighbour in B_{i}")
        for c in cd.c_parts[i]:
            if all(g.has_edge(c, d) for d in cd.d_parts[i - 1]):
                return fail(f"vertex {c} of C_{i + 1} lacks a non-neighbour in D_{i}")
    for i in range(k):
        for j in range(k):
            if j > i and not anticomplete(cd.a_parts[i], cd.b_parts[j]):
                return fail(f"A_{i + 1} not anticomplete to B_{j + 1}")
            if j < i - 1 and not complete(cd.a_parts[i], cd.b_parts[j]):
                return fail(f"A_{i + 1} not complete to B_{j + 1}")
            if j > i and not anticomplete(cd.c_parts[i], cd.d_parts[j]):
                return fail(f"C_{i + 1} not anticomplete to D_{j + 1}")
            if j < i - 1 and not complete(cd.c_parts[i], cd.d_parts[j]):
                return fail(f"C_{i + 1} not complete to D_{j + 1}")
            if j < i and not complete(cd.a_parts[i], cd.d_parts[j]):
                return fail(f"A_{i + 1} not complete to D_{j + 1}")
            if j >= i and not anticomplete(cd.a_parts[i], cd.d_parts[j]):
                return fail(f"A_{i + 1} not anticomplete to D_{j + 1}")
            if j < i and not complete(cd.c_parts[i], cd.b_parts[j]):
                return fail(f"C_{i + 1} not complete to B_{j + 1}")
            if j >= i and not anticomplete(cd.c_parts[i], cd.b_parts[j]):
                return fail(f"C_{i + 1} not anticomplete to B_{j + 1}")
    return True


def chain_decomposition_search(g: ColoredBipartiteGraph, k_max: int = 4,
                               size_limit: int = 24) -> ChainDecomposition | None:
    """Backtracking search for a k-chain decomposition, k = 2..k_max.

    Bounded-exhaustive: assignments are pruned by the pairwise
    complete/anticomplete bullets as vertices are placed; existential
    bullets are checked on completion.  NONE is a legal outcome.
    """
    if g.nx + g.ny > size_limit:
        return None
    for k in range(2, k_max + 1):
        cd = _search_k(g, k)
        if cd is not None:
            return cd
    return None


def _search_k(g: ColoredBipartiteGraph, k: int) -> ChainDecomposition | None:
    # X parts: ('A', i) / ('C', i); Y parts: ('B', i) / ('D', i), i in 0..k-1
    x_opts = [("A", i) for i in range(k)] + [("C", i) for i in range(k)]
    y_opts = [("B", i) for i in range(k)] + [("D", i) for i in range(k)]
    xs = sorted(range(g.nx), key=lambda x: (-g.deg_x(x), x))
    ys = sorted(range(g.ny), key=lambda y: (-g.deg_y(y), y))
    assign_x: dict[int, tuple[str, int]] = {}
    assign_y: dict[int, tuple[str, int]] = {}

    def pair_ok(xpart, ypart, edge: bool) -> bool:
        xs_, i = xpart
        ys_, j = ypart
        if xs_ == "A" and ys_ == "B":
            if j > i:
                return not edge
            if j < i - 1:
                return edge
            return True
        if xs_ == "C" and ys_ == "D":
            if j > i:
                return not edge
            if j < i - 1:
                return edge
            return True
        if xs_ == "A" and ys_ == "D":
            return edge if j < i else not edge
        # C vs B
        return edge if j < i else not edge

    def consistent_x(x, part) -> bool:
        return all(pair_ok(part, assign_y[y], g.has_edge(x, y)) for y in assign_y)

    def consistent_y(y, part) -> bool:
        return all(pair_ok(assign_x[x], part, g.has_edge(x, y)) for x in assign_x)

    def finish() -> ChainDecomposition | None:
        parts = {("A", i): [] for i in range(k)}
        parts.update({(t, i): [] for t in "BCD" for i in range(k)})
        for x, pt in assign_x.items():
            parts[pt].append(x)
        for y, pt in assign_y.items():
            parts[pt].append(y)
        cd = ChainDecomposition(
            k,
            tuple(tuple(sorted(parts[("A", i)])) for i in range(k)),
            tuple(tuple(sorted(parts[("C", i)])) for i in range(k)),
            tuple(tuple(sorted(parts[("B", i)])) for i in range(k)),
            tuple(tuple(sorted(parts[("D", i)])) for i in range(k)),
        )
        return cd if verify_chain_decomposition(g, cd) else None

    order = [("x", v) for v in xs] + [("y", v) for v in ys]

    def backtrack(pos: int) -> ChainDecomposition | None:
        if pos == len(order):
            return finish()
        side, v = order[pos]
        opts = x_opts if side == "x" else y_opts
        for part in opts:
            if side == "x":
                if not consistent_x(v, part):
                    continue
                assign_x[v] = part
                res = backtrack(pos + 1)
                if res is not None:
                    return res
                del assign_x[v]
            else:
                if not consistent_y(v, part):
                    continue
                assign_y[v] = part
                res = backtrack(pos + 1)
                if res is not None:
                    return res
                del assign_y[v]
        return None

    return backtrack(0)


def build_chain_decomposition_graph(k: int, sizes: int, seed: int = 0
                                    ) -> tuple[ColoredBipartiteGraph, ChainDecomposition]:
    """Synthesize a graph realizing a k-chain decomposition with `sizes`
    vertices per part: the required complete/anticomplete blocks, bicliques
    on the (A_i,B_i)/(C_i,D_i) diagonals, and near-complete (A_i,B_{i-1})
    blocks so the non-neighbour bullets hold."""
    from .rng import rng_for

    rng = rng_for(seed, "chain-decomp", k, sizes)
    a = [list(range(i * sizes, (i + 1) * sizes)) for i in range(k)]
    c = [list(range((k + i) * sizes, (k + i + 1) * sizes)) for i in range(k)]
    b = [list(range(i * sizes, (i + 1) * sizes)) for i in range(k)]
    d = [list(range((k + i) * sizes, (k + i + 1) * sizes)) for i in range(k)]
    edges = set()
    for i in range(k):
        for x in a[i]:
            for y in b[i]:
                edges.add((x, y))  # diagonal bicliques give the neighbour bullets
        for x in c[i]:
            for y in d[i]:
                edges.add((x, y))
        for j in range(k):
            if j < i - 1:
                edges.update((x, y) for x in a[i] for y in b[j])
                edges.update((x, y) for x in c[i] for y in d[j])
            if j < i:
                edges.update((x, y) for x in a[i] for y in d[j])
                edges.update((x, y) for x in c[i] for y in b[j])
        if 1 <= i <= k - 2:
            # A_{i+1} x B_i: complete minus one non-neighbour per row
            for x in a[i]:
                miss = b[i - 1][rng.randrange(len(b[i - 1]))]
                edges.update((x, y) for y in b[i - 1] if y != miss)
            for x in c[i]:
                miss = d[i - 1][rng.randrange(len(d[i - 1]))]
                edges.update((x, y) for y in d[i - 1] if y != miss)
    g = ColoredBipartiteGraph(2 * k * sizes, 2 * k * sizes, sorted(edges))
    cd = ChainDecomposition(
        k,
        tuple(tuple(p) for p in a), tuple(tuple(p) for p in c),
        tuple(tuple(p) for p in b), tuple(tuple(p) for p in d),
    )
    return g, cd


# ---------------------------------------------------------------------------
# P7-free: decomposition tree with biclique/co-biclique leaves.
# ---------------------------------------------------------------------------

def partition_from_chain_decomposition(
        g: ColoredBipartiteGraph, cd: ChainDecomposition
) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """The chain-number-decreasing P-node partition (with the
    k=2 special cases, splitting B_1 or D_1 by an anchor's neighborhood)."""
    k = cd.k
    if k >= 3:
        x_parts = [p for p in cd.a_parts + cd.c_parts if p]
        y_parts = [p for p in cd.b_parts + cd.d_parts if p]
        return x_parts, y_parts
    a2, c2 = cd.a_parts[1], cd.c_parts[1]
    if a2 and c2:
        x_parts = [p for p in cd.a_parts + cd.c_parts if p]
        y_parts = [p for p in cd.b_parts + cd.d_parts if p]
        return x_parts, y_parts
    if a2 and not c2:
        anchor = min(a2)
        b1 = cd.b_parts[0]
        b1p = tuple(y for y in b1 if g.has_edge(anchor, y))
        b1pp = tuple(y for y in b1 if not g.has_edge(anchor, y))
        x_parts = [p for p in (cd.a_parts[0], a2, cd.c_parts[0]) if p]
        y_parts = [p for p in (b1p, b1pp, cd.b_parts[1], cd.d_parts[0]) if p]
        return x_parts, y_parts
    if c2 and not a2:
        anchor = min(c2)
        d1 = cd.d_parts[0]
        d1p = tuple(y for y in d1 if g.has_edge(anchor, y))
        d1pp = tuple(y for y in d1 if not g.has_edge(anchor, y))
        x_parts = [p for p in (cd.c_parts[0], c2, cd.a_parts[0]) if p]
        y_parts = [p for p in (d1p, d1pp, cd.d_parts[1], cd.b_parts[0]) if p]
        return x_parts, y_parts
    raise SchemeError("invalid 2-chain decomposition: both A_2 and C_2 empty")


def _bicobi_walker(sx, sy, eq) -> int:
    return sx.tag[0]


register_walker("bicobi", lambda spec: _bicobi_walker)


def build_p7_tree(g: ColoredBipartiteGraph, c: int,
                  search_size_limit: int = 24) -> DTNode:
    """(Q, 2(c+2))-decomposition tree with biclique/co-biclique leaves.

    P-nodes need a chain decomposition of the node or of its bipartite
    complement; the bounded search may fail on large nodes, which is
    reported as a SchemeError (desk-scale limitation, not a family
    violation)."""

    def build(xs: tuple[int, ...], ys: tuple[int, ...]) -> DTNode:
        sub = g.induced(xs, ys)
        if sub.is_biclique() or sub.is_cobiclique():
            return DTNode("L", xs, ys)
        comps = _components_rootspace(sub, xs, ys)
        if len(comps) > 1:
            return DTNode("D", xs, ys,
                          tuple(build(cx, cy) for cx, cy in comps))
        bc = bipartite_complement(sub)
        bcomps = _components_rootspace(bc, xs, ys)
        if len(bcomps) > 1:
            return DTNode("Dbar", xs, ys,
                          tuple(build(cx, cy) for cx, cy in bcomps))
        cd = chain_decomposition_search(sub, k_max=c + 2, size_limit=search_size_limit)
        base = sub
        if cd is None:
            cd = chain_decomposition_search(bc, k_max=c + 3, size_limit=search_size_limit)
            base = bc
        if cd is None:
            raise SchemeError(
                f"no chain decomposition found for a {len(xs)}x{len(ys)} P-node "
                "(desk-scale search limit)")
        xp_local, yp_local = partition_from_chain_decomposition(base, cd)
        xs_s, ys_s = sorted(xs), sorted(ys)
        x_parts = tuple(tuple(xs_s[i] for i in p) for p in xp_local)
        y_parts = tuple(tuple(ys_s[j] for j in p) for p in yp_local)
        children = tuple(
            build(xp, yp) for xp in x_parts for yp in y_parts
        )
        return DTNode("P", xs, ys, children, x_parts=x_parts, y_parts=y_parts)

    return build(tuple(range(g.nx)), tuple(range(g.ny)))


def _components_rootspace(sub: ColoredBipartiteGraph, xs, ys):
    xs_s, ys_s = sorted(xs), sorted(ys)
    return [
        (tuple(xs_s[i] for i in cx), tuple(ys_s[j] for j in cy))
        for cx, cy in sub.connected_components()
    ]


def p7_labels(g: ColoredBipartiteGraph, c: int) -> EqualityScheme:
    """Scheme for a P7-free bipartite graph of chain number at most c."""
    tree = build_p7_tree(g, c)
    if c >= 1 and tree.depth() > 6 * c:
        raise SchemeError(f"decomposition depth {tree.depth()} exceeds 6c={6 * c}")

    def labeler(node: DTNode):
        sub = g.induced(node.xs, node.ys)
        bit = 1 if (sub.m > 0 and sub.is_biclique()) else 0
        out = {}
        for x in node.xs:
            out[("x", x)] = LabelNode(tag=(bit,))
        for y in node.ys:
            out[("y", y)] = LabelNode(tag=(bit,))
        return out

    return assemble_decomposition_labels(g, tree, labeler, {"name": "bicobi"},
                                         name="p7")
