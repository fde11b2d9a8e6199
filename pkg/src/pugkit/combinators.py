"""Scheme transformers: bounded vertex addition, bounded complementation,
twin reduction, bip lifting/lowering, and the generic decomposition-tree
label assembler.

Each transform wraps the base scheme's labels as subtrees and its walker as
a sub-walker, so transforms compose.  All slot references are absolute
(ShapeNode.slot0), which is what makes nesting sound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from .graphs import ColoredBipartiteGraph, Graph, bip_transform, bipartite_complement
from .labels import (
    EqualityScheme,
    LabelNode,
    SchemeError,
    ShapeNode,
    Walker,
    build_walker,
    register_walker,
)
from .structure import TwinPartition, twin_partition


def _bits(value: int, width: int) -> tuple[int, ...]:
    return tuple(value >> (width - 1 - i) & 1 for i in range(width))


def _unbits(bits: Sequence[int]) -> int:
    v = 0
    for b in bits:
        v = v << 1 | b
    return v


def _width_for(count: int) -> int:
    return max(max(count - 1, 0).bit_length(), 1)


# ---------------------------------------------------------------------------
# Bounded vertex addition (add at most c special vertices).
# ---------------------------------------------------------------------------

def _add_vertices_walker(spec: dict) -> Walker:
    c = spec["c"]
    iw = _width_for(c)
    base = build_walker(spec["base"])

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        mx, my = sx.tag[0], sy.tag[0]
        if mx == 0 and my == 0:
            return base(sx.children[0], sy.children[0], eq)
        if mx == 1 and my == 1:
            i = _unbits(sx.tag[1:1 + iw])
            j = _unbits(sy.tag[1 + iw:1 + iw + c])
            return (j >> (c - 1 - i)) & 1 if c else 0
        if mx == 0:
            i = _unbits(sy.tag[1:1 + iw])
            return sx.tag[1 + i]
        i = _unbits(sx.tag[1:1 + iw])
        return sy.tag[1 + i]

    return walk


register_walker("add-vertices", _add_vertices_walker)


def add_vertices_scheme(g: Graph, special: Sequence[int], base: EqualityScheme,
                        base_ids: Sequence[int], c: int | None = None) -> EqualityScheme:
    """Scheme for g from a base scheme on g minus the special vertices.

    `base_ids` maps base-scheme vertex index -> g vertex id.  Ordinary
    vertices get prefix (0, adjacency-bitmask to the added set) plus their
    base label; special vertex number i gets (1, i, own bitmask).
    """
    special = list(special)
    if c is None:
        c = len(special)
    if len(special) > c:
        raise SchemeError(f"{len(special)} special vertices exceed budget {c}")
    iw = _width_for(c)
    spos = {v: i for i, v in enumerate(special)}
    base_pos = {v: i for i, v in enumerate(base_ids)}
    if set(base_pos) | set(spos) != set(range(g.n)) or set(base_pos) & set(spos):
        raise SchemeError("special + base vertices must partition V")

    def mask_for(v: int) -> int:
        m = 0
        for i, w in enumerate(special):
            if g.has_edge(v, w):
                m |= 1 << (c - 1 - i)
        return m

    labels = []
    for v in range(g.n):
        if v in spos:
            i = spos[v]
            tag = (1,) + _bits(i, iw) + _bits(mask_for(v), c)
            labels.append(LabelNode(tag=tag))
        else:
            tag = (0,) + _bits(mask_for(v), c)
            labels.append(LabelNode(tag=tag, children=(base.labels[base_pos[v]],)))
    spec = {"name": "add-vertices", "c": c, "base": base.decoder_spec}
    walker = _add_vertices_walker(spec)
    return EqualityScheme(labels, walker, decoder_spec=spec if base.decoder_spec else None,
                          name=f"add-vertices({base.name})")


# ---------------------------------------------------------------------------
# Bounded complementations over a partition into at most k parts.
# ---------------------------------------------------------------------------

def _complementation_walker(spec: dict) -> Walker:
    r = spec["r"]
    pw = _width_for(r)
    base = build_walker(spec["base"])

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        out = base(sx.children[0], sy.children[0], eq)
        j = _unbits(sy.tag[:pw])
        flip = sx.tag[pw + j]
        return out ^ flip

    return walk


register_walker("complementation", _complementation_walker)


def complementation_scheme(base: EqualityScheme, parts: Sequence[Sequence[int]],
                           flips: Sequence[Sequence[int]]) -> EqualityScheme:
    """Scheme for the graph obtained by complementing edges between flipped
    part pairs (the diagonal flips inside a part).

    Each label gains ceil(log r) part-index bits and its r-bit flip row.
    """
    r = len(parts)
    n = base.n
    covered = sorted(v for p in parts for v in p)
    if covered != list(range(n)):
        raise SchemeError("parts must partition the vertex set")
    for i in range(r):
        for j in range(r):
            if flips[i][j] != flips[j][i]:
                raise SchemeError("flip matrix must be symmetric")
    pw = _width_for(r)
    part_of = {}
    for i, p in enumerate(parts):
        for v in p:
            part_of[v] = i
    labels = []
    for v in range(n):
        i = part_of[v]
        tag = _bits(i, pw) + tuple(flips[i][j] for j in range(r))
        labels.append(LabelNode(tag=tag, children=(base.labels[v],)))
    spec = {"name": "complementation", "r": r, "base": base.decoder_spec}
    walker = _complementation_walker(spec)
    return EqualityScheme(labels, walker, decoder_spec=spec if base.decoder_spec else None,
                          name=f"complement({base.name})")


def apply_part_flips(g: Graph, parts: Sequence[Sequence[int]],
                     flips: Sequence[Sequence[int]]) -> Graph:
    """Oracle counterpart of `complementation_scheme`."""
    part_of = {}
    for i, p in enumerate(parts):
        for v in p:
            part_of[v] = i
    edges = []
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if g.has_edge(u, v) ^ flips[part_of[u]][part_of[v]]:
                edges.append((u, v))
    return Graph(g.n, edges)


# ---------------------------------------------------------------------------
# Twin reduction.
# ---------------------------------------------------------------------------

def _twin_reduce_walker(spec: dict) -> Walker:
    same_output = 1 if spec["mode"] == "true" else 0
    base = build_walker(spec["base"])

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        if eq(sx.slot0, sy.slot0):
            return same_output
        return base(sx.children[0], sy.children[0], eq)

    return walk


register_walker("twin-reduce", _twin_reduce_walker)


def twin_reduce_scheme(g: Graph, mode: str,
                       base_builder: Callable[[Graph, dict[int, int]], EqualityScheme],
                       ) -> tuple[EqualityScheme, TwinPartition]:
    """Reduce g by its twin classes, label the quotient with `base_builder`,
    and append one class-index code per vertex.

    Equal class codes decode to 1 in true mode (twins are adjacent) and 0 in
    false mode; distinct classes defer to the base scheme on representatives.
    """
    tp = twin_partition(g, mode)
    reps = sorted(set(tp.representative))
    from .graphs import induced_subgraph

    quotient, remap = induced_subgraph(g, reps)
    base = base_builder(quotient, remap)
    labels = []
    for v in range(g.n):
        q = remap[tp.representative[v]]
        labels.append(LabelNode(codes=(tp.class_index[v],), children=(base.labels[q],)))
    spec = {"name": "twin-reduce", "mode": mode, "base": base.decoder_spec}
    walker = _twin_reduce_walker(spec)
    return EqualityScheme(labels, walker, decoder_spec=spec if base.decoder_spec else None,
                          name=f"twin-reduce({base.name})"), tp


# ---------------------------------------------------------------------------
# bip lifting and lowering.
# ---------------------------------------------------------------------------

def _bip_lift_walker(spec: dict) -> Walker:
    base = build_walker(spec["base"])

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        if sx.tag[0] == sy.tag[0]:
            return 0
        return base(sx.children[0], sy.children[0], eq)

    return walk


register_walker("bip-lift", _bip_lift_walker)


def bip_lift(base: EqualityScheme) -> EqualityScheme:
    """Scheme for bip(G) from a scheme for G: append a side bit.

    Vertices 0..n-1 are the left copy, n..2n-1 the right copy.
    """
    n = base.n
    labels = [LabelNode(tag=(0,), children=(base.labels[v],)) for v in range(n)]
    labels += [LabelNode(tag=(1,), children=(base.labels[v],)) for v in range(n)]
    spec = {"name": "bip-lift", "base": base.decoder_spec}
    return EqualityScheme(labels, _bip_lift_walker(spec),
                          decoder_spec=spec if base.decoder_spec else None,
                          name=f"bip-lift({base.name})")


def _bip_lower_walker(spec: dict) -> Walker:
    base = build_walker(spec["base"])

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        # decode x against the right-copy label of y
        return base(sx.children[0], sy.children[1], eq)

    return walk


register_walker("bip-lower", _bip_lower_walker)


def bip_lower(bip_scheme: EqualityScheme) -> EqualityScheme:
    """Scheme for G from a scheme for bip(G) (left copy = 0..n-1, right =
    n..2n-1): each vertex carries the pair (label(x), label(x')) and decodes
    cross-wise, doubling the code count exactly."""
    if bip_scheme.n % 2:
        raise SchemeError("bip scheme must have an even vertex count")
    n = bip_scheme.n // 2
    labels = [
        LabelNode(children=(bip_scheme.labels[v], bip_scheme.labels[n + v]))
        for v in range(n)
    ]
    spec = {"name": "bip-lower", "base": bip_scheme.decoder_spec}
    return EqualityScheme(labels, _bip_lower_walker(spec),
                          decoder_spec=spec if bip_scheme.decoder_spec else None,
                          name=f"bip-lower({bip_scheme.name})")


# ---------------------------------------------------------------------------
# (Q,k)-decomposition trees and the label assembler.
# ---------------------------------------------------------------------------

TAG_L = (0, 0)
TAG_D = (0, 1)
TAG_DBAR = (1, 0)
TAG_P = (1, 1)


@dataclass
class DTNode:
    """Node of a decomposition tree over a colored bipartite graph.

    xs/ys are vertex ids in the root graph's X and Y index spaces.  For
    P-nodes, children are row-major over (x-part, y-part).
    """

    kind: str  # "L" | "D" | "Dbar" | "P"
    xs: tuple[int, ...]
    ys: tuple[int, ...]
    children: tuple["DTNode", ...] = ()
    x_parts: tuple[tuple[int, ...], ...] = ()
    y_parts: tuple[tuple[int, ...], ...] = ()

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def leaves(self):
        if self.kind == "L":
            yield self
        for c in self.children:
            yield from c.leaves()

    def serialize(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = f"{pad}node {self.kind} x={','.join(map(str, self.xs)) or '-'}" \
               f" y={','.join(map(str, self.ys)) or '-'}"
        if self.kind == "P":
            xp = "|".join(",".join(map(str, p)) for p in self.x_parts)
            yp = "|".join(",".join(map(str, p)) for p in self.y_parts)
            line += f" xparts={xp} yparts={yp}"
        out = [line]
        for c in self.children:
            out.append(c.serialize(indent + 1))
        return "\n".join(out)


def validate_tree(g: ColoredBipartiteGraph, node: DTNode) -> None:
    """Check the structural invariants of a decomposition tree."""
    sub = g.induced(node.xs, node.ys)
    xs_l = {x: i for i, x in enumerate(sorted(node.xs))}
    ys_l = {y: j for j, y in enumerate(sorted(node.ys))}
    if node.kind == "L":
        if node.children:
            raise SchemeError("leaf with children")
        return
    if node.kind in ("D", "Dbar"):
        target = sub if node.kind == "D" else bipartite_complement(sub)
        comps = {
            (frozenset(cx), frozenset(cy)) for cx, cy in target.connected_components()
        }
        got = {
            (frozenset(xs_l[x] for x in c.xs), frozenset(ys_l[y] for y in c.ys))
            for c in node.children
        }
        if comps != got:
            raise SchemeError(f"{node.kind}-node children are not the components")
    elif node.kind == "P":
        if sorted(v for p in node.x_parts for v in p) != sorted(node.xs):
            raise SchemeError("x-parts do not partition the node")
        if sorted(v for p in node.y_parts for v in p) != sorted(node.ys):
            raise SchemeError("y-parts do not partition the node")
        if len(node.children) != len(node.x_parts) * len(node.y_parts):
            raise SchemeError("P-node must have one child per cross pair")
        q = len(node.y_parts)
        for i, xp in enumerate(node.x_parts):
            for j, yp in enumerate(node.y_parts):
                c = node.children[i * q + j]
                if sorted(c.xs) != sorted(xp) or sorted(c.ys) != sorted(yp):
                    raise SchemeError("P-node child does not match its cross pair")
    else:
        raise SchemeError(f"unknown node kind {node.kind}")
    for c in node.children:
        validate_tree(g, c)


LeafLabeler = Callable[[DTNode], dict[tuple[str, int], LabelNode]]


def _decomp_walker(spec: dict) -> Walker:
    pb = spec["part_bits"]
    leaf = build_walker(spec["leaf"])

    def rec(nx: ShapeNode, ny: ShapeNode, eq) -> int:
        kx = (nx.tag[0], nx.tag[1])
        ky = (ny.tag[0], ny.tag[1])
        if kx != ky:
            raise SchemeError("misaligned decomposition labels")
        if kx == TAG_L:
            return leaf(nx.children[0], ny.children[0], eq)
        if kx == TAG_D:
            if not eq(nx.slot0, ny.slot0):
                return 0
            return rec(nx.children[0], ny.children[0], eq)
        if kx == TAG_DBAR:
            if not eq(nx.slot0, ny.slot0):
                return 1
            return rec(nx.children[0], ny.children[0], eq)
        ix = _unbits(nx.tag[2:2 + pb])
        iy = _unbits(ny.tag[2:2 + pb])
        return rec(nx.children[iy], ny.children[ix], eq)

    def walk(sx: ShapeNode, sy: ShapeNode, eq) -> int:
        if sx.tag[0] == sy.tag[0]:
            return 0
        if sx.tag[0] == 0:
            return rec(sx.children[0], sy.children[0], eq)
        return rec(sy.children[0], sx.children[0], lambda i, j: eq(j, i))

    return walk


register_walker("decomp", _decomp_walker)


def _max_parts(node: DTNode) -> int:
    best = max(len(node.x_parts), len(node.y_parts), 1)
    for c in node.children:
        best = max(best, _max_parts(c))
    return best


def assemble_decomposition_labels(
    g: ColoredBipartiteGraph,
    tree: DTNode,
    leaf_labeler: LeafLabeler,
    leaf_spec: dict | None,
    name: str = "decomp",
) -> EqualityScheme:
    """Assemble equality labels from a decomposition tree.

    Per vertex: a side bit, then per tree node one tuple: leaf tuples embed
    the leaf label; D/D-bar tuples carry the child index as an equality
    code; P tuples carry the own-part index in the prefix (the decoder must
    read it to select the matching cross child; the opposite-side part
    count is implicit in the child list).  Component and part ids are
    ordered by smallest contained vertex, so labels are deterministic.
    """
    validate_tree(g, tree)
    pb = _width_for(_max_parts(tree))

    def build(node: DTNode, key: tuple[str, int]) -> LabelNode:
        side, vid = key
        if node.kind == "L":
            return LabelNode(tag=TAG_L, children=(leaf_labeler(node)[key],))
        if node.kind in ("D", "Dbar"):
            order = sorted(
                range(len(node.children)),
                key=lambda i: min(node.children[i].xs + tuple(
                    y + g.nx for y in node.children[i].ys)),
            )
            for code, ci in enumerate(order):
                child = node.children[ci]
                if (side == "x" and vid in child.xs) or (side == "y" and vid in child.ys):
                    tag = TAG_D if node.kind == "D" else TAG_DBAR
                    return LabelNode(tag=tag, codes=(code,), children=(build(child, key),))
            raise SchemeError(f"vertex {key} not covered by {node.kind}-node children")
        # P-node
        q = len(node.y_parts)
        if side == "x":
            i = next(t for t, p in enumerate(node.x_parts) if vid in p)
            kids = tuple(build(node.children[i * q + j], key) for j in range(q))
        else:
            i = next(t for t, p in enumerate(node.y_parts) if vid in p)
            kids = tuple(build(node.children[t * q + i], key) for t in range(len(node.x_parts)))
        return LabelNode(tag=TAG_P + _bits(i, pb), children=kids)

    labels = []
    for x in sorted(tree.xs):
        labels.append(LabelNode(tag=(0,), children=(build(tree, ("x", x)),)))
    for y in sorted(tree.ys):
        labels.append(LabelNode(tag=(1,), children=(build(tree, ("y", y)),)))
    spec = {"name": "decomp", "part_bits": pb, "leaf": leaf_spec}
    walker = _decomp_walker(spec)
    return EqualityScheme(labels, walker, decoder_spec=spec if leaf_spec else None,
                          name=name)


def tuple_count(label: LabelNode) -> int:
    return sum(1 for _ in label.walk())
