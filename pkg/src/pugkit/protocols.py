"""Equality-based communication trees, protocol evaluation, conversions
between labelings and protocols, t-equivalence interpretability, and the
Greater-Than reduction harness.

Message maps are explicit arrays over [n]: protocols here exist to be
exhaustively checked, not to scale.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .generators import half_graph
from .graphs import ColoredBipartiteGraph, Graph, bip_transform
from .labels import EqualityScheme, LabelNode, SchemeError, prefix_bits


@dataclass
class Leaf:
    value: int


@dataclass
class CommNode:
    party: str  # 'A' or 'B'
    m: tuple[int, ...]
    zero: "Node"
    one: "Node"


@dataclass
class EqNode:
    a: tuple[int, ...]
    b: tuple[int, ...]
    zero: "Node"
    one: "Node"


Node = Leaf | CommNode | EqNode


def depth(tree: Node) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(depth(tree.zero), depth(tree.one))


def run_protocol(tree: Node, x: int, y: int) -> tuple[int, str]:
    """Evaluate the tree on inputs (x, y); returns (output, transcript)."""
    cur = tree
    transcript = []
    while not isinstance(cur, Leaf):
        if isinstance(cur, CommNode):
            bit = cur.m[x] if cur.party == "A" else cur.m[y]
        elif isinstance(cur, EqNode):
            bit = int(cur.a[x] == cur.b[y])
        else:
            raise SchemeError(f"malformed protocol node {cur!r}")
        transcript.append(str(bit))
        cur = cur.one if bit else cur.zero
    return cur.value, "".join(transcript)


def output_table(tree: Node, n: int) -> list[list[int]]:
    return [[run_protocol(tree, x, y)[0] for y in range(n)] for x in range(n)]


def normalize_to_equality_nodes(tree: Node) -> Node:
    """Replace communication nodes by equality nodes of the same effect:
    an Alice node (A,m) becomes Eq(m(x), 1), a Bob node Eq(1, m(y))."""
    if isinstance(tree, Leaf):
        return tree
    zero = normalize_to_equality_nodes(tree.zero)
    one = normalize_to_equality_nodes(tree.one)
    if isinstance(tree, EqNode):
        return EqNode(tree.a, tree.b, zero, one)
    n = len(tree.m)
    if tree.party == "A":
        return EqNode(tree.m, (1,) * n, zero, one)
    return EqNode((1,) * n, tree.m, zero, one)


# ---------------------------------------------------------------------------
# Labels -> protocol.
# ---------------------------------------------------------------------------

def labels_to_protocol(scheme: EqualityScheme) -> Node:
    """Protocol tree computing the scheme's decoder on vertex pairs.

    Alice communicates her per-vertex prefix (shape index and padded
    prefix bits), then k^2 equality nodes assemble the Q matrix; the leaf
    carries the decoder output where it is already determined, otherwise
    one final equality node lets Bob finish.  Depth is S + k^2 (+1 in the
    undetermined case) with S the prefix width; for uniform-shape schemes
    with s = 0 this is exactly k^2.
    """
    n = scheme.n
    k = scheme.k
    shapes = []
    shape_index = {}
    for sh in scheme.shapes:
        if sh not in shape_index:
            shape_index[sh] = len(shapes)
            shapes.append(sh)
    s_bits = max(len(shapes) - 1, 0).bit_length()
    tag_width = scheme.s
    max_code = max((c for codes in scheme.codes for c in codes), default=0) + 1

    def a_code(i: int) -> tuple[int, ...]:
        return tuple(
            scheme.codes[x][i] if i < len(scheme.codes[x]) else max_code + x
            for x in range(n))

    def b_code(j: int) -> tuple[int, ...]:
        return tuple(
            scheme.codes[y][j] if j < len(scheme.codes[y]) else max_code + n + y
            for y in range(n))

    prefix_of = []
    for x in range(n):
        bits = [shape_index[scheme.shapes[x]] >> t & 1 for t in range(s_bits)]
        tag = list(prefix_bits(scheme.labels[x]))
        tag += [0] * (tag_width - len(tag))
        prefix_of.append(tuple(bits + tag))

    pairs = list(itertools.product(range(k), range(k)))

    def outcome(shape_x, q_bits: dict[tuple[int, int], int], y: int) -> int:
        def eq(i, j):
            return bool(q_bits[(i, j)])

        return scheme.walker(shape_x, scheme.shapes[y], eq)

    def build_eq(level: int, shape_x, q_bits) -> Node:
        if level == len(pairs):
            outs = {outcome(shape_x, q_bits, y) for y in range(n)}
            if len(outs) == 1:
                return Leaf(outs.pop())
            bvals = tuple(outcome(shape_x, q_bits, y) for y in range(n))
            return EqNode((1,) * n, bvals, Leaf(0), Leaf(1))
        i, j = pairs[level]
        zero = build_eq(level + 1, shape_x, {**q_bits, (i, j): 0})
        one = build_eq(level + 1, shape_x, {**q_bits, (i, j): 1})
        return EqNode(a_code(i), b_code(j), zero, one)

    def build_prefix(level: int, chosen: list[int]) -> Node:
        if level == len(prefix_of[0]):
            candidates = [x for x in range(n)
                          if list(prefix_of[x]) == chosen]
            if not candidates:
                return Leaf(0)
            return build_eq(0, scheme.shapes[candidates[0]], {})
        m = tuple(prefix_of[x][level] for x in range(n))
        return CommNode("A", m,
                        build_prefix(level + 1, chosen + [0]),
                        build_prefix(level + 1, chosen + [1]))

    return build_prefix(0, [])


# ---------------------------------------------------------------------------
# Protocol -> diagonal labels.
# ---------------------------------------------------------------------------

@dataclass
class DiagonalLabeling:
    """k-diagonal equality labels on bip(G): codes only, and an eta that
    reads just the diagonal of the equality matrix."""

    codes_x: list[tuple[int, ...]]
    codes_y: list[tuple[int, ...]]
    eta: Callable[[Sequence[int]], int]
    t: int  # inner-node count; labels carry t+1 codes

    def decode(self, x_codes: Sequence[int], y_codes: Sequence[int]) -> int:
        w = [int(a == b) for a, b in zip(x_codes, y_codes)]
        return self.eta(w)

    def decode_pair(self, u: int, v: int, n: int) -> int:
        """Adjacency of bip-vertices u, v (0..n-1 left, n..2n-1 right)."""
        cu = self.codes_x[u] if u < n else self.codes_y[u - n]
        cv = self.codes_x[v] if v < n else self.codes_y[v - n]
        return self.decode(cu, cv)


def protocol_to_diagonal_labels(tree: Node, g: Graph) -> DiagonalLabeling:
    """From a protocol computing adjacency of g, build diagonal labels for
    bip(g): code i of a left vertex is a_i(x), of a right vertex b_i(y),
    plus a final side code (left 0 / right 1); eta simulates the tree from
    the diagonal and forces 0 on same-side pairs.

    The conversion needs the tree to be correct on the diagonal too, since
    (x, x') pairs of bip(g) are never edges; trees built from pairwise
    decoders may output 1 there, so an identity guard is prepended when
    necessary."""
    if any(run_protocol(tree, x, x)[0] != 0 for x in range(g.n)):
        ids = tuple(range(g.n))
        tree = EqNode(ids, ids, tree, Leaf(0))
    norm = normalize_to_equality_nodes(tree)
    nodes: list[EqNode] = []
    index: dict[int, int] = {}

    def number(node: Node):
        if isinstance(node, Leaf):
            return
        index[id(node)] = len(nodes)
        nodes.append(node)
        number(node.zero)
        number(node.one)

    number(norm)
    t = len(nodes)

    codes_x = [tuple(nd.a[x] for nd in nodes) + (0,) for x in range(g.n)]
    codes_y = [tuple(nd.b[y] for nd in nodes) + (1,) for y in range(g.n)]

    def eta(w: Sequence[int]) -> int:
        if w[t]:
            return 0
        cur: Node = norm
        while not isinstance(cur, Leaf):
            bit = w[index[id(cur)]]
            cur = cur.one if bit else cur.zero
        return cur.value

    return DiagonalLabeling(codes_x, codes_y, eta, t)


def diagonal_as_equality_scheme(d: DiagonalLabeling, n: int) -> EqualityScheme:
    """Wrap diagonal labels as an (0, t+1)-equality scheme over bip(G)."""
    labels = [LabelNode(codes=c) for c in d.codes_x]
    labels += [LabelNode(codes=c) for c in d.codes_y]
    arity = d.t + 1

    def walker(sx, sy, eq):
        w = [int(eq(sx.slot0 + i, sy.slot0 + i)) for i in range(arity)]
        return d.eta(w)

    return EqualityScheme(labels, walker, decoder_spec=None, name="diagonal")


# ---------------------------------------------------------------------------
# t-equivalence interpretations.
# ---------------------------------------------------------------------------

@dataclass
class EquivalenceInterpretation:
    t: int
    eta: tuple[int, ...]  # truth table over {0,1}^t, indexed by bitmask
    kappa: list[list[int]]  # [x][y] -> t-bit color mask


def _slice_is_bip_equivalence(g: ColoredBipartiteGraph,
                              kappa: list[list[int]], bit: int) -> bool:
    rows = [frozenset(y for y in range(g.ny) if kappa[x][y] >> bit & 1)
            for x in range(g.nx)]
    for r1, r2 in itertools.combinations(rows, 2):
        if r1 & r2 and r1 != r2:
            return False  # neighborhoods overlap without being equal: P4
    return True


def verify_equivalence_interpretation(g: ColoredBipartiteGraph,
                                      interp: EquivalenceInterpretation,
                                      reasons: list[str] | None = None) -> bool:
    out = reasons if reasons is not None else []
    for bit in range(interp.t):
        if not _slice_is_bip_equivalence(g, interp.kappa, bit):
            out.append(f"slice {bit} contains an induced P4")
            return False
    for x in range(g.nx):
        for y in range(g.ny):
            if interp.eta[interp.kappa[x][y]] != int(g.has_edge(x, y)):
                out.append(f"eta(kappa({x},{y})) disagrees with adjacency")
                return False
    return True


def _bip_equivalence_slices(nx_: int, ny_: int):
    """All bipartite equivalence graphs on (X, Y) as edge-mask matrices."""

    def set_partitions(items):
        items = list(items)
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in set_partitions(rest):
            for i in range(len(part)):
                yield part[:i] + [[first] + part[i]] + part[i + 1:]
            yield [[first]] + part

    for px in set_partitions(range(nx_)):
        for py in set_partitions(range(ny_)):
            # injective partial matchings from X-blocks to Y-blocks
            def matchings(i, used):
                if i == len(px):
                    yield []
                    return
                for rest in matchings(i + 1, used):
                    yield [None] + rest
                for j in range(len(py)):
                    if j in used:
                        continue
                    for rest in matchings(i + 1, used | {j}):
                        yield [j] + rest

            for match in matchings(0, frozenset()):
                rows = [[0] * ny_ for _ in range(nx_)]
                for bi, block in enumerate(px):
                    j = match[bi]
                    if j is None:
                        continue
                    for x in block:
                        for y in py[j]:
                            rows[x][y] = 1
                yield rows


def search_interpretation(g: ColoredBipartiteGraph, t_max: int = 2
                          ) -> EquivalenceInterpretation | None:
    """Exhaustive search for a t-equivalence interpretation, t <= t_max.

    Doubly exponential; capped at 10 vertices and t <= 2.
    """
    if g.nx + g.ny > 10 or t_max > 2:
        raise ValueError("search capped at n <= 10, t <= 2")
    adj = [[int(g.has_edge(x, y)) for y in range(g.ny)] for x in range(g.nx)]

    if t_max >= 1:
        for eta in itertools.product((0, 1), repeat=2):
            # eta maps kappa-bit -> output; solve kappa pointwise
            if eta[0] == eta[1]:
                if all(adj[x][y] == eta[0] for x in range(g.nx) for y in range(g.ny)):
                    kappa = [[0] * g.ny for _ in range(g.nx)]
                    return EquivalenceInterpretation(1, eta, kappa)
                continue
            kappa = [[1 if adj[x][y] == eta[1] else 0 for y in range(g.ny)]
                     for x in range(g.nx)]
            cand = EquivalenceInterpretation(1, eta, kappa)
            if verify_equivalence_interpretation(g, cand):
                return cand
    if t_max < 2:
        return None
    for eta in itertools.product((0, 1), repeat=4):
        for slice1 in _bip_equivalence_slices(g.nx, g.ny):
            forced = {}
            feasible = True
            for x in range(g.nx):
                for y in range(g.ny):
                    v1 = slice1[x][y]
                    allowed = [v2 for v2 in (0, 1)
                               if eta[v1 | v2 << 1] == adj[x][y]]
                    if not allowed:
                        feasible = False
                        break
                    if len(allowed) == 1:
                        forced[(x, y)] = allowed[0]
                if not feasible:
                    break
            if not feasible:
                continue
            slice2 = _complete_slice(g, forced)
            if slice2 is None:
                continue
            kappa = [[slice1[x][y] | slice2[x][y] << 1 for y in range(g.ny)]
                     for x in range(g.nx)]
            cand = EquivalenceInterpretation(2, eta, kappa)
            if verify_equivalence_interpretation(g, cand):
                return cand
    return None


def _complete_slice(g: ColoredBipartiteGraph, forced: dict[tuple[int, int], int]
                    ) -> list[list[int]] | None:
    """A bipartite equivalence slice honoring forced 0/1 entries: take the
    biclique closure of the forced ones and reject if a forced zero lands
    inside; all remaining pairs are 0."""
    parent = {("x", x): ("x", x) for x in range(g.nx)}
    parent.update({("y", y): ("y", y) for y in range(g.ny)})

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        parent[find(a)] = find(b)

    for (x, y), v in forced.items():
        if v == 1:
            union(("x", x), ("y", y))
    rows = [[0] * g.ny for _ in range(g.nx)]
    for x in range(g.nx):
        for y in range(g.ny):
            same = find(("x", x)) == find(("y", y))
            if same and forced.get((x, y)) == 0:
                return None
            rows[x][y] = int(same)
    return rows


# ---------------------------------------------------------------------------
# Greater-Than reduction harness.
# ---------------------------------------------------------------------------

def reduce_gt_to_adjacency(n: int) -> tuple[Graph, list[int], list[int]]:
    """GT on [n] as adjacency in the half graph: GT(x,y) = 1 iff x <= y iff
    (a_x, b_y) is an edge."""
    g = half_graph(n)
    return g, list(range(n)), list(range(n, 2 * n))


def gt_protocol(n: int) -> Node:
    """Protocol for GT on [n] (1 iff x <= y): Alice announces x bit by bit,
    then a single equality node lets Bob answer."""
    bits = max(n - 1, 1).bit_length()

    def build(level: int, prefix: int) -> Node:
        if level == bits:
            x = prefix
            bvals = tuple(int(x <= y) for y in range(n))
            return EqNode((1,) * n, bvals, Leaf(0), Leaf(1))
        m = tuple(x >> (bits - 1 - level) & 1 for x in range(n))
        return CommNode("A", m,
                        build(level + 1, prefix << 1),
                        build(level + 1, prefix << 1 | 1))

    return build(0, 0)


# ---------------------------------------------------------------------------
# Protocol file format: preorder node list.
# ---------------------------------------------------------------------------

def write_protocol(tree: Node, name: str, n: int) -> str:
    lines = [f"protocol {name} {n}"]

    def emit(node: Node):
        if isinstance(node, Leaf):
            lines.append(f"leaf {node.value}")
            return
        if isinstance(node, CommNode):
            lines.append(f"comm {node.party} m={','.join(map(str, node.m))}")
        else:
            lines.append(f"eq a={','.join(map(str, node.a))} "
                         f"b={','.join(map(str, node.b))}")
        emit(node.zero)
        emit(node.one)

    emit(tree)
    return "\n".join(lines) + "\n"


def parse_protocol(text: str) -> tuple[Node, str, int]:
    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines or not lines[0].startswith("protocol "):
        raise SchemeError("bad protocol header")
    _, name, n_s = lines[0].split()
    pos = [1]

    def parse_node() -> Node:
        if pos[0] >= len(lines):
            raise SchemeError("truncated protocol file")
        parts = lines[pos[0]].split()
        pos[0] += 1
        if parts[0] == "leaf":
            return Leaf(int(parts[1]))
        if parts[0] == "comm":
            m = tuple(int(t) for t in parts[2].split("=", 1)[1].split(","))
            return CommNode(parts[1], m, parse_node(), parse_node())
        if parts[0] == "eq":
            a = tuple(int(t) for t in parts[1].split("=", 1)[1].split(","))
            b = tuple(int(t) for t in parts[2].split("=", 1)[1].split(","))
            return EqNode(a, b, parse_node(), parse_node())
        raise SchemeError(f"unknown protocol node {parts[0]!r}")

    tree = parse_node()
    if pos[0] != len(lines):
        raise SchemeError("trailing protocol lines")
    return tree, name, int(n_s)
