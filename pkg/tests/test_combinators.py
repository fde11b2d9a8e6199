import pytest

from pugkit.combinators import (
    DTNode,
    add_vertices_scheme,
    apply_part_flips,
    assemble_decomposition_labels,
    bip_lift,
    bip_lower,
    complementation_scheme,
    tuple_count,
    twin_reduce_scheme,
    validate_tree,
)
from pugkit.generators import (
    bipartite_equivalence_graph,
    complete,
    edgeless,
    half_graph,
    random_forest,
    random_graph,
)
from pugkit.graphs import Graph, bip_transform, induced_subgraph
from pugkit.labels import SchemeError, prefix_bits
from pugkit.sketch import arboricity_scheme


def star(n):
    return Graph(n + 1, [(0, i) for i in range(1, n + 1)])


def test_add_vertices_identity():
    g = random_forest(10, seed=1)
    base = arboricity_scheme(g)
    out = add_vertices_scheme(g, [], base, list(range(10)), c=0)
    assert out.check_exact(g.has_edge)
    # prefix grows by exactly 1 + c bits on ordinary vertices
    assert out.prefix_len(3) == base.prefix_len(3) + 1


def test_add_vertices_star():
    g = star(8)
    sub, remap = induced_subgraph(g, range(1, 9))
    base = arboricity_scheme(sub)  # edgeless
    out = add_vertices_scheme(g, [0], base, list(range(1, 9)))
    assert out.check_exact(g.has_edge)
    assert out.prefix_len(5) == base.prefix_len(0) + 1 + 1  # marker + c=1 mask


def test_add_vertices_random():
    for seed in range(4):
        g = random_graph(12, 0.3, seed=seed)
        special = [0, 5, 7]
        rest = [v for v in range(12) if v not in special]
        sub, _ = induced_subgraph(g, rest)
        base = arboricity_scheme(sub)
        out = add_vertices_scheme(g, special, base, rest)
        assert out.check_exact(g.has_edge)


def test_add_vertices_budget():
    g = star(3)
    sub, _ = induced_subgraph(g, [1, 2, 3])
    base = arboricity_scheme(sub)
    with pytest.raises(SchemeError):
        add_vertices_scheme(g, [0], base, [1, 2, 3], c=0)


def test_complementation_identity_and_full():
    g = random_graph(10, 0.4, seed=2)
    base = arboricity_scheme(g)
    parts = [list(range(10))]
    ident = complementation_scheme(base, parts, [[0]])
    assert ident.check_exact(g.has_edge)
    comp = complementation_scheme(base, parts, [[1]])
    cg = g.complement()
    assert comp.check_exact(cg.has_edge)
    # prefix adds ceil(log k) + k bits
    assert comp.prefix_len(0) == base.prefix_len(0) + 1 + 1


def test_complementation_threshold_graph():
    # threshold graph = half graph with the a-side flipped to a clique
    k = 4
    hg = half_graph(k)
    base = arboricity_scheme(hg)
    parts = [list(range(k)), list(range(k, 2 * k))]
    flips = [[1, 0], [0, 0]]
    sch = complementation_scheme(base, parts, flips)
    target = apply_part_flips(hg, parts, flips)
    from pugkit.generators import threshold_graph

    assert target == threshold_graph(k)
    assert sch.check_exact(target.has_edge)


def test_complementation_random_flips():
    from pugkit.rng import rng_for

    rng = rng_for(3, "flips")
    for seed in range(4):
        g = random_graph(12, 0.3, seed=seed)
        parts = [[], [], []]
        for v in range(12):
            parts[rng.randrange(3)].append(v)
        parts = [p for p in parts if p]
        r = len(parts)
        flips = [[0] * r for _ in range(r)]
        for i in range(r):
            for j in range(i, r):
                flips[i][j] = flips[j][i] = rng.randrange(2)
        sch = complementation_scheme(arboricity_scheme(g), parts, flips)
        target = apply_part_flips(g, parts, flips)
        assert sch.check_exact(target.has_edge)


def test_complementation_partition_check():
    g = random_graph(6, 0.5, seed=0)
    base = arboricity_scheme(g)
    with pytest.raises(SchemeError):
        complementation_scheme(base, [[0, 1]], [[0]])
    with pytest.raises(SchemeError):
        complementation_scheme(base, [[0, 1, 2], [3, 4, 5]], [[0, 1], [0, 0]])


def test_twin_reduce_complete_graph():
    g = complete(6)
    sch, tp = twin_reduce_scheme(g, "true",
                                 lambda q, remap: arboricity_scheme(q))
    assert len(tp.classes) == 1
    assert sch.check_exact(g.has_edge)
    assert all(sch.decode(u, v) == 1 for u in range(6) for v in range(u + 1, 6))


def test_twin_reduce_twin_free():
    g = half_graph(3)
    sch, tp = twin_reduce_scheme(g, "true",
                                 lambda q, remap: arboricity_scheme(q))
    assert all(len(c) == 1 for c in tp.classes)
    assert sch.check_exact(g.has_edge)


def test_twin_reduce_duplicated_vertices():
    # take a forest and duplicate three vertices into true twins
    base_g = random_forest(8, seed=5)
    edges = list(base_g.edges())
    n = base_g.n
    for i, v in enumerate([0, 3, 5]):
        dup = n + i
        edges += [(dup, w) for w in base_g.neighbors(v)] + [(dup, v)]
    g = Graph(n + 3, edges)
    sch, _ = twin_reduce_scheme(g, "true", lambda q, remap: arboricity_scheme(q))
    assert sch.check_exact(g.has_edge)
    assert sch.k == arboricity_scheme(g).k + 1 or sch.k <= arboricity_scheme(g).k + 1


def test_twin_reduce_false_mode():
    g = bipartite_equivalence_graph([(2, 3), (1, 2)]).to_graph()
    sch, _ = twin_reduce_scheme(g, "false", lambda q, remap: arboricity_scheme(q))
    assert sch.check_exact(g.has_edge)


def test_bip_lift_lower_roundtrip():
    g = random_forest(9, seed=3)
    base = arboricity_scheme(g)
    lifted = bip_lift(base)
    bg = bip_transform(g)
    # lifted scheme indexes bip vertices left 0..n-1, right n..2n-1
    for u in range(g.n):
        for v in range(g.n):
            expect = int(bg.has_edge(u, v))
            assert lifted.decode(u, g.n + v) == expect
            assert lifted.decode(g.n + v, u) == expect
    for u in range(g.n):
        for v in range(u + 1, g.n):
            assert lifted.decode(u, v) == 0  # same side
            assert lifted.decode(g.n + u, g.n + v) == 0
    lowered = bip_lower(lifted)
    assert lowered.check_exact(g.has_edge)
    assert lowered.code_count(0) == 2 * base.code_count(0)


def test_assemble_depth0_tree():
    from pugkit.bipartite import bipartite_equivalence_labels
    from pugkit.labels import LabelNode

    b = bipartite_equivalence_graph([(2, 2), (1, 2)])
    tree = DTNode("L", tuple(range(b.nx)), tuple(range(b.ny)))

    def labeler(node):
        sch = bipartite_equivalence_labels(b)
        out = {}
        for x in range(b.nx):
            out[("x", x)] = sch.labels[x]
        for y in range(b.ny):
            out[("y", y)] = sch.labels[b.nx + y]
        return out

    sch = assemble_decomposition_labels(b, tree, labeler, {"name": "bip-equivalence"})
    for x in range(b.nx):
        for y in range(b.ny):
            assert sch.decode(x, b.nx + y) == int(b.has_edge(x, y))


def test_validate_tree_rejects_malformed():
    b = bipartite_equivalence_graph([(2, 2), (1, 2)])
    bad = DTNode("D", tuple(range(b.nx)), tuple(range(b.ny)),
                 (DTNode("L", (0,), (0,)),))
    with pytest.raises(SchemeError):
        validate_tree(b, bad)


def test_tuple_count_bound():
    # assembled labels stay within k^d tuples (k = max parts, d = depth)
    from pugkit.bipartite import fpp_labels
    from pugkit.generators import random_fpp_free

    g = random_fpp_free(3, 4, 5, 2, seed=1)
    sch = fpp_labels(g, p=2, q=3)
    from pugkit.bipartite import fpp_decomposition

    tree = fpp_decomposition(g, 2, 3)
    d = tree.depth()
    k = 2
    worst = max(tuple_count(l) for l in sch.labels)
    assert worst <= (k ** max(d, 1)) * 8 + 8  # generous structural bound
