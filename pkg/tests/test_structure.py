import itertools

import pytest

from pugkit.generators import (
    co_half_graph,
    complete,
    cycle,
    edgeless,
    half_graph,
    half_graph_bipartite,
    hypercube,
    path,
    random_bipartite,
    random_graph,
)
from pugkit.graphs import ColoredBipartiteGraph, Graph, bip_transform, induced_subgraph
from pugkit.rng import rng_for
from pugkit.structure import (
    chain_number,
    forest_partition,
    interval_clique_number,
    quasi_chain_number,
    twin_partition,
)


def brute_chain_number(g: Graph, cap: int) -> int:
    """Independent oracle: enumerate all ordered a/b tuples."""
    best = 0
    for k in range(1, cap + 1):
        found = False
        for a in itertools.permutations(range(g.n), k):
            rest = [v for v in range(g.n) if v not in a]
            for b in itertools.permutations(rest, k):
                if all(g.has_edge(a[i], b[j]) == (i <= j) for i in range(k) for j in range(k)):
                    found = True
                    break
            if found:
                break
        if not found:
            break
        best = k
    return best


def brute_qch(g: ColoredBipartiteGraph, cap: int) -> int:
    """Independent oracle: plain sequence enumeration, no memoization."""

    def extend(xs: tuple, ys: tuple) -> int:
        if len(xs) >= cap:
            return len(xs)
        best = len(xs)
        for x in range(g.nx):
            for y in range(g.ny):
                c1 = all(g.has_edge(x, yy) for yy in ys) and not any(
                    g.has_edge(xx, y) for xx in xs)
                c2 = not any(g.has_edge(x, yy) for yy in ys) and all(
                    g.has_edge(xx, y) for xx in xs)
                if c1 or c2:
                    if x in xs and y in ys:
                        continue  # no-growth steps are impossible; skip defensively
                    best = max(best, extend(xs + (x,), ys + (y,)))
        return best

    if g.nx == 0 or g.ny == 0:
        return 0
    return extend((), ())


def test_chain_number_half_graphs():
    for k in range(1, 6):
        res = chain_number(half_graph(k), cap=k)
        assert res.exact and res.value == k
        assert res.witness is not None and res.witness.check(half_graph(k))


def test_chain_number_trivial():
    assert chain_number(edgeless(6), cap=3).value == 0
    res = chain_number(path(4), cap=3)
    assert res.exact and res.value == 2
    assert res.value == brute_chain_number(path(4), 3)


def test_chain_number_cap_reporting():
    res = chain_number(half_graph(5), cap=2)
    assert not res.exact and res.value == 3
    assert res.witness is not None and res.witness.check(half_graph(5))


def test_chain_number_matches_brute_force_on_random():
    for seed in range(12):
        g = random_graph(8, 0.4, seed=seed)
        assert chain_number(g, cap=4).value == brute_chain_number(g, 4)


def test_chain_number_hereditary_monotone():
    rng = rng_for(99, "hered")
    for trial in range(40):
        g = random_graph(10, 0.4, seed=trial)
        vs = [v for v in range(10) if rng.random() < 0.6]
        sub, _ = induced_subgraph(g, vs)
        assert chain_number(sub, cap=4).value <= chain_number(g, cap=4).value


def test_witness_serialization():
    res = chain_number(half_graph(3), cap=3)
    s = res.witness.serialize()
    assert s.startswith("chain 3: a=") and " b=" in s


def test_qch_cobiclique():
    g = ColoredBipartiteGraph(2, 2, [])
    assert quasi_chain_number(g, cap=10) == 1
    assert brute_qch(g, 10) == 1


def test_qch_at_least_chain_number():
    g = half_graph_bipartite(3)
    assert quasi_chain_number(g, cap=20) >= 3


def test_qch_matches_brute_force():
    for seed in range(10):
        g = random_bipartite(3, 3, 0.5, seed=seed)
        assert quasi_chain_number(g, cap=12) == brute_qch(g, 12)


def test_qch_sandwich_on_samples():
    # ch(G) <= qch(G) <= 4 ch(G) + 4 on bipartite samples
    for seed in range(15):
        g = random_bipartite(4, 4, 0.5, seed=seed)
        ch = chain_number(g.to_graph(), cap=4).value
        qch = quasi_chain_number(g, cap=4 * ch + 4)
        assert ch <= qch <= 4 * ch + 4


def test_twin_partition_modes():
    tp = twin_partition(complete(5), "true")
    assert len(tp.classes) == 1 and len(tp.classes[0]) == 5
    fp = twin_partition(edgeless(5), "false")
    assert len(fp.classes) == 1
    for mode in ("true", "false"):
        cp = twin_partition(cycle(5), mode)
        assert all(len(c) == 1 for c in cp.classes)
    with pytest.raises(ValueError):
        twin_partition(cycle(5), "both")


def test_twin_partition_is_twin_relation():
    g = random_graph(12, 0.5, seed=5)
    tp = twin_partition(g, "true")
    for cls in tp.classes:
        for x, y in itertools.combinations(cls, 2):
            assert g.has_edge(x, y)
            assert g.neighbor_set(x) - {y} == g.neighbor_set(y) - {x}


def _forest_is_acyclic(parent_map, n):
    # union-find over parent edges
    root = list(range(n))

    def find(a):
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    for v, p in enumerate(parent_map):
        if p is None:
            continue
        ra, rb = find(v), find(p)
        if ra == rb:
            return False
        root[ra] = rb
    return True


@pytest.mark.parametrize("g,expect", [
    (path(8), 1),
    (complete(4), 3),
    (hypercube(3), 3),
    (hypercube(4), 4),
])
def test_forest_partition_counts(g, expect):
    fp = forest_partition(g)
    assert fp.num_forests == expect
    assert fp.covers_exactly(g)
    for forest in fp.parents:
        assert _forest_is_acyclic(forest, g.n)


def test_forest_partition_random():
    for seed in range(8):
        g = random_graph(20, 0.3, seed=seed)
        fp = forest_partition(g)
        assert fp.covers_exactly(g)
        for forest in fp.parents:
            assert _forest_is_acyclic(forest, g.n)


def test_interval_clique_number():
    assert interval_clique_number([(0.0, 1.0)] * 7 ) == 7
    assert interval_clique_number([(i, i + 0.5) for i in range(5)]) == 1
    # touching endpoints intersect
    assert interval_clique_number([(0, 1), (1, 2)]) == 2
    with pytest.raises(ValueError):
        interval_clique_number([(2, 1)])


def test_interval_clique_vs_pairwise_oracle():
    rng = rng_for(4, "ivals")
    for _ in range(30):
        iv = []
        for _ in range(10):
            a = rng.randrange(20)
            b = a + rng.randrange(6)
            iv.append((float(a), float(b)))
        # oracle: max clique of the interval graph = max point coverage;
        # check by brute force over all subsets (n=10)
        best = 0
        for mask in range(1 << 10):
            sel = [iv[i] for i in range(10) if mask >> i & 1]
            if all(a1 <= b2 and a2 <= b1 for (a1, b1), (a2, b2) in itertools.combinations(sel, 2)):
                best = max(best, len(sel))
        assert interval_clique_number(iv) == best


def test_co_half_graph_chain():
    assert chain_number(co_half_graph(4), cap=4).value == 4
    assert chain_number(bip_transform(cycle(4)).to_graph(), cap=4).value <= 2 * chain_number(cycle(4), cap=4).value
