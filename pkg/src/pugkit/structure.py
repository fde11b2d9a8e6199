"""Structural measures and witnesses.

Chain number and quasi-chain number are computed by bounded exhaustive
search (these are the stability measures every scheme's size depends on);
twins, degeneracy forests and interval clique number are the cheap
building blocks consumed by the concrete schemes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graphs import ColoredBipartiteGraph, Graph


@dataclass(frozen=True)
class ChainWitness:
    """Vertex lists a, b with (a_i, b_j) adjacent iff i <= j."""

    a_ids: tuple[int, ...]
    b_ids: tuple[int, ...]

    def __post_init__(self):
        if len(self.a_ids) != len(self.b_ids):
            raise ValueError("witness sides differ in length")
        if set(self.a_ids) & set(self.b_ids):
            raise ValueError("witness sides are not disjoint")

    def serialize(self) -> str:
        a = ",".join(map(str, self.a_ids))
        b = ",".join(map(str, self.b_ids))
        return f"chain {len(self.a_ids)}: a={a} b={b}"

    def check(self, g: Graph) -> bool:
        k = len(self.a_ids)
        return all(
            g.has_edge(self.a_ids[i], self.b_ids[j]) == (i <= j)
            for i in range(k)
            for j in range(k)
        )


@dataclass(frozen=True)
class ChainNumberResult:
    value: int
    exact: bool  # False means the true chain number is >= value
    witness: ChainWitness | None


def chain_number(g: Graph, cap: int = 8) -> ChainNumberResult:
    """Chain number of g by branch-and-bound, exact while <= cap.

    If a witness of size cap+1 exists the search stops and reports
    value=cap+1 with exact=False (meaning ">= cap+1").

    The search keeps two bitset candidate pools: future a's must avoid
    every chosen b (cand_a) and future b's must reach every chosen a
    (cand_b); branches die as soon as either pool is too small.
    """
    if cap < 0:
        raise ValueError("cap must be >= 0")
    n = g.n
    rows = [0] * n
    for v in range(n):
        r = 0
        for w in g.neighbors(v):
            r |= 1 << w
        rows[v] = r
    full = (1 << n) - 1
    # high-degree vertices make good a_1 candidates (a_1 reaches every b_j)
    by_degree = sorted(range(n), key=lambda v: (-g.degree(v), v))
    order_pos = {v: i for i, v in enumerate(by_degree)}
    best_witness: list[ChainWitness | None] = [None]

    def bits(mask: int):
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def extend(a: list[int], b: list[int], used: int, cand_a: int,
               cand_b: int, target: int) -> bool:
        t = len(a)
        if t == target:
            best_witness[0] = ChainWitness(tuple(a), tuple(b))
            return True
        remaining = target - t
        pool_a = cand_a & ~used
        pool_b = cand_b & ~used
        if pool_a.bit_count() < remaining or pool_b.bit_count() < remaining:
            return False
        for av in sorted(bits(pool_a), key=order_pos.__getitem__):
            row = rows[av]
            if (row & pool_b & ~(1 << av)).bit_count() < remaining:
                continue
            for bv in bits(row & pool_b & ~(1 << av)):
                a.append(av)
                b.append(bv)
                if extend(a, b, used | 1 << av | 1 << bv,
                          cand_a & ~rows[bv], cand_b & rows[av], target):
                    return True
                a.pop()
                b.pop()
        return False

    value = 0
    witness = None
    k = 1
    while k <= cap + 1:
        if 2 * k > n or not extend([], [], 0, full, full, k):
            break
        value = k
        witness = best_witness[0]
        k += 1
    exact = value <= cap
    return ChainNumberResult(value, exact, witness)


class _CapReached(Exception):
    pass


def quasi_chain_number(g: ColoredBipartiteGraph, cap: int = 64) -> int:
    """Quasi-chain number, exact while <= cap (returns cap+1 once exceeded).

    Sequences x_1..x_k, y_1..y_k allow repeated vertices; each step demands
    (x_i complete to earlier y's and y_i anticomplete to earlier x's) or the
    converse.  Any valid step adds a new vertex to one of the running sets,
    so states are (X-subset, Y-subset) pairs and qch <= nx + ny.
    """
    if g.nx == 0 or g.ny == 0:
        return 0
    nbr_x = [frozenset(g.neighbors_x(x)) for x in range(g.nx)]
    nbr_y = [frozenset(g.neighbors_y(y)) for y in range(g.ny)]
    memo: dict[tuple[frozenset, frozenset], int] = {}

    def further(xs: frozenset, ys: frozenset, depth: int) -> int:
        key = (xs, ys)
        hit = memo.get(key)
        if hit is not None:
            return hit
        best = 0
        for want_adj in (True, False):
            # want_adj: x_i adjacent to all earlier y's, y_i non-adjacent to
            # all earlier x's; otherwise the mirrored condition.
            if want_adj:
                x_cands = [x for x in range(g.nx) if ys <= nbr_x[x]]
                y_cands = [y for y in range(g.ny) if not (nbr_y[y] & xs)]
            else:
                x_cands = [x for x in range(g.nx) if not (nbr_x[x] & ys)]
                y_cands = [y for y in range(g.ny) if xs <= nbr_y[y]]
            for x in x_cands:
                nxs = xs | {x}
                for y in y_cands:
                    nys = ys | {y}
                    if nxs == xs and nys == ys:
                        continue  # a valid step always adds a fresh vertex
                    if depth + 1 > cap:
                        raise _CapReached
                    best = max(best, 1 + further(nxs, nys, depth + 1))
        memo[key] = best
        return best

    try:
        return further(frozenset(), frozenset(), 0)
    except _CapReached:
        return cap + 1


@dataclass(frozen=True)
class TwinPartition:
    classes: tuple[tuple[int, ...], ...]
    mode: str  # "true" or "false"
    representative: tuple[int, ...]  # per-vertex class representative
    class_index: tuple[int, ...]  # per-vertex class id


def twin_partition(g: Graph, mode: str) -> TwinPartition:
    """Partition into maximal true-twin or false-twin classes.

    True twins share closed neighborhoods; false twins share open ones.
    """
    if mode not in ("true", "false"):
        raise ValueError("mode must be 'true' or 'false'")
    groups: dict[frozenset[int], list[int]] = {}
    for v in range(g.n):
        key = g.neighbor_set(v) | {v} if mode == "true" else g.neighbor_set(v)
        groups.setdefault(frozenset(key), []).append(v)
    classes = tuple(tuple(sorted(vs)) for vs in sorted(groups.values()))
    rep = [0] * g.n
    idx = [0] * g.n
    for i, cls in enumerate(classes):
        for v in cls:
            rep[v] = cls[0]
            idx[v] = i
    return TwinPartition(classes, mode, tuple(rep), tuple(idx))


@dataclass(frozen=True)
class ForestPartition:
    """Edge partition into forests, one parent slot per (forest, vertex)."""

    parents: tuple[tuple[int | None, ...], ...]  # [forest][vertex] -> parent id

    @property
    def num_forests(self) -> int:
        return len(self.parents)

    def covers_exactly(self, g: Graph) -> bool:
        seen = set()
        for forest in self.parents:
            for v, p in enumerate(forest):
                if p is None:
                    continue
                e = (v, p) if v < p else (p, v)
                if e in seen or not g.has_edge(v, p):
                    return False
                seen.add(e)
        return len(seen) == g.m


def peel_order(g: Graph) -> tuple[list[int], int]:
    """Minimum-degree peeling order and the degeneracy.

    Ties broken by lowest vertex id so the forests are reproducible.
    """
    deg = [g.degree(v) for v in range(g.n)]
    alive = [True] * g.n
    order = []
    degeneracy = 0
    for _ in range(g.n):
        v = min((x for x in range(g.n) if alive[x]), key=lambda x: (deg[x], x))
        degeneracy = max(degeneracy, deg[v])
        alive[v] = False
        order.append(v)
        for w in g.neighbors(v):
            if alive[w]:
                deg[w] -= 1
    return order, degeneracy


def forest_partition(g: Graph) -> ForestPartition:
    """Partition E into `degeneracy` forests via min-degree peeling.

    When a vertex is peeled it has at most alpha live neighbors; those
    edges become its parent links, one per forest slot.  Parents sit later
    in the peel order, so each slot's parent map is acyclic.
    """
    order, alpha = peel_order(g)
    pos = {v: i for i, v in enumerate(order)}
    alpha = max(alpha, 1) if g.m > 0 else max(alpha, 0)
    if alpha == 0:
        return ForestPartition(())
    parents: list[list[int | None]] = [[None] * g.n for _ in range(alpha)]
    for v in order:
        later = sorted(w for w in g.neighbors(v) if pos[w] > pos[v])
        for slot, w in enumerate(later):
            parents[slot][v] = w
    return ForestPartition(tuple(tuple(f) for f in parents))


def interval_clique_number(realization: list[tuple[float, float]]) -> int:
    """Max number of pairwise-intersecting closed intervals (sweep)."""
    events = []
    for lo, hi in realization:
        if lo > hi:
            raise ValueError(f"malformed interval ({lo}, {hi})")
        events.append((lo, 0))  # starts sort before ends at equal coordinate
        events.append((hi, 1))
    events.sort()
    best = cur = 0
    for _, kind in events:
        if kind == 0:
            cur += 1
            best = max(best, cur)
        else:
            cur -= 1
    return best
