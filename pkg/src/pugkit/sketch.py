"""Randomized sketches: compression of equality schemes, boosting,
derandomization, Monte-Carlo error evaluation, and PUG export.

Encoders derive all their randomness as pure functions of (seed, tag), so
encoding a single pair is distributed exactly like restricting a full
encoding; `evaluate_error` exploits this to run fresh-encoding trials in
O(label) time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .graphs import Graph
from .labels import EqualityScheme, LabelNode, register_walker
from .rng import derive_seed, rng_for
from .structure import forest_partition


def _pack(fields: Sequence[tuple[int, int]]) -> int:
    out = 0
    shift = 0
    for val, width in fields:
        out |= (val & ((1 << width) - 1)) << shift
        shift += width
    return out


def _unpack(bits: int, widths: Sequence[int]) -> list[int]:
    out = []
    shift = 0
    for w in widths:
        out.append(bits >> shift & ((1 << w) - 1))
        shift += w
    return out


def _bits_for(count: int) -> int:
    return max(count - 1, 0).bit_length()


class SketchScheme:
    """Seeded randomized encoder + pure decoder with an error budget."""

    width: int
    delta: float
    n: int

    def encode(self, seed: int) -> list[int]:
        raise NotImplementedError

    def encode_pair(self, u: int, v: int, seed: int) -> tuple[int, int]:
        labels = self.encode(seed)
        return labels[u], labels[v]

    def decode(self, bx: int, by: int) -> int:
        raise NotImplementedError

    def decode_matrix(self, labels: list[int]) -> "np.ndarray | None":
        """Optional bulk decoder: n x n 0/1 output matrix (None = no fast path)."""
        return None


class CompressedEqualityScheme(SketchScheme):
    """Equality scheme compressed by hashing codes into [3k^2] (one-sided).

    Sketch layout: [shape index][one hashed value per code slot], padded to
    a fixed width.  Equal codes always hash equal, so true-equality
    comparisons never flip; each false equality flips with probability
    1/(3k^2), giving per-pair error at most k^2/(3k^2) = 1/3.
    """

    def __init__(self, scheme: EqualityScheme):
        self.scheme = scheme
        self.n = scheme.n
        k = max(scheme.k, 1)
        self.alphabet = 3 * k * k
        self.value_width = _bits_for(self.alphabet)
        self._canon = scheme.canonical_code_map()
        table: list = []
        index: dict = {}
        for sh in scheme.shapes:
            if sh not in index:
                index[sh] = len(table)
                table.append(sh)
        self._shape_table = table
        self._shape_index = index
        self.shape_bits = _bits_for(len(table))
        self.width = self.shape_bits + scheme.k * self.value_width
        self.delta = 1 / 3

    def _hash(self, seed: int, value: int) -> int:
        return derive_seed(seed, "ceq", self._canon[value]) % self.alphabet

    def _encode_one(self, v: int, seed: int) -> int:
        fields = [(self._shape_index[self.scheme.shapes[v]], self.shape_bits)]
        for c in self.scheme.codes[v]:
            fields.append((self._hash(seed, c), self.value_width))
        return _pack(fields)

    def encode(self, seed: int) -> list[int]:
        return [self._encode_one(v, seed) for v in range(self.n)]

    def encode_pair(self, u: int, v: int, seed: int) -> tuple[int, int]:
        return self._encode_one(u, seed), self._encode_one(v, seed)

    def _parse(self, bits: int):
        idx = bits & ((1 << self.shape_bits) - 1)
        shape = self._shape_table[idx]
        rest = bits >> self.shape_bits
        vals = []
        mask = (1 << self.value_width) - 1
        for _ in range(self._arity(shape)):
            vals.append(rest & mask)
            rest >>= self.value_width
        return shape, vals

    @staticmethod
    def _arity(shape) -> int:
        return shape.arity + sum(CompressedEqualityScheme._arity(c) for c in shape.children)

    def decode(self, bx: int, by: int) -> int:
        sx, vx = self._parse(bx)
        sy, vy = self._parse(by)

        def eq(i: int, j: int) -> bool:
            return vx[i] == vy[j]

        return self.scheme.walker(sx, sy, eq)


def compress_equality_scheme(scheme: EqualityScheme) -> CompressedEqualityScheme:
    return CompressedEqualityScheme(scheme)


def boost_copies(delta_target: float, base_delta: float = 1 / 3) -> int:
    """Number of independent copies for majority voting (1 = no-op).

    This is the textbook 3*ln(1/delta) count.  It is slightly optimistic
    for base error exactly 1/3; use `exact_majority_copies` where the
    target must truly hold (derandomization does).
    """
    if not (0 < delta_target < 1 / 2):
        raise ValueError("delta target must be in (0, 1/2)")
    if delta_target >= base_delta:
        return 1
    return math.ceil(3 * math.log(1 / delta_target))


def majority_failure(copies: int, p: float) -> float:
    """P[Binomial(copies, p) >= copies/2]: majority-vote failure rate."""
    need = (copies + 1) // 2 if copies % 2 else copies // 2
    total = 0.0
    term = (1 - p) ** copies
    # iterate binomial pmf upward
    for i in range(copies + 1):
        if i >= need:
            total += term
        term *= (copies - i) / (i + 1) * (p / (1 - p))
    return min(total, 1.0)


def exact_majority_copies(delta_target: float, base_delta: float = 1 / 3) -> int:
    """Minimal odd copy count whose exact majority tail meets the target."""
    if delta_target >= base_delta:
        return 1
    k = 1
    while majority_failure(k, base_delta) > delta_target:
        k += 2
        if k > 100_000:
            raise ValueError("unreachable boost target")
    return k


class BoostedScheme(SketchScheme):
    def __init__(self, base: SketchScheme, delta_target: float, copies: int | None = None):
        self.base = base
        self.copies = boost_copies(delta_target, base.delta) if copies is None else copies
        self.n = base.n
        self.width = self.copies * base.width
        self.delta = delta_target if self.copies > 1 else base.delta

    def encode(self, seed: int) -> list[int]:
        parts = [self.base.encode(derive_seed(seed, "copy", i)) for i in range(self.copies)]
        w = self.base.width
        return [_pack([(parts[i][v], w) for i in range(self.copies)]) for v in range(self.n)]

    def encode_pair(self, u: int, v: int, seed: int) -> tuple[int, int]:
        w = self.base.width
        fu, fv = [], []
        for i in range(self.copies):
            bu, bv = self.base.encode_pair(u, v, derive_seed(seed, "copy", i))
            fu.append((bu, w))
            fv.append((bv, w))
        return _pack(fu), _pack(fv)

    def decode(self, bx: int, by: int) -> int:
        w = self.base.width
        votes = 0
        for i in range(self.copies):
            cx = bx >> (i * w) & ((1 << w) - 1)
            cy = by >> (i * w) & ((1 << w) - 1)
            votes += self.base.decode(cx, cy)
        return int(2 * votes > self.copies)

    def decode_matrix(self, labels: list[int]):
        w = self.base.width
        mask = (1 << w) - 1
        total = None
        for i in range(self.copies):
            sub = [l >> (i * w) & mask for l in labels]
            m = self.base.decode_matrix(sub)
            if m is None:
                return None
            m = m.astype(np.int32)
            total = m if total is None else total + m
        return (2 * total > self.copies).astype(np.int8)


def boost(sch: SketchScheme, delta_target: float) -> SketchScheme:
    return BoostedScheme(sch, delta_target)


def boost_exact(sch: SketchScheme, delta_target: float) -> SketchScheme:
    """Boost with the copy count sized by the exact binomial tail, so the
    per-pair error target genuinely holds for base error `sch.delta`."""
    return BoostedScheme(sch, delta_target,
                         copies=exact_majority_copies(delta_target, sch.delta))


# ---------------------------------------------------------------------------
# Arboricity: the classic parent-pointer equality scheme and its Bloom-filter
# sketch of size O(alpha).
# ---------------------------------------------------------------------------

def _arboricity_walker(sx, sy, eq) -> int:
    # slot 0 is the vertex's own id, the rest are its forest parents
    for j in range(1, sy.arity):
        if eq(sx.slot0, sy.slot0 + j):
            return 1
    for i in range(1, sx.arity):
        if eq(sx.slot0 + i, sy.slot0):
            return 1
    return 0


register_walker("arboricity", lambda spec: _arboricity_walker)


def arboricity_scheme(g: Graph) -> EqualityScheme:
    """Equality labels (self id, then one parent id per forest)."""
    fp = forest_partition(g)
    labels = []
    for v in range(g.n):
        parents = tuple(f[v] for f in fp.parents if f[v] is not None)
        labels.append(LabelNode(codes=(v,) + parents))
    return EqualityScheme(labels, _arboricity_walker,
                          decoder_spec={"name": "arboricity"}, name="arboricity")


class ArboricitySketch(SketchScheme):
    """Bloom-filter sketch for arboricity-alpha graphs.

    Layout [r(x)][bloom bits]: r(x) ~ [6 alpha]; bloom marks the hashes of
    the parent ids.  Adjacent pairs decode 1 with probability 1 (one-sided);
    non-adjacent error at most 2 alpha / (6 alpha) = 1/3.
    """

    def __init__(self, g: Graph):
        self.g = g
        self.n = g.n
        fp = forest_partition(g)
        self.alpha = max(fp.num_forests, 1)
        self._parents = [
            [f[v] for f in fp.parents if f[v] is not None] for v in range(g.n)
        ]
        self.buckets = 6 * self.alpha
        self.r_bits = _bits_for(self.buckets)
        self.width = self.r_bits + self.buckets
        self.delta = 1 / 3
        self._r_cache: dict[int, np.ndarray] = {}

    def _r_array(self, seed: int) -> np.ndarray:
        arr = self._r_cache.get(seed)
        if arr is None:
            gen = np.random.default_rng(derive_seed(seed, "arb-r"))
            arr = gen.integers(0, self.buckets, size=self.n)
            if len(self._r_cache) > 8:
                self._r_cache.clear()
            self._r_cache[seed] = arr
        return arr

    def _encode_one(self, v: int, r) -> int:
        bloom = 0
        for p in self._parents[v]:
            bloom |= 1 << int(r[p])
        return int(r[v]) | bloom << self.r_bits

    def encode(self, seed: int) -> list[int]:
        r = self._r_array(seed)
        return [self._encode_one(v, r) for v in range(self.n)]

    def encode_pair(self, u: int, v: int, seed: int) -> tuple[int, int]:
        r = self._r_array(seed)
        return self._encode_one(u, r), self._encode_one(v, r)

    def decode(self, bx: int, by: int) -> int:
        rx = bx & ((1 << self.r_bits) - 1)
        ry = by & ((1 << self.r_bits) - 1)
        bloom_x = bx >> self.r_bits
        bloom_y = by >> self.r_bits
        return int(bool(bloom_x >> ry & 1 or bloom_y >> rx & 1))

    def decode_matrix(self, labels: list[int]):
        r = np.array([l & ((1 << self.r_bits) - 1) for l in labels], dtype=np.int64)
        bloom = np.array([l >> self.r_bits for l in labels], dtype=np.int64)
        hit = (bloom[:, None] >> r[None, :]) & 1
        return (hit | hit.T).astype(np.int8)


def arboricity_sketch(g: Graph) -> ArboricitySketch:
    return ArboricitySketch(g)


# ---------------------------------------------------------------------------
# Derandomization.
# ---------------------------------------------------------------------------

@dataclass
class DeterministicLabeling:
    labels: tuple[int, ...]
    width: int
    decode: Callable[[int, int], int]
    attempts: int = 1

    def check_exact(self, g: Graph) -> bool:
        return all(
            self.decode(self.labels[u], self.labels[v]) == int(g.has_edge(u, v))
            for u in range(g.n)
            for v in range(u + 1, g.n)
        )


class DerandomizationError(RuntimeError):
    """The sampled scheme kept violating its error contract."""


def count_errors(sch: SketchScheme, labels: list[int], g: Graph) -> int:
    mat = sch.decode_matrix(labels)
    if mat is not None:
        adj = np.zeros((g.n, g.n), dtype=np.int8)
        for u, v in g.edges():
            adj[u, v] = adj[v, u] = 1
        diff = mat != adj
        np.fill_diagonal(diff, False)
        return int(diff.sum()) // 2
    errs = 0
    for u in range(g.n):
        for v in range(u + 1, g.n):
            if sch.decode(labels[u], labels[v]) != int(g.has_edge(u, v)):
                errs += 1
    return errs


def derandomize(sch: SketchScheme, g: Graph, seed: int,
                max_retries: int = 50) -> DeterministicLabeling:
    """Boost to true error 1/n^3, sample, verify all pairs, retry on failure.

    A sample is fully correct with probability at least 1 - 1/n, so a few
    retries suffice; exhausting them signals a broken error contract.  The
    majority here is sized by the exact binomial tail, not the asymptotic
    copy-count formula, so the 1/n^3 target actually holds.
    """
    n = max(g.n, 2)
    boosted = boost_exact(sch, 1 / n**3)
    for attempt in range(1, max_retries + 1):
        labels = boosted.encode(derive_seed(seed, "derand", attempt))
        if count_errors(boosted, labels, g) == 0:
            return DeterministicLabeling(tuple(labels), boosted.width,
                                         boosted.decode, attempts=attempt)
    raise DerandomizationError(
        f"no correct labeling in {max_retries} tries; scheme violates delta")


def naive_derandomize(scheme: EqualityScheme) -> DeterministicLabeling:
    """Write each canonically-renumbered code verbatim: zero error.

    Label width is s + k*ceil(log2(#distinct codes)); when codes are vertex
    ids this is the s + k*ceil(log n) of the naive bound.
    """
    canon = scheme.canonical_code_map()
    value_width = _bits_for(max(len(canon), 2))
    table: list = []
    index: dict = {}
    for sh in scheme.shapes:
        if sh not in index:
            index[sh] = len(table)
            table.append(sh)
    shape_bits = _bits_for(len(table))
    width = shape_bits + scheme.k * value_width

    def encode_one(v: int) -> int:
        fields = [(index[scheme.shapes[v]], shape_bits)]
        for c in scheme.codes[v]:
            fields.append((canon[c], value_width))
        return _pack(fields)

    def arity(shape) -> int:
        return shape.arity + sum(arity(c) for c in shape.children)

    def parse(bits: int):
        shape = table[bits & ((1 << shape_bits) - 1)]
        rest = bits >> shape_bits
        vals = []
        mask = (1 << value_width) - 1
        for _ in range(arity(shape)):
            vals.append(rest & mask)
            rest >>= value_width
        return shape, vals

    def decode(bx: int, by: int) -> int:
        sx, vx = parse(bx)
        sy, vy = parse(by)
        return scheme.walker(sx, sy, lambda i, j: vx[i] == vy[j])

    return DeterministicLabeling(tuple(encode_one(v) for v in range(scheme.n)),
                                 width, decode)


def naive_label_width(scheme: EqualityScheme) -> tuple[int, int, int]:
    """(s, k, per-code bits) of the naive derandomization."""
    canon = scheme.canonical_code_map()
    return scheme.s, scheme.k, _bits_for(max(len(canon), 2))


# ---------------------------------------------------------------------------
# Monte-Carlo error evaluation.
# ---------------------------------------------------------------------------

def wilson_interval(errors: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    p = errors / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


@dataclass
class ErrorEstimate:
    errors: int
    trials: int

    @property
    def rate(self) -> float:
        return self.errors / self.trials if self.trials else 0.0

    def wilson(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.errors, self.trials, z)


@dataclass
class ErrorReport:
    adjacent: ErrorEstimate
    nonadjacent: ErrorEstimate

    @property
    def overall(self) -> ErrorEstimate:
        return ErrorEstimate(self.adjacent.errors + self.nonadjacent.errors,
                             self.adjacent.trials + self.nonadjacent.trials)


def evaluate_error(sch: SketchScheme, g: Graph, trials: int, seed: int,
                   pairs: str = "all", jobs: int = 1) -> ErrorReport:
    """Per-pair error estimate with a fresh encoding per trial.

    pairs: 'all' samples uniformly over vertex pairs, 'adjacent' /
    'nonadjacent' restricts the pair class.  `jobs` splits trials into
    deterministic per-block seed streams (results independent of jobs).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if pairs not in ("all", "adjacent", "nonadjacent"):
        raise ValueError("pairs must be all|adjacent|nonadjacent")
    edges = list(g.edges())
    if pairs == "adjacent" and not edges:
        raise ValueError("graph has no edges")

    def run_range(lo: int, hi: int) -> tuple[int, int, int, int]:
        # trial t derives its own streams from the global index, so the
        # result does not depend on how trials are split into blocks
        err_adj = n_adj = err_non = n_non = 0
        for t in range(lo, hi):
            rng = rng_for(seed, "eval-pair", t)
            if pairs == "adjacent":
                u, v = edges[rng.randrange(len(edges))]
            elif pairs == "nonadjacent":
                while True:
                    u = rng.randrange(g.n)
                    v = rng.randrange(g.n)
                    if u != v and not g.has_edge(u, v):
                        break
            else:
                while True:
                    u = rng.randrange(g.n)
                    v = rng.randrange(g.n)
                    if u != v:
                        break
            bu, bv = sch.encode_pair(u, v, derive_seed(seed, "eval-enc", t))
            wrong = sch.decode(bu, bv) != int(g.has_edge(u, v))
            if g.has_edge(u, v):
                n_adj += 1
                err_adj += wrong
            else:
                n_non += 1
                err_non += wrong
        return err_adj, n_adj, err_non, n_non

    jobs = max(1, jobs)
    bounds = [trials * b // jobs for b in range(jobs + 1)]
    if jobs == 1:
        results = [run_range(0, trials)]
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run_range, bounds[:-1], bounds[1:]))
    ea = sum(r[0] for r in results)
    na = sum(r[1] for r in results)
    en = sum(r[2] for r in results)
    nn = sum(r[3] for r in results)
    return ErrorReport(ErrorEstimate(ea, na), ErrorEstimate(en, nn))


# ---------------------------------------------------------------------------
# PUG view.
# ---------------------------------------------------------------------------

class PugView:
    """The sketch's decoder read as the edge relation of a universal graph
    on node set {0,1}^c, with phi(seed) the sampled vertex embedding."""

    MAX_WIDTH = 24

    def __init__(self, sch: SketchScheme):
        if sch.width > self.MAX_WIDTH:
            raise ValueError(f"width {sch.width} exceeds {self.MAX_WIDTH}")
        self.sketch = sch
        self.width = sch.width
        self.num_nodes = 1 << sch.width

    def adjacent(self, a: int, b: int) -> int:
        return self.sketch.decode(a, b)

    def phi(self, seed: int) -> list[int]:
        return self.sketch.encode(seed)

    def edge_table(self) -> list[list[int]]:
        if self.width > 12:
            raise ValueError("table materialization capped at width 12")
        return [[self.adjacent(a, b) for b in range(self.num_nodes)]
                for a in range(self.num_nodes)]


def export_pug(sch: SketchScheme) -> PugView:
    return PugView(sch)
