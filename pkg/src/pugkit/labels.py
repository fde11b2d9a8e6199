"""Equality-based labels and their decoders.

A label is a tree of tuples, each tuple holding a few prefix bits (readable
by the decoder) and a few equality codes (readable only through equality
comparisons).  A scheme bundles one label per vertex with a walker that
decides adjacency from the two label shapes and an equality oracle over
code slots; the walker never sees raw code values, which is what makes the
one-sided compression argument go through.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

EqOracle = Callable[[int, int], bool]


class SchemeError(ValueError):
    """Raised when an input violates a scheme's family contract."""


@dataclass(frozen=True)
class LabelNode:
    """One tuple of a label: prefix bits, equality codes, child tuples."""

    tag: tuple[int, ...] = ()
    codes: tuple[int, ...] = ()
    children: tuple["LabelNode", ...] = ()

    def walk(self) -> Iterator["LabelNode"]:
        yield self
        for c in self.children:
            yield from c.walk()


@dataclass(frozen=True)
class ShapeNode:
    """A label's skeleton: tags and arities with preorder slot offsets."""

    tag: tuple[int, ...]
    arity: int
    children: tuple["ShapeNode", ...]
    slot0: int

    def tag_int(self) -> int:
        v = 0
        for b in self.tag:
            v = v << 1 | b
        return v


def shape_of(label: LabelNode) -> ShapeNode:
    counter = [0]

    def build(node: LabelNode) -> ShapeNode:
        slot0 = counter[0]
        counter[0] += len(node.codes)
        kids = tuple(build(c) for c in node.children)
        return ShapeNode(node.tag, len(node.codes), kids, slot0)

    return build(label)


def flat_codes(label: LabelNode) -> tuple[int, ...]:
    out: list[int] = []
    for node in label.walk():
        out.extend(node.codes)
    return tuple(out)


def prefix_bits(label: LabelNode) -> tuple[int, ...]:
    out: list[int] = []
    for node in label.walk():
        out.extend(node.tag)
    return tuple(out)


Walker = Callable[[ShapeNode, ShapeNode, EqOracle], int]


class EqualityScheme:
    """An equality-based labeling of one graph: labels plus a walker.

    `decoder_spec` is a JSON-able description sufficient to rebuild the
    walker (see `walker_registry`); schemes built only for in-process use
    may leave it None.
    """

    def __init__(self, labels: Sequence[LabelNode], walker: Walker,
                 decoder_spec: dict | None = None, name: str = "scheme"):
        self.name = name
        self.labels = tuple(labels)
        self.walker = walker
        self.decoder_spec = decoder_spec
        self.shapes = tuple(shape_of(l) for l in self.labels)
        self.codes = tuple(flat_codes(l) for l in self.labels)

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def k(self) -> int:
        """Max number of equality codes over all labels."""
        return max((len(c) for c in self.codes), default=0)

    @property
    def s(self) -> int:
        """Max number of prefix bits over all labels."""
        return max((len(prefix_bits(l)) for l in self.labels), default=0)

    def prefix_len(self, v: int) -> int:
        return len(prefix_bits(self.labels[v]))

    def code_count(self, v: int) -> int:
        return len(self.codes[v])

    def decode(self, u: int, v: int) -> int:
        cu, cv = self.codes[u], self.codes[v]

        def eq(i: int, j: int) -> bool:
            return cu[i] == cv[j]

        return self.walker(self.shapes[u], self.shapes[v], eq)

    def decode_with_values(self, u: int, v: int,
                           vals_u: Sequence[int], vals_v: Sequence[int]) -> int:
        """Decode with substituted code values (used after compression)."""

        def eq(i: int, j: int) -> bool:
            return vals_u[i] == vals_v[j]

        return self.walker(self.shapes[u], self.shapes[v], eq)

    def check_exact(self, adjacency: Callable[[int, int], bool]) -> bool:
        """Exhaustive all-pairs check against an adjacency oracle."""
        for u in range(self.n):
            for v in range(u + 1, self.n):
                if self.decode(u, v) != int(adjacency(u, v)):
                    return False
        return True

    def canonical_code_map(self) -> dict[int, int]:
        """Renumber distinct code values to [0, #distinct), by sorted value."""
        distinct = sorted({c for codes in self.codes for c in codes})
        return {val: i for i, val in enumerate(distinct)}


def pair_eq_matrix(scheme: EqualityScheme, u: int, v: int) -> list[list[bool]]:
    """The full equality matrix Q_{u,v} (row = u's slots, column = v's)."""
    cu, cv = scheme.codes[u], scheme.codes[v]
    return [[a == b for b in cv] for a in cu]


# ---------------------------------------------------------------------------
# Walker registry: decoder_spec -> walker, for rebuilding decoders from
# files.  Family modules register their walkers at import time.
# ---------------------------------------------------------------------------

_WALKER_BUILDERS: dict[str, Callable[[dict], Walker]] = {}


def register_walker(name: str, builder: Callable[[dict], Walker]) -> None:
    _WALKER_BUILDERS[name] = builder


def build_walker(spec: dict) -> Walker:
    name = spec.get("name")
    if name not in _WALKER_BUILDERS:
        raise KeyError(f"unknown decoder spec {name!r}")
    return _WALKER_BUILDERS[name](spec)


# ---------------------------------------------------------------------------
# Label file format.
#
#   labels <graph-name> s=<s> k=<k> width=<c>
#   v <id> <prefix-bits> <code,code,...>
#
# The prefix-bits field serializes the label tree: tuples are separated by
# '.', children delimited by '(' ')':  tag-bits[(child)(child)...]
# An empty tag is '-'.  Codes are the preorder-flattened code list.
# ---------------------------------------------------------------------------

def _node_to_str(node: LabelNode) -> str:
    tag = "".join(map(str, node.tag)) or "-"
    kids = "".join(f"({_node_to_str(c)})" for c in node.children)
    return f"{tag}:{len(node.codes)}{kids}"


def _node_from_str(s: str, codes: list[int]) -> tuple[LabelNode, str]:
    tag_s, rest = s.split(":", 1)
    tag = () if tag_s == "-" else tuple(int(b) for b in tag_s)
    num = ""
    while rest and rest[0].isdigit():
        num += rest[0]
        rest = rest[1:]
    arity = int(num)
    own = tuple(codes[:arity])
    del codes[:arity]
    kids = []
    while rest.startswith("("):
        depth = 0
        for i, ch in enumerate(rest):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0:
                    child, leftover = _node_from_str(rest[1:i], codes)
                    if leftover:
                        raise ValueError("trailing shape text")
                    kids.append(child)
                    rest = rest[i + 1:]
                    break
        else:
            raise ValueError("unbalanced shape parentheses")
    return LabelNode(tag, own, tuple(kids)), rest


def shape_to_str(shape: ShapeNode) -> str:
    tag = "".join(map(str, shape.tag)) or "-"
    kids = "".join(f"({shape_to_str(c)})" for c in shape.children)
    return f"{tag}:{shape.arity}{kids}"


def shape_from_str(s: str) -> ShapeNode:
    node, rest = _node_from_str(s, [0] * s.count(":") * 64)
    if rest:
        raise ValueError("trailing shape text")

    def convert(n: LabelNode, counter: list[int]) -> ShapeNode:
        slot0 = counter[0]
        counter[0] += len(n.codes)
        kids = tuple(convert(c, counter) for c in n.children)
        return ShapeNode(n.tag, len(n.codes), kids, slot0)

    return convert(node, [0])


def write_label_file(scheme: EqualityScheme, graph_name: str) -> str:
    lines = [f"labels {graph_name} s={scheme.s} k={scheme.k} width={scheme.s + scheme.k}"]
    for v, label in enumerate(scheme.labels):
        codes = ",".join(map(str, flat_codes(label))) or "-"
        lines.append(f"v {v} {_node_to_str(label)} {codes}")
    return "\n".join(lines) + "\n"


def parse_label_file(text: str) -> tuple[list[LabelNode], str, dict]:
    """Returns (labels, graph-name, header-fields)."""
    labels: dict[int, LabelNode] = {}
    name = None
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if name is None:
            if parts[0] != "labels" or len(parts) < 2:
                raise ValueError(f"line {lineno}: bad label header")
            name = parts[1]
            for f in parts[2:]:
                key, _, val = f.partition("=")
                fields[key] = int(val)
            continue
        if parts[0] != "v" or len(parts) != 4:
            raise ValueError(f"line {lineno}: expected 'v <id> <shape> <codes>'")
        vid = int(parts[1])
        codes = [] if parts[3] == "-" else [int(c) for c in parts[3].split(",")]
        node, leftover = _node_from_str(parts[2], codes)
        if leftover or codes:
            raise ValueError(f"line {lineno}: malformed label")
        labels[vid] = node
    if name is None:
        raise ValueError("empty label file")
    ordered = [labels[i] for i in range(len(labels))]
    return ordered, name, fields
