"""Command-line front end.

Exit codes: 0 success, 2 family-contract violation (SchemeError and
friends), 3 format error.  Every randomized command requires an explicit
--seed; there is no ambient entropy.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bipartite, generators, geometric, products, protocols, sketch, structure, twinwidth
from .combinators import DTNode
from .graphs import ColoredBipartiteGraph, Graph, GraphFormatError, parse_graph, write_graph
from .labels import (
    EqualityScheme,
    LabelNode,
    SchemeError,
    build_walker,
    parse_label_file,
    shape_of,
    write_label_file,
)

EXIT_OK = 0
EXIT_CONTRACT = 2
EXIT_FORMAT = 3


class CliError(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _read_graph(path: str):
    try:
        with open(path) as fh:
            return parse_graph(fh.read())
    except (OSError, GraphFormatError) as e:
        raise CliError(EXIT_FORMAT, f"cannot read graph {path}: {e}")


def _write_out(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    params = {}
    for key in ("k", "q", "s", "p", "d", "n", "a", "b", "ny", "seed"):
        val = getattr(args, key, None)
        if val is not None:
            params[key] = val
    if args.prob is not None:
        params["p"] = args.prob
    if args.sizes:
        params["sizes"] = [int(t) for t in args.sizes.split(",")]
    if args.profile:
        params["profile"] = [int(t) for t in args.profile.split(",")]
    try:
        g = generators.generate(args.family, **params)
    except (KeyError, ValueError) as e:
        raise CliError(EXIT_FORMAT, f"bad generator parameters: {e}")
    name = args.name or args.family
    _write_out(write_graph(g, name), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# label schemes
# ---------------------------------------------------------------------------

def _build_label_scheme(g, args) -> EqualityScheme:
    scheme = args.scheme
    if scheme == "equivalence":
        _need(g, Graph, scheme)
        return bipartite.equivalence_labels(g)
    if scheme == "bip-equivalence":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.bipartite_equivalence_labels(g)
    if scheme == "chain-graph":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.chain_graph_labels(g, k=_req(args, "k"))
    if scheme == "arboricity":
        _need(g, Graph, scheme)
        return sketch.arboricity_scheme(g)
    if scheme == "tp-free":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.tp_free_labels(g, p=_req(args, "p"), q=_req(args, "q"))
    if scheme == "fpp":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.fpp_labels(g, p=_req(args, "p"), q=_req(args, "q"))
    if scheme == "fstar":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.fstar_labels(g, p=_req(args, "p"), q=_req(args, "q"))
    if scheme == "p7":
        _need(g, ColoredBipartiteGraph, scheme)
        return bipartite.p7_labels(g, c=_req(args, "c"))
    if scheme == "interval":
        _need(g, Graph, scheme)
        kind, items, _ = _read_realization(args)
        if kind != "intervals":
            raise CliError(EXIT_FORMAT, "interval scheme needs an intervals file")
        return geometric.interval_scheme(g, items, k=_req(args, "k"))
    if scheme == "permutation":
        _need(g, Graph, scheme)
        kind, items, _ = _read_realization(args)
        if kind != "points":
            raise CliError(EXIT_FORMAT, "permutation scheme needs a points file")
        return geometric.permutation_labels(g, items, k=_req(args, "k"))
    raise CliError(EXIT_FORMAT, f"unknown label scheme {scheme!r}")


def _need(g, cls, scheme):
    if not isinstance(g, cls):
        kind = "graph" if cls is Graph else "bigraph"
        raise CliError(EXIT_CONTRACT, f"scheme {scheme} needs a {kind} input")


def _req(args, key):
    val = getattr(args, key, None)
    if val is None:
        raise CliError(EXIT_FORMAT, f"scheme {args.scheme} requires --{key}")
    return val


def _read_realization(args):
    if not args.realization:
        raise CliError(EXIT_FORMAT, "missing --realization file")
    try:
        with open(args.realization) as fh:
            return geometric.parse_realization(fh.read())
    except (OSError, GraphFormatError) as e:
        raise CliError(EXIT_FORMAT, f"cannot read realization: {e}")


def write_decoder_file(scheme: EqualityScheme) -> str:
    """Decoder file grammar:

    decoder tree <json decoder-spec>
        shape <idx> <shape-string>       (one per distinct label shape)
    decoder table s=<s> k=<k>            (small schemes only)
        shape <idx> <shape-string>
        t <sx> <sy> <Q-bits-rowmajor> <out>
    """
    if scheme.decoder_spec is None:
        raise CliError(EXIT_CONTRACT, "scheme decoder is not serializable")
    from .labels import shape_to_str

    shapes = []
    index = {}
    for sh in scheme.shapes:
        if sh not in index:
            index[sh] = len(shapes)
            shapes.append(sh)
    lines = []
    if scheme.s <= 4 and scheme.k <= 4:
        lines.append(f"decoder table s={scheme.s} k={scheme.k}")
        for i, sh in enumerate(shapes):
            lines.append(f"shape {i} {shape_to_str(sh)}")
        walker = scheme.walker
        for xi, sx in enumerate(shapes):
            for yi, sy in enumerate(shapes):
                ax = _shape_arity(sx)
                ay = _shape_arity(sy)
                for mask in range(1 << (ax * ay)):
                    def eq(i, j, mask=mask, ay=ay):
                        return bool(mask >> (i * ay + j) & 1)

                    try:
                        out = walker(sx, sy, eq)
                    except SchemeError:
                        continue
                    bits = format(mask, f"0{max(ax * ay, 1)}b") if ax * ay else "-"
                    lines.append(f"t {xi} {yi} {bits} {out}")
    else:
        lines.append(f"decoder tree {json.dumps(scheme.decoder_spec)}")
        for i, sh in enumerate(shapes):
            lines.append(f"shape {i} {shape_to_str(sh)}")
    return "\n".join(lines) + "\n"


def _shape_arity(sh) -> int:
    return sh.arity + sum(_shape_arity(c) for c in sh.children)


def parse_decoder_file(text: str):
    """Returns a decode(label_x, label_y) callable over LabelNodes."""
    from .labels import flat_codes, shape_from_str

    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise CliError(EXIT_FORMAT, "empty decoder file")
    head = lines[0].split(None, 2)
    shapes = {}
    if head[:2] == ["decoder", "tree"]:
        spec = json.loads(lines[0].split(None, 2)[2])
        try:
            walker = build_walker(spec)
        except KeyError as e:
            raise CliError(EXIT_FORMAT, f"unknown decoder spec: {e}")

        def decode(lx: LabelNode, ly: LabelNode) -> int:
            cx, cy = flat_codes(lx), flat_codes(ly)
            return walker(shape_of(lx), shape_of(ly),
                          lambda i, j: cx[i] == cy[j])

        return decode
    if head[:2] == ["decoder", "table"]:
        table = {}
        for line in lines[1:]:
            parts = line.split()
            if parts[0] == "shape":
                shapes[shape_from_str(parts[2])] = int(parts[1])
            elif parts[0] == "t":
                table[(int(parts[1]), int(parts[2]), parts[3])] = int(parts[4])
            else:
                raise CliError(EXIT_FORMAT, f"bad decoder line {line!r}")

        def decode(lx: LabelNode, ly: LabelNode) -> int:
            sx, sy = shape_of(lx), shape_of(ly)
            if sx not in shapes or sy not in shapes:
                raise CliError(EXIT_CONTRACT, "label shape unknown to decoder")
            cx, cy = flat_codes(lx), flat_codes(ly)
            ay = len(cy)
            mask = 0
            for i, a in enumerate(cx):
                for j, b in enumerate(cy):
                    if a == b:
                        mask |= 1 << (i * ay + j)
            bits = format(mask, f"0{max(len(cx) * ay, 1)}b") if cx and cy else "-"
            key = (shapes[sx], shapes[sy], bits)
            if key not in table:
                raise CliError(EXIT_CONTRACT, "pair missing from decoder table")
            return table[key]

        return decode
    raise CliError(EXIT_FORMAT, "decoder file must start with 'decoder tree|table'")


def cmd_label(args) -> int:
    g, gname = _read_graph(args.graph)
    scheme = _build_label_scheme(g, args)
    _write_out(write_label_file(scheme, gname), args.out)
    if args.decoder_out:
        with open(args.decoder_out, "w") as fh:
            fh.write(write_decoder_file(scheme))
    from .combinators import tuple_count
    from .sketch import naive_label_width

    s, k, w = naive_label_width(scheme)
    tuples = max(tuple_count(l) for l in scheme.labels)
    print(f"scheme={scheme.name} s={scheme.s} k={scheme.k} "
          f"naive-bits={scheme.s + scheme.k * w} tuples={tuples}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# sketches
# ---------------------------------------------------------------------------

def _build_sketch(g, args):
    name = args.scheme
    if name == "arboricity-bloom":
        _need(g, Graph, name)
        sk = sketch.arboricity_sketch(g)
    elif name.startswith("compress:"):
        args.scheme = name.split(":", 1)[1]
        base = _build_label_scheme(g, args)
        args.scheme = name
        sk = sketch.compress_equality_scheme(base)
    elif name == "product-adjacency":
        _need(g, Graph, name)
        raise CliError(EXIT_FORMAT,
                       "product-adjacency works on factor lists; use --factors")
    else:
        raise CliError(EXIT_FORMAT, f"unknown sketch scheme {name!r}")
    if args.delta is not None:
        sk = sketch.boost(sk, args.delta)
    return sk


def write_sketch_file(labels, width: int, gname: str) -> str:
    digits = max((width + 3) // 4, 1)
    lines = [f"labels {gname} s=0 k=0 width={width}"]
    for v, bits in enumerate(labels):
        lines.append(f"v {v} {bits:0{digits}x}")
    return "\n".join(lines) + "\n"


def parse_sketch_file(text: str):
    lines = [l.split("#", 1)[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    head = lines[0].split()
    if head[0] != "labels":
        raise CliError(EXIT_FORMAT, "bad sketch header")
    width = int([f for f in head if f.startswith("width=")][0].split("=")[1])
    out = {}
    for line in lines[1:]:
        parts = line.split()
        if parts[0] != "v" or len(parts) != 3:
            raise CliError(EXIT_FORMAT, f"bad sketch line {line!r}")
        out[int(parts[1])] = int(parts[2], 16)
    return [out[i] for i in range(len(out))], width


def cmd_sketch(args) -> int:
    g, gname = _read_graph(args.graph)
    sk = _build_sketch(g, args)
    labels = sk.encode(args.seed)
    _write_out(write_sketch_file(labels, sk.width, gname), args.out)
    print(f"sketch={args.scheme} width={sk.width} delta<={sk.delta:g}",
          file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# query / eval / derand
# ---------------------------------------------------------------------------

def cmd_query(args) -> int:
    try:
        with open(args.labels) as fh:
            labels, _, fields = parse_label_file(fh.read())
    except (OSError, ValueError) as e:
        raise CliError(EXIT_FORMAT, f"cannot read labels: {e}")
    if not args.decoder:
        raise CliError(EXIT_FORMAT, "query needs --decoder")
    with open(args.decoder) as fh:
        decode = parse_decoder_file(fh.read())
    u, v = args.u, args.v
    if not (0 <= u < len(labels) and 0 <= v < len(labels)):
        raise CliError(EXIT_FORMAT, "vertex id out of range")
    print(f"{u} {v} {decode(labels[u], labels[v])}")
    return EXIT_OK


def cmd_eval(args) -> int:
    g, _ = _read_graph(args.graph)
    sk = _build_sketch(g, args)
    rep = sketch.evaluate_error(sk, g, trials=args.trials, seed=args.seed,
                                pairs=args.pairs, jobs=args.jobs)
    print("class trials errors rate wilson_lo wilson_hi")
    for label, est in (("adjacent", rep.adjacent), ("nonadjacent", rep.nonadjacent),
                       ("overall", rep.overall)):
        lo, hi = est.wilson()
        print(f"{label} {est.trials} {est.errors} {est.rate:.6f} {lo:.6f} {hi:.6f}")
    return EXIT_OK


def cmd_derand(args) -> int:
    g, gname = _read_graph(args.graph)
    if args.mode == "naive":
        base = _build_label_scheme(g, args)
        det = sketch.naive_derandomize(base)
    else:
        sk = _build_sketch(g, args)
        if not isinstance(g, Graph):
            raise CliError(EXIT_CONTRACT, "sampled derandomization needs a graph")
        try:
            det = sketch.derandomize(sk, g, seed=args.seed)
        except sketch.DerandomizationError as e:
            raise CliError(EXIT_CONTRACT, str(e))
    if isinstance(g, Graph) and not det.check_exact(g):
        raise CliError(EXIT_CONTRACT, "derandomized labels fail verification")
    _write_out(write_sketch_file(list(det.labels), det.width, gname), args.out)
    print(f"derand mode={args.mode} width={det.width} attempts={det.attempts}",
          file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify / chain-number / twinwidth
# ---------------------------------------------------------------------------

def cmd_verify(args) -> int:
    g, _ = _read_graph(args.graph)
    if args.kind == "twcert":
        _need(g, ColoredBipartiteGraph, "twcert")
        try:
            with open(args.file) as fh:
                cert, _ = twinwidth.parse_certificate(fh.read())
        except (OSError, SchemeError) as e:
            raise CliError(EXIT_FORMAT, f"cannot read certificate: {e}")
        reasons: list[str] = []
        ok, h = twinwidth.verify_certificate(g, cert, reasons=reasons)
        if ok:
            print(f"certificate accepted: {len(h)} quotient edges, "
                  f"q={cert.q} r={cert.r}")
            return EXIT_OK
        print("certificate rejected: " + "; ".join(reasons))
        return EXIT_CONTRACT
    if args.kind == "width-seq":
        _need(g, Graph, "width-seq")
        try:
            with open(args.file) as fh:
                seq = _parse_partition_seq(fh.read())
            width = twinwidth.verify_width(g, seq)
        except (OSError, SchemeError) as e:
            raise CliError(EXIT_CONTRACT, f"sequence invalid: {e}")
        print(f"sequence valid: width={width}")
        return EXIT_OK
    raise CliError(EXIT_FORMAT, f"unknown verify kind {args.kind!r}")


def _parse_partition_seq(text: str):
    seq = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not line.startswith("p "):
            raise SchemeError(f"bad partition line {line!r}")
        parts = [tuple(int(t) for t in blk.split(",")) for blk in line[2:].split("|")]
        seq.append(parts)
    return seq


def cmd_product_dist(args) -> int:
    """Distance-k sketch over the d-wise Cartesian power of the input
    graph; product vertices are addressed as comma-separated factor ids."""
    g, _ = _read_graph(args.graph)
    if not isinstance(g, Graph):
        raise CliError(EXIT_CONTRACT, "product sketches need a graph input")
    base = products.FiniteFamilyDistanceSketch([g], k=args.k)
    sk = products.ProductDistanceSketch([g] * args.d, base, k=args.k)
    labels = sk.encode(args.seed)
    print(f"product d={args.d} k={args.k} m={sk.m} t={sk.t} width={sk.width}")
    for pair in args.query or []:
        try:
            us, vs = pair.split(":")
            u = tuple(int(t) for t in us.split(","))
            v = tuple(int(t) for t in vs.split(","))
            ui, vi = sk.index[u], sk.index[v]
        except (ValueError, KeyError) as e:
            raise CliError(EXIT_FORMAT, f"bad product vertex address {pair!r}: {e}")
        out = sk.decode(labels[ui], labels[vi])
        print(f"{us} {vs} {'bot' if out == products.BOTTOM else out}")
    return EXIT_OK


def cmd_chain_number(args) -> int:
    g, _ = _read_graph(args.graph)
    if isinstance(g, ColoredBipartiteGraph):
        g = g.to_graph()
    res = structure.chain_number(g, cap=args.cap)
    rel = "=" if res.exact else ">="
    print(f"chain-number {rel} {res.value}")
    if res.witness:
        print(res.witness.serialize())
    return EXIT_OK


def cmd_twinwidth(args) -> int:
    g, _ = _read_graph(args.graph)
    if isinstance(g, ColoredBipartiteGraph):
        g = g.to_graph()
    if g.n > 8:
        raise CliError(EXIT_CONTRACT, "exact twin-width capped at n <= 8")
    width, seq = twinwidth.twin_width_exact(g)
    print(f"twin-width = {width}")
    for parts in seq:
        print("p " + "|".join(",".join(map(str, sorted(p))) for p in parts))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pugkit",
                                 description="adjacency sketches and equality-based "
                                             "labeling schemes")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a named graph family member")
    g.add_argument("family")
    for flag in ("k", "q", "s", "p", "d", "n", "a", "b", "ny", "seed", "c"):
        g.add_argument(f"--{flag}", type=int)
    g.add_argument("--prob", type=float)
    g.add_argument("--sizes")
    g.add_argument("--profile")
    g.add_argument("--name")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    def add_scheme_flags(p, with_seed=False):
        p.add_argument("--scheme", required=True)
        for flag in ("k", "p", "q", "c"):
            p.add_argument(f"--{flag}", type=int)
        p.add_argument("--realization")
        p.add_argument("--delta", type=float)
        if with_seed:
            p.add_argument("--seed", type=int, required=True)

    l = sub.add_parser("label", help="build deterministic equality labels")
    l.add_argument("graph")
    add_scheme_flags(l)
    l.add_argument("--out")
    l.add_argument("--decoder-out")
    l.set_defaults(func=cmd_label)

    s = sub.add_parser("sketch", help="sample a randomized sketch")
    s.add_argument("graph")
    add_scheme_flags(s, with_seed=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sketch)

    q = sub.add_parser("query", help="decode one pair from a label file")
    q.add_argument("labels")
    q.add_argument("u", type=int)
    q.add_argument("v", type=int)
    q.add_argument("--decoder", required=True)
    q.set_defaults(func=cmd_query)

    e = sub.add_parser("eval", help="Monte-Carlo error estimation")
    e.add_argument("graph")
    add_scheme_flags(e, with_seed=True)
    e.add_argument("--trials", type=int, required=True)
    e.add_argument("--pairs", choices=("all", "adjacent", "nonadjacent"),
                   default="all")
    e.add_argument("--jobs", type=int, default=1)
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("derand", help="derandomize a sketch into labels")
    d.add_argument("graph")
    add_scheme_flags(d, with_seed=True)
    d.add_argument("--mode", choices=("sampled", "naive"), default="sampled")
    d.add_argument("--out")
    d.set_defaults(func=cmd_derand)

    v = sub.add_parser("verify", help="verify certificates and sequences")
    v.add_argument("kind", choices=("twcert", "width-seq"))
    v.add_argument("graph")
    v.add_argument("file")
    v.set_defaults(func=cmd_verify)

    pd = sub.add_parser("product-dist",
                        help="distance-k sketch over a Cartesian power")
    pd.add_argument("graph")
    pd.add_argument("--d", type=int, required=True)
    pd.add_argument("--k", type=int, required=True)
    pd.add_argument("--seed", type=int, required=True)
    pd.add_argument("--query", action="append",
                    help="pair as u1,u2,...:v1,v2,... (repeatable)")
    pd.set_defaults(func=cmd_product_dist)

    c = sub.add_parser("chain-number", help="bounded exhaustive chain number")
    c.add_argument("graph")
    c.add_argument("--cap", type=int, default=6)
    c.set_defaults(func=cmd_chain_number)

    t = sub.add_parser("twinwidth", help="exact twin-width for tiny graphs")
    t.add_argument("graph")
    t.set_defaults(func=cmd_twinwidth)

    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except SchemeError as e:
        print(f"family contract violation: {e}", file=sys.stderr)
        return EXIT_CONTRACT
    except (GraphFormatError, ValueError) as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
