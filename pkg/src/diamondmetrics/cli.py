"""Command-line interface.

    diamondmetrics gen diamond --level 2 --out d2.json
    diamondmetrics embed --in w1.json --method wdiamond --out w1.csv
    diamondmetrics verify entropy --level 4
    diamondmetrics mindist --source c4.json --target c4.json

Exit codes: 0 ok, 1 violation found, 2 bad input, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import io as dio
from . import verify
from .composite import glue, l1_product
from .embeddings import (Embedding, dinfinity_phi, distortion, embed_weighted_diamond,
                         frechet_embedding, glue_embed, line_embedding_of_path, polygon_embedding)
from .graphs import (build_binary_tree, build_cycle, build_diamond, build_path, build_weighted_diamond,
                     dinfinity_ball, dinfinity_interior, generate_series_parallel)
from .metric import REL_TOL, MetricSpace, shortest_path_metric
from .mindist import min_distortion

EXIT_OK, EXIT_VIOLATION, EXIT_BAD_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class BadInput(Exception):
    pass


def _eps_value(text: str, rational: bool):
    return Fraction(text) if rational else float(text)


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read graph JSON {path}: {exc}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _block(path_and_base: str):
    path, _, base = path_and_base.partition(":")
    obj = _load(path)
    g, _ = dio.graph_from_json(obj)
    return obj, g, int(base or 0)


def build_family(args) -> dict:
    fam = args.family
    rational = args.rational
    if fam == "tree":
        g = build_binary_tree(args.depth)
        return dio.graph_to_json(g, family=fam, params={"depth": args.depth})
    if fam == "diamond":
        g, s = build_diamond(args.level)
        return dio.graph_to_json(g, s, family=fam, params={"level": args.level})
    if fam == "wdiamond":
        eps = _eps_value(args.eps, rational)
        g, s = build_weighted_diamond(args.level, eps)
        return dio.graph_to_json(g, s, family=fam, params={"level": args.level, "eps": args.eps},
                                 rational=rational)
    if fam == "cycle":
        return dio.graph_to_json(build_cycle(args.n), family=fam, params={"n": args.n})
    if fam == "path":
        return dio.graph_to_json(build_path(args.n), family=fam, params={"n": args.n})
    if fam == "sp":
        if args.remove_mask:
            removal = [int(x) for x in args.remove_mask.split(",") if x]
        elif args.remove_prob is not None:
            removal = args.remove_prob
        else:
            removal = None
        g = generate_series_parallel(args.steps, removal, seed=args.seed)
        return dio.graph_to_json(g, family=fam, params={"steps": args.steps, "seed": args.seed,
                                                        "remove_prob": args.remove_prob,
                                                        "remove_mask": args.remove_mask})
    if fam == "dinfty":
        g, _ = dinfinity_ball(args.radius)
        return dio.graph_to_json(g, family=fam, params={"radius": args.radius})
    if fam == "glue":
        if not args.block:
            raise BadInput("glue needs at least one --block FILE[:BASE]")
        blocks, members = [], []
        for spec in args.block:
            obj, g, base = _block(spec)
            blocks.append((shortest_path_metric(g), base))
            members.append({"family": obj.get("family"), "params": obj.get("params"), "base": base,
                            "graph": {k: obj[k] for k in ("n", "edges", "labels") if k in obj}})
        lengths = [int(x) for x in args.path_lengths.split(",")] if args.path_lengths else []
        glued = glue(blocks, lengths)
        return dio.graph_to_json(glued.combined, family=fam,
                                 params={"path_lengths": lengths, "blocks": members})
    if fam == "l1prod":
        if not args.factor:
            raise BadInput("l1prod needs at least one --factor FILE")
        spaces = [shortest_path_metric(dio.graph_from_json(_load(p))[0]) for p in args.factor]
        prod = l1_product(spaces)
        return {"n": prod.n_points, "family": fam, "params": {"factors": args.factor},
                "labels": list(prod.labels),
                "metric": [[dio.encode_number(x) for x in row] for row in prod.dist]}
    raise BadInput(f"unknown family {fam}")


def cmd_gen(args) -> int:
    obj = build_family(args)
    if args.dot:
        if "edges" not in obj:
            raise BadInput("DOT export needs a graph family")
        g, _ = dio.graph_from_json(obj)
        _emit(dio.graph_to_dot(g), args.dot)
    _emit(dio.dumps(obj) + "\n", args.out)
    return EXIT_OK


def _block_embedding(member: dict, metric: MetricSpace, host: str) -> Embedding:
    if host == "linf":
        return frechet_embedding(metric)
    fam, params = member.get("family"), member.get("params") or {}
    if fam == "wdiamond":
        return embed_weighted_diamond(params["level"], float(params["eps"]))
    if fam == "path":
        return line_embedding_of_path(params["n"])
    if fam == "cycle":
        return polygon_embedding(params["n"])
    if fam == "dinfty":
        g, _ = dinfinity_ball(params["radius"])
        return dinfinity_phi(g)
    raise BadInput(f"no Euclidean block embedding for family {fam!r}; use --host linf")


def cmd_embed(args) -> int:
    obj = _load(args.input)
    g, _ = dio.graph_from_json(obj)
    fam = obj.get("family")
    params = obj.get("params") or {}
    method = args.method
    expected = {"wdiamond": "wdiamond", "glue": "glue", "dinfty-phi": "dinfty"}[method]
    if fam != expected:
        raise BadInput(f"method {method} needs a {expected} graph, got family {fam!r}")
    metric = shortest_path_metric(g)
    points = list(range(g.n_vertices))
    if method == "wdiamond":
        emb = embed_weighted_diamond(params["level"], float(params["eps"]))
    elif method == "dinfty-phi":
        emb = dinfinity_phi(g)
        points = dinfinity_interior(g)
    else:
        blocks, embs = [], []
        for member in params["blocks"]:
            bg, _ = dio.graph_from_json(member["graph"])
            bm = shortest_path_metric(bg)
            blocks.append((bm, member["base"]))
            embs.append(_block_embedding(member, bm, args.host))
        glued = glue(blocks, params["path_lengths"])
        emb = glue_embed(embs, glued, rel_tol=args.tolerance)
    if emb.n_points != g.n_vertices:
        raise BadInput("embedding does not match the input graph")
    if args.out:
        _emit(dio.embedding_to_csv(emb), args.out)
    sub_metric = metric.restrict(points)
    sub_emb = Embedding(emb.host_norm, emb.coords[points])
    rep = distortion(sub_emb, sub_metric, rel_tol=args.tolerance)
    report = {"method": method, "host_norm": emb.host_norm, "dim": emb.dim,
              "points_scanned": len(points), **rep.to_json()}
    if len(points) != g.n_vertices:
        report["witness_expand"] = [points[i] for i in rep.witness_expand] if rep.witness_expand else None
        report["witness_contract"] = [points[i] for i in rep.witness_contract] if rep.witness_contract else None
    sys.stdout.write(dio.dumps(report) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = verify.SUITES if args.suite == "all" else (args.suite,)
    reports = []
    for name in suites:
        reports.append(_run_suite(name, args))
    payload = reports[0].to_json() if len(reports) == 1 else {"check": "all",
                                                             "reports": [r.to_json() for r in reports]}
    sys.stdout.write(dio.dumps(payload) + "\n")
    if any(r.violations for r in reports):
        return EXIT_VIOLATION
    if not all(r.certified for r in reports):
        return EXIT_BUDGET
    return EXIT_OK


def _run_suite(name: str, args):
    level = args.level
    if name == "entropy":
        return verify.suite_entropy(level or 4, node_budget=args.budget or 10_000_000)
    if name == "generations":
        return verify.suite_generations(level or 4)
    if name == "exits":
        return verify.suite_exits(level or 4)
    if name == "claim42":
        return verify.suite_claim42(level or 4, args.eps, all_paths=args.all_paths)
    if name == "edgeiso":
        return verify.suite_edgeiso(level or 5, args.eps, rational=True, rel_tol=args.tolerance)
    if name == "bound":
        return verify.suite_bound(float(args.eps), args.max_level or level or 5, rel_tol=args.tolerance)
    if name == "rr":
        kw = {"budget": args.budget} if args.budget else {}
        return verify.suite_rr(args.cycle, args.max_tree, args.min_tree, threads=args.threads, **kw)
    if name == "bigon":
        return verify.suite_bigon(level or 4)
    if name == "sp":
        if not args.input:
            raise BadInput("verify sp needs --in FILE")
        g, _ = dio.graph_from_json(_load(args.input))
        return verify.suite_sp(g)
    raise BadInput(f"unknown suite {name}")


def cmd_mindist(args) -> int:
    src, _ = dio.graph_from_json(_load(args.source))
    dst, _ = dio.graph_from_json(_load(args.target))
    if src.n_vertices > dst.n_vertices:
        raise BadInput(f"source has {src.n_vertices} points, target only {dst.n_vertices}")
    kw = {"budget": args.budget} if args.budget else {}
    res = min_distortion(shortest_path_metric(src), shortest_path_metric(dst), **kw)
    sys.stdout.write(dio.dumps(res.to_json()) + "\n")
    return EXIT_OK if res.certified else EXIT_BUDGET


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # Subcommands repeat the global flags with suppressed defaults so a value
    # given before the subcommand is not overwritten by the subparser.
    def d(value):
        return argparse.SUPPRESS if suppress else value

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=d(REL_TOL), help="relative float tolerance")
    common.add_argument("--rational", action="store_true", default=d(False),
                        help="exact rational weights where possible")
    common.add_argument("--threads", type=int, default=d(1), help="worker processes for parallel suites")
    common.add_argument("--budget", type=int, default=d(None), help="search node budget")
    return common


def make_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    parser = argparse.ArgumentParser(prog="diamondmetrics", description=__doc__.splitlines()[0],
                                     parents=[_global_flags(suppress=False)])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="generate a graph family as JSON")
    gen.add_argument("family", choices=["tree", "diamond", "wdiamond", "cycle", "path", "sp",
                                        "dinfty", "glue", "l1prod"])
    gen.add_argument("--depth", type=int, default=2)
    gen.add_argument("--level", type=int, default=1)
    gen.add_argument("--eps", default="0.25")
    gen.add_argument("--n", type=int, default=4)
    gen.add_argument("--steps", type=int, default=0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--remove-prob", type=float, default=None)
    gen.add_argument("--remove-mask", default=None, help="comma-separated edge indices")
    gen.add_argument("--radius", type=int, default=3)
    gen.add_argument("--block", action="append", help="glue block as FILE[:BASE]")
    gen.add_argument("--path-lengths", default="", help="comma-separated integers")
    gen.add_argument("--factor", action="append", help="l1prod factor graph JSON")
    gen.add_argument("--out", default=None)
    gen.add_argument("--dot", default=None, help="also write DOT to this file")
    gen.set_defaults(func=cmd_gen)

    emb = sub.add_parser("embed", parents=[common], help="embed a graph and report distortion")
    emb.add_argument("--in", dest="input", required=True)
    emb.add_argument("--method", required=True, choices=["wdiamond", "glue", "dinfty-phi"])
    emb.add_argument("--host", default="l2", choices=["l2", "linf"], help="host norm for glue")
    emb.add_argument("--out", default=None, help="embedding CSV")
    emb.set_defaults(func=cmd_embed)

    ver = sub.add_parser("verify", parents=[common], help="run a verification suite")
    ver.add_argument("suite", choices=list(verify.SUITES) + ["sp", "all"])
    ver.add_argument("--in", dest="input", default=None, help="graph JSON for the sp suite")
    ver.add_argument("--level", type=int, default=None)
    ver.add_argument("--max-level", type=int, default=None)
    ver.add_argument("--eps", default="0.25")
    ver.add_argument("--cycle", type=int, default=7)
    ver.add_argument("--max-tree", type=int, default=10)
    ver.add_argument("--min-tree", type=int, default=None)
    ver.add_argument("--all-paths", action="store_true", help="claim42: every shortest path")
    ver.set_defaults(func=cmd_verify)

    md = sub.add_parser("mindist", parents=[common], help="exact minimum distortion")
    md.add_argument("--source", required=True)
    md.add_argument("--target", required=True)
    md.set_defaults(func=cmd_mindist)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (BadInput, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
