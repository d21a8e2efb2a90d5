"""Command line interface: ``hbk <command> ...``.

Subcommands cover the pipeline stages individually (enumerate, filter,
compose, invariant, irreducible, classify, report, moves search) and the
full orchestrated run (pipeline).  Streams are JSON-lines files of
{id, code, tags} records; single diagrams travel as .hbk files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import catalog, classify as cls, compose, pipeline, rewrite
from .diagrams import Diagram, diagram_record, read_jsonl, record_diagram, write_jsonl
from .groups import group_from_name
from .invariants import g_image, irreducibility, ks_cached
from .maps import enumerate_maps
from .presentation import tietze_simplify, wirtinger


def _load_stream(path: str) -> List[Dict[str, object]]:
    return read_jsonl(Path(path))


def _diagram_by_name(name: str) -> Diagram:
    """Resolve a catalog name or a .hbk file path."""
    if name in catalog.PRIME_KNOTS:
        return catalog.prime_knot(name)
    if name in catalog.BASE_GRAPH_NAMES:
        return catalog.base_graph(name)
    if name in ("0_1", "K0_1", "unknot"):
        return Diagram.unknot()
    path = Path(name)
    if path.is_file():
        return Diagram.from_hbk(path.read_text())
    raise SystemExit(f"hbk: unknown diagram {name!r} (catalog name or file)")


def cmd_enumerate(args) -> int:
    maps_ = enumerate_maps(2, args.n4, up_to_mirror=not args.all_orientations,
                           drop_vertex_bigons=not args.raw)
    out = sys.stdout if args.out == "-" else open(args.out, "w")
    for m in maps_:
        out.write(m.to_text() + "\n")
    if out is not sys.stdout:
        out.close()
    print(f"{len(maps_)} maps", file=sys.stderr)
    return 0


def cmd_filter(args) -> int:
    cfg = pipeline.PipelineConfig(
        mode=args.mode, rules_dir=Path(args.rules) if args.rules else None,
        reduce_search_budget=args.budget, jobs=args.jobs)
    records = _load_stream(getattr(args, "in"))
    codes = [str(r["code"]) for r in records]
    kept_codes = set(pipeline.filter_diagram_codes(codes, cfg))
    kept = [r for r in records if str(r["code"]) in kept_codes]
    if args.mode == "hk" and not args.no_flip_normalization:
        flips = rewrite.flip_rules(rewrite.load_rules(
            Path(args.rules) if args.rules else None))
        diagrams = rewrite.normalize_loop_flips(
            [record_diagram(r) for r in kept], flips)
        kept_ids = {d.diagram_id() for d in diagrams}
        kept = [r for r in kept if str(r["id"]) in kept_ids]
    write_jsonl(Path(args.out), iter(kept))
    print(f"{len(records)} -> {len(kept)} diagrams", file=sys.stderr)
    return 0


def cmd_moves_search(args) -> int:
    a = _diagram_by_name(args.a)
    b = _diagram_by_name(args.b)
    rules = rewrite.load_rules(Path(args.rules) if args.rules else None)
    try:
        trace = rewrite.search_equivalence(
            a, b, depth=args.depth, max_crossings=args.max_crossings,
            mode=args.mode, allow_mirror=args.allow_mirror,
            max_nodes=args.max_nodes, rules=rules)
    except rewrite.SearchBudget as exc:
        print(f"budget exhausted: {exc}")
        return 2
    if trace is None:
        print("no trace within bounds")
        return 1
    print(f"trace with {len(trace)} steps"
          + (" (to mirror image)" if trace.mirrored_target else ""))
    for step in trace.steps:
        print(f"  {step.rule} at {step.site}")
    return 0


def cmd_compose(args) -> int:
    if args.kind == "two-sum":
        base = _diagram_by_name(args.base)
        knot = _diagram_by_name(args.knot)
        if args.mirror_knot:
            knot = knot.mirror()
        d = compose.two_sum(base, knot, args.site, args.orientation)
    else:
        left = _diagram_by_name(args.left)
        right = _diagram_by_name(args.right)
        if args.mirror_right:
            right = right.mirror()
        d = compose.one_sum(left, right)
    text = d.to_hbk(comment=f"composed by hbk {args.kind}")
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    return 0


def cmd_invariant(args) -> int:
    records = _load_stream(getattr(args, "in"))
    group = group_from_name(args.group)
    out: List[Dict[str, object]] = []
    for rec in records:
        d = record_diagram(rec)
        pres, peri = wirtinger(d)
        res = tietze_simplify(pres, peri.meridians + peri.longitudes)
        n_mer = len(peri.meridians)
        if args.kind == "ks":
            value: object = ks_cached(res.presentation, group)
        else:
            from .presentation import PeripheralSystem
            peri2 = PeripheralSystem(res.words[:n_mer], res.words[n_mer:])
            value = list(g_image(res.presentation, peri2, group))
        out.append({"id": rec["id"], "invariant": args.kind,
                    "group": args.group, "value": value})
        if args.with_rank:
            out.append({"id": rec["id"], "invariant": "rank_bound",
                        "group": "", "value": res.presentation.n_gens})
    write_jsonl(Path(args.out), iter(out))
    return 0


def cmd_irreducible(args) -> int:
    rows = _load_stream(getattr(args, "in"))
    by_id: Dict[str, Dict[str, int]] = {}
    for row in rows:
        i = str(row["id"])
        by_id.setdefault(i, {})
        if row["invariant"] == "ks" and row["group"] in ("A4", "A5"):
            by_id[i][f"ks_{row['group']}"] = int(row["value"])  # type: ignore
        if row["invariant"] == "rank_bound":
            by_id[i]["rank"] = int(row["value"])  # type: ignore
    out = []
    for i in sorted(by_id):
        vals = by_id[i]
        missing = {"ks_A4", "ks_A5", "rank"} - set(vals)
        if missing:
            raise SystemExit(f"hbk: id {i} lacks {sorted(missing)}")
        verdict = irreducibility(vals["rank"], vals["ks_A4"], vals["ks_A5"])
        out.append({"id": i, "invariant": "irreducibility", "group": "",
                    "value": verdict})
    write_jsonl(Path(args.out), iter(out))
    return 0


def cmd_classify(args) -> int:
    cfg = pipeline.load_config(Path(args.config))
    records = _load_stream(getattr(args, "in"))
    by_id = {str(r["id"]): record_diagram(r) for r in records}
    evaluator = cls.Evaluator(by_id, cfg.group_order_budget)
    tree = cls.ClassTree(sorted(by_id))
    cls.run_schedule(tree, list(cfg.schedule), evaluator)
    cls.certify_all(tree, evaluator, cfg.certify_depth,
                    cfg.target + cfg.certify_extra_crossings, cfg.mode,
                    cfg.certify_max_nodes)
    Path(args.tree).write_text(tree.to_json())
    print(f"{len(tree.leaves())} leaves", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    classes_path = Path(args.classes) if args.classes else None
    if classes_path is None:
        guess = Path(args.tree.replace(".tree.json", ".classes.json"))
        if guess.is_file():
            classes_path = guess
        else:
            raise SystemExit("hbk: pass --classes (classes.json of the run)")
    classes = json.loads(classes_path.read_text())
    annotations = {}
    if args.annotations:
        annotations = json.loads(Path(args.annotations).read_text())
    report, summary = pipeline.build_report(classes, args.target, annotations)
    if args.format == "tsv":
        sys.stdout.write(report)
    else:
        print(json.dumps(summary, sort_keys=True, indent=1))
    return 0


def cmd_pipeline(args) -> int:
    cfg = pipeline.load_config(Path(args.config))
    outputs = pipeline.run_full_pipeline(cfg)
    summary = json.loads(outputs["summary"].read_text())
    print(json.dumps(summary, sort_keys=True, indent=1))
    for key, path in sorted(outputs.items()):
        print(f"{key}: {path}", file=sys.stderr)
    return 0


def cmd_catalog(args) -> int:
    d = _diagram_by_name(args.name)
    sys.stdout.write(d.to_hbk())
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="hbk")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="3-edge-connected spherical maps")
    p.add_argument("--n4", type=int, required=True)
    p.add_argument("--all-orientations", action="store_true")
    p.add_argument("--raw", action="store_true",
                   help="keep maps with vertex-crossing bigons")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("filter", help="drop multi-component and reducible diagrams")
    p.add_argument("--rules", default=None, help="rule directory")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("hk", "graph"), default="hk")
    p.add_argument("--budget", type=int, default=3000)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-flip-normalization", action="store_true")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("moves", help="move search between diagrams")
    moves_sub = p.add_subparsers(dest="moves_command", required=True)
    ps = moves_sub.add_parser("search")
    ps.add_argument("--a", required=True)
    ps.add_argument("--b", required=True)
    ps.add_argument("--depth", type=int, default=8)
    ps.add_argument("--max-crossings", type=int, default=9)
    ps.add_argument("--mode", choices=("hk", "graph"), default="hk")
    ps.add_argument("--allow-mirror", action="store_true")
    ps.add_argument("--max-nodes", type=int, default=20000)
    ps.add_argument("--rules", default=None)
    ps.set_defaults(func=cmd_moves_search)

    p = sub.add_parser("compose", help="2-sums and 1-sums")
    comp_sub = p.add_subparsers(dest="kind", required=True)
    p2 = comp_sub.add_parser("two-sum")
    p2.add_argument("--base", required=True)
    p2.add_argument("--knot", required=True)
    p2.add_argument("--site", type=int, default=0)
    p2.add_argument("--orientation", type=int, default=0)
    p2.add_argument("--mirror-knot", action="store_true")
    p2.add_argument("--out", default="-")
    p2.set_defaults(func=cmd_compose, kind="two-sum")
    p1 = comp_sub.add_parser("one-sum")
    p1.add_argument("--left", required=True)
    p1.add_argument("--right", required=True)
    p1.add_argument("--mirror-right", action="store_true")
    p1.add_argument("--out", default="-")
    p1.set_defaults(func=cmd_compose, kind="one-sum")

    p = sub.add_parser("invariant", help="ks / gimage values for a stream")
    p.add_argument("kind", choices=("ks", "gimage"))
    p.add_argument("--group", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--with-rank", action="store_true")
    p.set_defaults(func=cmd_invariant)

    p = sub.add_parser("irreducible", help="residue criterion verdicts")
    p.add_argument("--in", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_irreducible)

    p = sub.add_parser("classify", help="grow the classification tree")
    p.add_argument("--config", required=True)
    p.add_argument("--in", required=True)
    p.add_argument("--tree", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("report", help="final class table")
    p.add_argument("--tree", required=True)
    p.add_argument("--classes", default=None)
    p.add_argument("--target", type=int, default=7)
    p.add_argument("--annotations", default=None)
    p.add_argument("--format", choices=("tsv", "summary"), default="tsv")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("pipeline", help="full pipeline from a TOML config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("catalog", help="print a catalog diagram")
    p.add_argument("name")
    p.set_defaults(func=cmd_catalog)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
