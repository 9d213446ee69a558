"""Command-line driver.

Subcommands mirror the pipeline stages: ``attribute`` turns exported model
tensors into a patch-grid manifest, ``compose`` overlays it onto an image,
``pope gen``/``pope score`` handle presence questions, ``align`` scores
heatmaps against ground-truth masks, and ``report``/``sweep`` aggregate
everything into tables.  All inputs and outputs are files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import alignment, attribution, compositor, coco, exchange, pope, report


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_report(doc: report.TableDoc, out_prefix: str | None) -> None:
    text = doc.render_text()
    sys.stdout.write(text)
    if out_prefix:
        Path(out_prefix + ".txt").write_text(text, encoding="utf-8")
        Path(out_prefix + ".json").write_text(doc.to_json() + "\n", encoding="utf-8")


def cmd_attribute(args: argparse.Namespace, config: dict) -> int:
    bundle = exchange.load_manifest(args.export)
    model = args.model
    if model == "auto":
        model = "clip" if attribution.CLIP_CONTRIBUTIONS in bundle else "llava"
    if model == "clip":
        export = attribution.clip_export_from_bundle(bundle)
        stage = args.normalize or config.get("normalize", "pre")
        grid = attribution.clip_map(export, normalize_stage=stage)
        layers = ",".join(str(x) for x in export.layers)
    else:
        export = attribution.llava_export_from_bundle(bundle)
        grid = attribution.llava_map(export)
        layers = str(export.layer)
    meta = {
        "source_model": bundle.metadata.get("source_model", model),
        "layer_indices": layers,
    }
    exchange.save_grid(grid, meta, args.out)
    return 0


def cmd_compose(args: argparse.Namespace, config: dict) -> int:
    loaded = exchange.load_map(args.map)
    img = compositor.read_png(args.image)
    renormalize = args.renormalize or config.get("renormalize", False)
    if isinstance(loaded, exchange.PatchGrid):
        heat = compositor.prompt_heatmap(
            loaded, img.height, img.width, renormalize=renormalize
        )
    else:
        heat = loaded
    heat = compositor.min_cutoff(heat, args.cutoff)
    out = compositor.overlay(img, heat, args.mode)
    compositor.write_png(out, args.out)
    return 0


def cmd_pope_gen(args: argparse.Namespace, config: dict, seed: int) -> int:
    parsed = coco.parse_annotations(Path(args.annotations).read_text(encoding="utf-8"))
    k_absent = args.k_absent if args.k_absent is not None else config.get("k_absent", 3)
    questions: list[pope.PopeQuestion] = []
    for image_id in sorted(parsed.present_labels):
        questions.extend(
            pope.generate_questions(
                parsed.present_labels[image_id],
                image_id=image_id,
                seed=seed,
                k_absent=k_absent,
            )
        )
    pope.write_questions(questions, args.out)
    return 0


def cmd_pope_score(args: argparse.Namespace) -> int:
    questions = pope.read_questions(args.questions)
    answers = pope.read_answers(args.answers, questions)
    metrics = pope.score(answers)
    doc = report.pope_delta_table(metrics, [], baseline_name=Path(args.answers).stem)
    _write_report(doc, args.out)
    if args.out:
        Path(args.out + ".json").write_text(
            json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    return 0


def cmd_align(args: argparse.Namespace, config: dict) -> int:
    loaded = exchange.load_map(args.map)
    parsed = coco.parse_annotations(Path(args.annotations).read_text(encoding="utf-8"))
    image_id = args.image_id
    if image_id not in parsed.image_sizes:
        raise SystemExit(f"image id {image_id} not in annotations")
    height, width = parsed.image_sizes[image_id]
    if isinstance(loaded, exchange.PatchGrid):
        heat = compositor.prompt_heatmap(
            loaded, height, width, renormalize=args.renormalize
        )
    else:
        heat = loaded
    labels = [args.label] if args.label else sorted(parsed.present_labels[image_id])
    bundle_meta = exchange.load_manifest(args.map).metadata
    h_vlm = bundle_meta.get("source_model", "unknown")
    objects = list(parsed.objects)
    records = []
    for label in labels:
        gt = coco.category_mask(objects, image_id, label, multi=args.multi)
        score = alignment.align(heat, gt)
        records.append(
            alignment.AlignmentRecord(
                image_id=image_id, label=label, h_vlm=h_vlm, score=score
            )
        )
    if args.append and Path(args.out).exists():
        records = alignment.read_records(args.out) + records
    alignment.write_records(records, args.out)
    return 0


def _parse_named(pairs: list[str]) -> list[tuple[str, str]]:
    out = []
    for pair in pairs:
        if "=" not in pair:
            raise SystemExit(f"expected NAME=PATH, got {pair!r}")
        name, path = pair.split("=", 1)
        out.append((name, path))
    return out


def cmd_report(args: argparse.Namespace, config: dict) -> int:
    questions = pope.read_questions(args.questions)
    if args.kind == "delta":
        baseline = pope.score(pope.read_answers(args.baseline, questions))
        variants = [
            (name, pope.score(pope.read_answers(path, questions)))
            for name, path in _parse_named(args.variant)
        ]
        doc = report.pope_delta_table(
            baseline, variants, baseline_name=args.baseline_name
        )
    elif args.kind == "seg-strata":
        seg = pope.read_answers(args.seg, questions)
        name, path = _parse_named(args.variant)[0]
        strata = report.stratify_by_seg_case(
            seg, pope.read_answers(path, questions)
        )
        doc = report.seg_strata_table(strata, variant_name=name)
    elif args.kind == "iou-split":
        answers = pope.read_answers(args.answers, questions)
        records = alignment.read_records(args.scores)
        split = report.split_by_iou(records, answers, threshold=args.threshold)
        doc = report.iou_split_table(split)
    else:  # size-bins
        answers = pope.read_answers(args.answers, questions)
        parsed = coco.parse_annotations(
            Path(args.annotations).read_text(encoding="utf-8")
        )
        edges = tuple(args.edges or config.get("size_edges", report.DEFAULT_SIZE_EDGES))
        objects = list(parsed.objects)
        fractions = {}
        for ans in answers:
            if ans.question.ground_truth != "present":
                continue
            key = (ans.question.image_id, ans.question.label)
            if key in fractions:
                continue
            mask = coco.category_mask(objects, key[0], key[1], multi=args.multi)
            h, w = parsed.image_sizes[key[0]]
            fractions[key] = mask.popcount() / float(h * w)
        bins = report.size_bins(fractions, answers, edges=edges)
        doc = report.size_bins_table(bins, edges)
    _write_report(doc, args.out)
    return 0


def cmd_sweep(args: argparse.Namespace, config: dict) -> int:
    questions = pope.read_questions(args.questions)
    baseline = pope.read_answers(args.baseline, questions)
    answers_by_cutoff = {}
    for name, path in _parse_named(args.answers):
        answers_by_cutoff[float(name)] = pope.read_answers(path, questions)
    cutoffs = tuple(args.cutoffs or config.get("cutoffs", report.DEFAULT_CUTOFFS))
    doc = report.cutoff_sweep(baseline, answers_by_cutoff, cutoffs=cutoffs)
    _write_report(doc, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attnprompt",
        description="Attention-driven visual prompting and hallucination evaluation.",
    )
    parser.add_argument("--seed", type=int, default=0, help="question sampling seed")
    parser.add_argument("--config", help="JSON file of default options")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("attribute", help="compute an attribution map from exports")
    p.add_argument("--export", required=True, help="tensor manifest directory")
    p.add_argument("--model", choices=["clip", "llava", "auto"], default="auto")
    p.add_argument("--normalize", choices=list(attribution.NORMALIZE_STAGES))
    p.add_argument("--out", required=True, help="output map manifest directory")

    p = sub.add_parser("compose", help="overlay a map onto an image")
    p.add_argument("--map", required=True, help="map manifest directory")
    p.add_argument("--image", required=True, help="input PNG")
    p.add_argument("--mode", choices=sorted(compositor.OVERLAY_BASES), default="black")
    p.add_argument("--cutoff", type=float, default=0.0)
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--out", required=True, help="output PNG")

    p = sub.add_parser("pope", help="presence questions")
    pope_sub = p.add_subparsers(dest="pope_command", required=True)
    g = pope_sub.add_parser("gen", help="generate questions from annotations")
    g.add_argument("--annotations", required=True)
    g.add_argument("--k-absent", type=int, default=None)
    g.add_argument("--out", required=True)
    s = pope_sub.add_parser("score", help="score an answer file")
    s.add_argument("--questions", required=True)
    s.add_argument("--answers", required=True)
    s.add_argument("--out", help="output prefix for .txt/.json")

    p = sub.add_parser("align", help="score a heatmap against ground-truth masks")
    p.add_argument("--map", required=True, help="map manifest directory")
    p.add_argument("--annotations", required=True)
    p.add_argument("--image-id", type=int, required=True)
    p.add_argument("--label", help="single label (default: all present labels)")
    p.add_argument("--multi", choices=["union", "largest"], default="union")
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--append", action="store_true")
    p.add_argument("--out", required=True, help="output JSON-lines file")

    p = sub.add_parser("report", help="aggregate runs into tables")
    p.add_argument("kind", choices=["delta", "seg-strata", "iou-split", "size-bins"])
    p.add_argument("--questions", required=True)
    p.add_argument("--baseline", help="baseline answers (delta)")
    p.add_argument("--baseline-name", default="w/o prompt")
    p.add_argument("--variant", action="append", default=[], help="NAME=PATH")
    p.add_argument("--seg", help="segmentation-run answers (seg-strata)")
    p.add_argument("--answers", help="answers file (iou-split, size-bins)")
    p.add_argument("--scores", help="alignment JSON-lines (iou-split)")
    p.add_argument("--threshold", type=float, default=report.DEFAULT_IOU_THRESHOLD)
    p.add_argument("--annotations", help="COCO annotations (size-bins)")
    p.add_argument("--edges", type=float, nargs="+")
    p.add_argument("--multi", choices=["union", "largest"], default="union")
    p.add_argument("--out", help="output prefix for .txt/.json")

    p = sub.add_parser("sweep", help="cutoff sweep from recorded answers")
    p.add_argument("--questions", required=True)
    p.add_argument("--baseline", required=True)
    p.add_argument("--answers", action="append", default=[], help="THETA=PATH")
    p.add_argument("--cutoffs", type=float, nargs="+")
    p.add_argument("--out", help="output prefix for .txt/.json")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = _load_config(args.config)
    seed = args.seed if args.seed != 0 else config.get("seed", args.seed)

    if args.command == "attribute":
        return cmd_attribute(args, config)
    if args.command == "compose":
        return cmd_compose(args, config)
    if args.command == "pope":
        if args.pope_command == "gen":
            return cmd_pope_gen(args, config, seed)
        return cmd_pope_score(args)
    if args.command == "align":
        return cmd_align(args, config)
    if args.command == "report":
        return cmd_report(args, config)
    if args.command == "sweep":
        return cmd_sweep(args, config)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
