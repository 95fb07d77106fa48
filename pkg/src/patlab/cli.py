"""Command-line surface.

Every run is a pure function of its flags and input files; randomness is
always derived from an explicit seed, so reruns are bit-identical. Any
failure prints a one-line JSON error object and exits with code 1.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import core, dataset, formats, metrics
from .errors import PatlabError
from .growth import GrowthRule, develop, growth_step, max_rule_step


def _load_space(path) -> core.GeneratorSpace:
    return core.space_from_json(json.loads(Path(path).read_text()))


def _load_config(path) -> core.Configuration:
    return core.config_from_json(json.loads(Path(path).read_text()))


def _emit(doc) -> None:
    print(json.dumps(doc))


def _cmd_develop(args) -> int:
    space = _load_space(args.space)
    config = _load_config(args.config)
    rule = GrowthRule(args.rule, step_cap=args.steps, r=args.max_r)
    if args.ascii:
        print("iter 0")
        print(formats.ascii_render(config))
        current = config
        for step in range(1, args.steps + 1):
            if rule.variant == "max":
                grid = max_rule_step(current.alpha, rule.r)
                nxt = core.Configuration(alpha=grid, s=np.ones_like(grid))
            else:
                nxt = growth_step(space, current, rule)
            if np.array_equal(nxt.alpha, current.alpha) and np.array_equal(nxt.s, current.s):
                break
            current = nxt
            print(f"iter {step}")
            print(formats.ascii_render(current))
        return 0
    final, executed = develop(space, config, rule, args.steps)
    if args.png:
        formats.write_png((final.alpha != 0).astype(np.float64), args.png)
    _emit({"steps_executed": executed, "nonempty_sites": final.nonempty_count()})
    return 0


def _make_records(args, class_id):
    space = dataset.stroke_space()
    templates = dataset.default_templates()
    return dataset.generate_records(
        space, templates, args.master_seed, args.count,
        class_id=class_id,
        rotation=args.rotation == "on",
        jitter=getattr(args, "jitter", "on") == "on",
        workers=getattr(args, "workers", 1),
    )


def _write_records(records, out_dir, fmt) -> None:
    out = Path(out_dir)
    if fmt == "idx":
        formats.write_bundle(records, out)
        return
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "manifest.jsonl", "w") as fh:
        for i, rec in enumerate(records):
            formats.write_png(rec.image, out / f"sample_{i:05d}.png")
            fh.write(json.dumps({
                "index": i, "class": int(rec.class_label),
                "steps": int(rec.steps), "rng_seed": int(rec.rng_seed),
            }) + "\n")


def _cmd_sample(args) -> int:
    records = _make_records(args, class_id=args.class_id)
    _write_records(records, args.out, args.format)
    _emit({"written": len(records), "out": str(args.out), "format": args.format})
    return 0


def _cmd_dataset(args) -> int:
    records = _make_records(args, class_id=None)
    _write_records(records, args.out, "idx")
    _emit({"written": len(records), "out": str(args.out)})
    return 0


def _cmd_reconstruct(args) -> int:
    bundle = formats.read_bundle(args.bundle)
    if not 0 <= args.index < len(bundle):
        raise PatlabError(f"index {args.index} outside 0..{len(bundle) - 1}")
    space = dataset.stroke_space()
    steps = int(bundle.manifest[args.index]["steps"])
    image = dataset.reconstruct(
        space, bundle.y_g[args.index], bundle.y_s[args.index], steps
    )
    if args.out:
        formats.write_png(image, args.out)
    stored = bundle.images[args.index]
    rebuilt = np.rint(image * 255.0).astype(np.uint8)
    mismatches = int(np.count_nonzero(stored != rebuilt))
    _emit({
        "index": args.index,
        "steps": steps,
        "exact_match": mismatches == 0,
        "mismatched_pixels": mismatches,
    })
    return 0


def _cmd_eval_seg(args) -> int:
    pred = formats.read_idx(args.pred)
    truth = formats.read_idx(args.truth)
    num_classes = args.classes or int(max(pred.max(), truth.max())) + 1
    _emit(metrics.segmentation_error_metrics(pred, truth, num_classes))
    return 0


def _heatmap_dir(path) -> list[metrics.Heatmap]:
    files = sorted(p for p in Path(path).iterdir()
                   if p.suffix in (".csv", ".hmap"))
    if not files:
        raise PatlabError(f"no .csv or .hmap heatmaps in {path}")
    return [metrics.Heatmap(values=formats.read_heatmap_file(p)) for p in files]


def _cmd_eval_src(args) -> int:
    reference = _heatmap_dir(args.ref)
    stages = [_heatmap_dir(d) for d in args.stage]
    results = metrics.cascade_src(reference, stages, rng=args.seed)
    _emit([
        {"stage": str(d), **res} for d, res in zip(args.stage, results)
    ])
    return 0


def _cmd_eval_aopc(args) -> int:
    bundle = formats.read_bundle(args.bundle)
    scorer = metrics.CentroidScorer.from_samples(
        bundle.images.astype(np.float64) / 255.0, bundle.class_labels
    )
    heatmaps = _heatmap_dir(args.heatmaps)
    if len(heatmaps) != len(bundle):
        raise PatlabError(
            f"{len(heatmaps)} heatmaps for {len(bundle)} bundle samples"
        )
    rng = np.random.default_rng(args.seed)
    curves = [
        metrics.aopc_curve(scorer, img.astype(np.float64) / 255.0, h,
                           args.L, rng, repeats=args.repeats)
        for img, h in zip(bundle.images, heatmaps)
    ]
    mean_curve = np.mean(curves, axis=0)
    _emit({
        "L": list(range(1, args.L + 1)),
        "aopc_mean": [float(v) for v in mean_curve[1:]],
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="patlab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("develop", help="grow a configuration and print or save snapshots")
    p.add_argument("--space", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--rule", required=True,
                   choices=("original", "revised", "modified", "max"))
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--max-r", type=int, default=5)
    p.add_argument("--ascii", action="store_true")
    p.add_argument("--png")
    p.set_defaults(func=_cmd_develop)

    p = sub.add_parser("sample", help="generate samples of one class")
    p.add_argument("--class", dest="class_id", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--rotation", choices=("on", "off"), default="off")
    p.add_argument("--jitter", choices=("on", "off"), default="on")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("idx", "png"), default="idx")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("dataset", help="generate a balanced uniform-class bundle")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--master-seed", type=int, required=True)
    p.add_argument("--rotation", choices=("on", "off"), default="off")
    p.add_argument("--jitter", choices=("on", "off"), default="on")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_dataset)

    p = sub.add_parser("reconstruct", help="regrow one sample from its labels")
    p.add_argument("--bundle", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_reconstruct)

    p = sub.add_parser("eval", help="evaluation metrics")
    esub = p.add_subparsers(dest="metric", required=True)

    e = esub.add_parser("seg", help="hit/miss %-errors between label files")
    e.add_argument("--pred", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--classes", type=int)
    e.set_defaults(func=_cmd_eval_seg)

    e = esub.add_parser("src", help="per-stage mean rank correlation vs a reference")
    e.add_argument("--ref", required=True)
    e.add_argument("--stage", nargs="+", required=True)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=_cmd_eval_src)

    e = esub.add_parser("aopc", help="perturbation-curve area with the centroid scorer")
    e.add_argument("--bundle", required=True)
    e.add_argument("--heatmaps", required=True)
    e.add_argument("--scorer", choices=("centroid",), default="centroid")
    e.add_argument("--L", type=int, required=True)
    e.add_argument("--repeats", type=int, default=8)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=_cmd_eval_aopc)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        # PatlabError is a ValueError; KeyError covers malformed JSON inputs
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        return 1


if __name__ == "__main__":
    sys.exit(main())
