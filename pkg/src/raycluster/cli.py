"""Command line entry point: ``raycluster <command> ...``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .annotations import SOURCES, fmt4, format_detections, format_polygons, parse_annotations, parse_detections
from .bench import bench_decode, format_bench
from .container import load_maps, read_maps, save_maps, stack_maps, to_prediction
from .decoder import READ_MODES, DecodeConfig, decode
from .encoder import AXES, DEFAULT_M, DEFAULT_N, encode_instance, generate_gt_maps
from .errors import RayClusterError
from .evaluation import CANVAS_PAD, match_and_score, roundtrip_fidelity
from .geometry import DEFAULT_SHRINK_RATIO
from .synth import SynthParams, synth_generate

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read_text(path):
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"{path}: {exc.strerror}") from None


def _read_maps(path):
    if path == "-":
        return read_maps(sys.stdin.buffer.read())
    return load_maps(path)


def _write_text(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _load_annotations(path, args):
    parsed = parse_annotations(_read_text(path), args.format, args.ctw_mode)
    for err in parsed.errors:
        print(f"{path}: {err}", file=sys.stderr)
    return parsed


def _canvas(records, args):
    if args.height and args.width:
        return args.height, args.width
    if not records:
        return args.height or 1, args.width or 1
    verts = np.concatenate([r.polygon.vertices for r in records])
    h = args.height or int(math.ceil(verts[:, 1].max())) + CANVAS_PAD
    w = args.width or int(math.ceil(verts[:, 0].max())) + CANVAS_PAD
    return h, w


# --------------------------------------------------------------------------
# commands


def cmd_encode(args):
    parsed = _load_annotations(args.annotations, args)
    height, width = _canvas(parsed.records, args)
    lines, failed = [], bool(parsed.errors)
    for k, rec in enumerate(parsed.records):
        try:
            enc = encode_instance(rec.polygon, args.n, args.m, args.shrink_ratio, (height, width), args.axis)
        except RayClusterError as exc:
            print(f"{args.annotations}: instance {k}: {exc}", file=sys.stderr)
            failed = True
            continue
        fields = [str(k), str(enc.n), str(enc.m)]
        for c in enc.clusters:
            fields += [fmt4(c.center.x), fmt4(c.center.y)] + [fmt4(d) for d in c.distances]
        lines.append(",".join(fields) + "\n")
    _write_text(args.output, "".join(lines))
    return EXIT_DATA if failed else EXIT_OK


def cmd_gtmaps(args):
    parsed = _load_annotations(args.annotations, args)
    records = [r for r in parsed.records if args.include_ignored or not r.ignore]
    height, width = _canvas(parsed.records, args)
    gt = generate_gt_maps([r.polygon for r in records], height, width, args.m, args.shrink_ratio)
    for idx, why in gt.skipped:
        print(f"{args.annotations}: instance {idx} skipped: {why}", file=sys.stderr)
    save_maps(args.output, stack_maps(gt.shrink_mask, gt.distance_maps))
    return EXIT_DATA if parsed.errors else EXIT_OK


def _decode_config(args):
    return DecodeConfig(args.threshold, args.min_area, args.n, args.read_mode, args.axis, bool(args.trace))


def _load_prediction(args):
    maps = to_prediction(_read_maps(args.maps))
    if args.m is not None and args.m != maps.m:
        raise DataError(f"{args.maps}: container holds {maps.m} ray channels, --m says {args.m}")
    return maps


def _trace_lines(result):
    out = []
    for rec in result.debug:
        for kind, polys in (("piecewise", rec.piecewise), ("interval", rec.intervals)):
            for j, poly in enumerate(polys):
                coords = ",".join(f"{fmt4(x)},{fmt4(y)}" for x, y in poly.vertices)
                out.append(f"{rec.component},{kind},{j},{coords}\n")
        for j, c in enumerate(rec.centers):
            out.append(f"{rec.component},center,{j},{fmt4(c.x)},{fmt4(c.y)}\n")
    return "".join(out)


def cmd_decode(args):
    maps = _load_prediction(args)
    result = decode(maps, _decode_config(args))
    for comp, stage, msg in result.diagnostics:
        print(f"{args.maps}: component {comp} dropped at {stage}: {msg}", file=sys.stderr)
    _write_text(args.output, format_detections(result.polygons, result.scores))
    if args.trace:
        _write_text(args.trace, _trace_lines(result))
    return EXIT_OK


def cmd_roundtrip(args):
    parsed = _load_annotations(args.annotations, args)
    ious = []
    lines = ["id,iou\n"]
    failed = bool(parsed.errors)
    for k, rec in enumerate(parsed.records):
        try:
            iou = roundtrip_fidelity(rec.polygon, args.n, args.m, args.shrink_ratio, None, args.axis)
        except RayClusterError as exc:
            print(f"{args.annotations}: instance {k}: {exc}", file=sys.stderr)
            failed = True
            continue
        ious.append(iou)
        lines.append(f"{k},{fmt4(iou)}\n")
    if ious:
        arr = np.array(ious)
        for name, value in (
            ("min", arr.min()),
            ("p5", np.percentile(arr, 5)),
            ("p50", np.percentile(arr, 50)),
            ("mean", arr.mean()),
        ):
            lines.append(f"{name},{fmt4(value)}\n")
    _write_text(args.output, "".join(lines))
    return EXIT_DATA if failed else EXIT_OK


def cmd_eval(args):
    dets = parse_detections(_read_text(args.dets))
    for err in dets.errors:
        print(f"{args.dets}: {err}", file=sys.stderr)
    gts = _load_annotations(args.gts, args)
    ignored = [False if args.count_difficult else r.ignore for r in gts.records]
    report = match_and_score(
        [d.polygon for d in dets.records], [r.polygon for r in gts.records], ignored, args.iou
    )
    text = (
        report.format() + "\n"
        + f"matched {report.n_matched} dets {report.n_dets} gts {report.n_gts} "
        + f"ignored_gts {report.n_ignored_gts} dets_on_ignored {report.n_dets_on_ignored}\n"
    )
    _write_text(args.output, text)
    return EXIT_DATA if dets.errors or gts.errors else EXIT_OK


def cmd_synth(args):
    params = SynthParams(
        seed=args.seed,
        count=args.count,
        amplitude=args.amplitude,
        wavelength=args.wavelength,
        half_width=args.half_width,
        length=args.length,
        height=args.height,
        width=args.width,
        max_rotation=args.max_rotation,
    )
    _write_text(args.output, format_polygons(synth_generate(params)))
    return EXIT_OK


def cmd_bench(args):
    if args.backend:
        kernels.use_backend(args.backend)
    maps = _load_prediction(args)
    stats = bench_decode(maps, _decode_config(args), repeats=args.repeats, warmup=args.warmup)
    _write_text(args.output, format_bench(stats))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _annotation_args(p):
    p.add_argument("annotations", help="annotation file, or - for stdin")
    p.add_argument("--format", choices=SOURCES, default="polygon")
    p.add_argument("--ctw-mode", choices=("absolute", "bbox-offset"), default="absolute")


def _encoding_args(p):
    p.add_argument("--n", type=int, default=DEFAULT_N, help="clusters per instance (default 5)")
    p.add_argument("--m", type=int, default=DEFAULT_M, help="rays per cluster (default 8)")
    p.add_argument("--shrink-ratio", type=float, default=DEFAULT_SHRINK_RATIO)
    p.add_argument("--axis", choices=AXES, default="x")


def _canvas_args(p):
    p.add_argument("--height", type=int, default=None, help="canvas height (default: fit annotations + 8)")
    p.add_argument("--width", type=int, default=None, help="canvas width (default: fit annotations + 8)")


def _decode_args(p):
    p.add_argument("maps", help="map container file")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--min-area", type=int, default=16)
    p.add_argument("--n", type=int, default=DEFAULT_N)
    p.add_argument("--m", type=int, default=None, help="expected ray channels; checked against the file")
    p.add_argument("--read-mode", choices=READ_MODES, default="nearest")
    p.add_argument("--axis", choices=AXES, default="x")


def build_parser():
    parser = _Parser(prog="raycluster", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("encode", help="ray-cluster encoding of every annotated instance")
    _annotation_args(p)
    _encoding_args(p)
    _canvas_args(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("gtmaps", help="write shrink-mask and ray-distance targets")
    _annotation_args(p)
    _canvas_args(p)
    p.add_argument("--m", type=int, default=DEFAULT_M)
    p.add_argument("--shrink-ratio", type=float, default=DEFAULT_SHRINK_RATIO)
    p.add_argument("--include-ignored", action="store_true", help="also rasterize don't-care instances")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_gtmaps)

    p = sub.add_parser("decode", help="reconstruct polygons from a map container")
    _decode_args(p)
    p.add_argument("--trace", metavar="FILE", default=None, help="write per-stage debug polygons here")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("roundtrip", help="encode/decode IoU per instance")
    _annotation_args(p)
    _encoding_args(p)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("eval", help="precision, recall and F-measure")
    p.add_argument("--dets", required=True, help="detections as written by decode")
    p.add_argument("--gts", required=True, help="ground-truth annotation file")
    p.add_argument("--format", choices=SOURCES, default="polygon")
    p.add_argument("--ctw-mode", choices=("absolute", "bbox-offset"), default="absolute")
    p.add_argument("--iou", type=float, default=0.5)
    p.add_argument("--count-difficult", action="store_true", help="score don't-care instances normally")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="generate curved ribbon annotations")
    d = SynthParams()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--count", type=int, default=d.count)
    p.add_argument("--amplitude", type=float, default=d.amplitude)
    p.add_argument("--wavelength", type=float, default=d.wavelength)
    p.add_argument("--half-width", type=float, default=d.half_width)
    p.add_argument("--length", type=float, default=d.length)
    p.add_argument("--height", type=int, default=d.height)
    p.add_argument("--width", type=int, default=d.width)
    p.add_argument("--max-rotation", type=float, default=d.max_rotation, help="degrees")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="per-stage decode timings")
    _decode_args(p)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--warmup", type=int, default=2)
    p.add_argument("--backend", choices=("numba", "numpy"), default=None)
    p.set_defaults(func=cmd_bench, trace=None)
    p.add_argument("-o", "--output", default="-")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, RayClusterError) as exc:
        print(f"raycluster {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"raycluster {args.command}: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"raycluster {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
