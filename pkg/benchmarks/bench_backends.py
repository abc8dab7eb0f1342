"""Compare the numba and numpy kernel backends.

Times each hot kernel on its own and then the full decode on a 736x736
synthetic scene with 10 ribbons. Run with ``python3 benchmarks/bench_backends.py``.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from raycluster import kernels
from raycluster.bench import bench_decode
from raycluster.decoder import DecodeConfig, PredictionMaps
from raycluster.encoder import generate_gt_maps, ray_angles
from raycluster.geometry import trace_outer_contours
from raycluster.synth import SynthParams, synth_generate


def _best_ms(fn, repeats):
    fn()  # warm (and compile, on first numba call)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * float(np.median(times))


def scene(seed=0, count=10, size=736):
    polys = [r.polygon for r in synth_generate(SynthParams(seed=seed, count=count, height=size, width=size))]
    gt = generate_gt_maps(polys, size, size)
    return polys, gt


def kernel_cases(polys, gt, size):
    verts = polys[0].vertices
    window = (0, 0, size, size)
    mask = gt.shrink_mask.astype(bool)
    blob = np.pad(mask, 1).astype(np.uint8)
    r0, c0 = np.argwhere(blob)[0]
    angles = ray_angles(64)
    origins = np.repeat(verts.mean(axis=0)[None, :], 200, axis=0)
    return {
        "rasterize": lambda: kernels.rasterize(verts, window),
        "cast_rays": lambda: kernels.cast_rays(origins, np.cos(angles), np.sin(angles), verts),
        "trace_boundary": lambda: kernels.trace_boundary(blob, int(r0), int(c0)),
        "trace_all": lambda: trace_outer_contours(mask),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--size", type=int, default=736)
    args = ap.parse_args(argv)

    polys, gt = scene(args.seed, 10, args.size)
    backends = ["numpy"] + (["numba"] if kernels.HAS_NUMBA else [])
    rows = {}
    for name in backends:
        kernels.use_backend(name)
        cases = kernel_cases(polys, gt, args.size)
        rows[name] = {k: _best_ms(fn, args.repeats) for k, fn in cases.items()}
        pred = PredictionMaps(gt.shrink_mask.astype(np.float64), gt.distance_maps)
        stats = bench_decode(pred, DecodeConfig(), repeats=args.repeats)
        if stats.instances != len(polys):
            print(f"warning: {name} decoded {stats.instances} of {len(polys)} instances")
        rows[name]["decode"] = stats.median_total
        rows[name]["union+trace share"] = stats.union_trace_share

    print(f"{'case':<20}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    for case in rows["numpy"]:
        vals = [rows[b][case] for b in backends]
        line = f"{case:<20}" + "".join(f"{v:>12.4f}" for v in vals)
        if len(vals) == 2 and case != "union+trace share":
            line += f"{vals[0] / vals[1]:>11.1f}x"
        print(line)
    print("(times are median ms)")


if __name__ == "__main__":
    main()
