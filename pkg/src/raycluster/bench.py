"""Per-stage wall-clock timing of the decode pipeline."""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .decoder import STAGES, DecodeConfig, PredictionMaps, StageTimer, decode


@dataclass
class BenchStats:
    repeats: int
    stage_ms: dict  # stage -> array of per-repetition milliseconds
    total_ms: np.ndarray
    instances: int

    def median(self, stage):
        return float(np.median(self.stage_ms[stage]))

    def p95(self, stage):
        return float(np.percentile(self.stage_ms[stage], 95))

    @property
    def median_total(self) -> float:
        return float(np.median(self.total_ms))

    @property
    def p95_total(self) -> float:
        return float(np.percentile(self.total_ms, 95))

    @property
    def union_trace_share(self) -> float:
        """Median fraction of decode time spent in union + trace."""
        part = self.stage_ms["union"] + self.stage_ms["trace"]
        return float(np.median(part / self.total_ms))


def bench_decode(maps: PredictionMaps, cfg: DecodeConfig | None = None, repeats: int = 20, warmup: int = 2) -> BenchStats:
    if repeats < 1 or warmup < 0:
        raise ValueError("repeats >= 1 and warmup >= 0 required")
    cfg = cfg or DecodeConfig()
    for _ in range(warmup):
        decode(maps, cfg)
    stage_ms = {s: np.empty(repeats) for s in STAGES}
    total = np.empty(repeats)
    found = 0
    for k in range(repeats):
        timer = StageTimer()
        t0 = time.perf_counter()
        found = len(decode(maps, cfg, timer))
        total[k] = (time.perf_counter() - t0) * 1e3
        for s in STAGES:
            stage_ms[s][k] = timer.seconds[s] * 1e3
    return BenchStats(repeats, stage_ms, total, found)


def format_bench(stats: BenchStats) -> str:
    lines = ["stage,median_ms,p95_ms\n"]
    for s in STAGES:
        lines.append(f"{s},{stats.median(s):.4f},{stats.p95(s):.4f}\n")
    lines.append(f"decode,{stats.median_total:.4f},{stats.p95_total:.4f}\n")
    lines.append(f"union+trace share,{stats.union_trace_share:.4f}\n")
    lines.append(f"instances,{stats.instances}\n")
    lines.append(f"repeats,{stats.repeats}\n")
    return "".join(lines)
