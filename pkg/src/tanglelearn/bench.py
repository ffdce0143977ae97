"""Run solver variants over a corpus and collect one CSV row per (game, variant)."""

from __future__ import annotations

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

from .game import ParityGame, read_game
from .generate import GenSpec, generate
from .oracle import zielonka
from .solver import SolverConfig, SolverStats, SolveTimeout, TangleSolver

CSV_VERSION = "tanglelearn-bench v1"


@dataclass
class BenchRecord:
    game: str
    variant: str
    time: float
    timeout: bool
    tangles_learned: int = 0
    dominions_found: int = 0
    search_calls: int = 0
    decomposition_iterations: int = 0
    turns: int = 0
    tangle_attractions: int = 0
    max_region_count: int = 0
    attractor_steps: int = 0
    error: str = ""


COLUMNS = [f.name for f in fields(BenchRecord)]


@dataclass(frozen=True)
class BenchJob:
    name: str
    variant: str
    timeout: float
    path: str | None = None
    spec: GenSpec | None = None
    skip_reduction: bool = False


def _load(job: BenchJob) -> ParityGame:
    if job.path is not None:
        return read_game(job.path)
    assert job.spec is not None
    return generate(job.spec)


def run_job(job: BenchJob) -> BenchRecord:
    try:
        game = _load(job)
    except Exception as exc:  # recorded, harness continues
        return BenchRecord(job.name, job.variant, 0.0, False, error=f"load: {exc}")
    start = time.monotonic()
    stats = SolverStats()
    try:
        if job.variant == "zlk":
            zielonka(game)
        else:
            cfg = SolverConfig(job.variant, skip_reduction=job.skip_reduction, deadline=start + job.timeout)
            solver = TangleSolver(game, cfg)
            try:
                solver.run()
            finally:
                stats = solver.stats
    except SolveTimeout:
        return BenchRecord(job.name, job.variant, job.timeout, True, **stats.as_dict())
    except Exception as exc:
        return BenchRecord(job.name, job.variant, time.monotonic() - start, False, **stats.as_dict(), error=repr(exc))
    elapsed = time.monotonic() - start
    if elapsed > job.timeout:
        return BenchRecord(job.name, job.variant, job.timeout, True, **stats.as_dict())
    return BenchRecord(job.name, job.variant, elapsed, False, **stats.as_dict())


def corpus_jobs(directory: str, variants: Sequence[str], timeout: float, skip_reduction: bool = False) -> list[BenchJob]:
    names = sorted(f for f in os.listdir(directory) if f.endswith((".pg", ".gm")))
    return [
        BenchJob(name, v, timeout, path=os.path.join(directory, name), skip_reduction=skip_reduction)
        for name in names
        for v in variants
    ]


def spec_jobs(specs: Iterable[GenSpec], variants: Sequence[str], timeout: float, skip_reduction: bool = False) -> list[BenchJob]:
    out = []
    for s in specs:
        name = f"random-{s.vertex_count}-{s.min_priority}-{s.top_priority}-{s.min_outdeg}-{s.max_outdeg}-{s.seed}"
        out.extend(BenchJob(name, v, timeout, spec=s, skip_reduction=skip_reduction) for v in variants)
    return out


def run_bench(jobs: Sequence[BenchJob], workers: int = 1) -> list[BenchRecord]:
    if workers <= 1:
        return [run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_job, jobs))


def to_csv(records: Iterable[BenchRecord], out: io.TextIOBase | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in records:
        row = []
        for c in COLUMNS:
            val = getattr(r, c)
            if c == "time":
                val = f"{val:.6f}"
            elif isinstance(val, bool):
                val = int(val)
            row.append(val)
        writer.writerow(row)
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text


def read_csv(text: str) -> list[dict[str, str]]:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))
