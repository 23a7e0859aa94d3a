"""Benchmark harness: datasets, instrumented runs, the run matrix and CSV I/O.

Memory is accounted with :mod:`tracemalloc`, which also sees numpy buffer
allocations. For one sort call:

* ``mem_consumed_bits`` is the bytes allocated during the call that are
  still live when it returns (its output included), times 8;
* ``total_mem_kb`` is the peak of bytes allocated during the call and live
  at the same time, divided by 1024 and rounded up.

Blocks that existed before the call are not counted, even if the call
frees them.

Measurements are strictly sequential; never run two measured sorts at once.
"""

from __future__ import annotations

import contextlib
import csv
import gc
import logging
import math
import time
import tracemalloc
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Optional

import numpy as np

from .errors import ConfigError, FormatError, MeasurementError
from .sorts import KEY_DTYPE, heap_sort, shell_sort, verify_sorted_permutation
from .treap import treap_sort

log = logging.getLogger(__name__)

TECHNIQUES = ("shell", "heap", "treap")
DISTRIBUTIONS = ("uniform", "sorted", "reverse", "few_unique")
VARIABLES = ("time_ns", "mem_consumed_bits", "total_mem_kb")
CSV_HEADER = ("technique", "n", "seed") + VARIABLES

MASK64 = (1 << 64) - 1
FEW_UNIQUE_VALUES = 16


def default_sizes() -> list[int]:
    return [int(round(x)) for x in np.geomspace(1_000, 1_000_000, 10)]


@dataclass(frozen=True)
class MetricsRecord:
    technique: str
    n: int
    seed: int
    time_ns: int
    mem_consumed_bits: int
    total_mem_kb: int

    def __post_init__(self):
        if self.technique not in TECHNIQUES:
            raise ValueError(f"unknown technique {self.technique!r}")
        if self.n < 0 or self.time_ns < 0 or self.mem_consumed_bits < 0 or self.total_mem_kb < 0:
            raise ValueError(f"negative field in {self}")


@dataclass
class MetricsMatrix:
    """Benchmark runs of one technique; each row is one observation."""

    rows: list[MetricsRecord] = field(default_factory=list)

    def __post_init__(self):
        self.rows = list(self.rows)
        kinds = {r.technique for r in self.rows}
        if len(kinds) > 1:
            raise ValueError(f"rows mix techniques: {sorted(kinds)}")

    @property
    def technique(self) -> Optional[str]:
        return self.rows[0].technique if self.rows else None

    def __len__(self) -> int:
        return len(self.rows)

    def values(self) -> np.ndarray:
        """Observations as an ``n x 3`` float array in VARIABLES order."""
        return np.array(
            [[getattr(r, v) for v in VARIABLES] for r in self.rows], dtype=np.float64
        ).reshape(len(self.rows), len(VARIABLES))


@dataclass
class BenchConfig:
    sizes: list[int] = field(default_factory=default_sizes)
    reps: int = 10
    base_seed: int = 20110815
    distribution: str = "uniform"
    warmup: int = 2
    synthetic_time: bool = False
    techniques: tuple[str, ...] = TECHNIQUES

    def validate(self) -> "BenchConfig":
        if not self.sizes:
            raise ConfigError("sizes must be non-empty")
        if any(int(s) < 1 for s in self.sizes):
            raise ConfigError(f"sizes must all be >= 1, got {self.sizes}")
        if self.reps < 1:
            raise ConfigError(f"reps must be >= 1, got {self.reps}")
        if self.warmup < 0:
            raise ConfigError(f"warmup must be >= 0, got {self.warmup}")
        if self.distribution not in DISTRIBUTIONS:
            raise ConfigError(f"unknown distribution {self.distribution!r}")
        for t in self.techniques:
            if t not in TECHNIQUES:
                raise ConfigError(f"unknown technique {t!r}")
        return self


# --------------------------------------------------------------------------
# datasets and seeds
# --------------------------------------------------------------------------


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def cell_seed(base_seed: int, size_index: int, rep_index: int) -> int:
    return (base_seed ^ splitmix64((size_index << 32) | rep_index)) & MASK64


def generate_dataset(n: int, seed: int, distribution: str = "uniform") -> np.ndarray:
    if n < 0:
        raise ValueError("n must be >= 0")
    rng = np.random.default_rng(seed & MASK64)
    info = np.iinfo(KEY_DTYPE)
    if distribution == "few_unique":
        pool = rng.integers(info.min, info.max, size=FEW_UNIQUE_VALUES, dtype=KEY_DTYPE, endpoint=True)
        return pool[rng.integers(0, FEW_UNIQUE_VALUES, size=n)]
    data = rng.integers(info.min, info.max, size=n, dtype=KEY_DTYPE, endpoint=True)
    if distribution == "uniform":
        return data
    if distribution == "sorted":
        return np.sort(data)
    if distribution == "reverse":
        return np.sort(data)[::-1].copy()
    raise ValueError(f"unknown distribution {distribution!r}")


# --------------------------------------------------------------------------
# measurement
# --------------------------------------------------------------------------


def sort_function(technique: str, seed: int = 0) -> Callable[[np.ndarray], np.ndarray]:
    if technique == "shell":
        return shell_sort
    if technique == "heap":
        return heap_sort
    if technique == "treap":
        return lambda a: treap_sort(a, rng_seed=seed)
    raise ValueError(f"unknown technique {technique!r}")


@contextlib.contextmanager
def allocation_tracking():
    """Keep tracemalloc on for the block; reentrant."""
    started = not tracemalloc.is_tracing()
    if started:
        tracemalloc.start()
    try:
        yield
    finally:
        if started:
            tracemalloc.stop()


# per-technique (constant, per-n, per n*log2 n) coefficients in ns
_SYNTHETIC_COEF = {
    "shell": (2_000.0, 4.0, 2.2),
    "heap": (1_500.0, 3.0, 3.1),
    "treap": (6_000.0, 20.0, 4.5),
}


def synthetic_time_ns(technique: str, n: int, seed: int) -> int:
    """Deterministic stand-in for wall-clock time: polynomial in n plus 3% noise."""
    c0, c1, c2 = _SYNTHETIC_COEF[technique]
    base = c0 + c1 * n + c2 * n * math.log2(n + 1)
    rng = np.random.default_rng([seed & MASK64, TECHNIQUES.index(technique)])
    return max(0, int(round(base * (1.0 + 0.03 * rng.standard_normal()))))


def measure_run(technique: str, data, seed: int = 0, synthetic_time: bool = False) -> MetricsRecord:
    """Sort `data` once with `technique` and record the three decision variables.

    The caller's array is not modified. Raises MeasurementError when the output
    is not a sorted permutation of the input.
    """
    data = np.ascontiguousarray(data, dtype=KEY_DTYPE)
    fn = sort_function(technique, seed)
    with allocation_tracking():
        gc_was_enabled = gc.isenabled()
        # a full collection also empties the interpreter's free lists, so
        # every object the sort creates is a fresh, traced allocation
        gc.collect()
        gc.disable()
        try:
            # forget earlier blocks: their frees during the call are then
            # ignored and both counters start at zero
            tracemalloc.clear_traces()
            t0 = time.perf_counter_ns()
            out = fn(data)
            t1 = time.perf_counter_ns()
            live, peak = tracemalloc.get_traced_memory()
        finally:
            if gc_was_enabled:
                gc.enable()
    if not verify_sorted_permutation(data, out):
        raise MeasurementError(f"{technique} sort produced a wrong result for n={len(data)}, seed={seed}")
    n = int(data.shape[0])
    time_ns = synthetic_time_ns(technique, n, seed) if synthetic_time else t1 - t0
    return MetricsRecord(
        technique=technique,
        n=n,
        seed=int(seed),
        time_ns=int(time_ns),
        mem_consumed_bits=live * 8,
        total_mem_kb=-(-peak // 1024),
    )


def run_matrix(cfg: BenchConfig, progress: Optional[Callable[[MetricsRecord], None]] = None) -> dict[str, MetricsMatrix]:
    """Run every (size, rep) cell for every technique on identical input copies."""
    cfg.validate()
    rows: dict[str, list[MetricsRecord]] = {t: [] for t in cfg.techniques}
    with allocation_tracking():
        for w in range(cfg.warmup):
            warm = generate_dataset(min(cfg.sizes), cell_seed(cfg.base_seed, MASK64 >> 32, w), cfg.distribution)
            for t in cfg.techniques:
                measure_run(t, warm, seed=w)
        # park everything alive now in the permanent generation so the full
        # collection before each run only walks objects made since
        gc.collect()
        gc.freeze()
        try:
            for si, n in enumerate(cfg.sizes):
                for rep in range(cfg.reps):
                    seed = cell_seed(cfg.base_seed, si, rep)
                    data = generate_dataset(int(n), seed, cfg.distribution)
                    data.flags.writeable = False
                    for t in cfg.techniques:
                        rec = measure_run(t, data, seed=seed, synthetic_time=cfg.synthetic_time)
                        rows[t].append(rec)
                        if progress is not None:
                            progress(rec)
        finally:
            gc.unfreeze()
    return {t: MetricsMatrix(r) for t, r in rows.items()}


# --------------------------------------------------------------------------
# CSV
# --------------------------------------------------------------------------


def write_metrics_csv(m: MetricsMatrix, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in m.rows:
            w.writerow([getattr(r, f.name) for f in fields(r)])


def _parse_rows(lines: Iterable[list[str]], path) -> list[MetricsRecord]:
    rows = []
    for lineno, cells in lines:
        if len(cells) != len(CSV_HEADER):
            raise FormatError(f"expected {len(CSV_HEADER)} fields, got {len(cells)}", lineno, path)
        tech = cells[0].strip()
        if tech not in TECHNIQUES:
            raise FormatError(f"unknown technique {tech!r}", lineno, path)
        nums = []
        for name, cell in zip(CSV_HEADER[1:], cells[1:]):
            try:
                v = int(cell.strip())
            except ValueError:
                raise FormatError(f"{name} is not an integer: {cell!r}", lineno, path) from None
            if v < 0:
                raise FormatError(f"{name} is negative: {v}", lineno, path)
            nums.append(v)
        rows.append(MetricsRecord(tech, *nums))
    return rows


def read_metrics_csv(path) -> MetricsMatrix:
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError("empty file", 1, path) from None
        except csv.Error as e:
            raise FormatError(str(e), 1, path) from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise FormatError(f"bad header {header!r}", 1, path)
        lines = []
        try:
            for cells in reader:
                if not cells:
                    continue
                lines.append((reader.line_num, cells))
        except csv.Error as e:
            raise FormatError(str(e), reader.line_num, path) from None
    rows = _parse_rows(lines, path)
    techs = {r.technique for r in rows}
    if len(techs) > 1:
        raise FormatError(f"file mixes techniques {sorted(techs)}", None, path)
    return MetricsMatrix(rows)
