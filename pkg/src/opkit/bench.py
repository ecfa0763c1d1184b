"""Forward-application timing of matrix-free operators against dense matrices."""

import csv
import time
from dataclasses import dataclass

import numpy as np

from opkit.core import materialize
from opkit.ops import DFT, FirstDerivative, MatrixOperator, Restriction

__all__ = [
    "BenchRecord",
    "BENCH_COLUMNS",
    "DEFAULT_BENCH_CAP",
    "build_operator",
    "time_forward",
    "run_bench",
    "write_csv",
    "loglog_slope",
]

BENCH_COLUMNS = ["op_name", "impl", "size", "repeats", "mean_seconds", "std_seconds"]
BENCH_OPS = ("restriction", "deriv1", "dft")
BENCH_IMPLS = ("operator", "dense")
DEFAULT_SIZES = (2**10, 2**11, 2**12, 2**13, 2**14)
#: Dense baselines are built only when size**2 stays within this many entries (1 GiB complex).
DEFAULT_BENCH_CAP = 2**26
WARMUP = 3
SUBSAMPLING = 10


@dataclass
class BenchRecord:
    op_name: str
    impl: str
    size: int
    repeats: int
    mean_seconds: float
    std_seconds: float
    status: str = "ok"

    def row(self):
        if self.status != "ok":
            return [self.op_name, self.impl, self.size, self.repeats, "", "", self.status]
        return [
            self.op_name,
            self.impl,
            self.size,
            self.repeats,
            repr(self.mean_seconds),
            repr(self.std_seconds),
            self.status,
        ]


def build_operator(name, size, seed=0):
    """Matrix-free benchmark operator with model length ``size``."""
    if name == "restriction":
        rng = np.random.default_rng(seed)
        nsamp = max(size // SUBSAMPLING, 1)
        return Restriction(size, np.sort(rng.choice(size, nsamp, replace=False)))
    if name == "deriv1":
        return FirstDerivative(size)
    if name == "dft":
        return DFT(size)
    raise ValueError(f"unknown benchmark operator {name!r}; choose from {BENCH_OPS}")


def time_forward(op, x, repeats, warmup=WARMUP):
    """Time ``repeats`` forward applications.

    Returns ``(mean, std)``: the mean is the monotonic wall time of the whole
    loop divided by ``repeats``; the std comes from per-repeat samples and is
    0 for a single repeat.
    """
    for _ in range(warmup):
        op.forward(x)
    samples = np.empty(repeats)
    clock = time.perf_counter
    start = clock()
    for i in range(repeats):
        t0 = clock()
        op.forward(x)
        samples[i] = clock() - t0
    total = clock() - start
    std = float(samples.std(ddof=1)) if repeats > 1 else 0.0
    return total / repeats, std


def run_bench(ops=BENCH_OPS, impls=BENCH_IMPLS, sizes=DEFAULT_SIZES, repeats=200,
              cap=DEFAULT_BENCH_CAP, seed=0, progress=None):
    """Run every (op, impl, size) combination sequentially.

    Dense rows whose ``size**2`` exceeds ``cap`` are emitted with status
    ``skipped`` instead of being timed.
    """
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    for impl in impls:
        if impl not in BENCH_IMPLS:
            raise ValueError(f"unknown implementation {impl!r}; choose from {BENCH_IMPLS}")
    records = []
    rng = np.random.default_rng(seed)
    for name in ops:
        for size in sizes:
            op = build_operator(name, size, seed=seed)
            x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
            for impl in impls:
                if impl == "dense":
                    if size * size > cap:
                        rec = BenchRecord(name, impl, size, repeats, 0.0, 0.0, "skipped")
                        records.append(rec)
                        continue
                    target = MatrixOperator(materialize(op, cap=cap))
                else:
                    target = op
                mean, std = time_forward(target, x, repeats)
                records.append(BenchRecord(name, impl, size, repeats, mean, std))
                del target
                if progress:
                    progress(records[-1])
    return records


def write_csv(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(BENCH_COLUMNS + ["status"])
        for rec in records:
            writer.writerow(rec.row())


def loglog_slope(sizes, times):
    """Least-squares slope of ``log(time)`` against ``log(size)``."""
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])
