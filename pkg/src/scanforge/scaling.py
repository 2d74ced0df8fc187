"""Strong- and weak-scaling experiment drivers with error propagation.

Speedup is the ratio of mean serial to mean parallel time over R
repetitions; its standard deviation follows from first-order error
propagation:

    sigma_SP = SP * sqrt((sigma_t1/t1)^2 + (sigma_t2/t2)^2)

Repetition spreads use the sample standard deviation (ddof=1). Both
runners honor the measurement protocol of syncing all workers before a
timed region: the threaded runner's workers rendezvous on a barrier
before any stage executes.
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ops import Operator, ScanKind, int_add
from .scans import serial_scan
from .simulate import CostModel, simulate
from .strategy import StrategyVariant
from .distributed import run_distributed

CSV_HEADER = "variant,kind,n,p,rep,t_serial,t_parallel,speedup,sigma"


def sigma_speedup(t_serial: float, s_serial: float,
                  t_parallel: float, s_parallel: float) -> float:
    sp = t_serial / t_parallel
    return sp * math.sqrt((s_serial / t_serial) ** 2
                          + (s_parallel / t_parallel) ** 2)


def _std(xs: Sequence[float]) -> float:
    if len(xs) < 2:
        return 0.0
    return float(np.std(xs, ddof=1))


@dataclass(frozen=True)
class ScalingRow:
    variant: StrategyVariant
    kind: ScanKind
    n: int
    p: int
    rep: int
    t_serial: float
    t_parallel: float
    speedup: float   # group-level ratio of means, repeated on each rep row
    sigma: float     # group-level propagated deviation


def rows_to_csv(rows: Sequence[ScalingRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_HEADER.split(","))
    for r in rows:
        w.writerow([r.variant.value, r.kind.value, r.n, r.p, r.rep,
                    repr(r.t_serial), repr(r.t_parallel),
                    repr(r.speedup), repr(r.sigma)])
    return buf.getvalue()


def _group_rows(variant, kind, n, p, serial_times, parallel_times):
    t1, t2 = float(np.mean(serial_times)), float(np.mean(parallel_times))
    sig = sigma_speedup(t1, _std(serial_times), t2, _std(parallel_times))
    sp = t1 / t2
    return [ScalingRow(variant, kind, n, p, r, ts, tp, sp, sig)
            for r, (ts, tp) in enumerate(zip(serial_times, parallel_times))]


def _simulated_times(variant, kind, n, p, cost_model, repetitions, seed):
    times = []
    for rep in range(repetitions):
        model = cost_model.with_seed((seed + 7919 * rep) & 0x7FFFFFFF)
        times.append(simulate(variant, kind, n, p, model).makespan)
    return times


def _threaded_times(variant, kind, n, p, repetitions,
                    op_factory: Callable[[], Operator],
                    data_factory: Callable[[int, int], list]):
    serial_t, par_t = [], []
    for rep in range(repetitions):
        data = data_factory(n, rep)
        t0 = time.perf_counter()
        serial_scan(data, op_factory())
        serial_t.append(time.perf_counter() - t0)
        t0 = time.perf_counter()
        run_distributed(data, op_factory(), variant, kind, p)
        par_t.append(time.perf_counter() - t0)
    return serial_t, par_t


def strong_scaling(variant: StrategyVariant, kind: ScanKind, n: int,
                   p_list: Sequence[int], *, cost_model: CostModel | None = None,
                   repetitions: int = 5, runner: str = "simulated",
                   seed: int = 0,
                   op_factory: Callable[[], Operator] = int_add,
                   data_factory: Callable[[int, int], list] | None = None
                   ) -> list[ScalingRow]:
    """Fixed problem size, growing worker counts.

    ``runner="simulated"`` prices the strategy under the cost model, the
    serial baseline under the same model on one worker. ``runner="threads"``
    wall-clocks real executions.
    """
    rows: list[ScalingRow] = []
    if runner == "simulated":
        if cost_model is None:
            raise ValueError("simulated runner needs a cost model")
        base = _simulated_times(variant, kind, n, 1, cost_model,
                                repetitions, seed)
        for p in p_list:
            par = _simulated_times(variant, kind, n, p, cost_model,
                                   repetitions, seed)
            rows.extend(_group_rows(variant, kind, n, p, base, par))
    elif runner == "threads":
        if data_factory is None:
            data_factory = _default_data
        for p in p_list:
            ts, tp = _threaded_times(variant, kind, n, p, repetitions,
                                     op_factory, data_factory)
            rows.extend(_group_rows(variant, kind, n, p, ts, tp))
    else:
        raise ValueError(f"unknown runner {runner!r}")
    return rows


def weak_scaling(variant: StrategyVariant, kind: ScanKind, k_per_worker: int,
                 p_list: Sequence[int], *, cost_model: CostModel | None = None,
                 repetitions: int = 5, runner: str = "simulated", seed: int = 0,
                 op_factory: Callable[[], Operator] = int_add,
                 data_factory: Callable[[int, int], list] | None = None
                 ) -> list[ScalingRow]:
    """Fixed work per worker: n = k * p for every p in the list."""
    rows: list[ScalingRow] = []
    for p in p_list:
        n = k_per_worker * p
        if runner == "simulated":
            if cost_model is None:
                raise ValueError("simulated runner needs a cost model")
            base = _simulated_times(variant, kind, n, 1, cost_model,
                                    repetitions, seed)
            par = _simulated_times(variant, kind, n, p, cost_model,
                                   repetitions, seed)
        elif runner == "threads":
            df = data_factory or _default_data
            base, par = _threaded_times(variant, kind, n, p, repetitions,
                                        op_factory, df)
        else:
            raise ValueError(f"unknown runner {runner!r}")
        rows.extend(_group_rows(variant, kind, n, p, base, par))
    return rows


def weak_growth(rows: Sequence[ScalingRow]) -> dict[int, float]:
    """Percentage growth of the mean parallel time relative to the
    smallest worker count in the row set."""
    by_p: dict[int, list[float]] = {}
    for r in rows:
        by_p.setdefault(r.p, []).append(r.t_parallel)
    ps = sorted(by_p)
    base = float(np.mean(by_p[ps[0]]))
    return {p: 100.0 * (float(np.mean(by_p[p])) - base) / base for p in ps}


def _default_data(n: int, rep: int) -> list[int]:
    rng = np.random.default_rng([n, rep])
    return [int(x) for x in rng.integers(-100, 100, size=n)]
