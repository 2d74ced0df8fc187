"""Deterministic discrete-event simulator for the distributed strategies.

Replays the exact worker scripts of :mod:`scanforge.strategy` against a
clock instead of an operator: every application draws its duration from
a cost model, messages become available ``latency`` after they are sent,
and blocking receives accumulate idle time. With a constant cost and
zero latency the resulting makespan reproduces the closed-form span of
:mod:`scanforge.costs` exactly; stochastic costs expose the load
imbalance that an unpredictable operator inflicts on tightly coupled
global stages.
"""
from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .ops import ScanKind
from .scans import WidthError, is_power_of_two
from .strategy import (PartitionError, StrategyVariant, compile_roles,
                       global_network, partition, worker_script)


class SimulationError(RuntimeError):
    pass


class SimDeadlockError(SimulationError):
    """No worker can make progress; some receive is never satisfied."""


# --- cost models -----------------------------------------------------------

@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise SimulationError("constant cost must be positive")

    def sample(self, rng):
        return self.value


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not (0 < self.low <= self.high):
            raise SimulationError("need 0 < low <= high")

    def sample(self, rng):
        return float(rng.uniform(self.low, self.high))


@dataclass(frozen=True)
class LogNormal:
    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise SimulationError("sigma must be non-negative")

    def sample(self, rng):
        return float(rng.lognormal(self.mu, self.sigma))


@dataclass(frozen=True)
class Trace:
    """Bootstrap resampling of recorded per-application costs."""
    costs: tuple[float, ...]

    def __post_init__(self):
        if not self.costs:
            raise SimulationError("trace must hold at least one cost")
        if any(c <= 0 for c in self.costs):
            raise SimulationError("trace costs must be positive")

    def sample(self, rng):
        return self.costs[int(rng.integers(0, len(self.costs)))]


Distribution = Union[Constant, Uniform, LogNormal, Trace]


@dataclass(frozen=True)
class CostModel:
    distribution: Distribution
    message_latency: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.message_latency < 0:
            raise SimulationError("latency must be non-negative")

    def with_seed(self, seed: int) -> "CostModel":
        return replace(self, seed=seed)


# --- report ----------------------------------------------------------------

STAGES = ("local1", "global", "local2")


@dataclass
class SimReport:
    variant: StrategyVariant
    kind: ScanKind
    n: int
    p: int
    makespan: float
    timelines: list[list[tuple[str, float, float]]]
    idle: list[float]
    stage_applications: list[dict[str, int]] = field(default_factory=list)

    @property
    def total_applications(self) -> int:
        return sum(sum(c.values()) for c in self.stage_applications)

    def applications_by_stage(self) -> dict[str, int]:
        out = {s: 0 for s in STAGES}
        for counts in self.stage_applications:
            for s, c in counts.items():
                out[s] += c
        return out

    def timeline_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["worker", "label", "start", "end"])
        for i, events in enumerate(self.timelines):
            for label, start, end in events:
                w.writerow([i, label, repr(start), repr(end)])
        return buf.getvalue()


class _SimWorker:
    __slots__ = ("idx", "gen", "clock", "idle", "timeline", "counts",
                 "resp", "wait_key", "done")

    def __init__(self, idx, gen):
        self.idx = idx
        self.gen = gen
        self.clock = 0.0
        self.idle = 0.0
        self.timeline: list[tuple[str, float, float]] = []
        self.counts = {s: 0 for s in STAGES}
        self.resp = None
        self.wait_key = None
        self.done = False

    def record(self, label, start, end):
        tl = self.timeline
        if tl and tl[-1][0] == label and tl[-1][2] == start:
            tl[-1] = (label, tl[-1][1], end)
        else:
            tl.append((label, start, end))


def simulate(variant: StrategyVariant, kind: ScanKind, n: int, p: int,
             cost_model: CostModel) -> SimReport:
    """Predict the makespan of one distributed scan under a cost model.

    Deterministic: the same configuration and seed always produce the
    same report. Cost draws use one RNG stream per worker, consumed in
    program order.
    """
    if p < 1 or p > n:
        raise PartitionError(f"need 1 <= p <= n, got p={p}, n={n}")
    if p > 1 and kind is not ScanKind.SERIAL and not is_power_of_two(p):
        raise WidthError(f"{kind.value} global stage needs a power-of-two "
                         f"worker count, got {p}")
    part = partition(n, p)
    roles = compile_roles(global_network(kind, p)) if p > 1 else None
    latency = cost_model.message_latency
    dist = cost_model.distribution
    rngs = [np.random.default_rng([cost_model.seed & 0x7FFFFFFF, i])
            for i in range(p)]
    workers = [_SimWorker(i, worker_script(i, p, [None] * part.size(i),
                                           variant, kind, roles, None))
               for i in range(p)]
    mailbox: dict[tuple, deque] = {}

    def advance(w: _SimWorker) -> bool:
        made = False
        while not w.done:
            if w.wait_key is not None:
                dq = mailbox.get(w.wait_key)
                if not dq:
                    return made
                avail = dq.popleft()
                if avail > w.clock:
                    w.idle += avail - w.clock
                    w.record("wait", w.clock, avail)
                    w.clock = avail
                w.wait_key = None
                w.resp = None
            try:
                eff = w.gen.send(w.resp)
            except StopIteration:
                w.done = True
                return True
            made = True
            w.resp = None
            what = eff[0]
            if what == "apply" or what == "charge":
                stage = eff[1]
                cost = dist.sample(rngs[w.idx])
                w.record(stage, w.clock, w.clock + cost)
                w.clock += cost
                w.counts[stage] += 1
            elif what == "send":
                key = (w.idx, eff[1], eff[2])
                mailbox.setdefault(key, deque()).append(w.clock + latency)
            elif what == "recv":
                w.wait_key = (eff[1], w.idx, eff[2])
            elif what == "probe":
                key = (eff[1], w.idx, eff[2])
                dq = mailbox.get(key)
                if dq and dq[0] <= w.clock:
                    dq.popleft()
                    w.resp = (True, None)
                else:
                    w.resp = (False, None)
            elif what == "barrier":
                pass
            else:
                raise SimulationError(f"unknown effect {what!r}")
        return made

    while True:
        pending = [w for w in workers if not w.done]
        if not pending:
            break
        progressed = False
        for w in pending:
            if advance(w):
                progressed = True
        if not progressed:
            stuck = [w.idx for w in workers if not w.done]
            raise SimDeadlockError(f"workers {stuck} are blocked forever")

    return SimReport(variant, kind, n, p,
                     makespan=max(w.clock for w in workers),
                     timelines=[w.timeline for w in workers],
                     idle=[w.idle for w in workers],
                     stage_applications=[w.counts for w in workers])
