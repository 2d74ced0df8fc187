"""Threaded runtime for the distributed scan strategies.

Workers are OS threads with fully isolated state; they communicate only
through typed point-to-point messages and one start barrier. Elements
cross worker boundaries by value (chunks are copies), so the operator
only has to tolerate concurrent invocation on distinct workers.
"""
from __future__ import annotations

import threading
from collections import deque
from typing import Sequence, TypeVar

from .networks import execute_network
from .ops import Operator, ScanKind
from .scans import WidthError, is_power_of_two, serial_scan
from .strategy import (Partition, PartitionError, StrategyVariant,
                       compile_roles, global_network, partition,
                       worker_script)

T = TypeVar("T")

__all__ = ["Partition", "PartitionError", "StrategyVariant", "partition",
           "run_distributed", "global_stage", "WorkerError",
           "DistributedError", "DeadlockError"]


class DeadlockError(RuntimeError):
    pass


class WorkerError(RuntimeError):
    def __init__(self, worker: int, cause: BaseException, stage_hint: str = ""):
        self.worker = worker
        self.cause = cause
        hint = f" during {stage_hint}" if stage_hint else ""
        super().__init__(f"worker {worker} failed{hint}: {cause!r}")


class DistributedError(RuntimeError):
    """Aggregate of per-worker failures; names every failing worker."""

    def __init__(self, failures: list[WorkerError]):
        self.failures = failures
        workers = ", ".join(str(f.worker) for f in failures)
        detail = "; ".join(str(f) for f in failures)
        super().__init__(f"workers [{workers}] failed: {detail}")


class _Post:
    """Point-to-point mail: one deque per (src, dst, tag) key."""

    def __init__(self):
        self._slots: dict[tuple, deque] = {}
        self._cond = threading.Condition()

    def send(self, key, value):
        with self._cond:
            self._slots.setdefault(key, deque()).append(value)
            self._cond.notify_all()

    def recv(self, key, timeout):
        with self._cond:
            ok = self._cond.wait_for(
                lambda: self._slots.get(key), timeout=timeout)
            if not ok:
                raise DeadlockError(f"receive timed out waiting for {key}")
            return self._slots[key].popleft()

    def probe(self, key):
        with self._cond:
            dq = self._slots.get(key)
            if dq:
                return True, dq.popleft()
            return False, None


def _validate(n: int, p: int, kind: ScanKind):
    if p < 1 or p > n:
        raise PartitionError(f"need 1 <= p <= n, got p={p}, n={n}")
    if p > 1 and kind is not ScanKind.SERIAL and not is_power_of_two(p):
        raise WidthError(f"{kind.value} global stage needs a power-of-two "
                         f"worker count, got {p}")


def run_distributed(data: Sequence[T], op: Operator[T],
                    variant: StrategyVariant, kind: ScanKind, p: int,
                    timeout: float = 60.0) -> list[T]:
    """Inclusive scan of ``data`` on ``p`` message-passing workers.

    ``kind`` selects the global-stage schedule over the per-worker
    reductions; any kind combines with any variant. For associative
    operators the result equals ``serial_scan`` exactly; approximately
    associative ones agree within the operator's own tolerance.
    """
    n = len(data)
    _validate(n, p, kind)
    if p == 1:
        return serial_scan(data, op)
    part = partition(n, p)
    roles = compile_roles(global_network(kind, p))
    post = _Post()
    barrier = threading.Barrier(p)
    results: list[list[T] | None] = [None] * p
    failures: list[WorkerError] = []
    fail_lock = threading.Lock()

    def drive(i: int):
        script = worker_script(i, p, part.chunk(data, i), variant, kind,
                               roles, op.identity)
        resp = None
        stage = "startup"
        try:
            while True:
                try:
                    eff = script.send(resp)
                except StopIteration as stop:
                    results[i] = stop.value
                    return
                resp = None
                what = eff[0]
                if what == "apply":
                    stage = eff[1]
                    resp = op.apply(eff[2], eff[3])
                elif what == "scan_chunk":
                    stage, chunk, lo, hi = eff[1], eff[2], eff[3], eff[4]
                    for j in range(lo + 1, hi + 1):
                        chunk[j] = op.apply(chunk[j - 1], chunk[j])
                elif what == "apply_each":
                    stage, left, chunk, lo, hi = eff[1:]
                    for j in range(lo, hi + 1):
                        chunk[j] = op.apply(left, chunk[j])
                elif what == "reduce_chunk":
                    stage, chunk = eff[1], eff[2]
                    acc = chunk[0]
                    for x in chunk[1:]:
                        acc = op.apply(acc, x)
                    resp = acc
                elif what == "send":
                    post.send((i, eff[1], eff[2]), eff[3])
                elif what == "recv":
                    resp = post.recv((eff[1], i, eff[2]), timeout)
                elif what == "probe":
                    resp = post.probe((eff[1], i, eff[2]))
                elif what == "barrier":
                    barrier.wait(timeout)
                elif what == "charge":
                    pass
                else:
                    raise RuntimeError(f"unknown effect {what!r}")
        except BaseException as exc:  # noqa: BLE001 - aggregated for the caller
            with fail_lock:
                failures.append(WorkerError(i, exc, stage))
            barrier.abort()

    threads = [threading.Thread(target=drive, args=(i,), name=f"scan-worker-{i}")
               for i in range(p)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        real = [f for f in failures
                if not isinstance(f.cause, threading.BrokenBarrierError)]
        raise DistributedError(real or failures)
    out: list[T] = []
    for chunk in results:
        assert chunk is not None
        out.extend(chunk)
    return out


def global_stage(values: Sequence[T], op: Operator[T], kind: ScanKind,
                 mode: str = "exclusive") -> list[T]:
    """Reference semantics of the global stage, one value per worker.

    ``exclusive``: worker i gets the fold of values[0..i-1] (identity for
    worker 0). ``inclusive``: worker i gets the fold of values[0..i].
    Inherently inclusive kinds realize exclusive mode through the extra
    neighbour-shift round; Blelloch realizes inclusive mode with one
    extra application per worker.
    """
    p = len(values)
    if mode not in ("exclusive", "inclusive"):
        raise ValueError(f"mode must be exclusive or inclusive, not {mode!r}")
    if p == 0:
        raise PartitionError("global stage needs at least one value")
    if p == 1:
        return [op.identity] if mode == "exclusive" else [values[0]]
    if kind is not ScanKind.SERIAL and not is_power_of_two(p):
        raise WidthError(f"{kind.value} global stage needs a power-of-two "
                         f"worker count, got {p}")
    if kind is ScanKind.SERIAL:
        if mode == "exclusive":
            out = [op.identity, values[0]]
            for i in range(1, p - 1):
                out.append(op.apply(out[-1], values[i]))
            return out
        return serial_scan(values, op)
    net = global_network(kind, p)
    lanes = execute_network(net, values, op)
    if kind is ScanKind.BLELLOCH:
        if mode == "exclusive":
            return lanes
        return [values[0]] + [op.apply(e, v)
                              for e, v in zip(lanes[1:], values[1:])]
    if mode == "inclusive":
        return lanes
    return [op.identity] + lanes[:-1]
