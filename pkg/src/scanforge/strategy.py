"""Distributed scan strategies as engine-independent worker scripts.

A strategy is expressed once, as a generator per worker that yields
effect tuples and receives responses:

* ``("barrier",)``                  start-of-run synchronization
* ``("apply", stage, a, b)``        one operator application -> result
* ``("charge", stage)``             cost-model-only application (no data)
* ``("send", dst, tag, value)``     non-blocking message
* ``("recv", src, tag)``            blocking receive -> value
* ``("probe", src, tag)``           non-blocking receive -> (ok, value)

Local stages run as block effects so the engines can execute them
without per-element dispatch (hi bounds are inclusive):

* ``("scan_chunk", stage, chunk, lo, hi)``    in-place serial scan,
  hi - lo applications
* ``("reduce_chunk", stage, chunk)``          fold -> value,
  len(chunk) - 1 applications
* ``("apply_each", stage, left, chunk, lo, hi)``  chunk[i] = left (.) chunk[i],
  hi - lo + 1 applications

The threaded runtime interprets these against real queues and a real
operator; the simulator interprets them against a clock and a cost
model. Both therefore replay exactly the same message and application
structure.

Stages are labeled ``local1`` (per-worker scan/reduction), ``global``
(scan over the per-worker values) and ``local2`` (applying global
results locally).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .networks import Node, ScanNetwork, build_network
from .ops import ScanKind


class StrategyVariant(Enum):
    GENERAL_EXCLUSIVE = "general-exclusive"
    GENERAL_INCLUSIVE = "general-inclusive"
    GENERAL_EXCLUSIVE_OPTIMIZED = "general-exclusive-optimized"
    ALTERNATIVE = "alternative"

    @classmethod
    def parse(cls, name: str) -> "StrategyVariant":
        key = name.strip().lower().replace("_", "-")
        for v in cls:
            if v.value == key:
                return v
        raise ValueError(f"unknown strategy variant {name!r}; expected one of "
                         + ", ".join(v.value for v in cls))


class PartitionError(ValueError):
    pass


@dataclass(frozen=True)
class Partition:
    """Contiguous 1D block distribution; first n%p workers get the big blocks."""
    n: int
    p: int
    bounds: tuple[tuple[int, int], ...]   # inclusive (left, right) per worker

    def size(self, worker: int) -> int:
        l, r = self.bounds[worker]
        return r - l + 1

    @property
    def sizes(self) -> list[int]:
        return [self.size(i) for i in range(self.p)]

    def chunk(self, data: Sequence, worker: int) -> list:
        l, r = self.bounds[worker]
        return list(data[l:r + 1])


def partition(n: int, p: int) -> Partition:
    if p < 1:
        raise PartitionError("need at least one worker")
    if p > n:
        raise PartitionError(f"more workers ({p}) than elements ({n})")
    base, extra = divmod(n, p)
    bounds = []
    lo = 0
    for i in range(p):
        size = base + (1 if i < extra else 0)
        bounds.append((lo, lo + size - 1))
        lo += size
    return Partition(n, p, tuple(bounds))


# --- global-stage roles compiled from a circuit ----------------------------

@dataclass(frozen=True)
class StepRole:
    preset: bool
    sends: tuple[int, ...]
    recv: tuple[int, str] | None    # (src, "apply"|"swap"|"copy")


def compile_roles(net: ScanNetwork) -> list[list[StepRole]]:
    """Per-worker, per-step send/receive duties for running the circuit
    with one lane per worker. A node (src, dst) becomes a message
    src -> dst followed by one application (or a plain copy) at dst."""
    roles: list[list[StepRole]] = [[] for _ in range(net.n)]
    for k, step in enumerate(net.steps):
        preset_lanes = set(net.presets.get(k, ()))
        sends: dict[int, list[int]] = {}
        recvs: dict[int, tuple[int, str]] = {}
        for nd in step:
            sends.setdefault(nd.src, []).append(nd.dst)
            mode = "copy" if nd.copy else ("swap" if nd.swap else "apply")
            recvs[nd.dst] = (nd.src, mode)
        for lane in range(net.n):
            roles[lane].append(StepRole(lane in preset_lanes,
                                        tuple(sends.get(lane, ())),
                                        recvs.get(lane)))
    for lane in net.presets.get(len(net.steps), ()):
        for other in range(net.n):
            roles[other].append(StepRole(other == lane, (), None))
    return roles


def _run_role(worker, roles_w, value, identity):
    for k, role in enumerate(roles_w):
        if role.preset:
            value = identity
        for dst in role.sends:
            yield ("send", dst, ("net", k), value)
        if role.recv is not None:
            src, mode = role.recv
            other = yield ("recv", src, ("net", k))
            if mode == "copy":
                value = other
            elif mode == "swap":
                value = yield ("apply", "global", value, other)
            else:
                value = yield ("apply", "global", other, value)
    return value


def _global_exclusive(worker, p, kind, roles, v, identity):
    """Yield the worker's exclusive prefix over the per-worker values."""
    if kind is ScanKind.SERIAL:
        # forward chain: each interior worker folds its value in and relays
        if worker == 0:
            yield ("send", 1, "chain", v)
            return identity
        e = yield ("recv", worker - 1, "chain")
        if worker < p - 1:
            nxt = yield ("apply", "global", e, v)
            yield ("send", worker + 1, "chain", nxt)
        return e
    if kind is ScanKind.BLELLOCH:
        result = yield from _run_role(worker, roles[worker], v, identity)
        return result
    # inclusive circuits: run, then shift results one worker rightward
    incl = yield from _run_role(worker, roles[worker], v, identity)
    if worker < p - 1:
        yield ("send", worker + 1, "xshift", incl)
    if worker == 0:
        return identity
    e = yield ("recv", worker - 1, "xshift")
    return e


def _global_inclusive(worker, p, kind, roles, v, identity):
    """Yield the worker's inclusive prefix over the per-worker values."""
    if kind is ScanKind.BLELLOCH:
        e = yield from _run_role(worker, roles[worker], v, identity)
        if worker == 0:
            return v
        incl = yield ("apply", "global", e, v)
        return incl
    result = yield from _run_role(worker, roles[worker], v, identity)
    return result


def global_network(kind: ScanKind, p: int) -> ScanNetwork | None:
    """Circuit backing the global stage, or None when a plain chain is used."""
    if kind is ScanKind.SERIAL:
        return build_network(ScanKind.SERIAL, p)   # used in inclusive mode only
    return build_network(kind, p)


def worker_script(worker: int, p: int, chunk: list,
                  variant: StrategyVariant, kind: ScanKind,
                  roles, identity):
    """Full per-worker program; returns the worker's final chunk.

    With p == 1 every variant degenerates to the plain serial scan: no
    global stage runs and the second local stage is skipped.
    """
    k = len(chunk)
    yield ("barrier",)

    if variant is StrategyVariant.ALTERNATIVE and p > 1:
        v = yield ("reduce_chunk", "local1", chunk)   # chunk stays untouched
    else:
        yield ("scan_chunk", "local1", chunk, 0, k - 1)
        v = chunk[k - 1]

    if p == 1:
        return chunk

    if variant is StrategyVariant.GENERAL_EXCLUSIVE:
        e = yield from _global_exclusive(worker, p, kind, roles, v, identity)
        if worker > 0:
            yield ("apply_each", "local2", e, chunk, 0, k - 1)

    elif variant is StrategyVariant.GENERAL_INCLUSIVE:
        incl = yield from _global_inclusive(worker, p, kind, roles, v, identity)
        # one extra round of communication turns inclusive into exclusive
        if worker < p - 1:
            yield ("send", worker + 1, "ishift", incl)
        if worker > 0:
            e = yield ("recv", worker - 1, "ishift")
            if k > 1:
                yield ("apply_each", "local2", e, chunk, 0, k - 2)
            chunk[k - 1] = incl             # replaces the last loop iteration

    elif variant is StrategyVariant.GENERAL_EXCLUSIVE_OPTIMIZED:
        e = yield from _global_exclusive(worker, p, kind, roles, v, identity)
        if worker > 1:
            yield ("send", worker - 1, "oshift", e)
        if worker > 0:
            if k > 1:
                yield ("apply_each", "local2", e, chunk, 0, k - 2)
            got, val = False, None
            if worker < p - 1:
                got, val = yield ("probe", worker + 1, "oshift")
            if got:
                chunk[k - 1] = val          # successor's exclusive == our inclusive
            else:
                chunk[k - 1] = yield ("apply", "local2", e, chunk[k - 1])

    elif variant is StrategyVariant.ALTERNATIVE:
        e = yield from _global_exclusive(worker, p, kind, roles, v, identity)
        chunk[0] = yield ("apply", "local2", e, chunk[0])
        # the span/work model books the seed merge on top of a full
        # k-iteration sweep; real execution needs only k applications
        yield ("charge", "local2")
        yield ("scan_chunk", "local2", chunk, 0, k - 1)

    else:
        raise ValueError(variant)
    return chunk
