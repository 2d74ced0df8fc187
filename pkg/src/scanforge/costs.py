"""Closed-form span/work accounting for every scan kind and strategy.

All counts are operator applications. ``span`` is the length of the
longest dependency chain of applications (the lower bound on parallel
time), ``work`` the total number of applications. The distributed
figures assume the critical path runs through the last worker, which
holds whenever the data is evenly distributed; uneven partitions are
priced by replaying the strategy under a unit cost model instead.

The global-stage span table prices asynchronous execution: a worker
proceeds as soon as its inputs arrive and its own earlier duties are
done. For the serial chain, Blelloch, Kogge-Stone and Sklansky this
equals the circuit depth; Brent-Kung's interior down-sweep values
finish earlier than the full depth, so its exclusive value for the last
worker arrives after max(log2 P, 2*log2 P - 2) steps.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

from .ops import ScanKind
from .scans import WidthError, is_power_of_two
from .strategy import PartitionError, StrategyVariant, partition

K = ScanKind
V = StrategyVariant

# variant pairing used for the per-kind speedup bounds: the serial chain
# and Blelloch deliver exclusive prefixes directly, the span-optimal
# kinds are priced with the inclusive-scan optimization
PAPER_VARIANT = {
    K.SERIAL: V.GENERAL_EXCLUSIVE,
    K.BLELLOCH: V.GENERAL_EXCLUSIVE,
    K.KOGGE_STONE: V.GENERAL_INCLUSIVE,
    K.SKLANSKY: V.GENERAL_INCLUSIVE,
    K.BRENT_KUNG: V.GENERAL_INCLUSIVE,
}

_EXCLUSIVE_MODE = {V.GENERAL_EXCLUSIVE, V.GENERAL_EXCLUSIVE_OPTIMIZED,
                   V.ALTERNATIVE}


def _check_width(n: int):
    if n < 1 or not is_power_of_two(n):
        raise WidthError(f"width must be a power of two >= 1, got {n}")


def _log2(n: int) -> int:
    return n.bit_length() - 1


def span(kind: ScanKind, n: int) -> int:
    """Critical-path applications of one in-process scan of width n."""
    _check_width(n)
    if n == 1:
        return 0
    lg = _log2(n)
    return {
        K.SERIAL: n - 1,
        K.BLELLOCH: 2 * lg,
        K.BRENT_KUNG: 2 * lg - 1,
        K.KOGGE_STONE: lg,
        K.SKLANSKY: lg,
    }[kind]


def work(kind: ScanKind, n: int) -> int:
    """Total applications of one in-process scan of width n."""
    _check_width(n)
    if n == 1:
        return 0
    lg = _log2(n)
    return {
        K.SERIAL: n - 1,
        K.BLELLOCH: 2 * (n - 1),
        K.BRENT_KUNG: 2 * n - lg - 2,
        K.KOGGE_STONE: n * lg - n + 1,
        K.SKLANSKY: (n * lg) // 2,
    }[kind]


def deficiency(size: int, depth: int, n: int) -> int:
    """Slack against the size+depth >= 2N-2 circuit bound; never positive
    for a valid prefix circuit, zero for the serial chain."""
    return 2 * n - 2 - size - depth


def global_span(kind: ScanKind, p: int, mode: str = "exclusive") -> int:
    """Steps between the local reductions and the last worker owning the
    global value it needs for its second local stage."""
    if p == 1:
        return 0
    if kind is not ScanKind.SERIAL:
        _check_width(p)
    lg = _log2(p)
    if mode == "exclusive":
        table = {
            K.SERIAL: p - 2,
            K.BLELLOCH: 2 * lg,
            K.KOGGE_STONE: lg,
            K.SKLANSKY: lg,
            K.BRENT_KUNG: max(lg, 2 * lg - 2),
        }
    else:
        table = {
            K.SERIAL: p - 1,
            K.BLELLOCH: 2 * lg + 1,
            K.KOGGE_STONE: lg,
            K.SKLANSKY: lg,
            K.BRENT_KUNG: max(lg, 2 * lg - 2),
        }
    return max(table[kind], 0)


def global_work(kind: ScanKind, p: int, mode: str = "exclusive") -> int:
    if p == 1:
        return 0
    if kind is not ScanKind.SERIAL:
        _check_width(p)
    lg = _log2(p)
    if kind is K.SERIAL:
        return p - 2 if mode == "exclusive" else p - 1
    if kind is K.BLELLOCH:
        # inclusive mode adds one application on every worker but the first
        return 2 * (p - 1) if mode == "exclusive" else 3 * (p - 1)
    return work(kind, p)


def _mode(variant: StrategyVariant) -> str:
    return "exclusive" if variant in _EXCLUSIVE_MODE else "inclusive"


def _stage2_span(variant: StrategyVariant, k: int) -> int:
    if variant is V.GENERAL_INCLUSIVE:
        return k - 1
    if variant is V.ALTERNATIVE:
        return k + 1
    return k


def _stage2_work(variant: StrategyVariant, n: int, p: int) -> int:
    k = n // p
    if variant is V.GENERAL_EXCLUSIVE:
        return (p - 1) * k
    if variant is V.GENERAL_INCLUSIVE:
        return (p - 1) * (k - 1)
    if variant is V.GENERAL_EXCLUSIVE_OPTIMIZED:
        # assumes every probe succeeds; real counts depend on arrival times
        return (p - 1) * k - max(p - 2, 0)
    return p * (k + 1)   # alternative: all workers active, merge included


@dataclass(frozen=True)
class DistributedCostFigures:
    kind: ScanKind
    variant: StrategyVariant
    n: int
    p: int
    local1_span: int
    global_span: int
    local2_span: int
    total_span: int
    total_work: int
    even: bool = True
    per_worker_local1: tuple[int, ...] | None = None
    per_worker_local2: tuple[int, ...] | None = None


def distributed_span(kind: ScanKind, n: int, p: int,
                     variant: StrategyVariant = V.GENERAL_EXCLUSIVE
                     ) -> DistributedCostFigures:
    """Span/work figures of one distributed scan.

    With p | n the stage spans add up along the last worker's path and
    total = local1 + global + local2. With one worker everything
    degenerates to the serial scan. Uneven partitions get per-worker
    stage spans and a max-combination total obtained by unit-cost
    replay, because summing per-stage maxima over different workers can
    overprice the critical path.
    """
    if p < 1 or p > n:
        raise PartitionError(f"need 1 <= p <= n, got p={p}, n={n}")
    if p == 1:
        return DistributedCostFigures(kind, variant, n, p, n - 1, 0, 0,
                                      n - 1, n - 1)
    if n % p == 0:
        k = n // p
        ls1 = k - 1
        gs = global_span(kind, p, _mode(variant))
        ls2 = _stage2_span(variant, k)
        return DistributedCostFigures(
            kind, variant, n, p, ls1, gs, ls2, ls1 + gs + ls2,
            distributed_work(kind, n, p, variant))
    sizes = partition(n, p).sizes
    ls1 = tuple(s - 1 for s in sizes)
    ls2 = tuple(_stage2_span(variant, s) if (i > 0 or variant is V.ALTERNATIVE)
                else 0 for i, s in enumerate(sizes))
    from .simulate import Constant, CostModel, simulate  # unit-cost replay
    rep = simulate(variant, kind, n, p, CostModel(Constant(1.0)))
    return DistributedCostFigures(
        kind, variant, n, p, max(ls1), global_span(kind, p, _mode(variant)),
        max(ls2), int(round(rep.makespan)), rep.total_applications,
        even=False, per_worker_local1=ls1, per_worker_local2=ls2)


def distributed_work(kind: ScanKind, n: int, p: int,
                     variant: StrategyVariant = V.GENERAL_EXCLUSIVE) -> int:
    if p == 1:
        return n - 1
    if n % p:
        raise PartitionError("closed-form work needs p | n")
    return (n - p) + global_work(kind, p, _mode(variant)) \
        + _stage2_work(variant, n, p)


def theoretical_speedup(kind: ScanKind, n: int, p: int,
                        variant: StrategyVariant | None = None) -> float:
    """Serial span over distributed span; the upper bound on speedup."""
    v = PAPER_VARIANT[kind] if variant is None else variant
    return (n - 1) / distributed_span(kind, n, p, v).total_span


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, int(math.isqrt(n)) + 1) if n % d == 0]
    out += [n // d for d in reversed(out) if d * d != n]
    return out


def speedup_sweep(kind: ScanKind, n: int,
                  variant: StrategyVariant | None = None
                  ) -> list[tuple[int, float]]:
    """(p, speedup) over every evenly dividing worker count with a valid
    global stage (powers of two, plus any divisor for the serial chain)."""
    pts = []
    for p in _divisors(n):
        if p > 1 and kind is not ScanKind.SERIAL and not is_power_of_two(p):
            continue
        pts.append((p, theoretical_speedup(kind, n, p, variant)))
    return pts


@dataclass(frozen=True)
class OptimalWorkers:
    kind: ScanKind
    n: int
    stationary_point: float
    sweep_argmax: int
    saturates: bool     # sweep speedup never drops below its max up to p == n


def optimal_workers(kind: ScanKind, n: int) -> OptimalWorkers:
    """Worker count maximizing the theoretical speedup.

    The stationary point comes from minimizing the span denominator in
    real arithmetic: sqrt(2N) for the serial chain, N*ln2 for the tree
    sweeps, 2N*ln2 for the span-optimal kinds. The integer sweep reports
    the best evenly dividing worker count and whether the speedup is
    still at its maximum when p reaches n.
    """
    if n < 2:
        raise WidthError("need n >= 2")
    p0 = {
        K.SERIAL: math.sqrt(2 * n),
        K.BLELLOCH: n * math.log(2),
        K.BRENT_KUNG: n * math.log(2),
        K.KOGGE_STONE: 2 * n * math.log(2),
        K.SKLANSKY: 2 * n * math.log(2),
    }[kind]
    pts = speedup_sweep(kind, n)
    best_p, best_sp = max(pts, key=lambda t: (t[1], -t[0]))
    at_n = pts[-1]
    saturates = at_n[0] == n and math.isclose(at_n[1], best_sp, rel_tol=1e-12)
    return OptimalWorkers(kind, n, p0, best_p, saturates)


CSV_HEADER = "kind,variant,N,P,local1,global,local2,total_span,total_work,speedup"


def cost_csv(entries) -> str:
    """CSV for (kind, variant, n, p) tuples using the closed forms."""
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(CSV_HEADER.split(","))
    for kind, variant, n, p in entries:
        fig = distributed_span(kind, n, p, variant)
        w.writerow([kind.value, variant.value, n, p, fig.local1_span,
                    fig.global_span, fig.local2_span, fig.total_span,
                    fig.total_work, repr((n - 1) / fig.total_span)])
    return buf.getvalue()
