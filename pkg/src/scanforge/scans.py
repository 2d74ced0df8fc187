"""Single-threaded reference executors for the five prefix-scan algorithms.

Every executor returns a fresh list and counts its operator applications
through the operator's counter. Parallel kinds require a power-of-two
width; pass ``pad=True`` to pad with identity elements up to the next
power of two (padding lanes are stripped from the output, their
applications still hit the counter).

Operand order is never changed anywhere: an output lane always holds
``x_0 (.) x_1 (.) ... (.) x_i`` with some parenthesization, which is what
makes these executors usable with merely approximately-associative
operators.
"""
from __future__ import annotations

from typing import Sequence, TypeVar

from .ops import Operator, ScanKind

T = TypeVar("T")


class EmptyInputError(ValueError):
    pass


class WidthError(ValueError):
    """Input width unsupported by the requested algorithm."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    m = 1
    while m < n:
        m <<= 1
    return m


def _check_width(n: int, pad: bool) -> bool:
    """Return True when a padded run is needed; raise when disallowed."""
    if n == 0:
        raise EmptyInputError("scan input must be non-empty")
    if is_power_of_two(n):
        return False
    if not pad:
        raise WidthError(f"width {n} is not a power of two (pass pad=True "
                         "to pad with identity elements)")
    return True


def serial_scan(data: Sequence[T], op: Operator[T]) -> list[T]:
    """Inclusive left fold chain; exactly len(data)-1 applications."""
    if len(data) == 0:
        raise EmptyInputError("scan input must be non-empty")
    out = [data[0]]
    for x in data[1:]:
        out.append(op.apply(out[-1], x))
    return out


def blelloch_scan(data: Sequence[T], op: Operator[T], pad: bool = False):
    """Work-efficient double tree sweep.

    Returns ``(exclusive_results, total_reduction)``. The reduction is the
    fold of all inputs, captured at the root before the down-sweep replaces
    it with the identity.
    """
    n = len(data)
    if _check_width(n, pad):
        m = next_power_of_two(n)
        excl, _ = blelloch_scan(list(data) + [op.identity] * (m - n), op)
        red = op.apply(excl[n - 1], data[n - 1]) if n > 1 else data[0]
        return excl[:n], red
    vals = list(data)
    levels = n.bit_length() - 1
    for i in range(levels):  # up-sweep
        step = 1 << (i + 1)
        half = 1 << i
        for j in range(step - 1, n, step):
            vals[j] = op.apply(vals[j - half], vals[j])
    reduction = vals[n - 1]
    vals[n - 1] = op.identity
    for i in range(levels - 1, -1, -1):  # down-sweep
        step = 1 << (i + 1)
        half = 1 << i
        for j in range(0, n, step):
            left = j + half - 1
            parent = j + step - 1
            tmp = vals[left]
            vals[left] = vals[parent]
            # parent holds the prefix of everything before the left block;
            # it must stay the left operand or operands get reordered
            vals[parent] = op.apply(vals[parent], tmp)
    return vals, reduction


def blelloch_inclusive(data: Sequence[T], op: Operator[T],
                       method: str = "apply") -> list[T]:
    """Inclusive adaptation of the exclusive Blelloch sweep.

    ``method="apply"``: one extra application per lane (the in-process
    default). ``method="shift"``: reuse neighbouring exclusive values and
    the captured reduction, costing no extra applications.
    """
    excl, reduction = blelloch_scan(data, op)
    if method == "apply":
        return [op.apply(e, x) for e, x in zip(excl, data)]
    if method == "shift":
        return list(excl[1:]) + [reduction]
    raise ValueError(f"unknown method {method!r}")


def brent_kung_scan(data: Sequence[T], op: Operator[T],
                    pad: bool = False) -> list[T]:
    """Work-efficient inclusive scan: up-sweep plus a breadth-first
    down-sweep where only right children compute."""
    n = len(data)
    if _check_width(n, pad):
        m = next_power_of_two(n)
        return brent_kung_scan(list(data) + [op.identity] * (m - n), op)[:n]
    vals = list(data)
    levels = n.bit_length() - 1
    for i in range(levels):
        step = 1 << (i + 1)
        half = 1 << i
        for j in range(step - 1, n, step):
            vals[j] = op.apply(vals[j - half], vals[j])
    for i in range(levels - 2, -1, -1):
        step = 1 << (i + 1)
        half = 1 << i
        for j in range(step, n, step):
            vals[j + half - 1] = op.apply(vals[j - 1], vals[j + half - 1])
    return vals


def kogge_stone_scan(data: Sequence[T], op: Operator[T],
                     pad: bool = False) -> list[T]:
    """Span-optimal inclusive scan (recursive doubling), double-buffered
    to dodge the write-after-read hazard."""
    n = len(data)
    if _check_width(n, pad):
        m = next_power_of_two(n)
        return kogge_stone_scan(list(data) + [op.identity] * (m - n), op)[:n]
    cur = list(data)
    stride = 1
    while stride < n:
        nxt = list(cur)
        for j in range(stride, n):
            nxt[j] = op.apply(cur[j - stride], cur[j])
        cur = nxt
        stride <<= 1
    return cur


def sklansky_scan(data: Sequence[T], op: Operator[T],
                  pad: bool = False) -> list[T]:
    """Divide-and-conquer inclusive scan; minimal span, fan-out grows."""
    n = len(data)
    if _check_width(n, pad):
        m = next_power_of_two(n)
        return sklansky_scan(list(data) + [op.identity] * (m - n), op)[:n]
    vals = list(data)
    levels = n.bit_length() - 1
    for i in range(levels):
        half = 1 << i
        for j in range(half - 1, n, half << 1):
            for k in range(half):
                dst = j + k + 1
                vals[dst] = op.apply(vals[j], vals[dst])
    return vals


def inclusive_to_exclusive(results: Sequence[T], op: Operator[T]) -> list[T]:
    """Shift right, identity first; costs zero applications."""
    return [op.identity] + list(results[:-1])


def exclusive_to_inclusive(results: Sequence[T], last_input: T,
                           op: Operator[T]) -> list[T]:
    """Shift left and close the last slot; costs exactly one application."""
    return list(results[1:]) + [op.apply(results[-1], last_input)]


def run_scan(kind: ScanKind, data: Sequence[T], op: Operator[T],
             pad: bool = False) -> list[T]:
    """Run a scan in its natural form (Blelloch: exclusive, rest inclusive)."""
    if kind is ScanKind.SERIAL:
        return serial_scan(data, op)
    if kind is ScanKind.BLELLOCH:
        return blelloch_scan(data, op, pad=pad)[0]
    if kind is ScanKind.BRENT_KUNG:
        return brent_kung_scan(data, op, pad=pad)
    if kind is ScanKind.KOGGE_STONE:
        return kogge_stone_scan(data, op, pad=pad)
    if kind is ScanKind.SKLANSKY:
        return sklansky_scan(data, op, pad=pad)
    raise ValueError(kind)


def inclusive_scan(kind: ScanKind, data: Sequence[T], op: Operator[T],
                   pad: bool = False) -> list[T]:
    """Run any kind and normalize the answer to inclusive form."""
    if kind is ScanKind.BLELLOCH:
        return blelloch_inclusive(data, op, method="shift")
    return run_scan(kind, data, op, pad=pad)
