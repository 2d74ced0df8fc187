"""Prefix circuits as explicit step-by-step dependency graphs.

A :class:`ScanNetwork` materializes one scan algorithm as data: ordered
step sets of nodes, where every node reads lane values from strictly
earlier steps (all nodes in a step see the pre-step state). This single
representation drives verification, size/depth counting, the distributed
global-stage schedule, and the cost simulator.

Node semantics, for lanes ``v``:

* ``(src, dst)``          ``v[dst] = op(v[src], v[dst])``
* ``(src, dst, swap)``    ``v[dst] = op(v[dst], v[src])``
* ``(src, dst, copy)``    ``v[dst] = v[src]`` (moves data, no application)

Blelloch's mid-circuit identity write is kept out of the step sets as a
*preset*: before step ``k`` the named lanes are overwritten with the
operator identity. Presets cost nothing and do not add depth, matching
the usual 2*log2(N)-step accounting of the double sweep.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TypeVar

from .ops import Operator, ScanKind
from .scans import WidthError, is_power_of_two, next_power_of_two

T = TypeVar("T")


@dataclass(frozen=True)
class Node:
    src: int
    dst: int
    copy: bool = False
    swap: bool = False   # apply as op(dst, src); only Blelloch's down-sweep needs it


class MalformedNetworkError(ValueError):
    """Structural problem; the message names the offending node."""


@dataclass
class ScanNetwork:
    kind: ScanKind
    n: int
    steps: list[list[Node]]
    # lanes reset to the identity after `key` steps have executed
    presets: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def inclusive(self) -> bool:
        return self.kind.inclusive

    @property
    def size(self) -> int:
        """Number of operator applications (copy nodes are free)."""
        return sum(1 for step in self.steps for nd in step if not nd.copy)

    @property
    def depth(self) -> int:
        return sum(1 for step in self.steps if step)


def build_network(kind: ScanKind, n: int) -> ScanNetwork:
    if n < 1:
        raise WidthError("network width must be >= 1")
    if kind is not ScanKind.SERIAL and not is_power_of_two(n):
        raise WidthError(f"{kind.value} networks need a power-of-two width, got {n}")
    builder = {
        ScanKind.SERIAL: _build_serial,
        ScanKind.BLELLOCH: _build_blelloch,
        ScanKind.BRENT_KUNG: _build_brent_kung,
        ScanKind.KOGGE_STONE: _build_kogge_stone,
        ScanKind.SKLANSKY: _build_sklansky,
    }[kind]
    return builder(n)


def _build_serial(n):
    steps = [[Node(i - 1, i)] for i in range(1, n)]
    return ScanNetwork(ScanKind.SERIAL, n, steps)


def _upsweep_steps(n):
    steps = []
    levels = n.bit_length() - 1
    for i in range(levels):
        step = 1 << (i + 1)
        half = 1 << i
        steps.append([Node(j - half, j) for j in range(step - 1, n, step)])
    return steps


def _build_blelloch(n):
    steps = _upsweep_steps(n)
    presets = {len(steps): (n - 1,)}
    levels = n.bit_length() - 1
    for i in range(levels - 1, -1, -1):
        step = 1 << (i + 1)
        half = 1 << i
        nodes = []
        for j in range(0, n, step):
            left = j + half - 1
            parent = j + step - 1
            nodes.append(Node(parent, left, copy=True))
            nodes.append(Node(left, parent, swap=True))
        steps.append(nodes)
    return ScanNetwork(ScanKind.BLELLOCH, n, steps, presets)


def _build_brent_kung(n):
    steps = _upsweep_steps(n)
    levels = n.bit_length() - 1
    for i in range(levels - 2, -1, -1):
        step = 1 << (i + 1)
        half = 1 << i
        steps.append([Node(j - 1, j + half - 1) for j in range(step, n, step)])
    return ScanNetwork(ScanKind.BRENT_KUNG, n, steps)


def _build_kogge_stone(n):
    steps = []
    stride = 1
    while stride < n:
        steps.append([Node(j - stride, j) for j in range(stride, n)])
        stride <<= 1
    return ScanNetwork(ScanKind.KOGGE_STONE, n, steps)


def _build_sklansky(n):
    steps = []
    levels = n.bit_length() - 1
    for i in range(levels):
        half = 1 << i
        nodes = []
        for j in range(half - 1, n, half << 1):
            nodes.extend(Node(j, j + k + 1) for k in range(half))
        steps.append(nodes)
    return ScanNetwork(ScanKind.SKLANSKY, n, steps)


def check_structure(net: ScanNetwork) -> None:
    """Raise MalformedNetworkError on the first structural violation."""
    for k, step in enumerate(net.steps):
        seen = set()
        for nd in step:
            where = f"step {k}, node ({nd.src},{nd.dst})"
            if not (0 <= nd.src < net.n and 0 <= nd.dst < net.n):
                raise MalformedNetworkError(f"lane index out of range at {where}")
            if nd.src == nd.dst:
                raise MalformedNetworkError(f"node reads its own lane at {where}")
            if nd.copy and nd.swap:
                raise MalformedNetworkError(f"copy node cannot swap at {where}")
            if nd.dst in seen:
                raise MalformedNetworkError(f"duplicate destination at {where}")
            seen.add(nd.dst)
    for pos, lanes in net.presets.items():
        if not (0 <= pos <= len(net.steps)):
            raise MalformedNetworkError(f"preset position {pos} out of range")
        for lane in lanes:
            if not (0 <= lane < net.n):
                raise MalformedNetworkError(f"preset lane {lane} out of range")


def execute_network(net: ScanNetwork, data: Sequence[T],
                    op: Operator[T]) -> list[T]:
    """Run the circuit node by node over concrete data.

    Each step is compute-then-commit (the double-buffering discipline), so
    within a step every node reads pre-step lane values.
    """
    if len(data) != net.n:
        raise WidthError(f"network width {net.n} != data length {len(data)}")
    lanes = list(data)
    for k, step in enumerate(net.steps):
        for lane in net.presets.get(k, ()):
            lanes[lane] = op.identity
        writes = []
        for nd in step:
            if nd.copy:
                val = lanes[nd.src]
            elif nd.swap:
                val = op.apply(lanes[nd.dst], lanes[nd.src])
            else:
                val = op.apply(lanes[nd.src], lanes[nd.dst])
            writes.append((nd.dst, val))
        for dst, val in writes:
            lanes[dst] = val
    for lane in net.presets.get(len(net.steps), ()):
        lanes[lane] = op.identity
    return lanes


@dataclass
class NetworkReport:
    kind: ScanKind
    n: int
    size: int
    depth: int
    lane_ok: list[bool]

    @property
    def valid(self) -> bool:
        return all(self.lane_ok)

    @property
    def bad_lanes(self) -> list[int]:
        return [i for i, ok in enumerate(self.lane_ok) if not ok]


def verify_network(net: ScanNetwork) -> NetworkReport:
    """Symbolically check every output lane against the ordered left fold.

    Lanes are interpreted in the free monoid (tuples of input indices,
    concatenation as the operator), so any operand reordering or missing
    input is caught exactly. Inclusive circuits must produce
    ``(0, .., i)`` on lane i; exclusive ones ``(0, .., i-1)``.
    """
    check_structure(net)
    from .ops import tuple_concat
    sym = execute_network(net, [(i,) for i in range(net.n)], tuple_concat())
    if net.inclusive:
        expect = [tuple(range(i + 1)) for i in range(net.n)]
    else:
        expect = [tuple(range(i)) for i in range(net.n)]
    lane_ok = [s == e for s, e in zip(sym, expect)]
    return NetworkReport(net.kind, net.n, net.size, net.depth, lane_ok)


@dataclass
class PadReport:
    width: int
    padded_width: int
    applications: int
    padding_applications: int


def padded_scan(kind: ScanKind, data: Sequence[T], op: Operator[T]):
    """Scan an arbitrary-width input through an identity-padded circuit.

    Returns ``(results, PadReport)``; applications whose destination lane
    lies in the padding are reported separately (they still hit the
    operator counter).
    """
    n = len(data)
    if n == 0:
        raise WidthError("scan input must be non-empty")
    m = n if kind is ScanKind.SERIAL else next_power_of_two(n)
    net = build_network(kind, m)
    lanes = list(data) + [op.identity] * (m - n)
    total = 0
    padding = 0
    for k, step in enumerate(net.steps):
        for lane in net.presets.get(k, ()):
            lanes[lane] = op.identity
        writes = []
        for nd in step:
            if nd.copy:
                val = lanes[nd.src]
            else:
                total += 1
                if nd.dst >= n:
                    padding += 1
                a, b = (nd.dst, nd.src) if nd.swap else (nd.src, nd.dst)
                val = op.apply(lanes[a], lanes[b])
            writes.append((nd.dst, val))
        for dst, val in writes:
            lanes[dst] = val
    for lane in net.presets.get(len(net.steps), ()):
        lanes[lane] = op.identity
    return lanes[:n], PadReport(n, m, total, padding)


# --- text and DOT serialization -------------------------------------------

def serialize_network(net: ScanNetwork) -> str:
    lines = [f"n {net.n} kind {net.kind.value}"]
    for pos in sorted(net.presets):
        lanes = " ".join(str(l) for l in net.presets[pos])
        lines.append(f"preset {pos}: {lanes}")
    for k, step in enumerate(net.steps):
        parts = []
        for nd in step:
            flag = ",c" if nd.copy else (",r" if nd.swap else "")
            parts.append(f"({nd.src},{nd.dst}{flag})")
        lines.append(f"step {k}: " + " ".join(parts))
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> ScanNetwork:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n "):
        raise MalformedNetworkError("missing 'n <width> kind <name>' header")
    head = lines[0].split()
    try:
        n = int(head[1])
        kind = ScanKind.parse(head[3])
    except (IndexError, ValueError) as exc:
        raise MalformedNetworkError(f"bad header {lines[0]!r}") from exc
    presets: dict[int, tuple[int, ...]] = {}
    steps: dict[int, list[Node]] = {}
    for ln in lines[1:]:
        tag, _, rest = ln.partition(" ")
        if tag == "preset":
            pos, _, lanes = rest.partition(":")
            presets[int(pos)] = tuple(int(x) for x in lanes.split())
        elif tag == "step":
            idx, _, body = rest.partition(":")
            nodes = []
            for tok in body.split():
                inner = tok.strip("()").split(",")
                src, dst = int(inner[0]), int(inner[1])
                flag = inner[2] if len(inner) > 2 else ""
                nodes.append(Node(src, dst, copy=(flag == "c"),
                                  swap=(flag == "r")))
            steps[int(idx)] = nodes
        else:
            raise MalformedNetworkError(f"unrecognized line {ln!r}")
    ordered = [steps.get(i, []) for i in range(max(steps, default=-1) + 1)]
    return ScanNetwork(kind, n, ordered, presets)


def to_dot(net: ScanNetwork) -> str:
    """DOT digraph: one column per lane, one row per step."""
    out = [f'digraph "{net.kind.value}_{net.n}" {{', "  rankdir=TB;"]
    last = {i: f"in{i}" for i in range(net.n)}
    for i in range(net.n):
        out.append(f'  in{i} [label="x{i}", shape=plaintext];')
    for k, step in enumerate(net.steps):
        for lane in net.presets.get(k, ()):
            name = f"id{k}_{lane}"
            out.append(f'  {name} [label="I", shape=plaintext];')
            last[lane] = name
        pre = dict(last)
        for nd in step:
            name = f"s{k}_{nd.dst}"
            shape = "circle" if not nd.copy else "point"
            out.append(f'  {name} [label="", shape={shape}];')
            out.append(f"  {pre[nd.src]} -> {name};")
            if not nd.copy:
                out.append(f"  {pre[nd.dst]} -> {name};")
            last[nd.dst] = name
    for i in range(net.n):
        out.append(f'  out{i} [label="y{i}", shape=plaintext];')
        out.append(f"  {last[i]} -> out{i};")
    out.append("}")
    return "\n".join(out) + "\n"


def scan_via_network(kind: ScanKind, data: Sequence[T],
                     op: Operator[T]) -> list[T]:
    return execute_network(build_network(kind, len(data)), data, op)
