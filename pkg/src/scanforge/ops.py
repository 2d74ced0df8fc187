"""Binary operator contract shared by every scan executor.

An :class:`Operator` bundles an identity element, the binary ``apply``,
an approximate-equality predicate and a monotone application counter.
The counter increments exactly once per ``apply`` call and is how all
work accounting in this library is measured.
"""
from __future__ import annotations

import math
import threading
from enum import Enum
from typing import Callable, Generic, TypeVar

T = TypeVar("T")


class ScanKind(Enum):
    SERIAL = "serial"
    BLELLOCH = "blelloch"
    BRENT_KUNG = "brent-kung"
    KOGGE_STONE = "kogge-stone"
    SKLANSKY = "sklansky"

    @property
    def inclusive(self) -> bool:
        """Blelloch produces exclusive results; all other kinds inclusive."""
        return self is not ScanKind.BLELLOCH

    @classmethod
    def parse(cls, name: str) -> "ScanKind":
        key = name.strip().lower().replace("_", "-")
        for kind in cls:
            if kind.value == key:
                return kind
        raise ValueError(f"unknown scan kind {name!r}; expected one of "
                         + ", ".join(k.value for k in cls))


PARALLEL_KINDS = (ScanKind.BLELLOCH, ScanKind.BRENT_KUNG,
                  ScanKind.KOGGE_STONE, ScanKind.SKLANSKY)


class Operator(Generic[T]):
    """Binary operator with identity, approx-equality and an application counter.

    Instances are shareable across threads: the counter is lock-protected.
    ``approx_eq(a, b, tol)`` decides whether two results are interchangeable;
    exact operators ignore ``tol``.
    """

    def __init__(self, identity: T, fn: Callable[[T, T], T],
                 approx_eq: Callable[[T, T, float], bool] | None = None,
                 name: str = ""):
        self.identity = identity
        self._fn = fn
        self._approx = approx_eq if approx_eq is not None else _exact_eq
        self.name = name or getattr(fn, "__name__", "op")
        self._lock = threading.Lock()
        self._count = 0

    def apply(self, a: T, b: T) -> T:
        with self._lock:
            self._count += 1
        return self._fn(a, b)

    def approx_eq(self, a: T, b: T, tol: float = 0.0) -> bool:
        return self._approx(a, b, tol)

    @property
    def applications(self) -> int:
        return self._count

    def reset(self) -> None:
        with self._lock:
            self._count = 0

    def __repr__(self):
        return f"Operator({self.name}, applications={self._count})"


def _exact_eq(a, b, tol):
    return a == b


def int_add() -> Operator[int]:
    return Operator(0, lambda a, b: a + b, name="int-add")


def float_add() -> Operator[float]:
    def close(a, b, tol):
        return math.isclose(a, b, rel_tol=tol, abs_tol=tol)
    return Operator(0.0, lambda a, b: a + b, close, name="float-add")


def string_concat() -> Operator[str]:
    """Free-monoid operator: concatenation never re-orders, only re-groups."""
    return Operator("", lambda a, b: a + b, name="concat")


def tuple_concat() -> Operator[tuple]:
    return Operator((), lambda a, b: a + b, name="tuple-concat")
