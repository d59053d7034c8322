"""Signed scalars stored as (sign, log-magnitude).

Quantities such as ``t = exp(-2000)`` or ``phi(x) = exp(-1/x**m)`` for tiny
``x`` are far outside the double range. :class:`LogScalar` carries them
exactly in the log field; products and quotients never under- or overflow.
"""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass
from typing import Union

__all__ = ["LogScalar", "RangeMarker", "safe_exp", "Real"]

Real = Union[int, float]

_LOG_MAX = math.log(sys.float_info.max)
_LOG_MIN = math.log(sys.float_info.min)  # smallest normal double


class RangeMarker(enum.Enum):
    """Returned by :meth:`LogScalar.materialize` when the value is not a normal double."""

    UNDERFLOW = "underflow"
    OVERFLOW = "overflow"


def safe_exp(v: float) -> float:
    """``math.exp`` that saturates to ``inf`` instead of raising."""
    if v > _LOG_MAX:
        return math.inf
    return math.exp(v)


@dataclass(frozen=True)
class LogScalar:
    sign: int
    log: float

    def __post_init__(self) -> None:
        if self.sign not in (-1, 0, 1):
            raise ValueError(f"sign must be -1, 0 or 1, got {self.sign}")
        if math.isnan(self.log):
            raise ValueError("log-magnitude is NaN")
        if self.sign == 0 and self.log != -math.inf:
            object.__setattr__(self, "log", -math.inf)
        if self.sign != 0 and self.log == -math.inf:
            object.__setattr__(self, "sign", 0)

    # -- construction -------------------------------------------------
    @classmethod
    def from_float(cls, x: Real) -> "LogScalar":
        x = float(x)
        if math.isnan(x):
            raise ValueError("cannot represent NaN")
        if x == 0.0:
            return cls(0, -math.inf)
        return cls(1 if x > 0 else -1, math.log(abs(x)))

    @classmethod
    def from_log(cls, log: float, sign: int = 1) -> "LogScalar":
        return cls(sign, float(log))

    @classmethod
    def zero(cls) -> "LogScalar":
        return cls(0, -math.inf)

    @classmethod
    def one(cls) -> "LogScalar":
        return cls(1, 0.0)

    @staticmethod
    def coerce(x: "LogScalar | Real") -> "LogScalar":
        return x if isinstance(x, LogScalar) else LogScalar.from_float(x)

    # -- predicates ---------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.sign == 0

    def materialize(self) -> "float | RangeMarker":
        """Plain float if representable as a normal double, else a :class:`RangeMarker`."""
        if self.sign == 0:
            return 0.0
        if self.log > _LOG_MAX:
            return RangeMarker.OVERFLOW
        if self.log < _LOG_MIN:
            return RangeMarker.UNDERFLOW
        return self.sign * math.exp(self.log)

    def __float__(self) -> float:
        # saturating conversion; use materialize() to detect range loss
        if self.sign == 0:
            return 0.0
        return self.sign * safe_exp(self.log)

    def __abs__(self) -> "LogScalar":
        return LogScalar(abs(self.sign), self.log)

    def __neg__(self) -> "LogScalar":
        return LogScalar(-self.sign, self.log)

    # -- field operations ---------------------------------------------
    def __mul__(self, other: "LogScalar | Real") -> "LogScalar":
        other = LogScalar.coerce(other)
        if self.sign == 0 or other.sign == 0:
            return LogScalar.zero()
        return LogScalar(self.sign * other.sign, self.log + other.log)

    __rmul__ = __mul__

    def __truediv__(self, other: "LogScalar | Real") -> "LogScalar":
        other = LogScalar.coerce(other)
        if other.sign == 0:
            raise ZeroDivisionError("LogScalar division by zero")
        if self.sign == 0:
            return LogScalar.zero()
        return LogScalar(self.sign * other.sign, self.log - other.log)

    def __rtruediv__(self, other: Real) -> "LogScalar":
        return LogScalar.coerce(other) / self

    def __pow__(self, p: Real) -> "LogScalar":
        if self.sign == 0:
            if p > 0:
                return LogScalar.zero()
            raise ZeroDivisionError("zero to a non-positive power")
        if self.sign < 0:
            if float(p).is_integer():
                s = -1 if int(p) % 2 else 1
                return LogScalar(s, self.log * p)
            raise ValueError("fractional power of a negative LogScalar")
        return LogScalar(1, self.log * p)

    def sqrt(self) -> "LogScalar":
        return self ** 0.5

    def __add__(self, other: "LogScalar | Real") -> "LogScalar":
        other = LogScalar.coerce(other)
        if other.sign == 0:
            return self
        if self.sign == 0:
            return other
        a, b = (self, other) if self.log >= other.log else (other, self)
        delta = b.log - a.log  # <= 0
        if a.sign == b.sign:
            return LogScalar(a.sign, a.log + math.log1p(math.exp(delta)))
        if delta == 0.0:
            return LogScalar.zero()
        return LogScalar(a.sign, a.log + math.log1p(-math.exp(delta)))

    __radd__ = __add__

    def __sub__(self, other: "LogScalar | Real") -> "LogScalar":
        return self + (-LogScalar.coerce(other))

    def __rsub__(self, other: Real) -> "LogScalar":
        return LogScalar.coerce(other) - self

    # -- ordering -----------------------------------------------------
    def _key(self) -> tuple[int, float]:
        if self.sign == 0:
            return (0, 0.0)
        return (self.sign, self.sign * self.log)

    def __lt__(self, other: "LogScalar | Real") -> bool:
        return self._key() < LogScalar.coerce(other)._key()

    def __le__(self, other: "LogScalar | Real") -> bool:
        return self._key() <= LogScalar.coerce(other)._key()

    def __gt__(self, other: "LogScalar | Real") -> bool:
        return self._key() > LogScalar.coerce(other)._key()

    def __ge__(self, other: "LogScalar | Real") -> bool:
        return self._key() >= LogScalar.coerce(other)._key()

    def format(self, digits: int = 15) -> str:
        """Decimal string when representable, ``exp(<log>)`` otherwise."""
        v = self.materialize()
        if isinstance(v, RangeMarker):
            prefix = "-" if self.sign < 0 else ""
            return f"{prefix}exp({self.log:.{digits}g})"
        return f"{v:.{digits}g}"

    def __str__(self) -> str:
        return self.format()
