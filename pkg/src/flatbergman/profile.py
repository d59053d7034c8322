"""Exponentially flat boundary profiles and 1-D solvers.

The shipped family is ``phi(x) = exp(-1/x**m)`` for ``x > 0`` and ``0``
otherwise. Every value leaves this module as a :class:`LogScalar`, so the
profile can be evaluated at arguments whose images are far below the double
range. Arguments themselves may be floats or :class:`LogScalar`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

from .logscalar import LogScalar, Real, safe_exp

__all__ = [
    "FlatProfile",
    "RootFindingError",
    "profile_eval",
    "profile_derivative",
    "scaling_dichotomy",
    "inverse_profile",
    "find_root",
    "parse_profile",
]

MAX_DERIVATIVE_ORDER = 4


class RootFindingError(RuntimeError):
    pass


def _log_arg(x: "LogScalar | Real") -> Optional[float]:
    """log(x) for x > 0, ``None`` for x <= 0."""
    if isinstance(x, LogScalar):
        return x.log if x.sign > 0 else None
    x = float(x)
    return math.log(x) if x > 0 else None


@lru_cache(maxsize=None)
def _derivative_poly(m: int, order: int) -> tuple[int, ...]:
    """Coefficients c_j of P with phi^(order)(x) = P(1/x) phi(x).

    Recurrence in u = 1/x: P_{k+1}(u) = -u^2 P_k'(u) + m u^(m+1) P_k(u).
    """
    coeffs = [1]
    for _ in range(order):
        new = [0] * (len(coeffs) + m + 1)
        for j, c in enumerate(coeffs):
            if c == 0:
                continue
            if j > 0:
                new[j + 1] -= j * c
            new[j + m + 1] += m * c
        while len(new) > 1 and new[-1] == 0:
            new.pop()
        coeffs = new
    return tuple(coeffs)


def _log_poly(coeffs: tuple[int, ...], log_u: float) -> LogScalar:
    """Evaluate sum c_j u^j as a LogScalar given log(u)."""
    total = LogScalar.zero()
    for j, c in enumerate(coeffs):
        if c:
            total = total + LogScalar(1 if c > 0 else -1, math.log(abs(c)) + j * log_u)
    return total


@dataclass(frozen=True)
class FlatProfile:
    """``phi(x) = exp(-1/x**m)`` on ``x > 0``, zero on ``x <= 0``.

    ``psi(x) = -1/log(phi(x)) = x**m`` is the coordinate in which root
    solves involving ``phi`` become polynomial.
    """

    m: int = 1
    family: str = field(default="power-exponential")

    def __post_init__(self) -> None:
        if self.family != "power-exponential":
            raise ValueError(f"unknown profile family {self.family!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"flatness order must be a positive integer, got {self.m}")

    @property
    def spec(self) -> str:
        return f"exp:{self.m}"

    @property
    def convex_limit(self) -> float:
        """Right end of the interval ``(0, x_c)`` on which ``phi'' > 0``."""
        return (self.m / (self.m + 1)) ** (1.0 / self.m)

    def log_value(self, x: "LogScalar | Real") -> float:
        lx = _log_arg(x)
        if lx is None:
            return -math.inf
        return -safe_exp(-self.m * lx)

    def __call__(self, x: "LogScalar | Real") -> LogScalar:
        return LogScalar(1, self.log_value(x))

    def derivative(self, x: "LogScalar | Real", order: int) -> LogScalar:
        if not 0 <= order <= MAX_DERIVATIVE_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_DERIVATIVE_ORDER}")
        lx = _log_arg(x)
        if lx is None:
            return LogScalar.zero()
        lphi = self.log_value(x)
        if lphi == -math.inf:
            return LogScalar.zero()
        return _log_poly(_derivative_poly(self.m, order), -lx) * LogScalar(1, lphi)

    def psi(self, x: Real) -> float:
        return float(x) ** self.m if x > 0 else 0.0

    def inverse(self, y: "LogScalar | Real") -> float:
        """The unique ``x > 0`` with ``phi(x) = y``; needs ``0 < y < 1``."""
        y = LogScalar.coerce(y)
        if y.sign <= 0 or y.log >= 0.0:
            raise ValueError(f"profile value {y} outside (0, sup phi) = (0, 1)")
        return (-1.0 / y.log) ** (1.0 / self.m)

    def inverse_log(self, y: "LogScalar | Real") -> float:
        """``log`` of :meth:`inverse`, accurate even when the root underflows."""
        y = LogScalar.coerce(y)
        if y.sign <= 0 or y.log >= 0.0:
            raise ValueError(f"profile value {y} outside (0, sup phi) = (0, 1)")
        return -math.log(-y.log) / self.m

    def ratio(self, x: Real, r: Real) -> LogScalar:
        """``phi(r x) / phi(r)`` in the log field."""
        if r <= 0 or x <= 0:
            raise ValueError("scaling dichotomy needs r > 0 and x > 0")
        return LogScalar(1, (1.0 - x ** (-self.m)) / r ** self.m)


def profile_eval(profile: FlatProfile, x: "LogScalar | Real") -> LogScalar:
    return profile(x)


def profile_derivative(profile: FlatProfile, x: "LogScalar | Real", order: int) -> LogScalar:
    return profile.derivative(x, order)


def scaling_dichotomy(profile: FlatProfile, x: Real, r: Real) -> LogScalar:
    return profile.ratio(x, r)


def inverse_profile(profile: FlatProfile, y: "LogScalar | Real") -> float:
    return profile.inverse(y)


def parse_profile(spec: str) -> FlatProfile:
    """Parse ``"exp:m"``."""
    family, _, order = spec.strip().partition(":")
    if family != "exp" or not order:
        raise ValueError(f"profile spec must look like 'exp:m', got {spec!r}")
    try:
        m = int(order)
    except ValueError:
        raise ValueError(f"bad flatness order in profile spec {spec!r}") from None
    return FlatProfile(m=m)


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-14,
    fprime: Optional[Callable[[float], float]] = None,
    xtol: float = 0.0,
    maxiter: int = 200,
) -> float:
    """Root of a monotone ``f`` on ``[lo, hi]``.

    Bisection shrinks the bracket to a few percent of its width, then a
    Newton (or secant when ``fprime`` is absent) step is accepted only if it
    stays inside the current bracket; otherwise the step falls back to
    bisection. Stops when ``|f| <= tol`` or the bracket is below ``xtol``
    (default: a few ulps of the root).
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise RootFindingError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")

    width0 = hi - lo
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
        if hi - lo < 0.05 * width0:
            break

    x = lo if abs(flo) < abs(fhi) else hi
    fx = flo if x == lo else fhi
    x_prev, f_prev = (hi, fhi) if x == lo else (lo, flo)
    for _ in range(maxiter):
        if abs(fx) <= tol:
            return x
        step_ok = False
        if fprime is not None:
            d = fprime(x)
            if d != 0.0 and math.isfinite(d):
                cand = x - fx / d
                step_ok = True
        elif fx != f_prev:
            cand = x - fx * (x - x_prev) / (fx - f_prev)
            step_ok = True
        if not step_ok or not (lo < cand < hi) or not math.isfinite(cand):
            cand = 0.5 * (lo + hi)
        fc = f(cand)
        x_prev, f_prev = x, fx
        x, fx = cand, fc
        if fc == 0.0:
            return cand
        if math.copysign(1.0, fc) == math.copysign(1.0, flo):
            lo, flo = cand, fc
        else:
            hi, fhi = cand, fc
        limit = xtol if xtol > 0 else 4.0 * math.ulp(max(abs(lo), abs(hi)))
        if hi - lo <= limit:
            return lo if abs(flo) <= abs(fhi) else hi
    raise RootFindingError(f"no convergence after {maxiter} iterations; |f|={abs(fx)!r}")
