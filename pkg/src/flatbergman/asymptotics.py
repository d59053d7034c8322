"""Verification harness for the boundary asymptotics near an exponentially flat point.

* :func:`lemma31_series` tabulates the scalar limits along a stream.
* :func:`kernel_ratio_bounds`, :func:`metric_ratio_bounds` and
  :func:`curvature_ratio_bounds` bracket the normalized kernel, metric and
  curvature of the truncated scaled domains ``D_t^eps`` between the inner
  and outer product domains of the sandwich inclusion, using monotonicity of
  ``I_0, I_1, I_2``.
* :func:`counterexample` reproduces the ``d1/d* = sqrt(2)`` computation and the
  dichotomy threshold ``|u2| = sqrt(2)``.

Per-t work is independent and runs through :func:`parallel_map`.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .geometry import (
    ConeStream,
    ModelDomain,
    ScalingFrame,
    build_frame,
    d_eps,
    first_inclusion_certified,
    geometric_log_t_grid,
)
from .kernel import DEFAULT_TRUNCATION, extremal, product_closed_forms
from .logscalar import LogScalar
from .profile import FlatProfile, find_root
from .reinhardt import AnisoScaled, Scaled, product_domain

__all__ = [
    "SCHEDULE",
    "Lemma31Row",
    "Lemma31Table",
    "RatioRecord",
    "RatioSeries",
    "CounterexampleReport",
    "parallel_map",
    "lemma31_series",
    "kernel_ratio_bounds",
    "metric_ratio_bounds",
    "curvature_ratio_bounds",
    "counterexample",
    "normalization_identity",
]

SCHEDULE: tuple[tuple[float, float], ...] = ((1.0, 0.3), (0.5, 0.1), (0.25, 0.03), (0.1, 0.01))


def parallel_map(fn: Callable, items: Sequence, jobs: Optional[int] = 1) -> list:
    """Order-preserving map; ``jobs > 1`` uses a process pool."""
    items = list(items)
    if jobs is None or jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _monotone_nonincreasing(values: Sequence[float], slack: float = 1e-12) -> bool:
    vals = [v for v in values]
    for a, b in zip(vals, vals[1:]):
        if a == -math.inf:
            if b != -math.inf:
                return False
            continue
        if b > a + slack * max(1.0, abs(a)):
            return False
    return True


# ---------------------------------------------------------------------------
# scalar limits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Lemma31Row:
    """Logs of the vanishing quantities plus the tangential radius ratios."""

    log_t: float
    d: LogScalar
    dstar: float
    log_phi_over_d: float
    log_dphi_over_d: float
    log_p2_over_dstar: float
    log_d_over_dstar: float
    log_d_over_dstar_pow: float
    log_r_over_p2: float
    ratio1: dict
    ratio2: dict
    clamped: bool

    def vanishing(self) -> dict:
        return {
            "phi(p2^2)/d": self.log_phi_over_d,
            "phi'(p2^2)/d": self.log_dphi_over_d,
            "p2/d*": self.log_p2_over_dstar,
            "d/d*": self.log_d_over_dstar,
            "d/d*^(N+1)": self.log_d_over_dstar_pow,
        }


@dataclass
class Lemma31Table:
    domain: ModelDomain
    stream: ConeStream
    eps_values: tuple
    rows: list

    def tail(self, log_t_max: float) -> list[Lemma31Row]:
        return [r for r in self.rows if r.log_t <= log_t_max]

    def below(self, log_t_max: float = -300.0, tol: float = 1e-6) -> dict:
        """Per quantity: every tail value is below ``tol``."""
        lt = math.log(tol)
        return {k: all(r.vanishing()[k] < lt for r in self.tail(log_t_max)) for k in self.rows[0].vanishing()}

    def monotone(self, log_t_max: float = -300.0) -> dict:
        """Per quantity: non-increasing along the tail as ``t`` decreases."""
        rows = sorted(self.tail(log_t_max), key=lambda r: -r.log_t)
        return {k: _monotone_nonincreasing([r.vanishing()[k] for r in rows]) for k in self.rows[0].vanishing()}

    def liminf_ok(self, tol: float = 1e-9) -> dict:
        """``d*/d1 >= (1+eps)^(-1/(2m)) - tol`` and ``d*/d2 >= (1+eps)^(-1/m) - tol`` at every row."""
        m = self.domain.profile.m
        out = {}
        for eps in self.eps_values:
            b1 = (1.0 + eps) ** (-1.0 / (2 * m))
            b2 = (1.0 + eps) ** (-1.0 / m)
            out[eps] = (
                all(r.ratio1[eps] >= b1 - tol for r in self.rows),
                all(r.ratio2[eps] >= b2 - tol for r in self.rows),
            )
        return out

    def columns(self) -> list[str]:
        cols = ["log_t", "d", "dstar", "log_phi_over_d", "log_dphi_over_d", "log_p2_over_dstar",
                "log_d_over_dstar", "log_d_over_dstar_pow", "log_r_over_p2"]
        for eps in self.eps_values:
            cols += [f"dstar_over_d1[eps={eps:g}]", f"dstar_over_d2[eps={eps:g}]"]
        return cols + ["clamped"]

    def records(self) -> list[list]:
        out = []
        for r in self.rows:
            row = [r.log_t, r.d, r.dstar, r.log_phi_over_d, r.log_dphi_over_d, r.log_p2_over_dstar,
                   r.log_d_over_dstar, r.log_d_over_dstar_pow, r.log_r_over_p2]
            for eps in self.eps_values:
                row += [r.ratio1[eps], r.ratio2[eps]]
            out.append(row + [r.clamped])
        return out


def _lemma31_row(log_t: float, domain: ModelDomain, stream: ConeStream, eps_values: tuple) -> Lemma31Row:
    frame = build_frame(domain, stream, log_t)
    fp = frame.foot
    ld = fp.d.log
    ls = math.log(frame.dstar)
    ratio1, ratio2, clamped = {}, {}, False
    for eps in eps_values:
        r1 = d_eps(domain, fp, eps, 1)
        r2 = d_eps(domain, fp, eps, 2)
        ratio1[eps] = frame.dstar / r1.value
        ratio2[eps] = frame.dstar / r2.value
        clamped = clamped or r1.clamped or r2.clamped
    if fp.log_p2 == -math.inf:
        log_r_over_p2 = math.nan
    else:
        log_r_over_p2 = fp.log_r - fp.log_p2
    return Lemma31Row(
        log_t=float(log_t),
        d=fp.d,
        dstar=frame.dstar,
        log_phi_over_d=fp.phi_p.log - ld,
        log_dphi_over_d=fp.dphi_p.log - ld,
        log_p2_over_dstar=fp.log_p2 - ls,
        log_d_over_dstar=ld - ls,
        log_d_over_dstar_pow=ld - (stream.N + 1.0) * ls,
        log_r_over_p2=log_r_over_p2,
        ratio1=ratio1,
        ratio2=ratio2,
        clamped=clamped,
    )


def lemma31_series(
    domain: ModelDomain,
    stream: ConeStream,
    log_t_grid: Optional[Sequence[float]] = None,
    eps_values: Sequence[float] = (1.0, 0.5, 0.25),
    jobs: int = 1,
) -> Lemma31Table:
    grid = geometric_log_t_grid() if log_t_grid is None else np.asarray(log_t_grid, dtype=float)
    eps_values = tuple(float(e) for e in eps_values)
    rows = parallel_map(partial(_lemma31_row, domain=domain, stream=stream, eps_values=eps_values), grid, jobs)
    return Lemma31Table(domain, stream, eps_values, rows)


# ---------------------------------------------------------------------------
# certified ratio brackets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioRecord:
    log_t: float
    d: LogScalar
    dstar: float
    d1: float
    d2: float
    lower: float
    upper: float
    certified: bool

    @property
    def center(self) -> float:
        """Geometric mean of the bounds, or the midpoint when they differ in sign; not certified."""
        if self.lower * self.upper <= 0:
            return 0.5 * (self.lower + self.upper)
        s = 1.0 if self.lower > 0 else -1.0
        return s * math.sqrt(self.lower * self.upper)

    def contains(self, value: float, slack: float = 1e-12) -> bool:
        pad = slack * max(abs(self.lower), abs(self.upper))
        return self.lower - pad <= value <= self.upper + pad


@dataclass
class RatioSeries:
    quantity: str
    target: float
    eps: float
    delta: float
    direction: Optional[tuple] = None
    records: list = field(default_factory=list)

    def certified(self) -> list[RatioRecord]:
        return [r for r in self.records if r.certified]

    def threshold_log_t(self) -> Optional[float]:
        """Largest ``log t`` such that every grid point at or below it is certified."""
        best = None
        for r in sorted(self.records, key=lambda r: r.log_t):
            if not r.certified:
                break
            best = r.log_t
        return best

    def contains_target(self) -> bool:
        rows = self.certified()
        return bool(rows) and all(r.contains(self.target) for r in rows)

    def widths_nonincreasing(self, slack: float = 1e-9) -> bool:
        rows = sorted(self.certified(), key=lambda r: -r.log_t)
        widths = [r.upper - r.lower for r in rows]
        return all(b <= a * (1.0 + slack) + 1e-300 for a, b in zip(widths, widths[1:]))

    @property
    def convergent(self) -> bool:
        return self.contains_target() and self.widths_nonincreasing()

    def columns(self) -> list[str]:
        return ["log_t", "d", "dstar", "d1_eps", "d2_eps", "lower", "upper", "center", "tag"]

    def rows(self) -> list[list]:
        out = []
        for r in self.records:
            tag = "certified" if r.certified else "non-certified"
            out.append([r.log_t, r.d, r.dstar, r.d1, r.d2, r.lower, r.upper, r.center, tag])
        return out


def _normalized_direction(frame: ScalingFrame, xi: Sequence[complex]) -> np.ndarray:
    """``(f o Sigma)'(-d, 0) M xi`` rescaled so its largest entry has modulus 1.

    Every normalized ratio is homogeneous of degree 0 in this vector, and the
    raw vector overflows (``1/(2d)``) long before the grid ends.
    """
    xi = np.asarray(xi, dtype=complex)
    v = frame.rotation @ xi
    logs = frame.cayley_derivative_logs()
    with np.errstate(divide="ignore"):
        lmag = np.log(np.abs(v)) + logs
    top = np.max(lmag)
    if top == -math.inf:
        raise ValueError("direction must be non-zero")
    scale = np.exp(lmag - top)
    phase = np.where(np.abs(v) > 0, v / np.where(np.abs(v) > 0, np.abs(v), 1.0), 0.0)
    return scale * phase


def _bracket(frame: ScalingFrame, eps: float, delta: float, eta: Optional[np.ndarray], orders: Iterable[int], T: int):
    """``I_j`` at the origin of ``(1-delta) P`` and ``diag(1, d2/d*) P``."""
    n = frame.n
    P = product_domain(n)
    d2 = d_eps(frame.domain, frame.foot, eps, 2)
    rho = max(d2.value / frame.dstar, 1.0)
    inner = Scaled(P, 1.0 - delta)
    outer = AnisoScaled(P, 1.0, rho)
    zero = np.zeros(n + 1)
    I_in, I_out = {}, {}
    for j in orders:
        I_in[j] = extremal(inner, zero, eta, j, T).value
        I_out[j] = extremal(outer, zero, eta, j, T).value
    return I_in, I_out


def _ratio_record(
    log_t: float,
    quantity: str,
    domain: ModelDomain,
    stream: ConeStream,
    eps: float,
    delta: float,
    xi: Optional[tuple],
    T: int,
) -> RatioRecord:
    frame = build_frame(domain, stream, log_t)
    n = frame.n
    d1 = d_eps(domain, frame.foot, eps, 1).value
    d2 = d_eps(domain, frame.foot, eps, 2).value
    certified = first_inclusion_certified(frame, eps, delta)
    if quantity == "kernel":
        I_in, I_out = _bracket(frame, eps, delta, None, (0,), T)
        lower, upper = 1.0 / (4.0 * I_out[0]), 1.0 / (4.0 * I_in[0])
    else:
        eta = _normalized_direction(frame, xi)
        ref = product_closed_forms(n, eta)
        if quantity == "metric":
            I_in, I_out = _bracket(frame, eps, delta, eta, (0, 1), T)
            lower = math.sqrt(I_in[0] / I_out[1]) / ref.B
            upper = math.sqrt(I_out[0] / I_in[1]) / ref.B
        elif quantity == "curvature":
            I_in, I_out = _bracket(frame, eps, delta, eta, (0, 1, 2), T)
            q_max = I_out[1] ** 2 / (I_in[0] * I_in[2])
            q_min = I_in[1] ** 2 / (I_out[0] * I_out[2])
            x = abs(eta[0]) ** 2
            y = float(np.sum(np.abs(eta[1:]) ** 2))
            norm = (2 * x * x + (n + 1) * y * y) / (2 * x + (n + 1) * y) ** 2
            lower, upper = (2.0 - q_max) / norm, (2.0 - q_min) / norm
        else:
            raise ValueError(f"unknown quantity {quantity!r}")
    return RatioRecord(float(log_t), frame.d, frame.dstar, d1, d2, float(lower), float(upper), certified)


def _ratio_series(quantity, target, domain, stream, xi, eps, delta, log_t_grid, T, jobs) -> RatioSeries:
    if not 0 < delta < 1 or eps <= 0:
        raise ValueError("need eps > 0 and 0 < delta < 1")
    grid = geometric_log_t_grid() if log_t_grid is None else np.asarray(log_t_grid, dtype=float)
    xi_t = None if xi is None else tuple(complex(v) for v in xi)
    if xi_t is not None and len(xi_t) != domain.dim:
        raise ValueError("direction has the wrong dimension")
    worker = partial(_ratio_record, quantity=quantity, domain=domain, stream=stream, eps=eps, delta=delta, xi=xi_t, T=T)
    series = RatioSeries(quantity, target, eps, delta, xi_t)
    series.records = parallel_map(worker, grid, jobs)
    return series


def kernel_ratio_bounds(
    domain: ModelDomain,
    stream: ConeStream,
    eps: float,
    delta: float,
    log_t_grid: Optional[Sequence[float]] = None,
    T: int = DEFAULT_TRUNCATION,
    jobs: int = 1,
) -> RatioSeries:
    """Brackets for ``kappa_{D_t^eps}(-d, 0) d^2 d*^(2n)``; target ``n!/(4 pi^(n+1))``.

    By the transformation rule this equals ``1/(4 I_0)`` of ``f o Sigma(D_t^eps)``
    at the origin, which the sandwich inclusion traps between the values for
    ``(1-delta) P`` and ``diag(1, d2/d*) P`` with ``P = D x B_n``.
    """
    n = domain.n
    target = math.factorial(n) / (4.0 * math.pi ** (n + 1))
    return _ratio_series("kernel", target, domain, stream, None, eps, delta, log_t_grid, T, jobs)


def metric_ratio_bounds(
    domain: ModelDomain,
    stream: ConeStream,
    xi: Sequence[complex],
    eps: float,
    delta: float,
    log_t_grid: Optional[Sequence[float]] = None,
    T: int = DEFAULT_TRUNCATION,
    jobs: int = 1,
) -> RatioSeries:
    """Brackets for ``B(-d, 0; xi) / sqrt(|xi_N|^2/(2 d^2) + (n+1)|xi_T|^2/d*^2)``; target 1."""
    return _ratio_series("metric", 1.0, domain, stream, xi, eps, delta, log_t_grid, T, jobs)


def curvature_ratio_bounds(
    domain: ModelDomain,
    stream: ConeStream,
    xi: Sequence[complex],
    eps: float,
    delta: float,
    log_t_grid: Optional[Sequence[float]] = None,
    T: int = DEFAULT_TRUNCATION,
    jobs: int = 1,
) -> RatioSeries:
    """Brackets for ``H (2x^2 + (n+1)y^2)^2 / (2x^4 + (n+1)y^4)`` with
    ``x = |xi_N|/(2d)``, ``y = |xi_T|/d*``; target ``-2``."""
    return _ratio_series("curvature", -2.0, domain, stream, xi, eps, delta, log_t_grid, T, jobs)


def normalization_identity(n: int) -> tuple[float, float]:
    """``kappa_P(0)/4`` and ``1/(4 pi vol(B_n))`` with ``vol(B_n) = pi^n/n!``."""
    lhs = math.factorial(n) / math.pi ** (n + 1) / 4.0
    vol = math.pi**n / math.factorial(n)
    return lhs, 1.0 / (4.0 * math.pi * vol)


# ---------------------------------------------------------------------------
# counterexample
# ---------------------------------------------------------------------------


@dataclass
class CounterexampleReport:
    log_t: np.ndarray
    dstar: np.ndarray
    d1: np.ndarray
    u_grid: np.ndarray
    log_quotient: np.ndarray  # shape (len(log_t), len(u_grid))
    inverse_check: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return self.d1 / self.dstar

    def quotient(self, i: int, j: int) -> LogScalar:
        return LogScalar(1, float(self.log_quotient[i, j]))

    def crossing(self, i: int = 0) -> Optional[tuple[float, float]]:
        """Consecutive ``|u2|`` samples where the log quotient changes sign."""
        row = self.log_quotient[i]
        for j in range(len(row) - 1):
            if row[j] < 0 <= row[j + 1]:
                return float(self.u_grid[j]), float(self.u_grid[j + 1])
        return None


def _solve_scale(log_level: float) -> float:
    """Root ``s`` of ``exp(-1/s^2) = exp(log_level)`` (``m = 1``) in the psi coordinate."""
    target = -1.0 / log_level  # psi(s^2) = s^2
    root = find_root(lambda s: s * s - target, 0.0, max(1.0, 2.0 * math.sqrt(target)), tol=0.0)
    return root


def counterexample(
    log_t_grid: Optional[Sequence[float]] = None,
    u_grid: Optional[Sequence[float]] = None,
    profile: Optional[FlatProfile] = None,
) -> CounterexampleReport:
    """``d*`` and ``d1`` from ``exp(-1/d*^2) = t`` and ``exp(-1/d1^2) = t^(1/2)``,
    and ``log[phi(|d* u2|^2) / sqrt(phi(d*^2))]`` over the ``|u2|`` grid."""
    profile = FlatProfile(1) if profile is None else profile
    if profile.m != 1:
        raise ValueError("the counterexample is stated for m = 1")
    grid = geometric_log_t_grid() if log_t_grid is None else np.asarray(log_t_grid, dtype=float)
    u = np.round(np.linspace(0.5, 2.0, 31), 12) if u_grid is None else np.asarray(u_grid, dtype=float)
    dstar = np.array([_solve_scale(lt) for lt in grid])
    d1 = np.array([_solve_scale(0.5 * lt) for lt in grid])
    inv = np.array([math.sqrt(profile.inverse(LogScalar(1, lt))) for lt in grid])
    logq = np.empty((grid.size, u.size))
    for i, ds in enumerate(dstar):
        base = profile.log_value(ds * ds)
        for j, uj in enumerate(u):
            logq[i, j] = profile.log_value((ds * uj) ** 2) - 0.5 * base
    return CounterexampleReport(grid, dstar, d1, u, logq, inv)
