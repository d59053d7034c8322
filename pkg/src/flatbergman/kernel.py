"""Bergman kernel jets, metric, curvature and extremal integrals on Reinhardt domains.

Let ``a_I[alpha] = d^I z^alpha / sqrt(N_alpha)`` for holomorphic derivative
multi-indices ``|I| <= 2``. Every mixed derivative of the truncated kernel on
the diagonal is an entry of the Gram matrix ``G[I, J] = sum_alpha a_I conj(a_J)``:
``d^I dbar^J kappa = G[I, J]``. Derivatives of ``log kappa`` follow from the
moment-cumulant formula over set partitions, so no finite differences are
involved.

The same Gram matrix drives the extremal problems: minimizing
``sum |c_alpha|^2 N_alpha`` under ``L c = b`` has value ``b^H (L N^-1 L^H)^-1 b``
and the rows of ``L N^{-1/2}`` are exactly combinations of the ``a_I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence

import numpy as np
import scipy.linalg

from .reinhardt import (
    Ball,
    Disc,
    Product,
    ReinhardtDomain,
    Scaled,
    inclusion_certified,
    log_moments,
    multi_indices,
)

__all__ = [
    "KernelJet",
    "ExtremalResult",
    "TruncationError",
    "kernel_jet",
    "kernel",
    "metric",
    "curvature",
    "extremal",
    "fuchs_check",
    "transform_check",
    "monotonicity_check",
    "Dilation",
    "Unitary",
    "DiscAutomorphism",
    "product_closed_forms",
    "dilated_extremal",
    "random_interior_points",
    "DEFAULT_TRUNCATION",
]

DEFAULT_TRUNCATION = 60
TAIL_TOL = 1e-12


class TruncationError(ArithmeticError):
    """The truncated series cannot be certified at the requested point."""


def _derivative_indices(dim: int) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    out += [(j,) for j in range(dim)]
    out += [(j, k) for j in range(dim) for k in range(j, dim)]
    return out


@lru_cache(maxsize=None)
def _set_partitions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    def rec(items):
        if not items:
            yield []
            return
        first, rest = items[0], items[1:]
        for part in rec(rest):
            yield [(first,)] + part
            for i in range(len(part)):
                yield part[:i] + [(first,) + part[i]] + part[i + 1 :]

    return tuple(tuple(tuple(b) for b in p) for p in rec(list(range(n))))


def _jet_vectors(domain: ReinhardtDomain, z: np.ndarray, T: int) -> tuple[np.ndarray, list[tuple[int, ...]], np.ndarray]:
    """Rows ``a_I`` over the basis, the list of ``I`` and the basis degrees."""
    alphas = multi_indices(domain.dim, T)
    half_log_n = 0.5 * log_moments(domain, T)
    idx = _derivative_indices(domain.dim)
    absz = np.abs(z)
    with np.errstate(divide="ignore"):
        log_abs = np.log(absz)
    unit = np.where(absz > 0, z / np.where(absz > 0, absz, 1.0), 1.0)
    rows = np.zeros((len(idx), alphas.shape[0]), dtype=complex)
    for r, I in enumerate(idx):
        counts = np.bincount(np.asarray(I, dtype=np.int64), minlength=domain.dim)
        expo = alphas - counts
        valid = np.all(expo >= 0, axis=1)
        e = np.where(expo > 0, expo, 0)
        falling = np.ones(alphas.shape[0])
        for j, c in enumerate(counts):
            for s in range(c):
                falling *= alphas[:, j] - s
        with np.errstate(invalid="ignore"):
            logmag = np.sum(np.where(e > 0, e * log_abs, 0.0), axis=1) - half_log_n
        phase = np.prod(unit ** e, axis=1)
        val = np.where(valid, falling * np.exp(np.where(valid, logmag, -np.inf)) * phase, 0.0)
        rows[r] = val
    return rows, idx, alphas.sum(axis=1)


def _tail_estimate(rows: np.ndarray, degrees: np.ndarray, T: int) -> float:
    """Relative geometric tail bound from the last degree shells."""
    shell = np.bincount(degrees, weights=np.sum(np.abs(rows) ** 2, axis=0), minlength=T + 1)
    total = shell.sum()
    if total == 0 or T < 4:
        return 0.0 if total > 0 else math.inf
    last = shell[T - 3 :]
    if last[-1] == 0.0:
        return 0.0
    if np.any(last[:-1] == 0.0):
        return math.inf
    q = float(np.max(last[1:] / last[:-1]))
    if q >= 1.0:
        return math.inf
    return float(last[-1] * q / (1.0 - q) / total)


@dataclass(eq=False)
class KernelJet:
    """Kernel, metric and the derivative data needed for curvature at ``z``."""

    domain: ReinhardtDomain
    z: np.ndarray
    T: int
    kappa: float
    gram: np.ndarray
    index: list
    tail: float
    g: np.ndarray = field(init=False)
    _cache: dict = field(init=False, default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        dim = self.domain.dim
        self._pos = {I: k for k, I in enumerate(self.index)}
        g = np.empty((dim, dim), dtype=complex)
        for j in range(dim):
            for k in range(dim):
                g[j, k] = self.log_derivative((j,), (k,))
        self.g = g
        eig = np.linalg.eigvalsh(0.5 * (g + g.conj().T))
        if not eig[0] > 0:
            raise np.linalg.LinAlgError("metric tensor is not positive definite")
        self.min_eigenvalue = float(eig[0])

    @property
    def dim(self) -> int:
        return self.domain.dim

    def _g_entry(self, holo: tuple[int, ...], anti: tuple[int, ...]) -> complex:
        """``d^holo dbar^anti kappa / kappa``."""
        return self.gram[self._pos[tuple(sorted(holo))], self._pos[tuple(sorted(anti))]]

    def log_derivative(self, holo: Sequence[int], anti: Sequence[int]) -> complex:
        """``d^holo dbar^anti log kappa`` with at most two derivatives of each type."""
        holo, anti = tuple(holo), tuple(anti)
        key = (tuple(sorted(holo)), tuple(sorted(anti)))
        if key in self._cache:
            return self._cache[key]
        ops = [("h", j) for j in holo] + [("a", k) for k in anti]
        total = 0.0 + 0.0j
        for part in _set_partitions(len(ops)):
            prod = 1.0 + 0.0j
            for block in part:
                h = tuple(ops[i][1] for i in block if ops[i][0] == "h")
                a = tuple(ops[i][1] for i in block if ops[i][0] == "a")
                prod *= self._g_entry(h, a)
            k = len(part)
            total += (-1) ** (k - 1) * math.factorial(k - 1) * prod
        self._cache[key] = total
        return total

    def metric_norm(self, xi: Sequence[complex]) -> float:
        """``B(z; xi) = sqrt(sum g_{ij} xi_i conj(xi_j))``."""
        xi = np.asarray(xi, dtype=complex)
        return math.sqrt(max(float(np.real(xi @ self.g @ xi.conj())), 0.0))

    def curvature_tensor(self) -> np.ndarray:
        """``R[h, j, k, l] = -d_k dbar_l g_{j hbar} + sum g^{nu mubar} d_k g_{j mubar} dbar_l g_{nu hbar}``.

        ``g^{nu mubar} = inv(g)[mu, nu]`` where ``g[j, k] = g_{j kbar}``.
        """
        if "R" in self._cache:
            return self._cache["R"]
        dim = self.dim
        ginv = scipy.linalg.inv(self.g)
        dg = np.empty((dim, dim, dim), dtype=complex)  # dg[j, k, mu] = d_k g_{j mubar}
        dbg = np.empty((dim, dim, dim), dtype=complex)  # dbg[nu, h, l] = dbar_l g_{nu hbar}
        for a in range(dim):
            for b in range(dim):
                for c in range(dim):
                    dg[a, b, c] = self.log_derivative((a, b), (c,))
                    dbg[a, b, c] = self.log_derivative((a,), (b, c))
        R = np.empty((dim,) * 4, dtype=complex)
        for h in range(dim):
            for j in range(dim):
                for k in range(dim):
                    for l in range(dim):
                        second = np.einsum("mn,m,n->", ginv, dg[j, k, :], dbg[:, h, l])
                        R[h, j, k, l] = -self.log_derivative((j, k), (h, l)) + second
        self._cache["R"] = R
        return R

    def curvature(self, xi: Sequence[complex]) -> float:
        xi = np.asarray(xi, dtype=complex)
        B = self.metric_norm(xi)
        if B == 0.0:
            raise ValueError("curvature needs a non-zero direction")
        R = self.curvature_tensor()
        num = np.einsum("hjkl,h,j,k,l->", R, xi.conj(), xi, xi, xi.conj())
        return float(num.real) / B**4


def _check_point(domain: ReinhardtDomain, z: Sequence[complex]) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.shape[0] != domain.dim:
        raise ValueError(f"point has {z.shape[0]} coordinates, domain {domain.spec} has dimension {domain.dim}")
    if not domain.contains(z):
        raise ValueError(f"point {z} is not inside {domain.spec}")
    return z


def kernel_jet(domain: ReinhardtDomain, z: Sequence[complex], T: int = DEFAULT_TRUNCATION, tail_tol: float = TAIL_TOL) -> KernelJet:
    """Series jet of the Bergman kernel at an interior point.

    Raises :class:`TruncationError` when the tail estimate exceeds ``tail_tol``.
    """
    z = _check_point(domain, z)
    if T < 2:
        raise ValueError("truncation must be at least 2")
    rows, idx, degrees = _jet_vectors(domain, z, T)
    tail = _tail_estimate(rows, degrees, T)
    if not tail <= tail_tol:
        raise TruncationError(f"tail estimate {tail:.3g} exceeds {tail_tol:.3g} at z={z} (T={T})")
    gram = rows @ rows.conj().T
    kappa = float(gram[0, 0].real)
    return KernelJet(domain, z, T, kappa, gram / kappa, idx, tail)


def kernel(domain: ReinhardtDomain, z: Sequence[complex], T: int = DEFAULT_TRUNCATION) -> float:
    return kernel_jet(domain, z, T).kappa


def metric(domain: ReinhardtDomain, z: Sequence[complex], xi: Sequence[complex], T: int = DEFAULT_TRUNCATION) -> float:
    return kernel_jet(domain, z, T).metric_norm(xi)


def curvature(domain: ReinhardtDomain, z: Sequence[complex], xi: Sequence[complex], T: int = DEFAULT_TRUNCATION) -> float:
    return kernel_jet(domain, z, T).curvature(xi)


# ---------------------------------------------------------------------------
# extremal integrals
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class ExtremalResult:
    order: int
    value: float
    coefficients: np.ndarray
    basis: np.ndarray
    residuals: np.ndarray

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residuals)))


def _constraint_rows(rows: np.ndarray, idx: list, xi: Optional[np.ndarray], order: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    pos = {I: k for k, I in enumerate(idx)}
    if order == 0:
        return rows[[0]], np.array([1.0 + 0j])
    if xi is None:
        raise ValueError("I1 and I2 need a direction")
    if order == 1:
        d1 = sum(xi[j] * rows[pos[(j,)]] for j in range(dim))
        return np.vstack([rows[0], d1]), np.array([0.0, 1.0], dtype=complex)
    if order == 2:
        d2 = sum(xi[j] * xi[k] * rows[pos[tuple(sorted((j, k)))]] for j in range(dim) for k in range(dim))
        L = np.vstack([rows[0]] + [rows[pos[(j,)]] for j in range(dim)] + [d2])
        b = np.zeros(dim + 2, dtype=complex)
        b[-1] = 1.0
        return L, b
    raise ValueError("extremal order must be 0, 1 or 2")


def extremal(
    domain: ReinhardtDomain,
    z: Sequence[complex],
    xi: Optional[Sequence[complex]] = None,
    order: int = 0,
    T: int = DEFAULT_TRUNCATION,
    tail_tol: float = TAIL_TOL,
) -> ExtremalResult:
    """``I_order`` by weighted least norm over the truncated monomial basis.

    Minimizes ``sum |c_alpha|^2 N_alpha`` subject to the jet constraints at ``z``;
    the optimum is ``c = N^-1 L^H (L N^-1 L^H)^-1 b``.
    """
    z = _check_point(domain, z)
    if order == 2 and T < 2:
        raise ValueError("I2 needs T >= 2")
    rows, idx, degrees = _jet_vectors(domain, z, T)
    tail = _tail_estimate(rows, degrees, T)
    if not tail <= tail_tol:
        raise TruncationError(f"tail estimate {tail:.3g} exceeds {tail_tol:.3g} at z={z} (T={T})")
    xi_arr = None if xi is None else np.asarray(xi, dtype=complex).reshape(-1)
    if xi_arr is not None and xi_arr.shape[0] != domain.dim:
        raise ValueError("direction has the wrong dimension")
    Lt, b = _constraint_rows(rows, idx, xi_arr, order, domain.dim)
    # rows of Lt are L N^{-1/2}; equilibrate before the Hermitian solve
    scale = np.linalg.norm(Lt, axis=1)
    if np.any(scale == 0.0):
        raise np.linalg.LinAlgError("rank-deficient constraint system")
    Ls = Lt / scale[:, None]
    M = Ls @ Ls.conj().T
    if np.linalg.cond(M) > 1e12:
        raise np.linalg.LinAlgError("rank-deficient constraint system")
    bs = b / scale
    y = scipy.linalg.solve(M, bs, assume_a="pos")
    value = float(np.real(bs.conj() @ y))
    c_tilde = Ls.conj().T @ y  # coefficients in the orthonormal basis
    half_log_n = 0.5 * log_moments(domain, T)
    coeffs = c_tilde * np.exp(-half_log_n)
    residuals = Lt @ c_tilde - b
    return ExtremalResult(order, value, coeffs, multi_indices(domain.dim, T), residuals)


# ---------------------------------------------------------------------------
# identity checks
# ---------------------------------------------------------------------------


class Residuals(NamedTuple):
    kappa: float
    metric: float
    curvature: float


def fuchs_check(domain: ReinhardtDomain, z: Sequence[complex], xi: Sequence[complex], T: int = DEFAULT_TRUNCATION) -> Residuals:
    """``|kappa I0 - 1|``, ``|B^2 - I0/I1| / B^2`` and ``|H - (2 - I1^2/(I0 I2))|``."""
    jet = kernel_jet(domain, z, T)
    I0 = extremal(domain, z, None, 0, T).value
    I1 = extremal(domain, z, xi, 1, T).value
    I2 = extremal(domain, z, xi, 2, T).value
    B2 = jet.metric_norm(xi) ** 2
    H = jet.curvature(xi)
    return Residuals(
        abs(jet.kappa * I0 - 1.0),
        abs(B2 - I0 / I1) / B2,
        abs(H - (2.0 - I1**2 / (I0 * I2))),
    )


@dataclass(frozen=True)
class Dilation:
    lam: float

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.lam * np.asarray(z, dtype=complex)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        return self.lam * np.eye(len(z), dtype=complex)

    def image(self, domain: ReinhardtDomain) -> ReinhardtDomain:
        return Scaled(domain, self.lam)


@dataclass(frozen=True, eq=False)
class Unitary:
    """A unitary map; images are known for balls (any unitary) and for
    diagonal phase matrices on any Reinhardt domain."""

    U: np.ndarray

    def apply(self, z: np.ndarray) -> np.ndarray:
        return self.U @ np.asarray(z, dtype=complex)

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(self.U, dtype=complex)

    def image(self, domain: ReinhardtDomain) -> ReinhardtDomain:
        U = np.asarray(self.U, dtype=complex)
        if not np.allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-12):
            raise ValueError("matrix is not unitary")
        if isinstance(domain, Ball):
            return domain
        off = U - np.diag(np.diag(U))
        if np.allclose(off, 0.0, atol=1e-15):
            return domain
        raise ValueError(f"image of {domain.spec} under a non-diagonal unitary is not a Reinhardt domain here")


@dataclass(frozen=True)
class DiscAutomorphism:
    """``z1 -> (a - z1)/(1 - conj(a) z1)`` on the first (disc) factor."""

    a: complex

    def __post_init__(self) -> None:
        if not abs(self.a) < 1:
            raise ValueError("automorphism parameter must lie in the unit disc")

    def apply(self, z: np.ndarray) -> np.ndarray:
        z = np.array(z, dtype=complex)
        z[0] = (self.a - z[0]) / (1.0 - np.conj(self.a) * z[0])
        return z

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        J = np.eye(len(z), dtype=complex)
        J[0, 0] = (abs(self.a) ** 2 - 1.0) / (1.0 - np.conj(self.a) * z[0]) ** 2
        return J

    def image(self, domain: ReinhardtDomain) -> ReinhardtDomain:
        if isinstance(domain, Disc) or (isinstance(domain, Product) and isinstance(domain.factors[0], Disc)):
            return domain
        raise ValueError("disc automorphisms act on the disc or a product with a leading disc factor")


def transform_check(
    fmap,
    D1: ReinhardtDomain,
    z: Sequence[complex],
    xi: Sequence[complex],
    T: int = DEFAULT_TRUNCATION,
    D2: Optional[ReinhardtDomain] = None,
) -> Residuals:
    """Relative residuals of ``I_j^{D1}(z, xi) |det J|^2 = I_j^{D2}(f(z), J xi)``."""
    z = np.asarray(z, dtype=complex)
    xi = np.asarray(xi, dtype=complex)
    D2 = fmap.image(D1) if D2 is None else D2
    J = fmap.jacobian(z)
    det2 = abs(np.linalg.det(J)) ** 2
    w = fmap.apply(z)
    Jxi = J @ xi
    out = []
    for j in range(3):
        lhs = extremal(D1, z, xi, j, T).value * det2
        rhs = extremal(D2, w, Jxi, j, T).value
        out.append(abs(lhs - rhs) / abs(rhs))
    return Residuals(*out)


def monotonicity_check(
    inner: ReinhardtDomain,
    outer: ReinhardtDomain,
    z: Sequence[complex],
    xi: Sequence[complex],
    T: int = DEFAULT_TRUNCATION,
    slack: float = 1e-10,
) -> tuple[bool, bool, bool]:
    """``I_j^{inner}(z) <= I_j^{outer}(z)`` for ``j = 0, 1, 2``."""
    if not inclusion_certified(inner, outer):
        raise ValueError(f"cannot certify {inner.spec} inside {outer.spec}")
    res = []
    for j in range(3):
        a = extremal(inner, z, xi, j, T).value
        b = extremal(outer, z, xi, j, T).value
        res.append(bool(a <= b * (1.0 + slack)))
    return tuple(res)


# ---------------------------------------------------------------------------
# closed forms and helpers
# ---------------------------------------------------------------------------


class ProductValues(NamedTuple):
    I0: float
    I1: float
    I2: float
    kappa: float
    B: float
    H: float


def product_closed_forms(n: int, eta: Sequence[complex]) -> ProductValues:
    """Values at the origin of ``D x B_n`` in direction ``eta``.

    With ``c = pi^(n+1)/n!``, ``x = |eta1|^2``, ``y = |eta'|^2``:
    ``I0 = c``, ``I1 = c/(2x + (n+1)y)``,
    ``I2 = c/(4(3x^2 + 2(n+1)xy + (n+1)(n+2)y^2/2))``.
    """
    eta = np.asarray(eta, dtype=complex)
    if eta.shape[0] != n + 1:
        raise ValueError("direction must have n+1 entries")
    x = abs(eta[0]) ** 2
    y = float(np.sum(np.abs(eta[1:]) ** 2))
    c = math.pi ** (n + 1) / math.factorial(n)
    S = 2 * x + (n + 1) * y
    Q = 3 * x * x + 2 * (n + 1) * x * y + 0.5 * (n + 1) * (n + 2) * y * y
    I0, I1, I2 = c, c / S, c / (4 * Q)
    H = -2.0 * (2 * x * x + (n + 1) * y * y) / S**2
    return ProductValues(I0, I1, I2, 1.0 / c, math.sqrt(S), H)


def dilated_extremal(domain: ReinhardtDomain, lam: Sequence[float], eta: Sequence[complex], order: int, T: int = DEFAULT_TRUNCATION) -> float:
    """``I_j^{Lambda D}(0, eta) = |det Lambda|^2 I_j^D(0, Lambda^-1 eta)`` for diagonal ``Lambda``."""
    lam = np.asarray(lam, dtype=float)
    eta = np.asarray(eta, dtype=complex)
    det2 = float(np.prod(lam) ** 2)
    return det2 * extremal(domain, np.zeros(domain.dim), eta / lam, order, T).value


def random_interior_points(
    domain: ReinhardtDomain,
    count: int,
    seed: int = 0,
    T: int = DEFAULT_TRUNCATION,
    shrink: float = 0.7,
    tail_tol: float = TAIL_TOL,
    max_draws: int = 100_000,
) -> np.ndarray:
    """``count`` random points ``shrink * w`` (``w`` drawn by rejection from the bounding polydisc)
    whose truncated series passes the tail estimate."""
    rng = np.random.default_rng(seed)
    radii = domain.coordinate_radii()
    out = []
    draws = 0
    while len(out) < count and draws < max_draws:
        draws += 1
        r = radii * rng.random(domain.dim)
        ang = 2 * np.pi * rng.random(domain.dim)
        w = r * np.exp(1j * ang)
        if not domain.contains(w):
            continue
        z = shrink * w
        rows, _, degrees = _jet_vectors(domain, z, T)
        if _tail_estimate(rows, degrees, T) <= tail_tol:
            out.append(z)
    if len(out) < count:
        raise TruncationError(f"only {len(out)} certified points found in {max_draws} draws")
    return np.array(out)
