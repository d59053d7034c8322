"""Bounded complete Reinhardt domains and their monomial moments.

On a complete Reinhardt domain the monomials ``z^alpha`` are mutually
orthogonal in ``A^2(D)``, so everything in the kernel engine reduces to the
moments ``N_alpha = ||z^alpha||^2``. All moments here have closed forms:
Beta/Dirichlet integrals for the disc, ball, polydisc and the egg
``{|z1|^2 + |z2|^(2m) < 1}``; dilations multiply by powers of the factors.
Moments are returned as logs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

__all__ = [
    "ReinhardtDomain",
    "Disc",
    "Ball",
    "Polydisc",
    "Egg",
    "Product",
    "Scaled",
    "AnisoScaled",
    "parse_domain",
    "product_domain",
    "multi_indices",
    "log_moments",
    "moment",
    "canonical_scaling",
    "inclusion_certified",
]

LOG_PI = math.log(math.pi)


class ReinhardtDomain:
    """Base class; subclasses are frozen dataclasses (hashable, usable as cache keys)."""

    dim: int

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gauge(self, z: np.ndarray) -> np.ndarray:
        """A continuous function of ``|z|`` that is ``< 1`` exactly on the domain.

        ``z`` has shape ``(K, dim)``; the gauge is homogeneous of degree 1 under
        the diagonal action ``z -> s z`` only for balanced shapes, but it is
        always monotone in each ``|z_i|``.
        """
        raise NotImplementedError

    def coordinate_radii(self) -> np.ndarray:
        raise NotImplementedError

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def contains(self, z: Sequence[complex]) -> bool:
        z = np.asarray(z, dtype=complex).reshape(1, -1)
        if z.shape[1] != self.dim:
            raise ValueError(f"point has {z.shape[1]} coordinates, domain has dimension {self.dim}")
        return bool(self.gauge(z)[0] < 1.0)

    def volume(self) -> float:
        return math.exp(float(self.log_moments(np.zeros((1, self.dim), dtype=int))[0]))

    def __str__(self) -> str:
        return self.spec


@dataclass(frozen=True)
class Disc(ReinhardtDomain):
    dim: int = 1

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        return LOG_PI - np.log(alphas[:, 0] + 1.0)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return np.abs(z[:, 0])

    def coordinate_radii(self) -> np.ndarray:
        return np.ones(1)

    @property
    def spec(self) -> str:
        return "disc"


@dataclass(frozen=True)
class Ball(ReinhardtDomain):
    """Unit ball of ``C^k``: ``N_alpha = pi^k alpha! / (|alpha| + k)!``."""

    dim: int = 1

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        k = self.dim
        return k * LOG_PI + np.sum(gammaln(alphas + 1.0), axis=1) - gammaln(alphas.sum(axis=1) + k + 1.0)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return np.linalg.norm(z, axis=1)

    def coordinate_radii(self) -> np.ndarray:
        return np.ones(self.dim)

    @property
    def spec(self) -> str:
        return f"ball:{self.dim}"


@dataclass(frozen=True)
class Polydisc(ReinhardtDomain):
    dim: int = 1

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        return np.sum(LOG_PI - np.log(alphas + 1.0), axis=1)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return np.max(np.abs(z), axis=1)

    def coordinate_radii(self) -> np.ndarray:
        return np.ones(self.dim)

    @property
    def spec(self) -> str:
        return f"polydisc:{self.dim}"


@dataclass(frozen=True)
class Egg(ReinhardtDomain):
    """``{|z1|^2 + |z2|^(2m) < 1}`` in ``C^2``.

    With ``x = |z1|^2``, ``y = |z2|^(2m)`` the moment is a Dirichlet integral:
    ``N_(a,b) = (pi^2/m) Gamma(a+1) Gamma((b+1)/m) / Gamma(a + 2 + (b+1)/m)``.
    """

    m: int = 2
    dim: int = 2

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("egg exponent must be >= 1")
        if self.dim != 2:
            raise ValueError("egg domains live in C^2")

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        a = alphas[:, 0].astype(float)
        q = (alphas[:, 1] + 1.0) / self.m
        return 2 * LOG_PI - math.log(self.m) + gammaln(a + 1.0) + gammaln(q) - gammaln(a + 2.0 + q)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return np.abs(z[:, 0]) ** 2 + np.abs(z[:, 1]) ** (2 * self.m)

    def coordinate_radii(self) -> np.ndarray:
        return np.ones(2)

    @property
    def spec(self) -> str:
        return f"egg:{self.m}"


@dataclass(frozen=True)
class Product(ReinhardtDomain):
    factors: tuple = ()

    def __post_init__(self) -> None:
        if not self.factors:
            raise ValueError("a product needs at least one factor")
        object.__setattr__(self, "dim", sum(f.dim for f in self.factors))

    def _split(self, arr: np.ndarray) -> list[np.ndarray]:
        out, start = [], 0
        for f in self.factors:
            out.append(arr[:, start : start + f.dim])
            start += f.dim
        return out

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        return sum(f.log_moments(a) for f, a in zip(self.factors, self._split(alphas)))

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return np.max(np.column_stack([f.gauge(p) for f, p in zip(self.factors, self._split(z))]), axis=1)

    def coordinate_radii(self) -> np.ndarray:
        return np.concatenate([f.coordinate_radii() for f in self.factors])

    @property
    def spec(self) -> str:
        return "prod:" + ",".join(f.spec for f in self.factors)


@dataclass(frozen=True)
class Scaled(ReinhardtDomain):
    """``lam * base``: ``N_alpha`` picks up ``lam^(2|alpha| + 2 dim)``."""

    base: ReinhardtDomain = Disc()
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("dilation factor must be positive")
        object.__setattr__(self, "dim", self.base.dim)

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        return self.base.log_moments(alphas) + 2.0 * math.log(self.lam) * (alphas.sum(axis=1) + self.dim)

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return self.base.gauge(z / self.lam)

    def coordinate_radii(self) -> np.ndarray:
        return self.lam * self.base.coordinate_radii()

    @property
    def spec(self) -> str:
        return f"scale:{self.lam!r}:{self.base.spec}"


@dataclass(frozen=True)
class AnisoScaled(ReinhardtDomain):
    """``{(lam1 w1, lam2 w') : w in base}``."""

    base: ReinhardtDomain = Disc()
    lam1: float = 1.0
    lam2: float = 1.0

    def __post_init__(self) -> None:
        if not (self.lam1 > 0 and self.lam2 > 0):
            raise ValueError("dilation factors must be positive")
        object.__setattr__(self, "dim", self.base.dim)

    @property
    def factors_vector(self) -> np.ndarray:
        lam = np.full(self.dim, self.lam2)
        lam[0] = self.lam1
        return lam

    def log_moments(self, alphas: np.ndarray) -> np.ndarray:
        return self.base.log_moments(alphas) + 2.0 * ((alphas + 1.0) @ np.log(self.factors_vector))

    def gauge(self, z: np.ndarray) -> np.ndarray:
        return self.base.gauge(z / self.factors_vector)

    def coordinate_radii(self) -> np.ndarray:
        return self.factors_vector * self.base.coordinate_radii()

    @property
    def spec(self) -> str:
        return f"anisoscale:{self.lam1!r},{self.lam2!r}:{self.base.spec}"


def product_domain(n: int) -> Product:
    """``D x B_n(0, 1)``."""
    return Product((Disc(), Ball(n)))


def _parse_factor(text: str) -> ReinhardtDomain:
    name, _, arg = text.strip().partition(":")
    if name == "disc" and not arg:
        return Disc()
    if name in ("ball", "polydisc", "egg"):
        try:
            k = int(arg)
        except ValueError:
            raise ValueError(f"bad integer in domain spec {text!r}") from None
        if k < 1:
            raise ValueError(f"dimension/exponent must be >= 1 in {text!r}")
        return {"ball": Ball, "polydisc": Polydisc}[name](k) if name != "egg" else Egg(k)
    raise ValueError(f"unknown domain spec {text!r}")


def parse_domain(spec: str) -> ReinhardtDomain:
    """Parse ``disc``, ``ball:k``, ``polydisc:k``, ``egg:m``, ``prod:A,B,...``,
    ``scale:lam:<spec>`` and ``anisoscale:lam1,lam2:<spec>``."""
    spec = spec.strip()
    head, _, rest = spec.partition(":")
    try:
        if head == "prod":
            return Product(tuple(_parse_factor(f) for f in rest.split(",")))
        if head == "scale":
            lam, _, inner = rest.partition(":")
            return Scaled(parse_domain(inner), float(lam))
        if head == "anisoscale":
            lams, _, inner = rest.partition(":")
            l1, l2 = (float(v) for v in lams.split(","))
            return AnisoScaled(parse_domain(inner), l1, l2)
    except ValueError as exc:
        raise ValueError(f"bad domain spec {spec!r}: {exc}") from None
    return _parse_factor(spec)


@lru_cache(maxsize=64)
def multi_indices(dim: int, T: int) -> np.ndarray:
    """All ``alpha`` in ``N^dim`` with ``|alpha| <= T``, ordered by total degree."""
    if dim < 1 or T < 0:
        raise ValueError("need dim >= 1 and T >= 0")
    shells = []
    for k in range(T + 1):
        shells.append(_compositions(dim, k))
    out = np.concatenate(shells, axis=0)
    out.setflags(write=False)
    return out


def _compositions(dim: int, k: int) -> np.ndarray:
    if dim == 1:
        return np.array([[k]], dtype=np.int64)
    parts = [np.column_stack([np.full(len(sub), first, dtype=np.int64), sub]) for first in range(k, -1, -1) for sub in [_compositions(dim - 1, k - first)]]
    return np.concatenate(parts, axis=0)


@lru_cache(maxsize=256)
def _cached_log_moments(domain: ReinhardtDomain, T: int) -> np.ndarray:
    out = np.asarray(domain.log_moments(multi_indices(domain.dim, T)), dtype=float)
    if not np.all(np.isfinite(out)):
        raise ArithmeticError(f"non-finite moment for {domain.spec}")
    out.setflags(write=False)
    return out


def log_moments(domain: ReinhardtDomain, T: int) -> np.ndarray:
    """``log N_alpha`` for the basis ``multi_indices(domain.dim, T)`` (memoized)."""
    return _cached_log_moments(domain, T)


def moment(domain: ReinhardtDomain, alpha: Union[int, Sequence[int]]) -> float:
    """``||z^alpha||^2_{L^2(domain)}``."""
    a = np.atleast_1d(np.asarray(alpha, dtype=np.int64)).reshape(1, -1)
    if a.shape[1] != domain.dim:
        raise ValueError(f"multi-index length {a.shape[1]} does not match dimension {domain.dim}")
    if np.any(a < 0):
        raise ValueError("multi-index entries must be non-negative")
    return math.exp(float(domain.log_moments(a)[0]))


def canonical_scaling(domain: ReinhardtDomain) -> tuple[ReinhardtDomain, float, float]:
    """Write ``domain`` as ``diag(lam1, lam2, ...) base`` with ``base`` unscaled."""
    if isinstance(domain, Scaled):
        base, a, b = canonical_scaling(domain.base)
        return base, a * domain.lam, b * domain.lam
    if isinstance(domain, AnisoScaled):
        base, a, b = canonical_scaling(domain.base)
        return base, a * domain.lam1, b * domain.lam2
    return domain, 1.0, 1.0


def inclusion_certified(inner: ReinhardtDomain, outer: ReinhardtDomain) -> bool:
    """``inner subset outer`` for dilates of a common complete Reinhardt base."""
    b_in, a_in, c_in = canonical_scaling(inner)
    b_out, a_out, c_out = canonical_scaling(outer)
    if b_in != b_out:
        return False
    if b_in.dim == 1:
        return a_in <= a_out
    return a_in <= a_out and c_in <= c_out
