"""Model domain, cone-type streams and the per-t scaling frame.

The model domain is ``Omega = {Re z1 + phi(|z'|^2) < 0}`` in ``C^{n+1}``.
For a stream point ``q(t)`` the frame holds the foot point ``p(t)`` on
``bOmega``, the normal distance ``d(t)``, the tangential scale ``d*(t)`` and
the affine maps that carry ``q(t)`` to ``(-d(t), 0)``:

* ``T1``: remove ``Im q1``;  ``R1``: unitary on ``z'`` sending ``q'/|q'|`` to ``e2``;
* ``T2``: translate by ``-p``; ``R2``: real rotation sending ``grad rho(p)/A`` to ``e1``;
* ``gamma = R2 o T2``, ``Sigma(z) = (z1/d, z'/d*)``, ``f(z) = ((1+z1)/(1-z1), z')``.

``t``, ``d`` and every value of ``phi`` are :class:`LogScalar`; region
predicates and the inclusion sampler compare sums of such terms in the log
field, so they stay valid for ``t`` far below the double range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .logscalar import LogScalar, Real
from .profile import FlatProfile, RootFindingError, find_root

__all__ = [
    "ModelDomain",
    "ConeStream",
    "SlicePoint",
    "FootPointData",
    "ScalingFrame",
    "RegionSpec",
    "TangentSplit",
    "EpsRadius",
    "SandwichReport",
    "rho_eval",
    "cone_member",
    "slice_normalize",
    "foot_point",
    "d_star",
    "d_eps",
    "build_frame",
    "frame_from_point",
    "region_spec",
    "region_member",
    "tangent_split",
    "sandwich_check",
    "first_inclusion_certified",
    "parse_t_grid",
    "geometric_log_t_grid",
]

REGIONS = ("W", "V_t", "D_t^eps", "D~_t^eps")


# ---------------------------------------------------------------------------
# domain and streams
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ModelDomain:
    """``{Re z1 + phi(|z2|^2 + ... + |z_{n+1}|^2) < 0}``.

    ``delta0`` fixes the box ``W = (-delta0/10, delta0/10)^2 x B_n(0, delta0/10)``.
    The default keeps ``W`` inside the region where ``phi(|z'|^2)`` is convex
    for ``m = 1`` while containing ``d*(t)`` for every ``t < exp(-2)``.
    """

    n: int = 1
    profile: FlatProfile = field(default_factory=FlatProfile)
    delta0: float = 8.0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.delta0 <= 0:
            raise ValueError("delta0 must be positive")

    @property
    def w_radius(self) -> float:
        return self.delta0 / 10.0

    @property
    def dim(self) -> int:
        return self.n + 1


def _as_point(z: Sequence[complex], dim: Optional[int] = None) -> np.ndarray:
    z = np.asarray(z, dtype=complex).reshape(-1)
    if dim is not None and z.shape[0] != dim:
        raise ValueError(f"expected a point in C^{dim}, got {z.shape[0]} coordinates")
    return z


def rho_eval(domain: ModelDomain, z: Sequence[complex]) -> LogScalar:
    """Defining function ``Re z1 + phi(|z'|^2)``; negative inside."""
    z = _as_point(z, domain.dim)
    x = float(np.sum(np.abs(z[1:]) ** 2))
    return LogScalar.from_float(z[0].real) + domain.profile(x)


def cone_member(alpha: float, N: float, z: Sequence[complex]) -> bool:
    """``Re z1 < -alpha |z'|^N``."""
    if alpha <= 0 or N <= 0:
        raise ValueError("cone parameters must be positive")
    z = _as_point(z)
    return bool(z[0].real < -alpha * float(np.linalg.norm(z[1:])) ** N)


@dataclass(frozen=True)
class SlicePoint:
    """``q~ = (-depth, r, 0, ..., 0)`` with both entries in log form."""

    depth: LogScalar
    r: LogScalar

    @classmethod
    def from_array(cls, q: Sequence[complex]) -> "SlicePoint":
        q = _as_point(q)
        return cls(depth=LogScalar.from_float(-q[0].real), r=LogScalar.from_float(float(np.linalg.norm(q[1:]))))


@dataclass(frozen=True)
class ConeStream:
    """A curve ``q(t) -> 0`` inside ``C_{alpha,N} = {Re z1 < -alpha |z'|^N}``.

    ``normal``: ``q(t) = (-t, 0)``.
    ``tilted``: ``q(t) = (-t + i a t, c t^(N'/N) u)``, so that
    ``|q'|^N = c^N t^(N')`` and ``N' > N`` keeps the stream inside the cone
    for all small ``t``.
    """

    alpha: float = 1.0
    N: float = 4.0
    kind: str = "normal"
    a: float = 0.0
    c: float = 0.0
    Nprime: float = 0.0
    u: tuple = (1.0,)

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.N <= 0:
            raise ValueError("alpha and N must be positive")
        if self.kind not in ("normal", "tilted"):
            raise ValueError(f"stream kind must be 'normal' or 'tilted', got {self.kind!r}")
        if self.kind == "tilted":
            if self.c < 0:
                raise ValueError("c must be non-negative")
            if not self.Nprime > self.N:
                raise ValueError(f"tilted streams need N' > N (got N'={self.Nprime}, N={self.N})")
            if not np.linalg.norm(np.asarray(self.u, dtype=complex)) > 0:
                raise ValueError("direction u must be non-zero")

    @classmethod
    def from_json(cls, spec: dict) -> "ConeStream":
        u = spec.get("u", [1.0])
        u = tuple(complex(v) if not isinstance(v, (list, tuple)) else complex(v[0], v[1]) for v in u)
        return cls(
            alpha=float(spec.get("alpha", 1.0)),
            N=float(spec.get("N", 4.0)),
            kind=spec.get("kind", "normal"),
            a=float(spec.get("a", 0.0)),
            c=float(spec.get("c", 0.0)),
            Nprime=float(spec.get("Nprime", 0.0)),
            u=u,
        )

    def direction(self, n: int) -> np.ndarray:
        u = np.zeros(n, dtype=complex)
        given = np.asarray(self.u, dtype=complex)
        if given.size > n:
            raise ValueError(f"direction has {given.size} entries, domain has n={n}")
        u[: given.size] = given
        return u / np.linalg.norm(u)

    @property
    def tangential_exponent(self) -> float:
        return self.Nprime / self.N

    def log_tangential(self, log_t: float) -> float:
        if self.kind == "normal" or self.c == 0.0:
            return -math.inf
        return math.log(self.c) + self.tangential_exponent * log_t

    def slice_point(self, log_t: float) -> SlicePoint:
        return SlicePoint(depth=LogScalar(1, log_t), r=LogScalar(1, self.log_tangential(log_t)))

    def point(self, log_t: float, n: int) -> np.ndarray:
        """``q(t)`` as a complex array (entries below the double range become 0)."""
        t = math.exp(log_t)
        q = np.zeros(n + 1, dtype=complex)
        q[0] = -t + 1j * self.a * t
        lr = self.log_tangential(log_t)
        if lr > -math.inf:
            q[1:] = math.exp(lr) * self.direction(n)
        return q

    def in_cone(self, log_t: float) -> bool:
        """Cone membership of ``q(t)`` evaluated in the log field."""
        lr = self.log_tangential(log_t)
        if lr == -math.inf:
            return True
        return log_t > math.log(self.alpha) + self.N * lr


def _householder_to_e1(v: np.ndarray) -> np.ndarray:
    """Unitary ``U`` with ``U v = |v| e1``."""
    n = v.shape[0]
    nv = np.linalg.norm(v)
    if nv == 0:
        return np.eye(n, dtype=complex)
    v = v / nv
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0 + 0j
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    w = v - phase * e1
    nw = np.linalg.norm(w)
    H = np.eye(n, dtype=complex)
    if nw > 1e-300:
        w = w / nw
        H = H - 2.0 * np.outer(w, w.conj())
    D = np.eye(n, dtype=complex)
    D[0, 0] = np.conj(phase)
    return D @ H


def _slice_rotation(direction: np.ndarray) -> np.ndarray:
    n = direction.shape[0]
    R1 = np.eye(n + 1, dtype=complex)
    R1[1:, 1:] = _householder_to_e1(direction)
    return R1


def slice_normalize(q: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
    """``q~ = R1 T1 q = (Re q1, |q'|, 0, ..., 0)`` and the unitary ``R1`` used."""
    q = _as_point(q)
    R1 = _slice_rotation(q[1:])
    shifted = q.copy()
    shifted[0] = q[0].real
    qt = R1 @ shifted
    qt[1] = abs(qt[1])
    qt[2:] = 0.0
    return qt, R1


# ---------------------------------------------------------------------------
# foot point, d(t), d*(t)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FootPointData:
    """Foot point ``p = (p1, p2, 0, ...)`` of ``q~`` on ``bOmega``.

    ``beta = 2 p2 phi'(p2^2)`` is the tilt of the normal, ``A = sqrt(1 + beta^2)``.
    ``p2`` and ``r`` are also kept as logs since they can underflow.
    """

    depth: LogScalar
    r: float
    log_r: float
    p2: float
    log_p2: float
    p1: LogScalar
    phi_p: LogScalar
    dphi_p: LogScalar
    beta: LogScalar
    A: float
    d: LogScalar
    residual_p1: float
    residual_p2: float

    @property
    def t(self) -> LogScalar:
        """``-Re q1(t)``, which is ``t`` for both stream kinds."""
        return self.depth

    @property
    def log_A(self) -> float:
        return math.log(self.A)


def _tilt(profile: FlatProfile, p2: float) -> tuple[LogScalar, LogScalar, LogScalar]:
    x = LogScalar(1, 2.0 * math.log(p2)) if p2 > 0 else LogScalar.zero()
    phi_p = profile(x)
    dphi = profile.derivative(x, 1)
    beta = LogScalar.from_float(2.0 * p2) * dphi
    return phi_p, dphi, beta


def foot_point(domain: ModelDomain, qtilde: "SlicePoint | Sequence[complex]", tol: float = 1e-13) -> FootPointData:
    """Nearest boundary point to ``q~ = (-depth, r, 0, ...)``.

    Eliminating ``d`` from ``p1 = Re q~1 + d/A`` and ``p2 = r + beta d/A``
    leaves the scalar equation ``p2 - r - beta(p2) (depth - phi(p2^2)) = 0``
    on ``[r, p_max]`` where ``phi(p_max^2) = depth``.
    """
    q = qtilde if isinstance(qtilde, SlicePoint) else SlicePoint.from_array(qtilde)
    prof = domain.profile
    s = q.depth
    if s.sign <= 0:
        raise ValueError("foot point needs Re q~1 < 0")
    if q.r.sign == 0:
        zero = LogScalar.zero()
        return FootPointData(s, 0.0, -math.inf, 0.0, -math.inf, zero, zero, zero, zero, 1.0, s, 0.0, 0.0)
    if not prof(q.r ** 2) < s:
        raise ValueError("q~ lies outside the model domain")

    log_r = q.r.log
    r = math.exp(log_r) if log_r > -745 else 0.0

    def correction(p: float) -> LogScalar:
        phi_p, _, beta = _tilt(prof, p)
        return beta * (s - phi_p)

    tau_r = correction(r) if r > 0 else LogScalar.zero()
    if tau_r.sign == 0 or tau_r.log < log_r + math.log(1e-18):
        p2, log_p2 = r, log_r
    else:
        p_max = math.sqrt(prof.inverse(s)) if s.log < 0 else math.inf
        if not math.isfinite(p_max):
            raise ValueError("depth too large for the model profile")

        def F(p: float) -> float:
            return p - r - float(correction(p))

        try:
            p2 = find_root(F, r, p_max, tol=tol * max(r, 1e-300))
        except RootFindingError as exc:
            raise RuntimeError(f"foot point solve failed: {exc}") from exc
        log_p2 = math.log(p2)

    phi_p, dphi, beta = _tilt(prof, p2)
    A = math.sqrt(1.0 + float(beta) ** 2)
    d_over_A = s - phi_p
    d = d_over_A * A
    p1 = -phi_p
    res2 = abs(float((LogScalar(1, log_p2) - LogScalar(1, log_r) - beta * d_over_A) / LogScalar(1, log_p2)))
    res1 = abs(float((p1 - (-s + d / A)) / s))
    return FootPointData(s, r, log_r, p2, log_p2, p1, phi_p, dphi, beta, A, d, res1, res2)


def _dstar_equation(fp: FootPointData, prof: FlatProfile):
    """``G(s)`` whose root is ``d*``; see the boundary condition for ``(-d, s e2)``."""
    lA = fp.log_A
    bd = fp.beta * fp.d / fp.A

    def lhs(s: float) -> LogScalar:
        return fp.d / fp.A + fp.beta * (s / fp.A) + fp.phi_p

    def G(s: float) -> float:
        L = lhs(s)
        if L.log >= 0.0:
            return -math.inf
        radius = (-1.0 / L.log) ** (1.0 / (2 * prof.m))
        return s / fp.A + fp.p2 - float(bd) - radius

    return G, lhs


def d_star(domain: ModelDomain, fp: FootPointData, tol: float = 1e-15) -> float:
    """Smallest ``s > 0`` with ``(-d, s, 0, ...)`` on ``b gamma_t(Omega)``.

    Solved in the ``psi`` coordinate: the boundary condition reads
    ``(s/A + p2 - beta d/A)^2 = psi^{-1}(d/A + beta s/A + phi(p2^2))``.
    """
    prof = domain.profile
    G, lhs = _dstar_equation(fp, prof)
    lo = 0.0
    if G(lo) >= 0:
        raise RuntimeError("d* bracket: (-d, 0) is not inside gamma_t(Omega)")
    hi = fp.A * (1.0 + fp.p2)
    for _ in range(60):
        if G(hi) > 0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("d* bracket: no sign change found")
    return find_root(G, lo, hi, tol=tol)


def dstar_residual(domain: ModelDomain, fp: FootPointData, dstar: float) -> float:
    """Relative mismatch of the two sides of the ``d*`` boundary condition, in log form."""
    prof = domain.profile
    _, lhs = _dstar_equation(fp, prof)
    L = lhs(dstar)
    arg = dstar / fp.A + fp.p2 - float(fp.beta * fp.d / fp.A)
    R = prof(arg * arg)
    return abs(L.log - R.log) / abs(L.log)


class EpsRadius(NamedTuple):
    value: float
    clamped: bool


def d_eps(domain: ModelDomain, fp: FootPointData, eps: float, which: int) -> EpsRadius:
    """Tangential radius ``d_1^eps`` (``which=1``) or ``d_2^eps`` (``which=2``).

    The admissible set is ``phi(|z2/A + p2 + beta z1/A|^2 + |z''|^2) <= level``
    over ``z`` in ``W``. Taking ``Re z2`` and ``|z1|`` at their extremes over
    ``W`` gives an upper variant of the supremum in closed form:
    ``A (psi^{-1}(level)^{1/2} + p2 + beta |z1|_max / A)``.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    prof = domain.profile
    wr = domain.w_radius
    level = fp.d ** (1.0 / (1.0 + eps) ** which) / fp.A + fp.phi_p + fp.beta * (wr / fp.A)
    if level.log >= 0.0:
        return EpsRadius(wr, True)
    c_max = fp.p2 + float(fp.beta) * math.sqrt(2.0) * wr / fp.A
    radius = fp.A * (math.sqrt(prof.inverse(level)) + c_max)
    if radius >= wr:
        return EpsRadius(wr, True)
    return EpsRadius(radius, False)


# ---------------------------------------------------------------------------
# the frame and its maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScalingFrame:
    domain: ModelDomain
    foot: FootPointData
    dstar: float
    R1: np.ndarray
    im_q1: float = 0.0
    log_t: Optional[float] = None

    @property
    def n(self) -> int:
        return self.domain.n

    @property
    def d(self) -> LogScalar:
        return self.foot.d

    @property
    def theta(self) -> float:
        """Rotation angle of ``R2``: ``atan(2 p2 phi'(p2^2))``."""
        return math.atan(float(self.foot.beta))

    @property
    def R2(self) -> np.ndarray:
        b, A = float(self.foot.beta), self.foot.A
        R = np.eye(self.n + 1, dtype=complex)
        R[:2, :2] = np.array([[1.0, b], [-b, 1.0]]) / A
        return R

    @property
    def rotation(self) -> np.ndarray:
        """Linear part ``R2 R1`` of the full normalization."""
        return self.R2 @ self.R1

    @property
    def p(self) -> np.ndarray:
        p = np.zeros(self.n + 1, dtype=complex)
        p[0] = float(self.foot.p1)
        p[1] = self.foot.p2
        return p

    def _float_d(self) -> float:
        d = self.d.materialize()
        if not isinstance(d, float) or d == 0.0:
            raise ValueError("d(t) is outside the double range; use the log-field predicates")
        return d

    def gamma_apply(self, w: Sequence[complex]) -> np.ndarray:
        w = _as_point(w, self.n + 1)
        return self.R2 @ (w - self.p)

    def gamma_inverse(self, z: Sequence[complex]) -> np.ndarray:
        z = _as_point(z, self.n + 1)
        b, A = float(self.foot.beta), self.foot.A
        out = z.copy()
        out[0] = (z[0] - b * z[1]) / A - float(self.foot.phi_p)
        out[1] = (z[1] + b * z[0]) / A + self.foot.p2
        return out

    def normalize(self, q: Sequence[complex]) -> np.ndarray:
        """``gamma_t o R1 o T1`` applied to a point in original coordinates."""
        q = _as_point(q, self.n + 1)
        shifted = q.copy()
        shifted[0] = q[0] - 1j * self.im_q1
        return self.gamma_apply(self.R1 @ shifted)

    def sigma(self, z: Sequence[complex]) -> np.ndarray:
        z = _as_point(z, self.n + 1)
        out = z.copy()
        out[0] = z[0] / self._float_d()
        out[1:] = z[1:] / self.dstar
        return out

    def sigma_cayley(self, z: Sequence[complex]) -> np.ndarray:
        """``f o Sigma``; pole where ``z1 = d(t)``."""
        v = self.sigma(z)
        if v[0] == 1.0:
            raise ZeroDivisionError("Cayley map pole at z1 = d(t)")
        v[0] = (1.0 + v[0]) / (1.0 - v[0])
        return v

    def sigma_cayley_inverse(self, u: Sequence[complex]) -> np.ndarray:
        u = _as_point(u, self.n + 1)
        w = u.copy()
        w[0] = self._float_d() * (u[0] - 1.0) / (u[0] + 1.0)
        w[1:] = self.dstar * u[1:]
        return w

    def cayley_derivative_logs(self) -> np.ndarray:
        """log of the diagonal of ``(f o Sigma)'(-d, 0)``: ``1/(2d), 1/d*, ...``."""
        out = np.full(self.n + 1, -math.log(self.dstar))
        out[0] = -math.log(2.0) - self.d.log
        return out

    def cayley_derivative(self) -> np.ndarray:
        return np.diag(np.exp(self.cayley_derivative_logs())).astype(complex)

    def rho_gamma_inverse(self, z: Sequence[complex]) -> LogScalar:
        """``rho o gamma_t^{-1}`` with the small terms kept in the log field."""
        z = _as_point(z, self.n + 1)
        re = np.array([z[0].real])
        with np.errstate(divide="ignore"):
            log_re = np.log(np.abs(re))
        sign, log = _rho_gamma_inv_terms(self, np.sign(re), log_re, np.array([z[0].imag]), z[None, 1:])
        return LogScalar(int(sign[0]), float(log[0]))


def build_frame(domain: ModelDomain, stream: ConeStream, log_t: float) -> ScalingFrame:
    """Frame for ``q(t)``; ``t = exp(log_t)`` may be far below the double range."""
    log_t = float(log_t)
    if not stream.in_cone(log_t):
        raise ValueError(f"stream leaves C_(alpha,N) at log t = {log_t}")
    fp = foot_point(domain, stream.slice_point(log_t))
    ds = float(d_star(domain, fp))
    R1 = _slice_rotation(stream.direction(domain.n))
    return ScalingFrame(domain, fp, ds, R1, im_q1=stream.a * math.exp(log_t), log_t=log_t)


def frame_from_point(domain: ModelDomain, q: Sequence[complex]) -> ScalingFrame:
    q = _as_point(q, domain.dim)
    _, R1 = slice_normalize(q)
    fp = foot_point(domain, SlicePoint.from_array(q))
    ds = float(d_star(domain, fp))
    return ScalingFrame(domain, fp, ds, R1, im_q1=float(q[0].imag))


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionSpec:
    """Per-frame data for ``W``, ``V_t``, ``D_t^eps`` and ``D~_t^eps``."""

    eps: float
    c0: float
    log_slab: float
    d1: EpsRadius
    d2: EpsRadius
    w_radius: float

    @property
    def slab(self) -> LogScalar:
        """``d(t)^{1/(1+eps)^2}``."""
        return LogScalar(1, self.log_slab)


def region_spec(frame: ScalingFrame, eps: float) -> RegionSpec:
    if eps <= 0:
        raise ValueError("eps must be positive")
    c0 = math.cos(math.pi / (2.0 * (1.0 + eps)))
    return RegionSpec(
        eps=eps,
        c0=c0,
        log_slab=frame.d.log / (1.0 + eps) ** 2,
        d1=d_eps(frame.domain, frame.foot, eps, 1),
        d2=d_eps(frame.domain, frame.foot, eps, 2),
        w_radius=frame.domain.w_radius,
    )


def _logsumexp_pos(logs: list[np.ndarray]) -> np.ndarray:
    out = np.full(logs[0].shape, -np.inf)
    for lg in logs:
        out = np.logaddexp(out, lg)
    return out


def _rho_gamma_inv_terms(
    frame: ScalingFrame,
    re1_sign: np.ndarray,
    re1_log: np.ndarray,
    im1: np.ndarray,
    wp: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Sign and log-magnitude of ``rho o gamma^{-1}(w)`` for a batch of points.

    ``Re w1 = re1_sign * exp(re1_log)``; ``w' = wp`` (shape ``(K, n)``).
    Terms: ``Re w1/A - beta Re w2/A - phi(p2^2) + phi(X)`` with
    ``X = |w2/A + p2 + beta w1/A|^2 + |w3|^2 + ...``.
    """
    fp = frame.foot
    prof = frame.domain.profile
    lA = fp.log_A
    with np.errstate(divide="ignore", invalid="ignore", over="ignore", under="ignore"):
        re1_log = np.where(re1_sign == 0, -np.inf, re1_log)
        log_abs_w1 = 0.5 * np.logaddexp(2.0 * re1_log, 2.0 * np.log(np.abs(im1)))
        if fp.beta.sign != 0:
            scale = np.exp(fp.beta.log - lA + log_abs_w1)
            unit = np.where(
                np.isfinite(log_abs_w1),
                (re1_sign * np.exp(re1_log - log_abs_w1) + 1j * im1 * np.exp(-log_abs_w1)),
                0.0,
            )
            shift = scale * unit
            shift = np.where(np.isfinite(shift), shift, 0.0)
        else:
            shift = np.zeros(re1_sign.shape, dtype=complex)
        X = np.abs(wp[:, 0] / fp.A + fp.p2 + shift) ** 2 + np.sum(np.abs(wp[:, 1:]) ** 2, axis=1)
        log_phi_X = np.where(X > 0, -np.power(X, -float(prof.m)), -np.inf)

        pos = [log_phi_X]
        neg = [np.full(X.shape, fp.phi_p.log)]
        t1 = re1_log - lA
        pos.append(np.where(re1_sign > 0, t1, -np.inf))
        neg.append(np.where(re1_sign < 0, t1, -np.inf))
        if fp.beta.sign != 0:
            re2 = wp[:, 0].real
            t2 = fp.beta.log + np.log(np.abs(re2)) - lA
            pos.append(np.where(re2 < 0, t2, -np.inf))
            neg.append(np.where(re2 > 0, t2, -np.inf))
        lp = _logsumexp_pos(pos)
        ln = _logsumexp_pos(neg)
        sign = np.where(lp > ln, 1, np.where(lp < ln, -1, 0))
        mag = np.maximum(lp, ln) + np.log1p(-np.exp(-np.abs(lp - ln)))
    return sign, np.where(sign == 0, -np.inf, mag)


def _in_W(spec: RegionSpec, re1_sign, re1_log, im1, wp) -> np.ndarray:
    lw = math.log(spec.w_radius)
    with np.errstate(divide="ignore"):
        ok_re = (re1_sign == 0) | (re1_log < lw)
    return ok_re & (np.abs(im1) < spec.w_radius) & (np.linalg.norm(wp, axis=1) < spec.w_radius)


def _region_batch(frame: ScalingFrame, spec: RegionSpec, region: str, re1_sign, re1_log, im1, wp) -> np.ndarray:
    if region not in REGIONS:
        raise ValueError(f"unknown region {region!r}; expected one of {REGIONS}")
    inside = _in_W(spec, re1_sign, re1_log, im1, wp)
    if region == "W":
        return inside
    with np.errstate(divide="ignore"):
        small_re = (re1_sign == 0) | (re1_log < spec.log_slab)
    if region == "V_t":
        return inside & small_re
    sign, _ = _rho_gamma_inv_terms(frame, re1_sign, re1_log, im1, wp)
    slab_ok = (re1_sign > 0) | small_re
    in_D = inside & slab_ok & (sign < 0)
    if region == "D_t^eps":
        return in_D
    if np.any(in_D & (re1_sign >= 0)):
        raise ValueError("branch cut: a point of D_t^eps has Re z1 >= 0")
    return in_D & _h_eps_condition(spec, re1_sign, re1_log, im1)


def _h_eps_condition(spec: RegionSpec, re1_sign, re1_log, im1) -> np.ndarray:
    """``|h_eps(z)| > exp(-c0 slab)`` i.e. ``Re (-z1)^{1/(1+eps)} < c0 slab``.

    Principal branch; only called where ``Re z1 < 0``.
    """
    a = 1.0 / (1.0 + spec.eps)
    with np.errstate(divide="ignore", invalid="ignore"):
        re_m = np.exp(re1_log)  # -Re z1 (may underflow, only used for the angle)
        angle = np.arctan2(-im1, re_m)
        log_mod = 0.5 * np.logaddexp(2.0 * re1_log, 2.0 * np.log(np.abs(im1)))
        lhs = a * log_mod + np.log(np.cos(a * angle))
    return lhs < math.log(spec.c0) + spec.log_slab


def region_member(frame: ScalingFrame, spec: RegionSpec, z: Sequence[complex], region: str) -> bool:
    """Membership of a float point in ``W``, ``V_t``, ``D_t^eps`` or ``D~_t^eps``."""
    z = _as_point(z, frame.n + 1)
    re = np.array([z[0].real])
    with np.errstate(divide="ignore"):
        out = _region_batch(frame, spec, region, np.sign(re), np.log(np.abs(re)), np.array([z[0].imag]), z[None, 1:])
    return bool(out[0])


def h_eps(eps: float, z: Sequence[complex]) -> complex:
    """``exp(-(-z1)^{1/(1+eps)})`` on the principal branch; needs ``Re z1 < 0``."""
    z1 = complex(_as_point(z)[0])
    if z1.real >= 0:
        raise ValueError("h_eps is defined for Re z1 < 0 (principal branch)")
    return complex(np.exp(-((-z1) ** (1.0 / (1.0 + eps)))))


# ---------------------------------------------------------------------------
# normal / tangential splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TangentSplit:
    xi: np.ndarray
    normal: np.ndarray
    tangential: np.ndarray

    @property
    def normal_norm(self) -> float:
        return float(np.linalg.norm(self.normal))

    @property
    def tangential_norm(self) -> float:
        return float(np.linalg.norm(self.tangential))


def tangent_split(frame: ScalingFrame, xi: Sequence[complex]) -> TangentSplit:
    """``xi = xi_N + xi_T`` with ``xi_N = <M xi, e1> M^{-1} e1``, ``M = R2 R1``."""
    xi = _as_point(xi, frame.n + 1)
    M = frame.rotation
    rotated = M @ xi
    e1 = np.zeros(frame.n + 1, dtype=complex)
    e1[0] = 1.0
    normal = rotated[0] * (M.conj().T @ e1)
    return TangentSplit(xi=xi, normal=normal, tangential=xi - normal)


# ---------------------------------------------------------------------------
# sandwich inclusions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    log_t: Optional[float]
    eps: float
    delta: float
    samples: int
    violations_in: int
    violations_out: int
    accepted_out: int
    starved: bool
    certified_in: bool


def _ball_points(unif: np.ndarray, n: int) -> np.ndarray:
    """Map ``(K, 2n)`` uniforms to points uniform in the unit ball of ``C^n``."""
    from scipy.special import ndtri

    g = ndtri(np.clip(unif[:, 1:], 1e-12, 1 - 1e-12))
    if n == 1:
        angle = 2.0 * np.pi * unif[:, 1]
        direction = np.exp(1j * angle)[:, None]
    else:
        gc = g[:, 0::2][:, :n] + 1j * np.pad(g[:, 1::2], ((0, 0), (0, max(0, n - g[:, 1::2].shape[1]))))[:, :n]
        direction = gc / np.linalg.norm(gc, axis=1, keepdims=True)
    radius = unif[:, 0] ** (1.0 / (2 * n))
    return radius[:, None] * direction


def _inward_batch(frame: ScalingFrame, u: np.ndarray):
    """``(f o Sigma)^{-1}(u)`` in the split form used by the predicates."""
    v1 = (u[:, 0] - 1.0) / (u[:, 0] + 1.0)
    with np.errstate(divide="ignore"):
        re1_sign = np.sign(v1.real)
        re1_log = frame.d.log + np.log(np.abs(v1.real))
    im1 = np.exp(frame.d.log) * v1.imag
    wp = frame.dstar * u[:, 1:]
    return re1_sign, re1_log, im1, wp


def first_inclusion_certified(frame: ScalingFrame, eps: float, delta: float) -> bool:
    """Sufficient condition for ``(1-delta) D x B_n  subset  f o Sigma(D_t^eps)``.

    Worst cases over ``|u1| <= 1-delta``: ``Re w1 <= -d delta/(2-delta)``,
    ``|w1| <= d (2-delta)/delta``; over ``|u'| <= 1-delta``:
    ``X <= ((1-delta) d* + p2 + beta |w1|/A)^2``. Everything is compared in
    the log field.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    fp = frame.foot
    spec = region_spec(frame, eps)
    d = fp.d
    w1_max = d * ((2.0 - delta) / delta)
    if not w1_max.log < spec.log_slab:
        return False
    if not (w1_max.log < math.log(spec.w_radius) and (1 - delta) * frame.dstar < spec.w_radius):
        return False
    x_root = (1.0 - delta) * frame.dstar + fp.p2 + float(fp.beta * w1_max / fp.A)
    upper = (
        -(d * (delta / (2.0 - delta)) / fp.A)
        + fp.beta * ((1.0 - delta) * frame.dstar / fp.A)
        - fp.phi_p
        + frame.domain.profile(x_root * x_root)
    )
    return upper.sign < 0


def sandwich_check(
    frame: ScalingFrame,
    eps: float,
    delta: float,
    samples: int = 10_000,
    seed: int = 0,
    max_rounds: int = 50,
) -> SandwichReport:
    """Sampled check of ``(1-delta) D x B_n  subset  f o Sigma(D_t^eps)  subset  D x B_n(0, d2/d*)``.

    Inward: ``samples`` scrambled Halton points in ``(1-delta) D x B_n``,
    pulled back by ``(f o Sigma)^{-1}`` and tested for membership in
    ``D_t^eps``. Outward: rejection sampling of ``D_t^eps`` from its
    bounding box (mixed uniform / log-uniform proposal in ``Re w1``, with a
    share of proposals at ``Re w1 > 0`` that must all be rejected), then the
    image under ``f o Sigma`` is tested against the outer product domain.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1); the inclusion needs delta > 0")
    if samples <= 0:
        raise ValueError("samples must be positive")
    n = frame.n
    spec = region_spec(frame, eps)

    halton = qmc.Halton(d=2 + 2 * n, scramble=True, seed=seed)
    h = halton.random(samples)
    u1 = np.sqrt(h[:, 0]) * np.exp(2j * np.pi * h[:, 1])
    up = _ball_points(h[:, 2:], n)
    u = (1.0 - delta) * np.column_stack([u1, up])
    inside = _region_batch(frame, spec, "D_t^eps", *_inward_batch(frame, u))
    violations_in = int(np.count_nonzero(~inside))

    rng = np.random.default_rng(seed)
    box_radius = min(1.1 * spec.d2.value, spec.w_radius)
    log_depth = min(spec.log_slab, math.log(spec.w_radius))
    accepted = 0
    violations_out = 0
    rounds = 0
    while accepted < samples and rounds < max_rounds:
        rounds += 1
        k = samples
        choice = rng.random(k)
        U = rng.random(k)
        re1_sign = np.where(choice < 0.9, -1.0, 1.0)
        lo_log = frame.d.log - 5.0
        re1_log = np.where(
            choice < 0.45,
            log_depth + np.log(U),
            np.where(choice < 0.9, lo_log + U * (log_depth - lo_log), math.log(spec.w_radius) + np.log(U)),
        )
        im1 = spec.w_radius * (2.0 * rng.random(k) - 1.0)
        wp = box_radius * _ball_points(rng.random((k, 2 * n)), n)
        member = _region_batch(frame, spec, "D_t^eps", re1_sign, re1_log, im1, wp)
        take = np.flatnonzero(member)[: samples - accepted]
        accepted += take.size
        # f o Sigma(w) in D x B_n(0, d2/d*):  |f1| < 1  iff  Re w1 < 0
        bad_first = re1_sign[take] >= 0
        bad_rest = np.linalg.norm(wp[take], axis=1) / frame.dstar >= spec.d2.value / frame.dstar
        violations_out += int(np.count_nonzero(bad_first | bad_rest))

    return SandwichReport(
        log_t=frame.log_t,
        eps=eps,
        delta=delta,
        samples=samples,
        violations_in=violations_in,
        violations_out=violations_out,
        accepted_out=accepted,
        starved=accepted < samples,
        certified_in=first_inclusion_certified(frame, eps, delta),
    )


# ---------------------------------------------------------------------------
# t-grids
# ---------------------------------------------------------------------------


def geometric_log_t_grid(log_t_start: float = -50.0, log_t_end: float = -2000.0, points: int = 40) -> np.ndarray:
    """``log t`` values whose magnitudes are geometrically spaced."""
    if log_t_start >= 0 or log_t_end >= 0:
        raise ValueError("log t must be negative")
    if points < 2:
        return np.array([log_t_start])
    return -np.geomspace(-log_t_start, -log_t_end, points)


def parse_t_grid(spec: dict) -> np.ndarray:
    """``{"log10_t_start", "log10_t_end", "points"}`` or ``{"log_t_start", "log_t_end", "points"}``."""
    points = int(spec.get("points", 40))
    if "log10_t_start" in spec:
        ln10 = math.log(10.0)
        return geometric_log_t_grid(float(spec["log10_t_start"]) * ln10, float(spec["log10_t_end"]) * ln10, points)
    return geometric_log_t_grid(float(spec.get("log_t_start", -50.0)), float(spec.get("log_t_end", -2000.0)), points)
