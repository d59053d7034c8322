"""The acceptance suite, shared by ``flatbergman verify`` and the test-suite.

Each criterion returns a :class:`CriterionResult` holding a verdict, a short
detail string and a CSV table. Nothing random escapes the seed, and no
timings are written, so two runs with the same seed render identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.special import beta as beta_fn

from .asymptotics import (
    SCHEDULE,
    counterexample,
    curvature_ratio_bounds,
    kernel_ratio_bounds,
    lemma31_series,
    metric_ratio_bounds,
    parallel_map,
)
from .geometry import ConeStream, ModelDomain, build_frame, geometric_log_t_grid, sandwich_check
from .kernel import (
    DiscAutomorphism,
    Dilation,
    Unitary,
    extremal,
    fuchs_check,
    kernel_jet,
    random_interior_points,
    transform_check,
)
from .reinhardt import Ball, Disc, Egg, product_domain
from .report import csv_text

__all__ = ["CriterionResult", "CRITERIA", "run_criteria", "run_suite", "TILTED_STREAM", "NORMAL_STREAM"]

TILTED_STREAM = ConeStream(alpha=1.0, N=4.0, kind="tilted", a=0.0, c=1.0, Nprime=6.0, u=(1.0,))
NORMAL_STREAM = ConeStream(alpha=1.0, N=4.0, kind="normal")
XI_SET = ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0))


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    columns: list = field(default_factory=list)
    rows: list = field(default_factory=list)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name} -- {self.detail}"

    def csv(self) -> str:
        comments = [f"criterion {self.number}: {self.name}", f"verdict: {'pass' if self.passed else 'fail'}", self.detail]
        return csv_text(comments, self.columns, self.rows)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def criterion_1(seed: int = 0, jobs: int = 1) -> CriterionResult:
    P = product_domain(1)
    jet = kernel_jet(P, [0.0, 0.0], T=60)
    checks = [
        ("kappa(0)", jet.kappa, 1.0 / math.pi**2, _rel(jet.kappa, 1.0 / math.pi**2), 1e-10),
        ("B(0;e1)", jet.metric_norm([1, 0]), math.sqrt(2.0), abs(jet.metric_norm([1, 0]) - math.sqrt(2.0)), 1e-8),
        ("B(0;e2)", jet.metric_norm([0, 1]), math.sqrt(2.0), abs(jet.metric_norm([0, 1]) - math.sqrt(2.0)), 1e-8),
        ("H(0;(1,0))", jet.curvature([1, 0]), -1.0, abs(jet.curvature([1, 0]) + 1.0), 1e-6),
        ("H(0;(1,1))", jet.curvature([1, 1]), -0.5, abs(jet.curvature([1, 1]) + 0.5), 1e-6),
    ]
    rows = [[name, val, ref, err, tol, "certified" if err <= tol else "non-certified"] for name, val, ref, err, tol in checks]
    ok = all(err <= tol for *_, err, tol in checks)
    worst = max(err / tol for *_, err, tol in checks)
    return CriterionResult(1, "closed forms on D x B_1 at T=60", ok, f"max error/tolerance = {worst:.3g}",
                           ["quantity", "computed", "reference", "error", "tolerance", "tag"], rows)


def criterion_2(seed: int = 0, jobs: int = 1) -> CriterionResult:
    domains = [Disc(), Ball(2), product_domain(1), Egg(2)]
    rows, worst = [], 0.0
    for k, D in enumerate(domains):
        pts = random_interior_points(D, 20, seed=seed + k, T=60)
        rng = np.random.default_rng(seed + 100 + k)
        for z in pts:
            xi = rng.normal(size=D.dim) + 1j * rng.normal(size=D.dim)
            res = fuchs_check(D, z, xi, T=60)
            m = max(res)
            worst = max(worst, m)
            rows.append([D.spec] + [complex(c) for c in z] + [None] * (2 - D.dim) + list(res) + ["certified" if m < 1e-8 else "non-certified"])
    return CriterionResult(2, "Bergman-Fuchs residuals at random interior points", worst < 1e-8, f"max residual = {worst:.3g} (tol 1e-8)",
                           ["domain", "z1", "z2", "res_kappa", "res_metric", "res_curvature", "tag"], rows)


def criterion_3(seed: int = 0, jobs: int = 1) -> CriterionResult:
    P = product_domain(1)
    U = np.array([[1.0, 1.0j], [1.0j, 1.0]]) / math.sqrt(2.0)
    phases = np.diag(np.exp(1j * np.array([0.7, -1.3])))
    cases = [
        ("dilation 0.5 on disc", Dilation(0.5), Disc(), [0.3], [1.0]),
        ("dilation 0.8 on D x B_1", Dilation(0.8), P, [0.2, 0.1j], [1.0, 0.5]),
        ("unitary on ball(2)", Unitary(U), Ball(2), [0.2, 0.1j], [1.0, 2.0]),
        ("diagonal unitary on D x B_1", Unitary(phases), P, [0.3, -0.2], [0.4, 1.0j]),
        ("disc automorphism a=0.5 on disc", DiscAutomorphism(0.5), Disc(), [0.0], [1.0]),
        ("disc automorphism a=0.5 on D x B_1", DiscAutomorphism(0.5), P, [0.1, 0.3], [1.0, 1.0]),
    ]
    rows, worst = [], 0.0
    for name, fmap, D, z, xi in cases:
        res = transform_check(fmap, D, z, xi, T=60)
        worst = max(worst, max(res))
        rows.append([name] + list(res) + ["certified" if max(res) < 1e-8 else "non-certified"])
    I0_half = extremal(Disc(), [0.5], None, 0, 60).value
    ref = 0.5625 * math.pi
    err = _rel(I0_half, ref)
    rows.append(["I0 of disc at 0.5 vs 0.5625 pi", err, None, None, "certified" if err < 1e-8 else "non-certified"])
    ok = worst < 1e-8 and err < 1e-8
    return CriterionResult(3, "transformation formulae", ok, f"max residual = {max(worst, err):.3g} (tol 1e-8); I0_D(0.5) = {I0_half:.15g}",
                           ["case", "res_I0", "res_I1", "res_I2", "tag"], rows)


def criterion_4(seed: int = 0, jobs: int = 1) -> CriterionResult:
    P = product_domain(1)
    vol_ball = math.pi  # unit disc as B_1
    oracle = [
        math.pi * beta_fn(1, 1) * vol_ball,  # ||1||^2
        math.pi * beta_fn(2, 1) * vol_ball,  # ||z1||^2
        math.pi * beta_fn(3, 1) * vol_ball / 4.0,  # ||z1^2 / 2||^2
    ]
    rows, ok = [], True
    for j in range(3):
        res = extremal(P, [0.0, 0.0], [1.0, 0.0], j, 60)
        err = _rel(res.value, oracle[j])
        ok = ok and err <= 1e-10 and res.max_residual <= 1e-10
        rows.append([f"I{j}", res.value, oracle[j], err, res.max_residual, "certified" if err <= 1e-10 else "non-certified"])
    return CriterionResult(4, "extremal values on D x B_1 at 0 along e1", ok, "pi^2, pi^2/2, pi^2/12 (tol 1e-10)",
                           ["integral", "computed", "oracle", "rel_error", "constraint_residual", "tag"], rows)


def criterion_5(seed: int = 0, jobs: int = 1) -> CriterionResult:
    domain = ModelDomain(n=1)
    table = lemma31_series(domain, TILTED_STREAM, geometric_log_t_grid(), (1.0, 0.5, 0.25), jobs=jobs)
    below = table.below(-300.0, 1e-6)
    mono = table.monotone(-300.0)
    lim = table.liminf_ok(1e-9)
    ok = all(below.values()) and all(mono.values()) and all(a and b for a, b in lim.values())
    fails = [k for k, v in below.items() if not v] + [k for k, v in mono.items() if not v] + [f"liminf eps={e}" for e, v in lim.items() if not all(v)]
    detail = "all five limits below 1e-6 and monotone for log t <= -300; liminf bounds hold" if ok else "failing: " + ", ".join(fails)
    return CriterionResult(5, "scalar limits on the tilted stream", ok, detail, table.columns(), table.records())


def _sandwich_row(log_t: float, stream: ConeStream, seed: int) -> list:
    frame = build_frame(ModelDomain(n=1), stream, log_t)
    rep = sandwich_check(frame, 0.5, 0.1, 10_000, seed)
    ok = rep.violations_in == 0 and rep.violations_out == 0 and not rep.starved
    return [stream.kind, log_t, rep.violations_in, rep.violations_out, rep.accepted_out, rep.starved, rep.certified_in,
            "certified" if rep.certified_in else "non-certified", ok]


def criterion_6(seed: int = 0, jobs: int = 1) -> CriterionResult:
    grid = [lt for lt in geometric_log_t_grid() if lt <= -200.0]
    rows = []
    for stream in (NORMAL_STREAM, TILTED_STREAM):
        rows += parallel_map(_Sandwich(stream, seed), grid, jobs)
    ok = all(r[-1] for r in rows)
    bad = sum(1 for r in rows if not r[-1])
    return CriterionResult(6, "sandwich inclusions, eps=0.5, delta=0.1, 10^4 samples", ok,
                           f"{len(rows)} frames, {bad} with violations or starvation",
                           ["stream", "log_t", "violations_in", "violations_out", "accepted_out", "starved", "first_inclusion_certified", "tag", "ok"],
                           [r[:-1] for r in rows])


@dataclass(frozen=True)
class _Sandwich:
    stream: ConeStream
    seed: int

    def __call__(self, log_t: float) -> list:
        return _sandwich_row(float(log_t), self.stream, self.seed)


def criterion_7(seed: int = 0, jobs: int = 1) -> CriterionResult:
    domain = ModelDomain(n=1)
    grid = geometric_log_t_grid()
    target = 1.0 / (4.0 * math.pi**2)
    rows = []
    ok = True
    notes = []
    ratios = []
    for eps, delta in SCHEDULE:
        s = kernel_ratio_bounds(domain, NORMAL_STREAM, eps, delta, grid, jobs=jobs)
        r_row = []
        for r in s.records:
            closed = (r.d2 / r.dstar) ** 2 / (1.0 - delta) ** 4
            err = _rel(r.upper / r.lower, closed)
            r_row.append(r.upper / r.lower)
            if err > 1e-10:
                ok = False
                notes.append(f"closed-form mismatch {err:.3g}")
            rows.append(["kernel", "", eps, delta, r.log_t, r.lower, r.upper, r.center, target, r.upper / r.lower, closed,
                         "certified" if r.certified else "non-certified"])
        if not s.contains_target():
            ok = False
            notes.append(f"kernel target missed at ({eps},{delta})")
        ratios.append(r_row)
    for a, b in zip(ratios, ratios[1:]):
        if not all(y < x for x, y in zip(a, b)):
            ok = False
            notes.append("bracket ratio not decreasing along the schedule")
    eps, delta = SCHEDULE[-1]
    for xi in XI_SET:
        for fn, name in ((metric_ratio_bounds, "metric"), (curvature_ratio_bounds, "curvature")):
            s = fn(domain, NORMAL_STREAM, xi, eps, delta, grid, jobs=jobs)
            if not s.contains_target():
                ok = False
                notes.append(f"{name} target missed for xi={xi}")
            for r in s.records:
                rows.append([name, f"({xi[0]:g},{xi[1]:g})", eps, delta, r.log_t, r.lower, r.upper, r.center, s.target,
                             r.upper / r.lower, None, "certified" if r.certified else "non-certified"])
    detail = "kernel, metric and curvature brackets contain their targets; ratio matches closed form" if ok else "; ".join(sorted(set(notes)))
    return CriterionResult(7, "certified ratio brackets (normal stream, n=1)", ok, detail,
                           ["quantity", "xi", "eps", "delta", "log_t", "lower", "upper", "center_noncertified", "target", "upper_over_lower",
                            "closed_form_ratio", "tag"], rows)


def criterion_8(seed: int = 0, jobs: int = 1) -> CriterionResult:
    rep = counterexample(geometric_log_t_grid())
    ratio_err = float(np.max(np.abs(rep.ratio - math.sqrt(2.0))))
    single = counterexample([-100.0], u_grid=[1.0, 1.2, 1.4, 1.45, 1.6])
    q12 = math.exp(single.log_quotient[0, 1])
    q16 = math.exp(single.log_quotient[0, 4])
    cross = counterexample([-100.0]).crossing(0)
    u1 = list(np.round(rep.u_grid, 12)).index(1.0)
    at_one = rep.log_quotient[:, u1]
    ok = (
        ratio_err <= 1e-12
        and abs(q12 / 3.6e-9 - 1.0) < 0.02
        and abs(q16 / 5.6e4 - 1.0) < 0.02
        and cross is not None
        and cross[0] <= math.sqrt(2.0) <= cross[1]
        and cross[0] >= 1.4 - 1e-12
        and cross[1] <= 1.45 + 1e-12
        and bool(np.all(np.diff(at_one) < 0))
        and at_one[-1] < math.log(1e-300)
    )
    rows = []
    for i, lt in enumerate(rep.log_t):
        rows.append([lt, rep.dstar[i], rep.d1[i], rep.ratio[i], rep.ratio[i] - math.sqrt(2.0), at_one[i], "certified"])
    detail = (f"max |d1/d* - sqrt2| = {ratio_err:.3g}; quotient(1.2) = {q12:.4g}; quotient(1.6) = {q16:.4g}; "
              f"crossing in [{cross[0]:g}, {cross[1]:g}]" if cross else "no crossing found")
    return CriterionResult(8, "counterexample: d1/d* = sqrt2 and threshold sqrt2", ok, detail,
                           ["log_t", "dstar", "d1", "d1_over_dstar", "ratio_minus_sqrt2", "log_quotient_at_u2_eq_1", "tag"], rows)


CRITERIA: dict[int, Callable[..., CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
}


def run_criteria(seed: int = 0, jobs: int = 1, only: Optional[list] = None) -> list[CriterionResult]:
    keys = sorted(CRITERIA) if only is None else [k for k in sorted(CRITERIA) if k in only]
    return [CRITERIA[k](seed=seed, jobs=jobs) for k in keys]


def render(results: list[CriterionResult]) -> dict[str, str]:
    return {f"criterion_{r.number}.csv": r.csv() for r in results}


def run_suite(seed: int = 0, jobs: int = 1, out_dir: Optional[Path] = None) -> list[CriterionResult]:
    """Criteria 1-8, then criterion 9: a second full pass must render identical CSV bytes."""
    results = run_criteria(seed, jobs)
    first = render(results)
    second = render(run_criteria(seed, jobs))
    diff = sorted(k for k in first if first[k].encode() != second.get(k, "").encode())
    c9 = CriterionResult(
        9,
        "determinism of the CSV outputs",
        not diff,
        "two passes with the same seed are byte-identical" if not diff else "differs: " + ", ".join(diff),
        ["file", "bytes", "identical"],
        [[k, len(first[k].encode()), k not in diff] for k in sorted(first)],
    )
    results.append(c9)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in render(results).items():
            with open(out_dir / name, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
    return results
