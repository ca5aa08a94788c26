"""Theorem pipelines: build the estimate, solve the extremal equation, compare.

Each theorem pairs a *subject* (what the inequality controls, computed from
the exact solution) with a *bound*:

=========  ================================  ==========================================
theorem    subject                           bound
=========  ================================  ==========================================
lemma      u = a + int int f u               lemma_bound(a, f)
thm21      u = p1 + p2 int int int f u       thm21_bound(p1, p2, f)
thm31      abs(u), u = g + int int int F(u)  thm31_estimate(g, r, f)
thm32      abs(u - g)                        thm32_estimate(g, r, f, residual_k(g, F))
thm33      abs(u - h), h = v + int(G(h))     thm33_estimate(abs(g - v), kbar, r, f)
=========  ================================  ==========================================
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import bounds
from .errors import HypothesisViolated
from .gridfun import Domain2, Domain3, GridFunction2, GridFunction3
from .oracle import (
    KernelSpec,
    check_dominance,
    random_domain,
    random_grid,
    random_monotone_grid,
    residual_k,
    residual_kbar,
    solve_volterra_2d,
    solve_volterra_3d,
)

THEOREMS = ("lemma", "thm21", "thm31", "thm32", "thm33")

REQUIRED_FUNCTIONS = {
    "lemma": ("a", "f"),
    "thm21": ("p1", "p2", "f"),
    "thm31": ("g", "r", "f"),
    "thm32": ("g", "r", "f"),
    "thm33": ("g", "v", "r", "f"),
}

# relative slack when comparing a kernel coefficient against r * f
_KERNEL_RTOL = 1e-12


@dataclass
class Problem:
    theorem: str
    domain: Union[Domain3, Domain2]
    functions: dict
    kernel_f: Optional[KernelSpec] = None
    kernel_g: Optional[KernelSpec] = None

    def kernel(self) -> Optional[KernelSpec]:
        """The kernel of the primary equation (defaults to ``r * f * u``)."""
        if self.theorem == "lemma":
            return None
        if self.theorem == "thm21":
            fn = self.functions
            return KernelSpec.separable_linear(fn["p2"], fn["f"])
        if self.kernel_f is not None:
            return self.kernel_f
        return KernelSpec.separable_linear(self.functions["r"], self.functions["f"])


@dataclass
class Evaluation:
    subject: Union[GridFunction3, GridFunction2]
    bound: Union[GridFunction3, GridFunction2]
    solutions: dict
    intermediates: dict = field(default_factory=dict)
    hypothesis_violations: list = field(default_factory=list)


def kernel_violations(kernel: KernelSpec, r: GridFunction3, f: GridFunction3,
                      forcing_allowed: bool) -> list[str]:
    """Check ``|F(u) - F(v)| <= r f |u - v|`` (and ``F(0) = 0`` unless `forcing_allowed`)."""
    if (kernel.family == "separable_linear" and kernel.r is r and kernel.f is f):
        return []
    out = []
    d = kernel.domain
    n1, n2, n3 = d.shape
    worst = 0.0
    for i in range(1, n1):
        for j in range(1, n2):
            zero = np.zeros((i, j, n3))
            at0 = kernel.layer(i, j, zero)
            coef = kernel.layer(i, j, zero + 1.0) - at0
            cap = r.values[i, j, :, None, None, None] * f.values[None, :i, :j, :]
            excess = np.abs(coef) - cap * (1 + _KERNEL_RTOL)
            worst = max(worst, float(excess.max(initial=0.0)))
    if worst > 0:
        out.append(f"kernel coefficient exceeds r*f by up to {worst:.6g}")
    if not forcing_allowed and kernel.family == "separable_affine" and np.any(kernel.w.values != 0):
        out.append("kernel has a nonzero u-independent term, so |F| <= r f |u| fails")
    return out


def hypothesis_violations(problem: Problem) -> list[str]:
    fn = problem.functions
    th = problem.theorem
    if th == "lemma":
        return (bounds.negative_inputs(a=fn["a"], f=fn["f"])
                + bounds.monotonicity_violations("a", fn["a"]))
    if th == "thm21":
        return bounds.negative_inputs(p1=fn["p1"], p2=fn["p2"], f=fn["f"])
    out = bounds.negative_inputs(r=fn["r"], f=fn["f"])
    if not out:
        out += kernel_violations(problem.kernel(), fn["r"], fn["f"], forcing_allowed=th != "thm31")
        if th == "thm33":
            problem.kernel_g.check_domain(problem.domain)
    return out


def evaluate(problem: Problem, strict: bool = True) -> Evaluation:
    """Compute subject and bound for `problem`.

    With `strict`, any failed hypothesis raises HypothesisViolated; otherwise
    the failures are recorded on the result and the bound is computed anyway.
    """
    violations = hypothesis_violations(problem)
    if violations and strict:
        raise HypothesisViolated("; ".join(violations))
    fn = problem.functions
    th = problem.theorem
    if th == "lemma":
        u = solve_volterra_2d(fn["a"], fn["f"])
        bound = bounds.lemma_bound(fn["a"], fn["f"], strict=False)
        return Evaluation(u, bound, {"u": u}, hypothesis_violations=violations)
    kernel = problem.kernel()
    if th == "thm21":
        u = solve_volterra_3d(fn["p1"], kernel)
        bound = bounds.thm21_bound(fn["p1"], fn["p2"], fn["f"], strict=False)
        return Evaluation(u, bound, {"u": u}, hypothesis_violations=violations)
    g, r, f = fn["g"], fn["r"], fn["f"]
    u = solve_volterra_3d(g, kernel)
    if th == "thm31":
        bound = bounds.thm31_estimate(g, r, f, strict=False)
        return Evaluation(abs(u), bound, {"u": u}, hypothesis_violations=violations)
    if th == "thm32":
        k = residual_k(g, kernel)
        bound = bounds.thm32_estimate(g, r, f, k, strict=False)
        return Evaluation(abs(u - g), bound, {"u": u}, {"k": k}, violations)
    v = fn["v"]
    h = solve_volterra_3d(v, problem.kernel_g)
    gbar = abs(g - v)
    kbar = residual_kbar(h, kernel, problem.kernel_g)
    bound = bounds.thm33_estimate(gbar, kbar, r, f, strict=False)
    return Evaluation(abs(u - h), bound, {"u": u, "h": h},
                      {"gbar": gbar, "kbar": kbar}, violations)


def verify(problem: Problem, tol: float = 1e-9, relative: bool = True, strict: bool = True,
           bound_hook=None):
    """Evaluate and compare; returns ``(report, evaluation)``."""
    ev = evaluate(problem, strict=strict)
    bound = ev.bound if bound_hook is None else bound_hook(ev.bound)
    report = check_dominance(ev.subject, bound, tol, relative)
    if ev.hypothesis_violations:
        report.hypothesis_violations = list(ev.hypothesis_violations)
        report.verdict = "hypothesis-unverified"
    return report, ev


# -- randomized suites --------------------------------------------------------------------

@dataclass(frozen=True)
class FuzzConfig:
    count: int = 100
    max_t1: int = 12
    max_t2: int = 12
    max_i: int = 6
    coeff_max: float = 2.0


def random_problem(theorem: str, seed: int, index: int, cfg: FuzzConfig = FuzzConfig()) -> Problem:
    """Instance `index` of the suite seeded with `seed`; replayable from the pair."""
    rng = np.random.default_rng([int(seed), int(index)])
    d = random_domain(rng, cfg.max_t1, cfg.max_t2, cfg.max_i)
    cm = cfg.coeff_max
    if theorem == "lemma":
        plane = d.plane
        return Problem("lemma", plane, {"a": random_monotone_grid(rng, plane, cm),
                                        "f": random_grid(rng, plane, cm)})
    if theorem == "thm21":
        return Problem("thm21", d, {name: random_grid(rng, d, cm) for name in ("p1", "p2", "f")})
    fns = {"g": random_grid(rng, d, cm, signed=True),
           "r": random_grid(rng, d, cm), "f": random_grid(rng, d, cm)}
    kernel_g = None
    if theorem == "thm33":
        fns["v"] = random_grid(rng, d, cm, signed=True)
        rG, fG = random_grid(rng, d, cm), random_grid(rng, d, cm)
        if rng.random() < 0.5:
            kernel_g = KernelSpec.separable_linear(rG, fG)
        else:
            kernel_g = KernelSpec.separable_affine(rG, fG, random_grid(rng, d, cm, signed=True))
    return Problem(theorem, d, fns, KernelSpec.separable_linear(fns["r"], fns["f"]), kernel_g)


@dataclass(frozen=True)
class FuzzResult:
    index: int
    seed: int
    shape: tuple  # (n1, n2, n3); n3 = 0 for plane problems
    verdict: str
    max_violation: float
    min_relative_margin: float
    nodes: int


def _fuzz_one(args) -> FuzzResult:
    theorem, seed, index, cfg, tol, relative = args
    problem = random_problem(theorem, seed, index, cfg)
    report, ev = verify(problem, tol, relative)
    s, b = ev.subject.values, ev.bound.values
    scale = np.maximum(np.maximum(np.abs(s), np.abs(b)), np.finfo(float).tiny)
    rel = float(np.min((b - s) / scale))
    shape = (tuple(problem.domain.shape) + (0,))[:3]
    return FuzzResult(index, int(seed), shape, report.verdict,
                      report.max_violation, rel, len(report.records))


def run_fuzz(theorem: str, seed: int, cfg: FuzzConfig = FuzzConfig(), tol: float = 1e-9,
             relative: bool = True, jobs: int = 1) -> list[FuzzResult]:
    """Run ``cfg.count`` random instances; results come back ordered by index."""
    tasks = [(theorem, seed, k, cfg, tol, relative) for k in range(cfg.count)]
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1)) as pool:
            return list(pool.map(_fuzz_one, tasks, chunksize=8))
    return [_fuzz_one(t) for t in tasks]
