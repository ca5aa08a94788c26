"""Explicit Gronwall-type estimates as grid functions.

The three-variable estimate has the shape::

    bound(x, y, z) = p1(x, y, z) + p2(x, y, z) * C(x, y) * E(x, y)

    C(x, y)    = int_{x0}^{x} int_{y0}^{y} int_a^b f p1 dq dtau ds
    Qbar(s, y) = int_{y0}^{y} int_a^b f(s, tau, q) p2(s, tau, q) dq dtau
    E(x, y)    = e_{Qbar(., y)}(x, x0), the exponential taken along T1

The estimates for the integral equation ``u = g + int int int F(..., u)`` are
the same shape with different zeroth-order terms.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import HypothesisViolated, NegativeInput, Overflow, ShapeMismatch
from .gridfun import (
    GridFunction2,
    GridFunction3,
    inner_double_table,
    inner_single_table,
    triple_cumulative_table,
)


@dataclass(frozen=True)
class NodeRecord:
    index: tuple
    coords: tuple
    subject: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.subject


@dataclass
class BoundReport:
    """Pointwise comparison of a subject grid against a bound grid.

    ``verdict`` is ``"dominated"``, ``"violated"`` or, when inputs failed a
    theorem hypothesis that the caller chose to override,
    ``"hypothesis-unverified"``.
    """

    records: list
    verdict: str
    max_violation: float
    argmax: Optional[tuple]
    tol: float
    relative: bool = False
    min_interior_margin: Optional[float] = None
    argmin_interior: Optional[tuple] = None
    terminal_margin: Optional[float] = None
    terminal_node: Optional[tuple] = None
    violated_nodes: int = 0
    hypothesis_violations: list = field(default_factory=list)

    @property
    def dominated(self) -> bool:
        return self.violated_nodes == 0

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "max_violation": self.max_violation,
            "argmax": list(self.argmax) if self.argmax is not None else None,
            "violated_nodes": self.violated_nodes,
            "nodes": len(self.records),
            "tol": self.tol,
            "tol_mode": "relative" if self.relative else "absolute",
            "min_interior_margin": self.min_interior_margin,
            "argmin_interior": list(self.argmin_interior) if self.argmin_interior else None,
            "terminal_margin": self.terminal_margin,
            "terminal_node": list(self.terminal_node) if self.terminal_node else None,
            "hypothesis_violations": list(self.hypothesis_violations),
        }


class Thm21Parts(NamedTuple):
    C: GridFunction2
    Qbar: GridFunction2
    E: GridFunction2


# -- hypothesis checks ----------------------------------------------------------------

def negative_inputs(**grids) -> list[str]:
    return [f"{name} has negative values (min {g.min():.6g})"
            for name, g in grids.items() if not g.is_nonnegative()]


def monotonicity_violations(name: str, g: GridFunction2) -> list[str]:
    out = []
    for axis, label in ((0, "x"), (1, "y")):
        d = np.diff(g.values, axis=axis)
        if d.size and np.any(d < 0):
            out.append(f"{name} is not nondecreasing in {label} (drop {(-d).max():.6g})")
    return out


def _require_nonnegative(strict, **grids):
    if strict:
        bad = negative_inputs(**grids)
        if bad:
            raise NegativeInput("; ".join(bad))


def _same_domain(*grids):
    first = grids[0]
    for g in grids[1:]:
        if type(g) is not type(first) or g.domain != first.domain:
            raise ShapeMismatch("all inputs must be tabulated on the same domain")


def _exclusive_cumprod(factors: np.ndarray) -> np.ndarray:
    """Row ``i`` of the result is the ascending product of rows ``0 .. i-1``."""
    out = np.ones_like(factors)
    if factors.shape[0] > 1:
        with np.errstate(over="ignore"):
            out[1:] = np.cumprod(factors[:-1], axis=0)
    if not np.all(np.isfinite(out)):
        raise Overflow("exponential factor overflowed")
    return out


# -- the estimates ---------------------------------------------------------------------

def lemma_bound(a: GridFunction2, f: GridFunction2, strict: bool = True) -> GridFunction2:
    """``a(x, y) * e_{alpha_y}(x, x0)`` with ``alpha_y(s) = int_{y0}^{y} f(s, t) dt``.

    With ``strict`` the Lemma's hypotheses are enforced: `a` and `f`
    nonnegative (NegativeInput) and `a` nondecreasing in both variables
    (HypothesisViolated).
    """
    _same_domain(a, f)
    _require_nonnegative(strict, a=a, f=f)
    if strict:
        bad = monotonicity_violations("a", a)
        if bad:
            raise HypothesisViolated("; ".join(bad))
    alpha = inner_single_table(f).values
    E = _exclusive_cumprod(1.0 + a.t1.mu[:, None] * alpha)
    return GridFunction2(a.domain, a.values * E)


def thm21_parts(p1: GridFunction3, p2: GridFunction3, f: GridFunction3) -> Thm21Parts:
    """The shared tables ``C``, ``Qbar`` and ``E`` behind :func:`thm21_bound`."""
    _same_domain(p1, p2, f)
    C = triple_cumulative_table(f * p1)
    Qbar = inner_double_table(f * p2)
    mu1 = p1.domain.t1.mu
    E = _exclusive_cumprod(1.0 + mu1[:, None] * Qbar.values)
    return Thm21Parts(C, Qbar, GridFunction2(C.domain, E))


def thm21_bound(p1: GridFunction3, p2: GridFunction3, f: GridFunction3,
                strict: bool = True) -> GridFunction3:
    _same_domain(p1, p2, f)
    _require_nonnegative(strict, p1=p1, p2=p2, f=f)
    C, _, E = thm21_parts(p1, p2, f)
    with np.errstate(over="ignore", invalid="ignore"):
        growth = (C.values * E.values)[:, :, None]
        bound = p1.values + p2.values * growth
    if not np.all(np.isfinite(bound)):
        raise Overflow("bound overflowed")
    return GridFunction3(p1.domain, bound)


def thm31_estimate(g: GridFunction3, r: GridFunction3, f: GridFunction3,
                   strict: bool = True) -> GridFunction3:
    """Estimate of ``|u|``: the three-variable bound with ``p1 = |g|``, ``p2 = r``."""
    _require_nonnegative(strict, r=r, f=f)
    return thm21_bound(abs(g), r, f, strict=strict)


def thm32_estimate(g: GridFunction3, r: GridFunction3, f: GridFunction3,
                   k: GridFunction3, strict: bool = True) -> GridFunction3:
    """Estimate of ``|u - g|`` given the residual ``k`` of `g` under the kernel.

    `g` only fixes the domain here; its influence enters through `k`.
    """
    _same_domain(g, r, f, k)
    _require_nonnegative(strict, r=r, f=f, k=k)
    return thm21_bound(k, r, f, strict=strict)


def thm33_estimate(gbar: GridFunction3, kbar: GridFunction3, r: GridFunction3,
                   f: GridFunction3, strict: bool = True) -> GridFunction3:
    """Estimate of ``|u - h|`` from the forcing gap `gbar` and the kernel gap `kbar`."""
    _same_domain(gbar, kbar, r, f)
    _require_nonnegative(strict, gbar=gbar, kbar=kbar, r=r, f=f)
    return thm21_bound(gbar + kbar, r, f, strict=strict)
