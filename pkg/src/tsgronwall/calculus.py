"""Delta integral and time-scale exponential on a single finite scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NegativeInput, NotRegressive, Overflow, ReversedRange, ShapeMismatch
from .timescale import TimeScale


@dataclass(frozen=True, eq=False)
class ScaleFunction:
    """Values tabulated at every point of a time scale."""

    scale: TimeScale
    values: np.ndarray
    nonnegative: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size != len(self.scale):
            raise ShapeMismatch(
                f"{vals.size} values for a scale of {len(self.scale)} points")
        if self.nonnegative and np.any(vals < 0):
            raise NegativeInput("function flagged nonnegative has negative values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, scale, fn, nonnegative=False):
        return cls(scale, [fn(t) for t in scale], nonnegative)

    @classmethod
    def constant(cls, scale, c, nonnegative=False):
        return cls(scale, np.full(len(scale), float(c)), nonnegative)

    def __call__(self, t):
        return float(self.values[self.scale.index(t)])


def _range(scale: TimeScale, lo, hi) -> tuple[int, int]:
    i, j = scale.index(lo), scale.index(hi)
    if i > j:
        raise ReversedRange(f"lower limit {lo} exceeds upper limit {hi}")
    return i, j


def delta_integral(f: ScaleFunction, lo: float, hi: float) -> float:
    """Integral of `f` over ``[lo, hi)``: the sum of ``f(t) * mu(t)`` for ``lo <= t < hi``."""
    i, j = _range(f.scale, lo, hi)
    mu = f.scale.mu
    return math.fsum(f.values[k] * mu[k] for k in range(i, j))


def is_positively_regressive(p: ScaleFunction, lo: float, hi: float) -> bool:
    i, j = _range(p.scale, lo, hi)
    factors = 1.0 + p.scale.mu[i:j] * p.values[i:j]
    return bool(np.all(factors > 0))


def delta_exp(p: ScaleFunction, t: float, t0: float) -> float:
    """``e_p(t, t0)`` by the product formula, factors taken in ascending order.

    Raises NotRegressive if any factor ``1 + mu*p`` is nonpositive on
    ``[t0, t)``, Overflow if the product leaves the float range.
    """
    i, j = _range(p.scale, t0, t)
    mu = p.scale.mu
    out = 1.0
    for k in range(i, j):
        factor = 1.0 + float(mu[k]) * float(p.values[k])
        if not factor > 0:
            raise NotRegressive(
                f"1 + mu*p = {factor!r} <= 0 at t = {p.scale.points[k]!r}")
        out *= factor
    if not math.isfinite(out):
        raise Overflow(f"exponential overflowed on [{t0}, {t})")
    return out
