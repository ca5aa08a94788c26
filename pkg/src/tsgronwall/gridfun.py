"""Grid functions on ``T1 x T2`` and ``T1 x T2 x I`` and the integral shapes built on them.

Grids are addressed by index; real coordinates are resolved through
:meth:`TimeScale.index`. The third coordinate is always integrated over the
whole of ``[a, b)``, so none of the operators take a z-limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import NegativeInput, ShapeMismatch
from .expr import Expression
from .timescale import TimeScale


@dataclass(frozen=True, eq=False)
class Domain3:
    t1: TimeScale
    t2: TimeScale
    i: TimeScale

    @property
    def shape(self) -> tuple[int, int, int]:
        return len(self.t1), len(self.t2), len(self.i)

    @property
    def x0(self) -> float:
        return self.t1.min

    @property
    def y0(self) -> float:
        return self.t2.min

    @property
    def a(self) -> float:
        return self.i.min

    @property
    def b(self) -> float:
        return self.i.max

    @property
    def plane(self) -> "Domain2":
        return Domain2(self.t1, self.t2)

    def weights(self) -> np.ndarray:
        """Cell volumes ``mu1(s) * mu2(t) * mu3(q)`` at every node."""
        return (self.t1.mu[:, None, None] * self.t2.mu[None, :, None]
                * self.i.mu[None, None, :])

    def coords(self):
        """Broadcastable coordinate arrays ``(x, y, z)``."""
        return (self.t1.points[:, None, None], self.t2.points[None, :, None],
                self.i.points[None, None, :])

    def __eq__(self, other):
        return (isinstance(other, Domain3) and self.t1 == other.t1
                and self.t2 == other.t2 and self.i == other.i)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Domain2:
    t1: TimeScale
    t2: TimeScale

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.t1), len(self.t2)

    @property
    def x0(self) -> float:
        return self.t1.min

    @property
    def y0(self) -> float:
        return self.t2.min

    def weights(self) -> np.ndarray:
        return self.t1.mu[:, None] * self.t2.mu[None, :]

    def coords(self):
        return self.t1.points[:, None], self.t2.points[None, :]

    def __eq__(self, other):
        return isinstance(other, Domain2) and self.t1 == other.t1 and self.t2 == other.t2

    __hash__ = None


class _Grid:
    """Shared arithmetic for tabulated grid functions."""

    domain: Union[Domain2, Domain3]
    values: np.ndarray

    def __init__(self, domain, values, nonnegative: bool = False):
        vals = np.array(values, dtype=float)
        if vals.shape == ():
            vals = np.full(domain.shape, float(vals))
        if vals.shape != domain.shape:
            raise ShapeMismatch(
                f"table of shape {vals.shape} does not match grid {domain.shape}")
        if nonnegative and np.any(vals < 0):
            raise NegativeInput("function flagged nonnegative has negative values")
        vals.setflags(write=False)
        self.domain = domain
        self.values = vals
        self.nonnegative = bool(nonnegative)

    def _other(self, other):
        if isinstance(other, _Grid):
            if type(other) is not type(self) or other.domain != self.domain:
                raise ShapeMismatch("grid functions live on different domains")
            return other.values
        return other

    def _new(self, values):
        return type(self)(self.domain, values)

    def __add__(self, other):
        return self._new(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._new(self.values - self._other(other))

    def __rsub__(self, other):
        return self._new(self._other(other) - self.values)

    def __mul__(self, other):
        return self._new(self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.values)

    def __abs__(self):
        return self._new(np.abs(self.values))

    def __getitem__(self, idx):
        return self.values[idx]

    def at(self, *coords) -> float:
        scales = (self.domain.t1, self.domain.t2) + ((self.domain.i,) if len(coords) == 3 else ())
        idx = tuple(s.index(c) for s, c in zip(scales, coords))
        return float(self.values[idx])

    def min(self) -> float:
        return float(self.values.min())

    def is_nonnegative(self) -> bool:
        return bool(np.all(self.values >= 0))

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.values.shape})"


class GridFunction3(_Grid):
    def __init__(self, domain: Domain3, values, nonnegative: bool = False):
        super().__init__(domain, values, nonnegative)


class GridFunction2(_Grid):
    def __init__(self, domain: Domain2, values, nonnegative: bool = False):
        super().__init__(domain, values, nonnegative)

    @property
    def t1(self):
        return self.domain.t1

    @property
    def t2(self):
        return self.domain.t2


def _rule_values(rule, env, shape):
    if isinstance(rule, str):
        rule = Expression(rule)
    if isinstance(rule, Expression):
        return np.broadcast_to(rule(**env), shape)
    if callable(rule):
        return np.broadcast_to(np.asarray(rule(**env), dtype=float), shape)
    return rule


def tabulate3(domain: Domain3, rule, nonnegative: bool = False) -> GridFunction3:
    """Tabulate an expression in ``x, y, z`` (or accept an explicit table) on `domain`."""
    x, y, z = domain.coords()
    vals = _rule_values(rule, {"x": x, "y": y, "z": z}, domain.shape)
    return GridFunction3(domain, vals, nonnegative)


def tabulate2(domain: Domain2, rule, nonnegative: bool = False) -> GridFunction2:
    """Tabulate an expression in ``x, y`` (or accept an explicit table) on `domain`."""
    x, y = domain.coords()
    vals = _rule_values(rule, {"x": x, "y": y}, domain.shape)
    return GridFunction2(domain, vals, nonnegative)


# -- integral operators --------------------------------------------------------------

def triple_cumulative(f: GridFunction3, x: float, y: float) -> float:
    """``int_{x0}^{x} int_{y0}^{y} int_a^b f  dq dtau ds`` at a single point."""
    d = f.domain
    i, j = d.t1.index(x), d.t2.index(y)
    return float(np.sum((f.values * d.weights())[:i, :j, :]))


def inner_double(f: GridFunction3, s_fixed: float, y: float) -> float:
    """``int_{y0}^{y} int_a^b f(s_fixed, tau, q) dq dtau``."""
    d = f.domain
    l, j = d.t1.index(s_fixed), d.t2.index(y)
    w = d.t2.mu[:j, None] * d.i.mu[None, :]
    return float(np.sum(f.values[l, :j, :] * w))


def _exclusive_cumsum(a: np.ndarray, axis: int) -> np.ndarray:
    out = np.cumsum(a, axis=axis)
    out = np.roll(out, 1, axis=axis)
    idx = [slice(None)] * a.ndim
    idx[axis] = 0
    out[tuple(idx)] = 0.0
    return out


def triple_cumulative_table(f: GridFunction3) -> GridFunction2:
    """:func:`triple_cumulative` at every ``(x, y)`` of the plane."""
    d = f.domain
    cell = np.sum(f.values * d.i.mu[None, None, :], axis=2)
    cell = cell * d.t1.mu[:, None] * d.t2.mu[None, :]
    table = _exclusive_cumsum(_exclusive_cumsum(cell, 0), 1)
    return GridFunction2(d.plane, table)


def inner_double_table(f: GridFunction3) -> GridFunction2:
    """:func:`inner_double` at every ``(s, y)``; row ``l`` holds ``s = t1[l]``."""
    d = f.domain
    col = np.sum(f.values * d.i.mu[None, None, :], axis=2) * d.t2.mu[None, :]
    return GridFunction2(d.plane, _exclusive_cumsum(col, 1))


def double_cumulative_table(f: GridFunction2) -> GridFunction2:
    """``int_{x0}^{x} int_{y0}^{y} f dt ds`` at every node of the plane."""
    cell = f.values * f.domain.weights()
    return GridFunction2(f.domain, _exclusive_cumsum(_exclusive_cumsum(cell, 0), 1))


def inner_single_table(f: GridFunction2) -> GridFunction2:
    """``s, y -> int_{y0}^{y} f(s, t) dt`` at every node of the plane."""
    return GridFunction2(f.domain, _exclusive_cumsum(f.values * f.domain.t2.mu[None, :], 1))
