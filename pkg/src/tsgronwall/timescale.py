"""Finite time scales.

A finite time scale is a strictly increasing tuple of reals. Every point but
the last is right-scattered; the maximum is treated as right-dense, so its
graininess is zero and no delta integral ever extends past it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import BadParameter, NonMonotonic, NotInScale, TooFewPoints

#: absolute tolerance for point membership and duplicate detection
POINT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class TimeScale:
    points: np.ndarray
    provenance: tuple = ("explicit",)
    _mu: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1)
        if pts.size < 2:
            raise TooFewPoints(f"a time scale needs at least 2 points, got {pts.size}")
        if not np.all(np.isfinite(pts)):
            raise BadParameter("time scale points must be finite")
        gaps = np.diff(pts)
        if np.any(gaps <= 0):
            bad = int(np.argmax(gaps <= 0))
            raise NonMonotonic(
                f"points not strictly increasing at index {bad + 1}: "
                f"{pts[bad]!r} -> {pts[bad + 1]!r}")
        if np.any(gaps <= POINT_TOL):
            bad = int(np.argmax(gaps <= POINT_TOL))
            raise NonMonotonic(
                f"duplicate points (within {POINT_TOL}) at index {bad + 1}")
        pts.setflags(write=False)
        mu = np.append(gaps, 0.0)
        mu.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "provenance", tuple(self.provenance))
        object.__setattr__(self, "_mu", mu)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def explicit(cls, points: Sequence[float]) -> "TimeScale":
        return cls(np.asarray(points, dtype=float), ("explicit",))

    @classmethod
    def uniform(cls, start: float, stop: float, n: int) -> "TimeScale":
        """``n + 1`` equally spaced points from `start` to `stop` inclusive."""
        n = _as_count(n, "n")
        if not stop > start:
            raise BadParameter(f"uniform scale needs stop > start, got {start}..{stop}")
        k = np.arange(n + 1, dtype=float)
        pts = start + (stop - start) * k / n
        pts[-1] = stop
        return cls(pts, ("uniform", float(start), float(stop), n))

    @classmethod
    def integers(cls, lo: int, hi: int) -> "TimeScale":
        if int(lo) != lo or int(hi) != hi:
            raise BadParameter("integers scale needs integer endpoints")
        lo, hi = int(lo), int(hi)
        if hi <= lo:
            raise BadParameter(f"integers scale needs hi > lo, got {lo}..{hi}")
        return cls(np.arange(lo, hi + 1, dtype=float), ("integers", lo, hi))

    @classmethod
    def q_scale(cls, q: float, t0: float, n: int) -> "TimeScale":
        """Geometric scale ``{t0 * q**k : 0 <= k <= n}``."""
        n = _as_count(n, "n")
        if not q > 1:
            raise BadParameter(f"q_scale needs q > 1, got q={q}")
        if not t0 > 0:
            raise BadParameter(f"q_scale needs t0 > 0, got t0={t0}")
        pts = np.array([t0 * q ** k for k in range(n + 1)], dtype=float)
        return cls(pts, ("q_scale", float(q), float(t0), n))

    # -- structure --------------------------------------------------------------

    def __len__(self):
        return self.points.size

    def __iter__(self):
        return iter(self.points.tolist())

    def __eq__(self, other):
        if not isinstance(other, TimeScale):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(
            np.all(self.points == other.points))

    def __hash__(self):
        return hash(self.points.tobytes())

    def __repr__(self):
        kind = self.provenance[0]
        if len(self) <= 8:
            body = ", ".join(f"{p:g}" for p in self.points)
        else:
            body = f"{self.points[0]:g}, ..., {self.points[-1]:g}; {len(self)} points"
        return f"TimeScale<{kind}>({body})"

    @property
    def min(self) -> float:
        return float(self.points[0])

    @property
    def max(self) -> float:
        return float(self.points[-1])

    @property
    def mu(self) -> np.ndarray:
        """Graininess at every point; ``mu[-1] == 0``."""
        return self._mu

    def index(self, t: float) -> int:
        """Grid index of `t`, matched to within :data:`POINT_TOL`."""
        pts = self.points
        k = int(np.searchsorted(pts, t))
        for cand in (k - 1, k):
            if 0 <= cand < pts.size and abs(pts[cand] - t) <= POINT_TOL:
                return cand
        raise NotInScale(t, repr(self))

    def contains(self, t: float) -> bool:
        try:
            self.index(t)
        except NotInScale:
            return False
        return True

    def sigma(self, t: float) -> float:
        k = self.index(t)
        return float(self.points[min(k + 1, len(self) - 1)])

    def rho(self, t: float) -> float:
        k = self.index(t)
        return float(self.points[max(k - 1, 0)])

    def to_spec(self) -> dict:
        kind = self.provenance[0]
        if kind == "uniform":
            _, start, stop, n = self.provenance
            return {"kind": "uniform", "start": start, "stop": stop, "n": n}
        if kind == "integers":
            _, lo, hi = self.provenance
            return {"kind": "integers", "lo": lo, "hi": hi}
        if kind == "q_scale":
            _, q, t0, n = self.provenance
            return {"kind": "q_scale", "q": q, "t0": t0, "n": n}
        return {"kind": "explicit", "points": self.points.tolist()}


def _as_count(n, name):
    if isinstance(n, bool) or int(n) != n:
        raise BadParameter(f"{name} must be an integer, got {n!r}")
    n = int(n)
    if n < 1:
        raise BadParameter(f"{name} must be >= 1, got {n}")
    return n


def make_scale(spec: Mapping[str, Any] | TimeScale) -> TimeScale:
    """Build a scale from its serialized form, e.g. ``{"kind": "integers", "lo": 0, "hi": 3}``."""
    if isinstance(spec, TimeScale):
        return spec
    try:
        kind = spec["kind"]
        if kind == "explicit":
            return TimeScale.explicit(spec["points"])
        if kind == "uniform":
            return TimeScale.uniform(spec["start"], spec["stop"], spec["n"])
        if kind == "integers":
            return TimeScale.integers(spec["lo"], spec["hi"])
        if kind == "q_scale":
            return TimeScale.q_scale(spec["q"], spec["t0"], spec["n"])
    except KeyError as exc:
        raise BadParameter(f"scale spec missing field {exc.args[0]!r}") from None
    except TypeError as exc:
        raise BadParameter(f"malformed scale spec: {exc}") from None
    raise BadParameter(f"unknown scale kind {kind!r}")


def jump(ts: TimeScale, t: float) -> tuple[float, float, float]:
    """Return ``(sigma(t), rho(t), mu(t))``."""
    k = ts.index(t)
    pts = ts.points
    sigma = float(pts[min(k + 1, len(ts) - 1)])
    rho = float(pts[max(k - 1, 0)])
    return sigma, rho, float(ts.mu[k])


def refine(ts: TimeScale, factor: int) -> TimeScale:
    """Split every gap of `ts` into `factor` equal pieces."""
    if isinstance(factor, bool) or int(factor) != factor or factor < 1:
        raise BadParameter(f"refinement factor must be a positive integer, got {factor!r}")
    factor = int(factor)
    if factor == 1:
        return ts
    pts = ts.points
    frac = np.arange(factor, dtype=float) / factor
    fine = (pts[:-1, None] + np.diff(pts)[:, None] * frac[None, :]).reshape(-1)
    fine = np.append(fine, pts[-1])
    kind = ts.provenance[0]
    if kind == "uniform":
        _, start, stop, n = ts.provenance
        prov = ("uniform", start, stop, n * factor)
        fine = TimeScale.uniform(start, stop, n * factor).points
    else:
        prov = ("explicit",)
    return TimeScale(fine, prov)
