"""Exact reference solutions on finite grids.

On a finite grid the integral at ``(x, y)`` only reaches nodes with ``s < x``
and ``t < y``, so the Volterra-type equations are solved exactly by forward
substitution over the ``(i, j)`` layers in lexicographic order. A dense Picard
iteration provides an independent route to the same fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundReport, NodeRecord
from .errors import KernelShapeMismatch, Overflow, ShapeMismatch, TSGError
from .gridfun import Domain2, Domain3, GridFunction2, GridFunction3, triple_cumulative_table
from .timescale import TimeScale

#: node-count cap for 6-index kernel tables and for the dense Picard operator
MAX_DENSE_NODES = 2048

FAMILIES = ("separable_linear", "separable_affine", "tabulated_linear")


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel ``F(x, y, z, s, t, q, u)`` of a built-in family.

    * ``separable_linear``: ``r(x, y, z) * f(s, t, q) * u``
    * ``separable_affine``: ``r(x, y, z) * f(s, t, q) * u + w(s, t, q)``
    * ``tabulated_linear``: ``K(x, y, z, s, t, q) * u`` with ``K`` a 6-index table
    """

    family: str
    domain: Domain3
    r: Optional[GridFunction3] = None
    f: Optional[GridFunction3] = None
    w: Optional[GridFunction3] = None
    K: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise KernelShapeMismatch(f"unknown kernel family {self.family!r}")
        if self.family == "tabulated_linear":
            n = int(np.prod(self.domain.shape))
            if n > MAX_DENSE_NODES:
                raise KernelShapeMismatch(
                    f"tabulated kernel on {n} nodes exceeds the {MAX_DENSE_NODES}-node limit")
            K = np.array(self.K, dtype=float)
            if K.shape != self.domain.shape * 2:
                raise KernelShapeMismatch(
                    f"kernel table of shape {K.shape}, expected {self.domain.shape * 2}")
            K.setflags(write=False)
            object.__setattr__(self, "K", K)
            return
        needed = ("r", "f", "w") if self.family == "separable_affine" else ("r", "f")
        for name in needed:
            g = getattr(self, name)
            if not isinstance(g, GridFunction3):
                raise KernelShapeMismatch(f"{self.family} kernel needs component {name}")
            if g.domain != self.domain:
                raise KernelShapeMismatch(f"kernel component {name} lives on another domain")

    @classmethod
    def separable_linear(cls, r: GridFunction3, f: GridFunction3) -> "KernelSpec":
        return cls("separable_linear", r.domain, r=r, f=f)

    @classmethod
    def separable_affine(cls, r, f, w) -> "KernelSpec":
        return cls("separable_affine", r.domain, r=r, f=f, w=w)

    @classmethod
    def tabulated_linear(cls, domain: Domain3, K) -> "KernelSpec":
        return cls("tabulated_linear", domain, K=K)

    @classmethod
    def zero(cls, domain: Domain3) -> "KernelSpec":
        z = GridFunction3(domain, 0.0)
        return cls("separable_linear", domain, r=z, f=z)

    @property
    def separable(self) -> bool:
        return self.family != "tabulated_linear"

    def check_domain(self, domain: Domain3):
        if domain != self.domain:
            raise KernelShapeMismatch("kernel is tabulated on a different domain")

    def coefficient(self) -> np.ndarray:
        """Coefficient of ``u`` as a dense 6-index array ``[i, j, k, l, m, n]``."""
        if not self.separable:
            return self.K
        n = int(np.prod(self.domain.shape))
        if n > MAX_DENSE_NODES:
            raise KernelShapeMismatch(
                f"dense kernel on {n} nodes exceeds the {MAX_DENSE_NODES}-node limit")
        return np.multiply.outer(self.r.values, self.f.values)

    def forcing(self) -> np.ndarray:
        """The ``u``-independent part at the source nodes, shape of the grid."""
        if self.family == "separable_affine":
            return self.w.values
        return np.zeros(self.domain.shape)

    def layer(self, i: int, j: int, arg: np.ndarray) -> np.ndarray:
        """``F`` at targets ``(i, j, :)`` against sources ``[:i, :j, :]`` holding `arg`.

        Returns shape ``(n3, i, j, n3)``.
        """
        if self.separable:
            out = self.r.values[i, j, :, None, None, None] * (self.f.values[:i, :j, :] * arg)[None]
            if self.family == "separable_affine":
                out = out + self.w.values[None, :i, :j, :]
            return out
        return self.K[i, j, :, :i, :j, :] * arg[None]


def _check_finite(values, what):
    if not np.all(np.isfinite(values)):
        raise Overflow(f"{what} overflowed")


# -- solvers -----------------------------------------------------------------------------

def solve_volterra_3d(z0: GridFunction3, kernel: KernelSpec,
                      domain: Optional[Domain3] = None) -> GridFunction3:
    """Solve ``u = z0 + int int int F(x, y, z, s, t, q, u(s, t, q)) dq dt ds`` exactly."""
    domain = domain or z0.domain
    if z0.domain != domain:
        raise KernelShapeMismatch("forcing term lives on a different domain")
    kernel.check_domain(domain)
    n1, n2, n3 = domain.shape
    W = domain.weights()
    u = np.array(z0.values, dtype=float)
    if kernel.separable:
        r, f = kernel.r.values, kernel.f.values
        # running per-node contributions of f*u and w to the integral
        fuw = np.zeros(domain.shape)
        fuw[0, :, :] = (f * u * W)[0]
        fuw[:, 0, :] = (f * u * W)[:, 0]
        ww = kernel.forcing() * W
        for i in range(1, n1):
            for j in range(1, n2):
                acc = np.sum(fuw[:i, :j, :])
                u[i, j, :] = z0.values[i, j, :] + r[i, j, :] * acc + np.sum(ww[:i, :j, :])
                fuw[i, j, :] = f[i, j, :] * u[i, j, :] * W[i, j, :]
    else:
        uw = u * W
        for i in range(1, n1):
            for j in range(1, n2):
                block = kernel.K[i, j, :, :i, :j, :]
                u[i, j, :] = z0.values[i, j, :] + np.einsum("klmn,lmn->k", block, uw[:i, :j, :])
                uw[i, j, :] = u[i, j, :] * W[i, j, :]
    _check_finite(u, "solution")
    return GridFunction3(domain, u)


def solve_volterra_2d(a: GridFunction2, f: GridFunction2) -> GridFunction2:
    """Solve ``u = a + int int f u dt ds`` exactly, the equality case of the Lemma."""
    if a.domain != f.domain:
        raise ShapeMismatch("a and f live on different domains")
    n1, n2 = a.domain.shape
    W = a.domain.weights()
    u = np.array(a.values, dtype=float)
    fuw = f.values * u * W
    for i in range(1, n1):
        for j in range(1, n2):
            u[i, j] = a.values[i, j] + np.sum(fuw[:i, :j])
            fuw[i, j] = f.values[i, j] * u[i, j] * W[i, j]
    _check_finite(u, "solution")
    return GridFunction2(a.domain, u)


def _causal_mask(n: int) -> np.ndarray:
    """``mask[i, l] = l < i``."""
    idx = np.arange(n)
    return (idx[None, :] < idx[:, None]).astype(float)


def picard_3d(z0: GridFunction3, kernel: KernelSpec, max_iter: Optional[int] = None):
    """Dense Picard iteration ``u <- z0 + A u + c`` run until an exact fixed point.

    Returns ``(solution, iterations)``. On a finite grid the fixed point is
    reached after at most ``min(n1, n2)`` sweeps; ``max_iter`` defaults to
    ``n1 * n2``.
    """
    d = z0.domain
    kernel.check_domain(d)
    n1, n2, n3 = d.shape
    mask = _causal_mask(n1)[:, None, None, :, None, None] * _causal_mask(n2)[None, :, None, None, :, None]
    mask = np.broadcast_to(mask, (n1, n2, 1, n1, n2, 1))
    A = kernel.coefficient() * mask * d.weights()[None, None, None]
    c = np.einsum("ijklmn,lmn->ijk", np.broadcast_to(mask, d.shape * 2),
                  kernel.forcing() * d.weights())
    u = np.array(z0.values, dtype=float)
    limit = max_iter if max_iter is not None else n1 * n2
    for sweep in range(1, limit + 2):
        nxt = z0.values + np.einsum("ijklmn,lmn->ijk", A, u) + c
        _check_finite(nxt, "Picard iterate")
        if np.array_equal(nxt, u):
            return GridFunction3(d, u), sweep
        u = nxt
    raise TSGError(f"Picard iteration did not reach a fixed point in {limit} sweeps")


def picard_2d(a: GridFunction2, f: GridFunction2, max_iter: Optional[int] = None):
    d = a.domain
    n1, n2 = d.shape
    A = (_causal_mask(n1)[:, None, :, None] * _causal_mask(n2)[None, :, None, :]
         * (f.values * d.weights())[None, None])
    u = np.array(a.values, dtype=float)
    limit = max_iter if max_iter is not None else n1 * n2
    for sweep in range(1, limit + 2):
        nxt = a.values + np.einsum("ijlm,lm->ij", A, u)
        _check_finite(nxt, "Picard iterate")
        if np.array_equal(nxt, u):
            return GridFunction2(d, u), sweep
        u = nxt
    raise TSGError(f"Picard iteration did not reach a fixed point in {limit} sweeps")


# -- residuals ---------------------------------------------------------------------------

def _layered_abs_integral(domain: Domain3, integrand_layer) -> np.ndarray:
    n1, n2, n3 = domain.shape
    W = domain.weights()
    out = np.zeros(domain.shape)
    for i in range(1, n1):
        for j in range(1, n2):
            vals = np.abs(integrand_layer(i, j))
            out[i, j, :] = np.sum(vals * W[None, :i, :j, :], axis=(1, 2, 3))
    return out


def residual_k(g: GridFunction3, kernel: KernelSpec) -> GridFunction3:
    """``k(x, y, z) = int int int |F(x, y, z, s, t, q, g(s, t, q))| dq dt ds``."""
    kernel.check_domain(g.domain)
    d = g.domain
    if kernel.family == "separable_linear":
        cum = triple_cumulative_table(abs(kernel.f * g)).values
        return GridFunction3(d, np.abs(kernel.r.values) * cum[:, :, None])
    out = _layered_abs_integral(d, lambda i, j: kernel.layer(i, j, g.values[:i, :j, :]))
    return GridFunction3(d, out)


def residual_kbar(h: GridFunction3, kernelF: KernelSpec, kernelG: KernelSpec) -> GridFunction3:
    """``kbar = int int int |F(..., h(s, t, q)) - G(..., h(s, t, q))| dq dt ds``."""
    kernelF.check_domain(h.domain)
    kernelG.check_domain(h.domain)
    d = h.domain
    if kernelF is kernelG:
        return GridFunction3(d, 0.0)
    if (kernelF.family == kernelG.family == "separable_linear"
            and np.array_equal(kernelF.r.values, kernelG.r.values)):
        gap = abs((kernelF.f - kernelG.f) * h)
        cum = triple_cumulative_table(gap).values
        return GridFunction3(d, np.abs(kernelF.r.values) * cum[:, :, None])

    def layer(i, j):
        arg = h.values[:i, :j, :]
        return kernelF.layer(i, j, arg) - kernelG.layer(i, j, arg)

    return GridFunction3(d, _layered_abs_integral(d, layer))


# -- dominance ---------------------------------------------------------------------------

def _coords(grid, idx):
    d = grid.domain
    scales = (d.t1, d.t2) + ((d.i,) if len(idx) == 3 else ())
    return tuple(float(s.points[k]) for s, k in zip(scales, idx))


def check_dominance(subject, bound, tol: float = 0.0, relative: bool = False) -> BoundReport:
    """Compare `subject` against `bound` node by node.

    A node is violated when ``subject - bound`` exceeds `tol`, or
    ``tol * max(|subject|, |bound|)`` in relative mode.
    """
    if type(subject) is not type(bound) or subject.domain != bound.domain:
        raise ShapeMismatch("subject and bound must share a domain")
    if not tol >= 0:
        raise ValueError(f"tolerance must be nonnegative, got {tol}")
    s, b = subject.values, bound.values
    excess = s - b
    if relative:
        thresh = tol * np.maximum(np.abs(s), np.abs(b))
    else:
        thresh = np.full(s.shape, float(tol))
    violated = excess > thresh
    records = [NodeRecord(idx, _coords(subject, idx), float(s[idx]), float(b[idx]))
               for idx in np.ndindex(s.shape)]
    amax = np.unravel_index(int(np.argmax(excess)), s.shape)
    max_violation = max(float(excess[amax]), 0.0)
    margin = b - s
    interior = margin[1:, 1:]
    min_int = argmin_int = None
    if interior.size:
        k = np.unravel_index(int(np.argmin(interior)), interior.shape)
        argmin_int = (int(k[0]) + 1, int(k[1]) + 1) + tuple(int(v) for v in k[2:])
        min_int = float(interior[k])
    term = margin[-1, -1]
    if np.ndim(term):
        kk = int(np.argmin(term))
        terminal = (s.shape[0] - 1, s.shape[1] - 1, kk)
        term_margin = float(term[kk])
    else:
        terminal = (s.shape[0] - 1, s.shape[1] - 1)
        term_margin = float(term)
    n_bad = int(np.count_nonzero(violated))
    return BoundReport(
        records=records,
        verdict="violated" if n_bad else "dominated",
        max_violation=max_violation,
        argmax=tuple(int(v) for v in amax) if max_violation > 0 else None,
        tol=float(tol),
        relative=relative,
        min_interior_margin=min_int,
        argmin_interior=argmin_int,
        terminal_margin=term_margin,
        terminal_node=terminal,
        violated_nodes=n_bad,
    )


# -- random instances -----------------------------------------------------------------------

def random_scale(rng: np.random.Generator, max_points: int, min_points: int = 2) -> TimeScale:
    """Draw a scale of ``min_points..max_points`` points: random sorted, integers or geometric."""
    n = int(rng.integers(min_points, max_points + 1))
    kind = rng.choice(["explicit", "integers", "q_scale"])
    if kind == "integers":
        lo = int(rng.integers(-3, 4))
        return TimeScale.integers(lo, lo + n - 1)
    if kind == "q_scale":
        q = float(rng.uniform(1.1, 2.0))
        t0 = float(rng.uniform(0.1, 1.0))
        return TimeScale.q_scale(q, t0, n - 1)
    span = float(rng.uniform(0.5, 5.0))
    origin = float(rng.uniform(-2.0, 2.0))
    while True:
        pts = np.sort(origin + span * rng.random(n))
        if np.all(np.diff(pts) > 1e-6):
            return TimeScale.explicit(pts)


def random_domain(rng, max_t1=12, max_t2=12, max_i=6) -> Domain3:
    return Domain3(random_scale(rng, max_t1), random_scale(rng, max_t2), random_scale(rng, max_i))


def random_grid(rng, domain, coeff_max=2.0, signed=False):
    """Coefficients uniform on ``[0, coeff_max]`` (``[-coeff_max, coeff_max]`` if signed)."""
    lo = -coeff_max if signed else 0.0
    vals = rng.uniform(lo, coeff_max, size=domain.shape)
    if isinstance(domain, Domain3):
        return GridFunction3(domain, vals)
    return GridFunction2(domain, vals)


def random_monotone_grid(rng, domain: Domain2, coeff_max=2.0) -> GridFunction2:
    """Nonnegative and nondecreasing in both variables, values within ``[0, coeff_max]``."""
    inc = rng.random(domain.shape)
    vals = np.cumsum(np.cumsum(inc, axis=0), axis=1)
    vals *= coeff_max / vals[-1, -1]
    return GridFunction2(domain, vals)
