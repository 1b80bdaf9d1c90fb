"""Smooth functions with exact partial derivatives.

``SmoothFn`` wraps a vectorized evaluator for a C^inf function on R^dim
together with evaluators for its partial derivatives.  Derivatives are
analytic wherever possible (symbolic differentiation, closed-form rules
for products, affine substitutions, linear combinations); a finite
difference fallback exists for plain callables and is flagged as such.

Points are arrays of shape (..., dim); in dimension one a bare scalar or
a shape (m,) array is also accepted.
"""

from __future__ import annotations

import warnings
from typing import Callable, Sequence

import numpy as np
import sympy as sp

from . import _mindex as mi
from .errors import DerivativeUnavailable, DimensionMismatch

__all__ = ["SmoothFn", "from_sympy", "constant", "coordinate", "glue_exprs"]


def _as_points(x, dim: int):
    """Normalize ``x`` to shape (m, dim); return (flat, lead_shape)."""
    a = np.asarray(x, dtype=float)
    if dim == 1:
        if a.ndim == 0:
            return a.reshape(1, 1), ()
        if a.shape[-1] != 1:
            return a.reshape(-1, 1), a.shape
    if a.ndim == 0 or a.shape[-1] != dim:
        raise DimensionMismatch(f"points of shape {a.shape} are not in R^{dim}")
    return a.reshape(-1, dim), a.shape[:-1]


class SmoothFn:
    """A smooth function on R^dim with derivative evaluators.

    Parameters
    ----------
    dim : number of axes.
    partial_fn : callable (alpha, pts) -> values, with pts of shape (m, dim)
        and result of shape (m,).  ``alpha`` is a validated multi-index.
    max_order : highest derivative order supported, or None for unlimited.
    uses_fd : True when any derivative goes through finite differences.
    """

    def __init__(self, dim: int, partial_fn, max_order=None, uses_fd=False, label=""):
        self.dim = int(dim)
        self._partial_fn = partial_fn
        self.max_order = max_order
        self.uses_fd = bool(uses_fd)
        self.label = label

    # -- evaluation ---------------------------------------------------

    def partial(self, alpha, x):
        alpha = mi.check(alpha, self.dim)
        if self.max_order is not None and mi.order(alpha) > self.max_order:
            raise DerivativeUnavailable(
                f"order {mi.order(alpha)} exceeds max_order={self.max_order}"
            )
        pts, lead = _as_points(x, self.dim)
        with np.errstate(all="ignore"):
            vals = np.asarray(self._partial_fn(alpha, pts), dtype=float)
        vals = np.broadcast_to(vals, (pts.shape[0],))
        if lead == ():
            return float(vals[0])
        return vals.reshape(lead)

    def __call__(self, x):
        return self.partial((0,) * self.dim, x)

    def __repr__(self):
        tag = self.label or "smooth"
        return f"<SmoothFn {tag} dim={self.dim}>"

    # -- algebra ------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other, self.dim)
        if other.dim != self.dim:
            raise DimensionMismatch("adding functions of different dimension")
        f, g = self, other

        def pfn(alpha, pts):
            return f._partial_fn(alpha, pts) + g._partial_fn(alpha, pts)

        return SmoothFn(self.dim, pfn, _min_order(f, g), f.uses_fd or g.uses_fd)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (_coerce(other, self.dim) * -1.0)

    def __rsub__(self, other):
        return _coerce(other, self.dim) + (self * -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, other):
        if np.isscalar(other):
            c = float(other)
            f = self

            def pfn(alpha, pts):
                return c * f._partial_fn(alpha, pts)

            return SmoothFn(self.dim, pfn, f.max_order, f.uses_fd)
        other = _coerce(other, self.dim)
        if other.dim != self.dim:
            raise DimensionMismatch("multiplying functions of different dimension")
        f, g = self, other

        def pfn(alpha, pts):
            # general Leibniz rule; exact given exact factor derivatives
            acc = np.zeros(pts.shape[0])
            for beta in mi.sub_indices(alpha):
                c = mi.binom(alpha, beta)
                acc = acc + c * f._partial_fn(beta, pts) * g._partial_fn(mi.sub(alpha, beta), pts)
            return acc

        return SmoothFn(self.dim, pfn, _min_order(f, g), f.uses_fd or g.uses_fd)

    __rmul__ = __mul__

    # -- composition with affine maps ---------------------------------

    def scale_shift(self, a, b):
        """The function x -> f(a*x + b) with a, b scalars or per-axis vectors."""
        a_vec = np.broadcast_to(np.asarray(a, dtype=float), (self.dim,)).copy()
        b_vec = np.broadcast_to(np.asarray(b, dtype=float), (self.dim,)).copy()
        f = self

        def pfn(alpha, pts):
            factor = float(np.prod(a_vec ** np.array(alpha)))
            return factor * f._partial_fn(alpha, pts * a_vec + b_vec)

        return SmoothFn(self.dim, pfn, f.max_order, f.uses_fd)

    def where(self, cond, other):
        """Piecewise select: self where ``cond(pts)`` holds, ``other`` elsewhere.

        Caller is responsible for the seam being harmless (both branches
        agreeing on a neighborhood of the switching set).
        """
        other = _coerce(other, self.dim)
        f, g = self, other

        def pfn(alpha, pts):
            mask = np.asarray(cond(pts), dtype=bool)
            va = f._partial_fn(alpha, pts)
            vb = g._partial_fn(alpha, pts)
            return np.where(mask, va, vb)

        return SmoothFn(self.dim, pfn, _min_order(f, g), f.uses_fd or g.uses_fd)


def _min_order(f: SmoothFn, g: SmoothFn):
    if f.max_order is None:
        return g.max_order
    if g.max_order is None:
        return f.max_order
    return min(f.max_order, g.max_order)


def _coerce(obj, dim: int) -> SmoothFn:
    if isinstance(obj, SmoothFn):
        return obj
    if np.isscalar(obj):
        return constant(float(obj), dim)
    raise TypeError(f"cannot interpret {obj!r} as a smooth function")


# -- constructors -----------------------------------------------------


def constant(c: float, dim: int) -> SmoothFn:
    c = float(c)

    def pfn(alpha, pts):
        if mi.order(alpha) == 0:
            return np.full(pts.shape[0], c)
        return np.zeros(pts.shape[0])

    return SmoothFn(dim, pfn, label=f"const {c}")


def coordinate(axis: int, dim: int) -> SmoothFn:
    if not 0 <= axis < dim:
        raise DimensionMismatch(f"axis {axis} out of range for dim {dim}")

    def pfn(alpha, pts):
        k = mi.order(alpha)
        if k == 0:
            return pts[:, axis].copy()
        if k == 1 and alpha[axis] == 1:
            return np.ones(pts.shape[0])
        return np.zeros(pts.shape[0])

    return SmoothFn(dim, pfn, label=f"x{axis}")


def from_sympy(expr, symbols: Sequence[sp.Symbol], label="") -> SmoothFn:
    """Build a SmoothFn from a sympy expression; derivatives are symbolic.

    Lambdified callables are cached per multi-index.
    """
    symbols = tuple(symbols)
    dim = len(symbols)
    expr = sp.sympify(expr)
    cache: dict[tuple, Callable] = {}

    def lam(alpha):
        fn = cache.get(alpha)
        if fn is None:
            d = expr
            for s, k in zip(symbols, alpha):
                if k:
                    d = sp.diff(d, s, k)
            fn = sp.lambdify(symbols, d, modules=["numpy", "scipy"])
            cache[alpha] = fn
        return fn

    def pfn(alpha, pts):
        cols = [pts[:, i] for i in range(dim)]
        # Piecewise lowers to np.select, which evaluates every branch;
        # guarded branches may divide by zero or overflow off their piece
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                out = np.asarray(lam(alpha)(*cols), dtype=float)
        return out

    return SmoothFn(dim, pfn, label=label or sp.srepr(expr)[:40])


def from_callable(fn, dim: int, fd_step=1e-5, max_order=4, label="") -> SmoothFn:
    """Wrap a plain vectorized callable; derivatives by central differences.

    Each derivative axis uses a Richardson-extrapolated central stencil.
    Results are approximate and the function is flagged ``uses_fd``.
    """

    def d_axis(g, axis, h):
        def out(pts):
            e = np.zeros(dim)
            e[axis] = 1.0
            c1 = (g(pts + h * e) - g(pts - h * e)) / (2 * h)
            c2 = (g(pts + 0.5 * h * e) - g(pts - 0.5 * h * e)) / h
            return (4 * c2 - c1) / 3.0

        return out

    def pfn(alpha, pts):
        g = lambda q: np.asarray(fn(q), dtype=float)
        k = mi.order(alpha)
        h = fd_step * (10.0 ** max(0, k - 1))
        for axis, times in enumerate(alpha):
            for _ in range(times):
                g = d_axis(g, axis, h)
        return g(pts)

    return SmoothFn(dim, pfn, max_order=max_order, uses_fd=True, label=label)


# -- smooth glue ------------------------------------------------------

_GLUE_TAU = 0.01  # below this, exp(-1/t) underflows anyway; branch to exact 0


def glue_exprs():
    """Sympy building blocks: (t, G(t), smoothstep S(t)).

    G(t) = exp(-1/t) for t > tau else 0, S = G(t) / (G(t) + G(1-t)).
    S is 0 for t <= tau, 1 for t >= 1 - tau, strictly increasing between.
    The branch cuts introduce jumps of order exp(-1/tau) ~ 4e-44, far
    below double rounding for every quantity built on top of these.
    """
    t = sp.Symbol("t", real=True)
    up = sp.exp(-1 / t)
    dn = sp.exp(-1 / (1 - t))
    step = sp.Piecewise(
        (sp.Integer(0), t <= _GLUE_TAU),
        (sp.Integer(1), t >= 1 - _GLUE_TAU),
        (up / (up + dn), True),
    )
    bump = sp.Piecewise((sp.exp(-1 / t), t > _GLUE_TAU), (sp.Integer(0), True))
    return t, bump, step


def smoothstep_expr(u):
    """Smoothstep in an arbitrary sympy expression ``u``."""
    t, _, step = glue_exprs()
    return step.subs(t, u)
