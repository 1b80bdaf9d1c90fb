"""Generalized functions on an atlas: coherent families of local nets.

A generalized function is stored as one net of local smooth functions
per chart.  On chart overlaps the local nets must satisfy the
transformation law up to a negligible error; ``coherence_check``
measures that residual and classifies its decay.  On top of this sit
classification, algebra, Lie derivatives, point values, association
testing against distribution targets, and integration.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _spint

from . import _mindex as mi
from .asymptotic import DEFAULT_M_MAX, AsymptoticFit, estimate_order
from .embed import DistributionSpec, embed_rn
from .errors import (AtlasMismatch, CoherenceFailure, NotComparable,
                     PartitionMismatch, QuadratureFailure)
from .gnumber import GeneralizedNumber
from .grid import dyadic_grid
from .manifold import Atlas, GeneralizedPoint, Transition
from .manifolds import Manifold
from .mollifier import Mollifier
from .nets import Net, _auto_samples, box_lattice, sup_norm_on_box
from .smooth import SmoothFn, constant, from_sympy, smoothstep_expr

# Relative clamp for overlap residuals: a gap this far below the net's
# own scale is attributed to rounding and treated as exact agreement.
COHERENCE_RTOL = 5e-13
# Companion clamp proportional to the first-derivative scale.  Mapping a
# lattice point through a transition and back perturbs the coordinate by
# a few ulps, so even a genuinely coherent family shows gaps of size
# |grad u| * O(1e-15); gaps below 1e-13 * |grad u| are rounding artifacts.
COHERENCE_GRAD_RTOL = 1e-13

PAIRING_TOL = 1e-3


def _atlas_of(obj):
    if isinstance(obj, Manifold):
        return obj.atlas
    if isinstance(obj, Atlas):
        return obj
    raise TypeError(f"expected Manifold or Atlas, got {obj!r}")


class GeneralizedFunction:
    """Per-chart nets subject to the overlap transformation law."""

    def __init__(self, atlas, nets: dict, label: str = ""):
        self.atlas = _atlas_of(atlas)
        self.nets: dict[str, Net] = dict(nets)
        self.label = label
        for name, net in self.nets.items():
            if name not in self.atlas.charts:
                raise AtlasMismatch(f"no chart {name!r} in atlas {self.atlas.name}")
            if net.dim != self.atlas.dim:
                raise AtlasMismatch(
                    f"net for chart {name!r} has dim {net.dim}, atlas has {self.atlas.dim}")

    def chart_names(self):
        return sorted(self.nets)

    def net(self, chart: str) -> Net:
        try:
            return self.nets[chart]
        except KeyError:
            raise NotComparable(f"chart {chart!r} carries no net")

    # -- algebra (chartwise, eps-wise) ----------------------------------

    def _combine(self, other, op):
        if isinstance(other, GeneralizedFunction):
            if other.atlas is not self.atlas:
                raise AtlasMismatch("operands live on different atlases")
            if set(other.nets) != set(self.nets):
                raise AtlasMismatch("operands carry different chart sets")
            return GeneralizedFunction(
                self.atlas, {c: op(self.nets[c], other.nets[c]) for c in self.nets})
        if np.isscalar(other):
            return GeneralizedFunction(
                self.atlas, {c: op(self.nets[c], float(other)) for c in self.nets})
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._combine(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def lie_derivative(self, xi: dict) -> "GeneralizedFunction":
        """L_xi U, with xi given per chart as a list of component SmoothFns."""
        dim = self.atlas.dim
        nets = {}
        for c in self.nets:
            comps = xi[c]
            if len(comps) != dim:
                raise AtlasMismatch(f"vector field in chart {c!r} has {len(comps)} components")
            acc = Net.zero(dim)
            for i, comp in enumerate(comps):
                acc = acc + Net.constant_in_eps(comp) * self.nets[c].partial(mi.unit(dim, i))
            nets[c] = acc
        return GeneralizedFunction(self.atlas, nets, label=f"L_xi {self.label}")


def sigma_embed(space, fns: dict, check: bool = True, tol: float = 1e-10,
                n_samples: int = 31) -> GeneralizedFunction:
    """Constant-in-eps embedding of a chartwise smooth function.

    ``fns`` maps chart names to SmoothFns in chart coordinates.  With
    ``check`` the chart representations are compared through each
    transition on the overlap boxes; a mismatch beyond rounding scale is
    an incoherent input.
    """
    atlas = _atlas_of(space)
    if check:
        for (a, b), tr in sorted(atlas.transitions.items()):
            if a not in fns or b not in fns:
                continue
            for box in atlas.overlap_boxes[(a, b)]:
                x = box_lattice(box, n_samples)
                va = fns[a]._partial_fn((0,) * atlas.dim, x)
                vb = fns[b]._partial_fn((0,) * atlas.dim, tr.fn(x))
                gap = float(np.max(np.abs(va - vb)))
                scale = 1.0 + float(np.max(np.abs(va)))
                if gap > tol * scale:
                    raise CoherenceFailure(
                        f"chart functions disagree on overlap {a}->{b}: gap {gap:.3g}")
    nets = {c: Net.constant_in_eps(f) for c, f in fns.items()}
    return GeneralizedFunction(atlas, nets, label="sigma")


# -- coherence -----------------------------------------------------------


def coherence_check(U: GeneralizedFunction, grid=None, n_samples: int = 61,
                    m_max: int = DEFAULT_M_MAX, rtol: float = COHERENCE_RTOL,
                    grad_rtol: float = COHERENCE_GRAD_RTOL) -> dict:
    """Classify the transformation-law residual on every overlap.

    For each transition a -> b carried by U, the gap
    sup |U_a(x) - U_b(t_ab(x))| is measured per eps on the overlap
    boxes, clamped below rounding scale, and order-fitted.  The family
    is coherent when every fit is negligible.
    """
    if grid is None:
        grid = dyadic_grid()
    atlas = U.atlas
    dim = atlas.dim
    rows = []
    coherent = True
    for (a, b), tr in sorted(atlas.transitions.items()):
        if a not in U.nets or b not in U.nets:
            continue
        for k, box in enumerate(atlas.overlap_boxes[(a, b)]):
            x = box_lattice(box, n_samples)
            y = tr.fn(x)
            samples = []
            n_clamped = 0
            for e in grid:
                fa, fb = U.nets[a].at(e), U.nets[b].at(e)
                zero = (0,) * dim
                va = fa._partial_fn(zero, x)
                vb = fb._partial_fn(zero, y)
                gap = float(np.max(np.abs(va - vb)))
                s0 = max(float(np.max(np.abs(va))), float(np.max(np.abs(vb))))
                s1 = 0.0
                for i in range(dim):
                    s1 = max(s1, float(np.max(np.abs(
                        fa._partial_fn(mi.unit(dim, i), x)))))
                if gap <= rtol * s0 + grad_rtol * s1:
                    gap = 0.0
                    n_clamped += 1
                samples.append((float(e), gap))
            fit = estimate_order(samples, m_max=m_max)
            ok = fit.is_negligible
            coherent = coherent and ok
            rows.append({
                "pair": [a, b], "box": k, "slope": fit.slope,
                "verdict": fit.verdict, "negligible": ok,
                "n_clamped": n_clamped, "max_gap": max(g for _, g in samples),
            })
    return {"coherent": coherent, "n_pairs": len(rows), "m_max": m_max,
            "rows": rows}


# -- classification ------------------------------------------------------


def _expand_orders(orders, dim: int):
    alphas = []
    for item in orders:
        if np.isscalar(item):
            total = int(item)
            alphas.extend(a for a in mi.up_to(dim, total) if mi.order(a) == total)
        else:
            alphas.append(mi.check(item, dim))
    seen, out = set(), []
    for a in alphas:
        if a not in seen:
            seen.add(a)
            out.append(a)
    return out


def classify(U: GeneralizedFunction, orders=(0, 1), boxes: dict | None = None,
             grid=None, m_max: int = DEFAULT_M_MAX, n_samples=201) -> dict:
    """Sup-norm order fits per chart and derivative multi-index.

    ``orders`` lists total derivative orders (ints) or explicit
    multi-indices.  The summary verdict is Moderate(N) over all fits;
    the negligibility summary may use order-0 fits alone once
    moderateness at the requested orders is established (a moderate net
    with negligible values is negligible), in which case
    ``order0_shortcut`` is flagged.
    """
    if grid is None:
        grid = dyadic_grid()
    dim = U.atlas.dim
    alphas = _expand_orders(orders, dim)
    rows = []
    for c in U.chart_names():
        box = (boxes or {}).get(c, U.atlas.charts[c].sample_box)
        net = U.nets[c]
        for alpha in alphas:
            samples = []
            for e in grid:
                n = _auto_samples(box if isinstance(box[0], tuple) else (box,),
                                  float(e)) if n_samples == "auto" else int(n_samples)
                samples.append((float(e), sup_norm_on_box(net.at(e), alpha, box, n)))
            fit = estimate_order(samples, m_max=m_max)
            rows.append({"chart": c, "alpha": list(alpha), "fit": fit})

    verdicts = [r["fit"].verdict for r in rows]
    all_moderate = all(v in ("moderate", "negligible") for v in verdicts)
    order0 = [r["fit"] for r in rows if mi.order(tuple(r["alpha"])) == 0]
    shortcut = False
    if not all_moderate:
        summary, order = "divergent", None
    elif all(v == "negligible" for v in verdicts):
        summary, order = "negligible", None
    elif order0 and all(f.is_negligible for f in order0):
        # values negligible + moderateness at the requested orders
        summary, order = "negligible", None
        shortcut = True
    else:
        summary = "moderate"
        order = max((r["fit"].order or 0) for r in rows)
    return {
        "summary": summary, "order": order, "order0_shortcut": shortcut,
        "m_max": m_max,
        "rows": [{"chart": r["chart"], "alpha": r["alpha"],
                  **r["fit"].to_json()} for r in rows],
    }


# -- point values --------------------------------------------------------


def point_value(U: GeneralizedFunction, p: GeneralizedPoint,
                grid=None) -> GeneralizedNumber:
    """The net eps -> u_eps(p_eps), evaluated in a chart carrying U."""
    if p.atlas is not U.atlas:
        raise NotComparable("point and function live on different atlases")
    if grid is None:
        grid = dyadic_grid()
    chart = p.chart
    mapper = None
    if chart in U.nets:
        target, mapper = chart, lambda c: c
    else:
        for b in U.chart_names():
            tr = U.atlas.transitions.get((chart, b))
            if tr is not None:
                target, mapper = b, (lambda tr: lambda c: tr.fn(c[None, :])[0])(tr)
                break
        if mapper is None:
            raise NotComparable(
                f"witness chart {chart!r} carries no net and no transition reaches one")
    values = []
    for e in grid:
        c = mapper(p.coords_at(float(e)))
        values.append(float(U.nets[target].at(float(e))(np.atleast_1d(c))))
    return GeneralizedNumber(grid, values, label=f"{U.label}({p.label})")


def zero_test_by_points(U: GeneralizedFunction, count: int = 24, seed: int = 0,
                        grid=None, m_max: int = DEFAULT_M_MAX) -> dict:
    """One-sided zero test: sample generalized points, look for witnesses.

    Draws classical points, eps-drifting points and bounded wobbling
    point nets from the chart sample boxes.  Any non-negligible point
    value witnesses U != 0; finding none is evidence, not proof.
    """
    if grid is None:
        grid = dyadic_grid()
    rng = np.random.default_rng(seed)
    charts = U.chart_names()
    dim = U.atlas.dim
    witnesses = []
    samples = []
    for i in range(count):
        c = charts[i % len(charts)]
        box = U.atlas.charts[c].sample_box
        if not isinstance(box[0], tuple):
            box = (box,)
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        pad = 0.15 * (hi - lo)
        if i < len(charts):
            # deterministic probe: drift away from the box center, the
            # natural anchor for concentrating nets
            kind = "drift"
            x0 = (lo + hi) / 2.0
            a = np.ones(dim)
        else:
            kind = ("classical", "drift", "wobble")[i % 3]
            x0 = rng.uniform(lo + pad, hi - pad)
            a = rng.uniform(-1.0, 1.0, size=dim)
        if kind == "classical":
            coords = (lambda x0: lambda e: x0)(x0)
        elif kind == "drift":
            coords = (lambda x0, a: lambda e: x0 + a * e)(x0, a)
        else:
            w = rng.uniform(1.0, 20.0)
            coords = (lambda x0, a, w: lambda e: x0 + a * e * np.cos(w * e))(x0, a, w)
        p = GeneralizedPoint(U.atlas, c, coords,
                             tuple((l, h) for l, h in zip(lo, hi)), label=kind)
        fit = point_value(U, p, grid).classify(m_max)
        samples.append({"chart": c, "kind": kind, "x0": x0.tolist(),
                        "slope": fit.slope, "verdict": fit.verdict})
        if not fit.is_negligible:
            witnesses.append(samples[-1])
    return {"count": count, "witnesses": witnesses,
            "all_negligible": not witnesses, "one_sided": True}


# -- association ---------------------------------------------------------


@dataclass(frozen=True)
class TestDensity:
    """A compactly supported smooth density factor in one chart."""

    chart: str
    fn: SmoothFn
    box: tuple
    label: str = ""


def _bump_expr(u):
    # plateau bump: 1 on [-1/2, 1/2], smooth, exactly 0 outside (-1, 1)
    return smoothstep_expr(2 + 2 * u) * smoothstep_expr(2 - 2 * u)


def default_densities(space, per_chart: int = 5, seed: int = 7,
                      width_range=(0.15, 0.45)) -> list[TestDensity]:
    """Seeded bump suite: ``per_chart`` random centers/widths per chart."""
    import sympy as sp

    atlas = _atlas_of(space)
    dim = atlas.dim
    rng = np.random.default_rng(seed)
    syms = sp.symbols(f"y0:{dim}") if dim > 1 else (sp.Symbol("y0"),)
    out = []
    for c in sorted(atlas.charts):
        box = atlas.charts[c].sample_box
        if not isinstance(box[0], tuple):
            box = (box,)
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        for k in range(per_chart):
            w = rng.uniform(*width_range, size=dim) * (hi - lo) / 2.0
            ctr = rng.uniform(lo + w, hi - w)
            expr = sp.Integer(1)
            for i in range(dim):
                expr = expr * _bump_expr((syms[i] - float(ctr[i])) / float(w[i]))
            fn = from_sympy(expr, syms, label=f"bump{k}@{c}")
            out.append(TestDensity(
                c, fn, tuple((float(a), float(b)) for a, b in zip(ctr - w, ctr + w)),
                label=f"{c}:{k}"))
    return out


def _quad_1d(f, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", _spint.IntegrationWarning)
        val, _ = _spint.quad(f, lo, hi, points=points or None, limit=400,
                             epsabs=1e-12, epsrel=1e-10)
    if not np.isfinite(val):
        raise QuadratureFailure(f"pairing quadrature returned {val}")
    return float(val)


_GL_CACHE: dict[int, tuple] = {}


def _gl_rule(n: int = 48):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


MAX_PAIR_INTERVALS = 20000


def _adaptive_gl(fn: SmoothFn, lo: float, hi: float, eps_hint: float) -> float:
    """Vectorized adaptive Gauss-Legendre over [lo, hi].

    Seed intervals are about 8*eps wide, so a concentrated net cannot
    fall between the nodes of a coarse first pass; intervals where the
    two-half refinement disagrees are subdivided, whole levels at a time.
    """
    g, w = _gl_rule(16)
    width = hi - lo
    n_seed = int(np.clip(math.ceil(width / (8.0 * eps_hint)), 8, 32768))
    edges = np.linspace(lo, hi, n_seed + 1)
    los, his = edges[:-1], edges[1:]

    def gl_batch(a, b):
        half = (b - a) / 2.0
        nodes = (a + half)[:, None] + half[:, None] * g[None, :]
        vals = fn._partial_fn((0,), nodes.reshape(-1, 1)).reshape(nodes.shape)
        return (vals @ w) * half

    estimates = gl_batch(los, his)
    accepted = 0.0
    for _ in range(40):
        scale = max(1.0, abs(accepted + float(np.sum(estimates))))
        mid = (los + his) / 2.0
        left = gl_batch(los, mid)
        right = gl_batch(mid, his)
        err = np.abs(estimates - left - right)
        done = err <= 1e-14 * scale
        refined = (16.0 * (left + right) - estimates) / 15.0
        accepted += float(np.sum(refined[done]))
        keep = ~done
        if not keep.any():
            break
        if 2 * int(keep.sum()) > MAX_PAIR_INTERVALS:
            accepted += float(np.sum(refined[keep]))
            break
        los = np.concatenate([los[keep], mid[keep]])
        his = np.concatenate([mid[keep], his[keep]])
        estimates = np.concatenate([left[keep], right[keep]])
    else:
        accepted += float(np.sum(estimates))
    if not np.isfinite(accepted):
        raise QuadratureFailure("adaptive quadrature returned non-finite value")
    return accepted


def integrate_box(fn: SmoothFn, box, eps_hint: float | None = None) -> float:
    """Integral of a SmoothFn over a box.

    The 1-d path uses adaptive Gauss-Legendre seeded at the eps scale,
    so concentrated or oscillatory nets are resolved without paying for
    it on smooth ones.  Higher dimensions use a fixed tensor rule, which
    assumes the integrand is resolved at that scale.
    """
    if not isinstance(box[0], tuple):
        box = (box,)
    dim = len(box)
    if dim == 1:
        lo, hi = float(box[0][0]), float(box[0][1])
        if eps_hint is None:
            return _quad_1d(lambda x: float(fn(np.array([x]))), lo, hi)
        return _adaptive_gl(fn, lo, hi, float(eps_hint))
    nodes, weights = _gl_rule()
    grids, wgts = [], []
    for lo, hi in box:
        half = (hi - lo) / 2.0
        grids.append((nodes + 1.0) * half + lo)
        wgts.append(weights * half)
    mesh = np.stack([g.ravel() for g in np.meshgrid(*grids, indexing="ij")], axis=1)
    wmesh = np.prod(np.stack(
        [g.ravel() for g in np.meshgrid(*wgts, indexing="ij")], axis=1), axis=1)
    vals = fn._partial_fn((0,) * dim, mesh)
    out = float(np.dot(wmesh, vals))
    if not np.isfinite(out):
        raise QuadratureFailure("tensor quadrature returned non-finite value")
    return out


def integrate(U: GeneralizedFunction, density: SmoothFn | None = None,
              box=None, chart: str | None = None, grid=None) -> GeneralizedNumber:
    """eps -> integral over a chart box of u_eps times a density factor."""
    if grid is None:
        grid = dyadic_grid()
    if chart is None:
        names = U.chart_names()
        if len(names) != 1:
            raise NotComparable("chart must be named when U lives on several charts")
        chart = names[0]
    if box is None:
        box = U.atlas.charts[chart].sample_box
    net = U.net(chart)
    values = []
    for e in grid:
        f = net.at(float(e))
        if density is not None:
            f = f * density
        values.append(integrate_box(f, box, eps_hint=float(e)))
    return GeneralizedNumber(grid, values, label=f"int {U.label}")


def richardson_limit(grid, values):
    """Quadratic extrapolation to eps = 0 through the three smallest eps.

    Returns (limit, residual) where the residual is the shift relative
    to the linear two-point extrapolation, an error indicator.
    """
    order = np.argsort(np.asarray(grid, dtype=float))
    e = np.asarray(grid, dtype=float)[order][:3]
    v = np.asarray(values, dtype=float)[order][:3]
    if len(e) < 3:
        raise QuadratureFailure("need at least three grid points to extrapolate")
    quad = 0.0
    for i in range(3):
        li = 1.0
        for j in range(3):
            if j != i:
                li *= (0.0 - e[j]) / (e[i] - e[j])
        quad += v[i] * li
    lin = v[0] + (v[1] - v[0]) * (0.0 - e[0]) / (e[1] - e[0])
    return float(quad), abs(float(quad - lin))


@dataclass
class AssociationVerdict:
    """Per-density pairing table with extrapolated limits and a status."""

    status: str
    rows: list = field(default_factory=list)
    tol: float = PAIRING_TOL
    meta: dict = field(default_factory=dict)

    @property
    def associated(self) -> bool:
        return self.status in ("associated", "associated_to_zero")

    def to_json(self) -> dict:
        return {"status": self.status, "tol": self.tol, "rows": self.rows,
                "meta": self.meta}

    def to_csv(self) -> str:
        lines = ["density,eps,pairing,extrapolated,target,residual,ok"]
        for r in self.rows:
            for e, v in zip(r["grid"], r["pairings"]):
                lines.append(
                    f"{r['density']},{e:.10g},{v:.17g},{r['extrapolated']:.17g},"
                    f"{r['target']:.17g},{r['residual']:.6g},{int(r['ok'])}")
        return "\n".join(lines) + "\n"


def _target_action(target, density: TestDensity) -> float:
    if target is None or (np.isscalar(target) and float(target) == 0.0):
        return 0.0
    if isinstance(target, DistributionSpec):
        return target.action(density.fn)
    if isinstance(target, dict):
        spec = target.get(density.chart)
        return 0.0 if spec is None else spec.action(density.fn)
    raise TypeError(f"unsupported association target {target!r}")


def pair_density(U: GeneralizedFunction, density: TestDensity, eps: float) -> float:
    """One pairing: integral of u_eps against the density over its box."""
    f = U.net(density.chart).at(float(eps)) * density.fn
    return integrate_box(f, density.box, eps_hint=float(eps))


def associate(U: GeneralizedFunction, target=None, densities=None, grid=None,
              tol: float = PAIRING_TOL, seed: int = 7) -> AssociationVerdict:
    """Association test: pairings against a density suite, extrapolated.

    ``target`` is None/0, a DistributionSpec (applied in the density's
    chart coordinates), or a dict of specs per chart.  Each density is
    paired over the grid, Richardson-extrapolated to eps = 0, and
    compared with the target's action.
    """
    if grid is None:
        grid = dyadic_grid()
    if densities is None:
        densities = default_densities(U.atlas, seed=seed)
    densities = [d for d in densities if d.chart in U.nets]
    if not densities:
        raise NotComparable("no test density lands in a chart carried by U")
    rows = []
    all_ok = True
    for d in densities:
        pairings = [pair_density(U, d, e) for e in grid]
        limit, extrap_res = richardson_limit(grid, pairings)
        tgt = _target_action(target, d)
        residual = abs(limit - tgt)
        ok = residual < tol
        all_ok = all_ok and ok
        rows.append({
            "density": d.label or d.chart, "chart": d.chart,
            "grid": [float(e) for e in grid], "pairings": pairings,
            "extrapolated": limit, "extrapolation_residual": extrap_res,
            "target": tgt, "residual": residual, "ok": ok,
        })
    zero_target = target is None or (np.isscalar(target) and float(target) == 0.0)
    if all_ok:
        status = "associated_to_zero" if zero_target else "associated"
    else:
        status = "not_associated"
    return AssociationVerdict(status, rows, tol, meta={
        "n_densities": len(densities),
        "note": "finite density suite; a surrogate for all compactly "
                "supported densities",
    })


def ck_associate(U: GeneralizedFunction, fns: dict, k: int, boxes: dict | None = None,
                 grid=None, tol: float = 1e-6, n_samples: int = 201,
                 m_max: int = DEFAULT_M_MAX) -> dict:
    """C^k association: all coordinate partials of (u_eps - f) up to
    order k decay uniformly on the chart boxes.

    Coordinate partials stand in for iterated Lie derivatives; locally
    every iterated Lie derivative is a combination of them with smooth
    coefficients, so the verdicts agree.  Each sup sequence must end
    below ``tol`` with a positive fitted slope, unless it already sits
    at the rounding floor of the comparison function (a difference a
    few ulps wide has no slope to measure).
    """
    if grid is None:
        grid = dyadic_grid()
    dim = U.atlas.dim
    rows = []
    ok_all = True
    for c in U.chart_names():
        f = fns[c]
        box = (boxes or {}).get(c, U.atlas.charts[c].sample_box)
        diff = U.nets[c] - Net.constant_in_eps(f)
        for alpha in mi.up_to(dim, k):
            samples = [(float(e), sup_norm_on_box(diff.at(e), alpha, box, n_samples))
                       for e in grid]
            fit = estimate_order(samples, m_max=m_max)
            final = samples[int(np.argmin([e for e, _ in samples]))][1]
            floor = COHERENCE_RTOL * (1.0 + sup_norm_on_box(f, alpha, box, n_samples))
            row_ok = (final < tol) and (
                fit.slope > 0.0 or fit.n_clamped == len(grid) or final <= floor)
            ok_all = ok_all and row_ok
            rows.append({"chart": c, "alpha": list(alpha), "slope": fit.slope,
                         "final_sup": final, "floor": floor, "ok": row_ok})
    return {"k": k, "ok": ok_all, "tol": tol, "rows": rows}


def product_consistency_check(U: GeneralizedFunction, V: GeneralizedFunction,
                              f: dict, w, mode: str = "a", densities=None,
                              grid=None, tol: float = PAIRING_TOL,
                              k: int = 2) -> dict:
    """Does U*V associate to f*w, given the smooth-factor hypotheses?

    mode "a": U must equal the constant embedding of f (checked exactly
    per eps at lattice points).  mode "b": U must be C^k-associated to f
    (finite-k stand-in for C^infinity).  V must associate to w.  The
    product pairing runs either way; failed hypotheses are reported, and
    explain a failed product verdict rather than invalidating the run.
    """
    if grid is None:
        grid = dyadic_grid()
    if mode not in ("a", "b"):
        raise ValueError("mode must be 'a' or 'b'")
    hyp = {"mode": mode}
    if mode == "a":
        worst = 0.0
        for c in U.chart_names():
            box = U.atlas.charts[c].sample_box
            x = box_lattice(box, 61)
            for e in (grid[0], grid[len(grid) // 2], grid[-1]):
                gu = U.nets[c].at(float(e))._partial_fn((0,) * U.atlas.dim, x)
                gf = f[c]._partial_fn((0,) * U.atlas.dim, x)
                worst = max(worst, float(np.max(np.abs(gu - gf))))
        hyp["sigma_gap"] = worst
        hyp["ok"] = worst == 0.0
    else:
        ck = ck_associate(U, f, k, grid=grid)
        hyp["ck"] = {"k": k, "ok": ck["ok"]}
        hyp["ok"] = ck["ok"]

    v_verdict = associate(V, w, densities=densities, grid=grid, tol=tol)
    hyp["v_associated"] = v_verdict.associated

    if isinstance(w, DistributionSpec):
        target = {c: w.mul_smooth(f[c]) for c in U.chart_names()}
    elif isinstance(w, dict):
        target = {c: spec.mul_smooth(f[c]) for c, spec in w.items()}
    else:
        target = 0.0
    prod_verdict = associate(U * V, target, densities=densities, grid=grid, tol=tol)
    consistent = hyp["ok"] and hyp["v_associated"] and prod_verdict.associated
    return {
        "hypotheses": hyp,
        "v_verdict": v_verdict.to_json(),
        "product_verdict": prod_verdict.to_json(),
        "consistent": consistent,
        "note": "hypothesis failures explain a failed product verdict",
    }


# -- manifold embedding --------------------------------------------------


def transport_net(net: Net, tr: Transition) -> Net:
    """Pull a chart-local net through a transition given by affine pieces.

    The result evaluates x -> f(t(x)) with exact derivatives, using the
    transition's declared decomposition t(x) = a*x + b piece by piece.
    """
    if tr.affine_pieces is None:
        raise CoherenceFailure("transition declares no affine pieces to transport through")
    dim = net.dim

    def factory(eps):
        f = net.at(eps)
        out = constant(0.0, dim)
        for mask, a, b in tr.affine_pieces:
            out = f.scale_shift(a, b).where(mask, out)
        return out

    return Net(dim, factory, label=f"transported {net.label}")


def embed_manifold(specs: dict, manifold: Manifold, mol: Mollifier,
                   label: str = "iota_A") -> GeneralizedFunction:
    """Atlas embedding of a chartwise distribution family.

    Each chart j contributes zeta_j * ((chi_j u_j) * rho_eps) in its own
    coordinates; the plateau zeta_j (identically one on supp chi_j) cuts
    the mollified tail so every term stays supported inside its chart.
    Terms are then transported to the other charts through the declared
    affine transition pieces, and summed.
    """
    atlas = manifold.atlas
    pou = manifold.pou
    if set(specs) != set(atlas.charts):
        raise PartitionMismatch(
            f"spec charts {sorted(specs)} != atlas charts {sorted(atlas.charts)}")
    dim = atlas.dim

    terms = {}
    for j in sorted(atlas.charts):
        spec = specs[j]
        localized = spec.mul_smooth(pou.chi[j])
        if not localized.singular and not localized.regular:
            continue
        conv = embed_rn(localized, mol)
        terms[j] = conv * Net.constant_in_eps(pou.zeta[j])

    nets = {}
    for i in sorted(atlas.charts):
        acc = Net.zero(dim)
        for j, term in terms.items():
            if i == j:
                acc = acc + term
            else:
                tr = atlas.transitions.get((i, j))
                if tr is None:
                    raise CoherenceFailure(f"no transition {i} -> {j} to transport term")
                acc = acc + transport_net(term, tr)
        nets[i] = acc
    return GeneralizedFunction(atlas, nets, label=label)


def lie_route_agreement(U: GeneralizedFunction, fields: list, depth: int,
                        boxes: dict | None = None, grid=None,
                        m_max: int = DEFAULT_M_MAX, n_samples=201) -> dict:
    """Compare iterated-Lie-derivative verdicts with partial-derivative ones.

    ``fields`` is a list of chartwise vector fields; all words in them up
    to the given depth are classified at order 0 and the summary verdict
    is matched against classify() at total orders 0..depth.
    """
    if grid is None:
        grid = dyadic_grid()
    rows = []
    layer = [((), U)]
    words = [((), U)]
    for _ in range(depth):
        layer = [(word + (idx,), gf.lie_derivative(fields[idx]))
                 for word, gf in layer for idx in range(len(fields))]
        words.extend(layer)
    for word, gf in words:
        rep = classify(gf, orders=(0,), boxes=boxes, grid=grid, m_max=m_max,
                       n_samples=n_samples)
        rows.append({"word": list(word), "summary": rep["summary"],
                     "order": rep["order"]})
    lie_neg = all(r["summary"] == "negligible" for r in rows)
    lie_mod = all(r["summary"] in ("negligible", "moderate") for r in rows)
    part = classify(U, orders=tuple(range(depth + 1)), boxes=boxes, grid=grid,
                    m_max=m_max, n_samples=n_samples)
    part_neg = part["summary"] == "negligible"
    part_mod = part["summary"] in ("negligible", "moderate")
    return {
        "agree": (lie_neg == part_neg) and (lie_mod == part_mod),
        "lie_rows": rows,
        "partial_summary": part["summary"],
        "depth": depth,
    }
