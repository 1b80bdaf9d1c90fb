"""Generalized tensor fields: chartwise component nets.

A valence-(r, s) field stores one net per chart and index tuple.  On
overlaps the components must satisfy the Jacobian-weighted
transformation law up to a negligible residual; ``coherence_check_tensor``
measures that.  On top sit the module algebra over generalized
functions, tensor products, contractions, Lie derivatives along smooth
and generalized vector fields, and reconstruction of a vector field
from an algebraic derivation.
"""

from __future__ import annotations

import numpy as np

from . import _mindex as mi
from .asymptotic import DEFAULT_M_MAX, estimate_order
from .errors import AtlasMismatch, InvalidSlots, NotADerivation
from .gfunc import (COHERENCE_GRAD_RTOL, COHERENCE_RTOL, GeneralizedFunction,
                    _atlas_of)
from .grid import dyadic_grid
from .manifolds import Manifold
from .nets import Net, box_lattice
from .smooth import SmoothFn, constant, from_sympy


def _as_net(value, dim: int) -> Net:
    if isinstance(value, Net):
        return value
    if isinstance(value, SmoothFn):
        return Net.constant_in_eps(value)
    if np.isscalar(value):
        return Net.constant_in_eps(constant(float(value), dim))
    raise TypeError(f"cannot use {value!r} as a tensor component")


class GeneralizedTensorField:
    """Valence-(r, s) tensor field with one component net per chart."""

    def __init__(self, space, valence, comps: dict, label: str = ""):
        self.atlas = _atlas_of(space)
        r, s = int(valence[0]), int(valence[1])
        if r < 0 or s < 0 or r + s == 0:
            raise InvalidSlots(f"valence {valence} must be nonnegative with rank >= 1")
        self.valence = (r, s)
        dim = self.atlas.dim
        shape = (dim,) * (r + s)
        self.comps: dict[str, np.ndarray] = {}
        for c, arr in comps.items():
            if c not in self.atlas.charts:
                raise AtlasMismatch(f"no chart {c!r} in atlas {self.atlas.name}")
            src = np.asarray(arr, dtype=object)
            if src.shape != shape:
                raise AtlasMismatch(
                    f"components for chart {c!r} have shape {src.shape}, want {shape}")
            out = np.empty(shape, dtype=object)
            for idx in np.ndindex(shape):
                out[idx] = _as_net(src[idx], dim)
            self.comps[c] = out
        self.label = label

    @property
    def rank(self) -> int:
        return self.valence[0] + self.valence[1]

    def chart_names(self):
        return sorted(self.comps)

    def component(self, chart: str, idx) -> Net:
        idx = (idx,) if np.isscalar(idx) else tuple(idx)
        if len(idx) != self.rank:
            raise InvalidSlots(f"index {idx} has {len(idx)} slots, rank is {self.rank}")
        try:
            return self.comps[chart][idx]
        except KeyError:
            raise AtlasMismatch(f"chart {chart!r} carries no components")

    # -- module algebra over generalized functions ----------------------

    def _check_peer(self, other: "GeneralizedTensorField"):
        if other.atlas is not self.atlas:
            raise AtlasMismatch("operands live on different atlases")
        if set(other.comps) != set(self.comps):
            raise AtlasMismatch("operands carry different chart sets")

    def _zip(self, other, op):
        self._check_peer(other)
        if other.valence != self.valence:
            raise InvalidSlots(f"valence {other.valence} != {self.valence}")
        comps = {}
        for c, arr in self.comps.items():
            out = np.empty(arr.shape, dtype=object)
            for idx in np.ndindex(arr.shape):
                out[idx] = op(arr[idx], other.comps[c][idx])
            comps[c] = out
        return _make(self.atlas, self.valence, comps)

    def __add__(self, other):
        if not isinstance(other, GeneralizedTensorField):
            return NotImplemented
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        if not isinstance(other, GeneralizedTensorField):
            return NotImplemented
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, w):
        if isinstance(w, GeneralizedFunction):
            if w.atlas is not self.atlas:
                raise AtlasMismatch("scalar weight lives on a different atlas")
            if set(w.nets) != set(self.comps):
                raise AtlasMismatch("scalar weight carries different charts")
            weight = lambda c, net: w.nets[c] * net
        elif np.isscalar(w):
            weight = lambda c, net: net * float(w)
        else:
            return NotImplemented
        comps = {}
        for c, arr in self.comps.items():
            out = np.empty(arr.shape, dtype=object)
            for idx in np.ndindex(arr.shape):
                out[idx] = weight(c, arr[idx])
            comps[c] = out
        return _make(self.atlas, self.valence, comps)

    __rmul__ = __mul__

    # -- evaluation ------------------------------------------------------

    def evaluate(self, one_forms=(), vector_fields=()) -> GeneralizedFunction:
        """Full contraction T(A_1..A_r, X_1..X_s) as a generalized function.

        Multilinear over the generalized scalars in every slot.
        """
        r, s = self.valence
        one_forms = tuple(one_forms)
        vector_fields = tuple(vector_fields)
        if len(one_forms) != r or len(vector_fields) != s:
            raise InvalidSlots(
                f"need {r} one-forms and {s} vector fields, "
                f"got {len(one_forms)} and {len(vector_fields)}")
        for a in one_forms:
            self._check_peer(a)
            if a.valence != (0, 1):
                raise InvalidSlots("upper slots take one-forms")
        for x in vector_fields:
            self._check_peer(x)
            if x.valence != (1, 0):
                raise InvalidSlots("lower slots take vector fields")
        dim = self.atlas.dim
        nets = {}
        for c, arr in self.comps.items():
            acc = None
            for idx in np.ndindex(arr.shape):
                term = arr[idx]
                for k in range(r):
                    term = term * one_forms[k].comps[c][(idx[k],)]
                for l in range(s):
                    term = term * vector_fields[l].comps[c][(idx[r + l],)]
                acc = term if acc is None else acc + term
            nets[c] = acc if acc is not None else Net.zero(dim)
        return GeneralizedFunction(self.atlas, nets, label=f"eval {self.label}")

    def to_json(self, grid=None, n_samples: int = 5) -> dict:
        """Component tables on each chart's sample lattice."""
        if grid is None:
            grid = dyadic_grid()
        tables = {}
        for c in self.chart_names():
            box = self.atlas.charts[c].sample_box
            pts = box_lattice(box, n_samples)
            rows = []
            for idx in np.ndindex(self.comps[c].shape):
                net = self.comps[c][idx]
                for e in grid:
                    vals = net.at(e)._partial_fn((0,) * self.atlas.dim, pts)
                    rows.append({"indices": list(idx), "eps": float(e),
                                 "values": [float(v) for v in np.asarray(vals).ravel()]})
            tables[c] = {"box": [[float(lo), float(hi)] for lo, hi in box],
                         "rows": rows}
        return {"label": self.label, "valence": list(self.valence),
                "charts": tables}


class GeneralizedVectorField(GeneralizedTensorField):
    """Valence (1, 0); acts on generalized functions as a derivation."""

    def __init__(self, space, components: dict, label: str = ""):
        super().__init__(space, (1, 0), components, label)

    def __call__(self, U: GeneralizedFunction) -> GeneralizedFunction:
        return field_apply(self, U)


class GeneralizedOneForm(GeneralizedTensorField):
    """Valence (0, 1); pairs with vector fields."""

    def __init__(self, space, components: dict, label: str = ""):
        super().__init__(space, (0, 1), components, label)

    def __call__(self, Xi: GeneralizedTensorField) -> GeneralizedFunction:
        if not isinstance(Xi, GeneralizedTensorField) or Xi.valence != (1, 0):
            raise InvalidSlots("one-forms pair with vector fields")
        return self.evaluate(vector_fields=(Xi,))


def _make(space, valence, comps, label: str = "") -> GeneralizedTensorField:
    if tuple(valence) == (1, 0):
        out = GeneralizedVectorField.__new__(GeneralizedVectorField)
    elif tuple(valence) == (0, 1):
        out = GeneralizedOneForm.__new__(GeneralizedOneForm)
    else:
        out = GeneralizedTensorField.__new__(GeneralizedTensorField)
    GeneralizedTensorField.__init__(out, space, valence, comps, label)
    return out


def smooth_vector_field(space, fns: dict, label: str = "") -> GeneralizedVectorField:
    """Wrap chartwise component SmoothFn lists as a constant-in-eps field."""
    atlas = _atlas_of(space)
    comps = {c: [Net.constant_in_eps(f) for f in fs] for c, fs in fns.items()}
    return GeneralizedVectorField(atlas, comps, label=label)


# -- products and contractions --------------------------------------------


def tensor_product(S: GeneralizedTensorField,
                   T: GeneralizedTensorField) -> GeneralizedTensorField:
    """S (x) T with upper slots of S first, then of T; same for lower."""
    if not isinstance(S, GeneralizedTensorField) or not isinstance(T, GeneralizedTensorField):
        raise TypeError("tensor_product takes two tensor fields")
    if T.atlas is not S.atlas:
        raise AtlasMismatch("factors live on different atlases")
    if set(T.comps) != set(S.comps):
        raise AtlasMismatch("factors carry different chart sets")
    r1, s1 = S.valence
    r2, s2 = T.valence
    dim = S.atlas.dim
    shape = (dim,) * (r1 + r2 + s1 + s2)
    comps = {}
    for c in S.comps:
        out = np.empty(shape, dtype=object)
        for idx in np.ndindex(shape):
            up1 = idx[:r1]
            up2 = idx[r1:r1 + r2]
            low1 = idx[r1 + r2:r1 + r2 + s1]
            low2 = idx[r1 + r2 + s1:]
            out[idx] = S.comps[c][up1 + low1] * T.comps[c][up2 + low2]
        comps[c] = out
    return _make(S.atlas, (r1 + r2, s1 + s2), comps,
                 label=f"({S.label})x({T.label})")


def contract(T: GeneralizedTensorField, up: int = 0, low: int = 0):
    """Trace the ``up``-th upper slot against the ``low``-th lower slot.

    Rank-2 input collapses to a GeneralizedFunction.
    """
    r, s = T.valence
    if not (0 <= up < r):
        raise InvalidSlots(f"no upper slot {up} on valence {T.valence}")
    if not (0 <= low < s):
        raise InvalidSlots(f"no lower slot {low} on valence {T.valence}")
    dim = T.atlas.dim

    def traced(c, rest):
        up_rest, low_rest = rest[:r - 1], rest[r - 1:]
        acc = None
        for k in range(dim):
            full = (up_rest[:up] + (k,) + up_rest[up:]
                    + low_rest[:low] + (k,) + low_rest[low:])
            term = T.comps[c][full]
            acc = term if acc is None else acc + term
        return acc

    if r + s == 2:
        nets = {c: traced(c, ()) for c in T.comps}
        return GeneralizedFunction(T.atlas, nets, label=f"tr {T.label}")
    shape = (dim,) * (r - 1 + s - 1)
    comps = {}
    for c in T.comps:
        out = np.empty(shape, dtype=object)
        for rest in np.ndindex(shape):
            out[rest] = traced(c, rest)
        comps[c] = out
    return _make(T.atlas, (r - 1, s - 1), comps, label=f"tr {T.label}")


# -- Lie derivatives -------------------------------------------------------


def field_apply(Xi: GeneralizedTensorField, U: GeneralizedFunction) -> GeneralizedFunction:
    """Xi acting on a generalized scalar: sum_m Xi^m d_m U per chart."""
    if not isinstance(Xi, GeneralizedTensorField) or Xi.valence != (1, 0):
        raise InvalidSlots("only vector fields act on scalars")
    if not isinstance(U, GeneralizedFunction):
        raise TypeError(f"expected a generalized function, got {U!r}")
    if U.atlas is not Xi.atlas:
        raise AtlasMismatch("field and scalar live on different atlases")
    if set(U.nets) != set(Xi.comps):
        raise AtlasMismatch("field and scalar carry different chart sets")
    dim = Xi.atlas.dim
    nets = {}
    for c in Xi.comps:
        acc = None
        for m in range(dim):
            term = Xi.comps[c][(m,)] * U.nets[c].partial(mi.unit(dim, m))
            acc = term if acc is None else acc + term
        nets[c] = acc
    return GeneralizedFunction(Xi.atlas, nets, label=f"Xi({U.label})")


def gen_lie_derivative(T: GeneralizedTensorField,
                       Xi: GeneralizedTensorField) -> GeneralizedTensorField:
    """Lie derivative of T along a generalized vector field Xi.

    Chartwise classical formula: the transport term Xi^m d_m T, minus a
    d_m Xi^i correction for every upper slot, plus a d_j Xi^m correction
    for every lower slot.
    """
    if not isinstance(Xi, GeneralizedTensorField) or Xi.valence != (1, 0):
        raise InvalidSlots("Lie derivative needs a vector field")
    if T.atlas is not Xi.atlas:
        raise AtlasMismatch("tensor and field live on different atlases")
    if set(T.comps) != set(Xi.comps):
        raise AtlasMismatch("tensor and field carry different chart sets")
    r, s = T.valence
    dim = T.atlas.dim
    comps = {}
    for c, arr in T.comps.items():
        xs = [Xi.comps[c][(m,)] for m in range(dim)]
        dxs = [[xs[i].partial(mi.unit(dim, m)) for m in range(dim)]
               for i in range(dim)]
        out = np.empty(arr.shape, dtype=object)
        for idx in np.ndindex(arr.shape):
            upper, lower = idx[:r], idx[r:]
            acc = None
            for m in range(dim):
                term = xs[m] * arr[idx].partial(mi.unit(dim, m))
                acc = term if acc is None else acc + term
            for a in range(r):
                for m in range(dim):
                    jdx = upper[:a] + (m,) + upper[a + 1:] + lower
                    acc = acc - dxs[upper[a]][m] * arr[jdx]
            for b in range(s):
                for m in range(dim):
                    jdx = upper + lower[:b] + (m,) + lower[b + 1:]
                    acc = acc + dxs[m][lower[b]] * arr[jdx]
            out[idx] = acc
        comps[c] = out
    return _make(T.atlas, T.valence, comps, label=f"L_Xi {T.label}")


def lie_derivative_tensor(T: GeneralizedTensorField, xi: dict) -> GeneralizedTensorField:
    """Lie derivative along a smooth field given per chart as SmoothFn lists.

    Delegates to the generalized-field version with constant-in-eps
    components, so the two routes agree identically when xi is the
    constant embedding of a smooth field.
    """
    return gen_lie_derivative(T, smooth_vector_field(T.atlas, xi, label="smooth xi"))


def bracket(X: GeneralizedTensorField, Y: GeneralizedTensorField) -> GeneralizedVectorField:
    """Lie bracket [X, Y] of two generalized vector fields."""
    if not isinstance(X, GeneralizedTensorField) or X.valence != (1, 0):
        raise InvalidSlots("bracket takes vector fields")
    return gen_lie_derivative(Y, X)


# -- coherence on overlaps -------------------------------------------------


def coherence_check_tensor(T: GeneralizedTensorField, grid=None, n_samples: int = 31,
                           m_max: int = DEFAULT_M_MAX, rtol: float = COHERENCE_RTOL,
                           grad_rtol: float = COHERENCE_GRAD_RTOL) -> dict:
    """Classify the Jacobian-weighted transformation residual per overlap.

    For a transition a -> b with Jacobian J, the chart-a components are
    compared against the pullback: inverse-J factors on upper slots,
    J factors on lower slots, chart-b components at the mapped points.
    The sup over components and lattice points is order-fitted per eps;
    coherent means every fit is negligible.
    """
    if grid is None:
        grid = dyadic_grid()
    atlas = T.atlas
    dim = atlas.dim
    r, s = T.valence
    rows = []
    coherent = True
    for (a, b), tr in sorted(atlas.transitions.items()):
        if a not in T.comps or b not in T.comps:
            continue
        for k, box in enumerate(atlas.overlap_boxes[(a, b)]):
            x = box_lattice(box, n_samples)
            y = tr.fn(x)
            jac = np.asarray(tr.jac(x), dtype=float)
            jinv = np.linalg.inv(jac)
            samples = []
            n_clamped = 0
            zero = (0,) * dim
            for e in grid:
                gap, s0, s1 = 0.0, 0.0, 0.0
                vb = {idx: np.asarray(T.comps[b][idx].at(e)._partial_fn(zero, y))
                      for idx in np.ndindex(T.comps[b].shape)}
                for idx in np.ndindex(T.comps[a].shape):
                    fa = T.comps[a][idx].at(e)
                    va = np.asarray(fa._partial_fn(zero, x))
                    pullback = np.zeros(len(x))
                    for kdx in np.ndindex(T.comps[b].shape):
                        w = np.ones(len(x))
                        for ai in range(r):
                            w = w * jinv[:, idx[ai], kdx[ai]]
                        for bi in range(s):
                            w = w * jac[:, kdx[r + bi], idx[r + bi]]
                        pullback = pullback + w * vb[kdx]
                    gap = max(gap, float(np.max(np.abs(va - pullback))))
                    s0 = max(s0, float(np.max(np.abs(va))),
                             float(np.max(np.abs(pullback))))
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


# -- seeded coherent inputs -------------------------------------------------


def random_coherent_functions(manifold: Manifold, count: int = 5, seed: int = 0):
    """Seeded smooth generalized functions with exact overlap coherence.

    On periodic manifolds the chart expressions are trigonometric
    polynomials shared verbatim between charts, which the shift
    transitions preserve; on euclidean space plain polynomials.  A mild
    per-function (1 + a*eps) factor gives the nets genuine eps
    dependence without disturbing coherence.
    """
    import sympy as sp

    rng = np.random.default_rng(seed)
    atlas = manifold.atlas
    name = manifold.name
    out = []
    for j in range(count):
        if name.startswith("euclidean"):
            syms = tuple(sp.symbols(f"x0:{atlas.dim}"))
            expr = sp.Integer(0)
            coef = rng.normal(size=3 * atlas.dim + 1)
            expr = expr + round(float(coef[-1]), 6)
            t = 0
            for i, v in enumerate(syms):
                for p in range(1, 4):
                    expr = expr + round(float(coef[t]) / (p * p), 6) * v ** p
                    t += 1
        elif name in ("circle", "torus2"):
            syms = tuple(sp.symbols(f"y0:{atlas.dim}"))
            coef = rng.normal(size=(len(syms), 2, 2))
            expr = round(float(rng.normal()), 6)
            for i, v in enumerate(syms):
                for kf in (1, 2):
                    expr = expr + round(float(coef[i, kf - 1, 0]) / kf, 6) * sp.sin(kf * v)
                    expr = expr + round(float(coef[i, kf - 1, 1]) / kf, 6) * sp.cos(kf * v)
        else:
            raise ValueError(f"no coherent probe family for manifold {name!r}")
        f = from_sympy(expr, syms, label=f"probe{j}")
        a = round(float(rng.uniform(0.5, 2.0)), 6)
        nets = {c: Net(atlas.dim, lambda e, f=f, a=a: f * (1.0 + a * e))
                for c in atlas.charts}
        out.append(GeneralizedFunction(atlas, nets, label=f"probe{j}"))
    return out


def random_tensor_field(manifold: Manifold, valence, seed: int = 0) -> GeneralizedTensorField:
    """Seeded coherent tensor field built from coherent scalar components.

    The builtin periodic manifolds have unit-Jacobian transitions, so
    component scalars shared between charts transform correctly for
    every valence.
    """
    r, s = int(valence[0]), int(valence[1])
    atlas = manifold.atlas
    dim = atlas.dim
    shape = (dim,) * (r + s)
    n_comp = int(np.prod(shape))
    fns = random_coherent_functions(manifold, count=n_comp, seed=seed)
    comps = {}
    for c in atlas.charts:
        arr = np.empty(shape, dtype=object)
        for t, idx in enumerate(np.ndindex(shape)):
            arr[idx] = fns[t].nets[c]
        comps[c] = arr
    return _make(manifold, (r, s), comps, label=f"seeded {valence}")


# -- derivations ------------------------------------------------------------


DERIVATION_TOL = 1e-9
DERIVATION_POINTS = 50


def _surrogate_function(manifold: Manifold, surrogate) -> GeneralizedFunction:
    nets = {c: Net.constant_in_eps(f) for c, f in surrogate.exprs.items()}
    return GeneralizedFunction(manifold.atlas, nets, label=f"W{surrogate.axis}")


def _theta_output(theta, U, atlas, charts):
    V = theta(U)
    if not isinstance(V, GeneralizedFunction):
        raise NotADerivation(f"map returned {type(V).__name__}, not a generalized function")
    if V.atlas is not atlas or set(V.nets) != charts:
        raise NotADerivation("map does not preserve the atlas and chart set")
    return V


def derivation_to_vector_field(theta, manifold: Manifold, seed: int = 0,
                               grid=None, tol: float = DERIVATION_TOL,
                               n_points: int = DERIVATION_POINTS) -> GeneralizedVectorField:
    """Recover the vector field Xi with theta = Xi(.) from a derivation.

    The candidate components are theta applied to the manifold's
    coordinate surrogates, stitched across each surrogate's core region
    where the surrogate is an exact coordinate.  Before trusting theta
    it is probed for linearity and the Leibniz rule on the surrogates,
    their squares, and five seeded coherent functions, at ``n_points``
    random points per chart; failure raises NotADerivation, as does a
    non-negligible residual theta(U) - Xi(U) on the probe suite.
    """
    if not isinstance(manifold, Manifold) or not manifold.surrogates:
        raise TypeError("need a Manifold carrying coordinate surrogates")
    if grid is None:
        grid = dyadic_grid()
    atlas = manifold.atlas
    dim = atlas.dim
    charts = set(atlas.charts)
    rng = np.random.default_rng(seed)
    pts = {}
    for c, ch in atlas.charts.items():
        box = ch.sample_box
        pts[c] = np.stack([rng.uniform(lo, hi, size=n_points)
                           for lo, hi in box], axis=-1)
    eps_probe = [grid[0], grid[len(grid) // 2], grid[-1]]
    zero = (0,) * dim

    surrogate_fns = [_surrogate_function(manifold, s) for s in manifold.surrogates]
    probes = list(surrogate_fns)
    probes += [S * S for S in surrogate_fns]
    probes += random_coherent_functions(manifold, count=5, seed=seed)

    def sup_at(V, c, e):
        return float(np.max(np.abs(V.nets[c].at(e)._partial_fn(zero, pts[c]))))

    thetas = [_theta_output(theta, U, atlas, charts) for U in probes]
    for i, U in enumerate(probes):
        V = probes[(i + 1) % len(probes)]
        lin = _theta_output(theta, U + V, atlas, charts) - thetas[i] \
            - thetas[(i + 1) % len(probes)]
        lei = _theta_output(theta, U * V, atlas, charts) - thetas[i] * V \
            - U * thetas[(i + 1) % len(probes)]
        for c in sorted(charts):
            for e in eps_probe:
                bad = max(sup_at(lin, c, e), sup_at(lei, c, e))
                if not bad <= tol:
                    raise NotADerivation(
                        f"probe {i} fails linearity/Leibniz in chart {c!r} "
                        f"at eps {e:.3g}: residual {bad:.3g}")

    # stitch theta(surrogate) over the cores where the surrogate is an
    # exact coordinate; the cores cover each sample box by construction
    theta_s = dict(zip((id(s) for s in manifold.surrogates),
                       thetas[:len(manifold.surrogates)]))
    comps = {}
    for c in sorted(charts):
        col = np.empty((dim,), dtype=object)
        for axis in range(dim):
            cands = [s for s in manifold.surrogates if s.axis == axis]
            if not cands:
                raise NotADerivation(f"no coordinate surrogate for axis {axis}")
            covered = np.zeros(len(pts[c]), dtype=bool)
            for s in cands:
                covered |= s.core_mask[c](pts[c])
            if not covered.all():
                raise NotADerivation(
                    f"surrogate cores miss part of chart {c!r} on axis {axis}")

            def factory(e, c=c, cands=cands):
                fn = theta_s[id(cands[-1])].nets[c].at(e)
                for s in reversed(cands[:-1]):
                    fn = theta_s[id(s)].nets[c].at(e).where(s.core_mask[c], fn)
                return fn

            col[axis] = Net(dim, factory)
        comps[c] = col
    Xi = GeneralizedVectorField(atlas, comps, label="recovered")

    for i, U in enumerate(probes):
        resid = thetas[i] - field_apply(Xi, U)
        for c in sorted(charts):
            samples = [(float(e), sup_at(resid, c, e)) for e in grid]
            fit = estimate_order(samples)
            if not fit.is_negligible:
                raise NotADerivation(
                    f"probe {i} residual in chart {c!r} is {fit.verdict} "
                    f"(slope {fit.slope:.2f}), not negligible")
    return Xi
