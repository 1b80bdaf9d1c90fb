"""Generalized differential forms: antisymmetric chartwise nets.

A degree-k form stores one component net per chart and strictly
increasing index tuple; components at permuted indices carry the parity
sign and repeated indices vanish, so antisymmetry holds by storage.
Provides the exterior derivative, wedge products, interior products,
Lie derivatives, the star-shaped homotopy inverse of d, top-degree
integration, and Stokes residual reports on intervals, disks, and
boxes.
"""

from __future__ import annotations

import itertools

import numpy as np

from . import _mindex as mi
from .errors import (AtlasMismatch, DegreeOverflow, DomainError,
                     InvalidDegree, InvalidSlots, QuadratureFailure)
from .gfunc import GeneralizedFunction, _atlas_of, integrate_box
from .gnumber import GeneralizedNumber
from .grid import dyadic_grid
from .manifolds import Manifold
from .nets import Net, box_lattice
from .smooth import SmoothFn
from .tensor import (GeneralizedTensorField, _as_net, coherence_check_tensor,
                     random_coherent_functions)


def index_tuples(dim: int, k: int):
    """Strictly increasing k-tuples from range(dim); empty list for k > dim."""
    return list(itertools.combinations(range(dim), k))


def canonical_index(idx):
    """(sign, sorted tuple) of an index tuple; sign 0 on repeats."""
    idx = tuple(int(i) for i in idx)
    if len(set(idx)) != len(idx):
        return 0, None
    inversions = sum(1 for a, b in itertools.combinations(idx, 2) if a > b)
    return (-1) ** inversions, tuple(sorted(idx))


def _merge_sign(positions):
    # parity of pulling the chosen positions to the front, order kept
    return (-1) ** sum(p - i for i, p in enumerate(positions))


class GeneralizedKForm:
    """Degree-k form with one net per chart and increasing index tuple."""

    def __init__(self, space, degree: int, comps: dict, label: str = ""):
        self.atlas = _atlas_of(space)
        k = int(degree)
        if k < 1:
            raise InvalidDegree(f"degree {degree} forms are plain generalized functions")
        self.degree = k
        dim = self.atlas.dim
        keys = index_tuples(dim, k)
        self.comps: dict[str, dict] = {}
        for c, table in comps.items():
            if c not in self.atlas.charts:
                raise AtlasMismatch(f"no chart {c!r} in atlas {self.atlas.name}")
            if not isinstance(table, dict):
                table = dict(zip(keys, table))
            extra = set(table) - set(keys)
            if extra:
                raise InvalidSlots(f"not increasing degree-{k} tuples: {sorted(extra)}")
            self.comps[c] = {K: _as_net(table.get(K, 0.0), dim) for K in keys}
        self.label = label

    def chart_names(self):
        return sorted(self.comps)

    def keys(self):
        return index_tuples(self.atlas.dim, self.degree)

    def component(self, chart: str, idx) -> Net:
        """Component at any index tuple, with the antisymmetry sign."""
        idx = tuple(idx)
        if len(idx) != self.degree:
            raise InvalidSlots(f"index {idx} has {len(idx)} slots, degree is {self.degree}")
        sign, key = canonical_index(idx)
        if sign == 0:
            return Net.zero(self.atlas.dim)
        net = self.comps[chart][key]
        return net if sign == 1 else net * -1.0

    # -- module algebra --------------------------------------------------

    def _zip(self, other, op):
        if not isinstance(other, GeneralizedKForm):
            raise TypeError(f"cannot combine a form with {other!r}")
        if other.atlas is not self.atlas:
            raise AtlasMismatch("operands live on different atlases")
        if set(other.comps) != set(self.comps):
            raise AtlasMismatch("operands carry different chart sets")
        if other.degree != self.degree:
            raise InvalidDegree(f"degree {other.degree} != {self.degree}")
        return GeneralizedKForm(
            self.atlas, self.degree,
            {c: {K: op(self.comps[c][K], other.comps[c][K]) for K in self.comps[c]}
             for c in self.comps})

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, w):
        if isinstance(w, GeneralizedFunction):
            if w.atlas is not self.atlas:
                raise AtlasMismatch("scalar weight lives on a different atlas")
            if set(w.nets) != set(self.comps):
                raise AtlasMismatch("scalar weight carries different charts")
            return GeneralizedKForm(
                self.atlas, self.degree,
                {c: {K: w.nets[c] * net for K, net in self.comps[c].items()}
                 for c in self.comps})
        if np.isscalar(w):
            w = float(w)
            return GeneralizedKForm(
                self.atlas, self.degree,
                {c: {K: net * w for K, net in self.comps[c].items()}
                 for c in self.comps})
        return NotImplemented

    __rmul__ = __mul__

    # -- views -----------------------------------------------------------

    def to_tensor(self) -> GeneralizedTensorField:
        """The (0, k) tensor with fully antisymmetrized components."""
        dim = self.atlas.dim
        shape = (dim,) * self.degree
        comps = {}
        for c in self.comps:
            arr = np.empty(shape, dtype=object)
            for idx in np.ndindex(shape):
                arr[idx] = self.component(c, idx)
            comps[c] = arr
        return GeneralizedTensorField(self.atlas, (0, self.degree), comps,
                                      label=self.label)

    def evaluate(self, vector_fields) -> GeneralizedFunction:
        return self.to_tensor().evaluate(vector_fields=tuple(vector_fields))

    def to_json(self, grid=None, n_samples: int = 5) -> dict:
        if grid is None:
            grid = dyadic_grid()
        tables = {}
        for c in self.chart_names():
            box = self.atlas.charts[c].sample_box
            pts = box_lattice(box, n_samples)
            rows = []
            for K in self.keys():
                for e in grid:
                    vals = self.comps[c][K].at(e)._partial_fn(
                        (0,) * self.atlas.dim, pts)
                    rows.append({"indices": list(K), "eps": float(e),
                                 "values": [float(v) for v in np.asarray(vals).ravel()]})
            tables[c] = {"box": [[float(lo), float(hi)] for lo, hi in box],
                         "rows": rows}
        return {"label": self.label, "degree": self.degree, "charts": tables}


# -- exterior calculus -------------------------------------------------------


def exterior_d(omega):
    """Exterior derivative; accepts a generalized function as a 0-form."""
    if isinstance(omega, GeneralizedFunction):
        dim = omega.atlas.dim
        comps = {c: {(i,): omega.nets[c].partial(mi.unit(dim, i))
                     for i in range(dim)}
                 for c in omega.nets}
        return GeneralizedKForm(omega.atlas, 1, comps, label=f"d {omega.label}")
    if not isinstance(omega, GeneralizedKForm):
        raise TypeError(f"cannot differentiate {omega!r}")
    dim = omega.atlas.dim
    k = omega.degree
    comps = {}
    for c in omega.comps:
        table = {}
        for J in index_tuples(dim, k + 1):
            acc = None
            for t in range(k + 1):
                rest = J[:t] + J[t + 1:]
                term = omega.comps[c][rest].partial(mi.unit(dim, J[t]))
                if t % 2:
                    term = term * -1.0
                acc = term if acc is None else acc + term
            table[J] = acc
        comps[c] = table
    return GeneralizedKForm(omega.atlas, k + 1, comps, label=f"d {omega.label}")


def wedge(a, b):
    """Wedge product; either factor may be a generalized function."""
    if isinstance(a, GeneralizedFunction):
        return b * a if isinstance(b, GeneralizedFunction) else b.__mul__(a)
    if isinstance(b, GeneralizedFunction):
        return a * b
    if not isinstance(a, GeneralizedKForm) or not isinstance(b, GeneralizedKForm):
        raise TypeError("wedge takes forms or generalized functions")
    if b.atlas is not a.atlas:
        raise AtlasMismatch("factors live on different atlases")
    if set(b.comps) != set(a.comps):
        raise AtlasMismatch("factors carry different chart sets")
    dim = a.atlas.dim
    k, l = a.degree, b.degree
    if k + l > dim:
        raise DegreeOverflow(f"degree {k}+{l} exceeds dimension {dim}")
    comps = {}
    for c in a.comps:
        table = {}
        for K in index_tuples(dim, k + l):
            acc = None
            for pos in itertools.combinations(range(k + l), k):
                comp = tuple(p for p in range(k + l) if p not in pos)
                term = a.comps[c][tuple(K[p] for p in pos)] \
                    * b.comps[c][tuple(K[p] for p in comp)]
                if _merge_sign(pos) < 0:
                    term = term * -1.0
                acc = term if acc is None else acc + term
            table[K] = acc
        comps[c] = table
    return GeneralizedKForm(a.atlas, k + l, comps,
                            label=f"({a.label})^({b.label})")


def insert(omega: GeneralizedKForm, Xi: GeneralizedTensorField):
    """Interior product i_Xi omega; degree drops by one.

    A 1-form collapses to a generalized function.
    """
    if not isinstance(omega, GeneralizedKForm):
        raise InvalidDegree("interior product needs a form of degree >= 1")
    if not isinstance(Xi, GeneralizedTensorField) or Xi.valence != (1, 0):
        raise InvalidSlots("interior product inserts a vector field")
    if Xi.atlas is not omega.atlas or set(Xi.comps) != set(omega.comps):
        raise AtlasMismatch("field and form do not share charts")
    dim = omega.atlas.dim
    k = omega.degree
    if k == 1:
        nets = {}
        for c in omega.comps:
            acc = None
            for (m,), net in omega.comps[c].items():
                term = Xi.comps[c][(m,)] * net
                acc = term if acc is None else acc + term
            nets[c] = acc if acc is not None else Net.zero(dim)
        return GeneralizedFunction(omega.atlas, nets, label=f"i_Xi {omega.label}")
    comps = {}
    for c in omega.comps:
        table = {J: None for J in index_tuples(dim, k - 1)}
        for K, net in omega.comps[c].items():
            for t in range(k):
                J = K[:t] + K[t + 1:]
                term = Xi.comps[c][(K[t],)] * net
                if t % 2:
                    term = term * -1.0
                table[J] = term if table[J] is None else table[J] + term
        comps[c] = {J: (v if v is not None else Net.zero(dim))
                    for J, v in table.items()}
    return GeneralizedKForm(omega.atlas, k - 1, comps, label=f"i_Xi {omega.label}")


def lie_derivative_form(omega: GeneralizedKForm,
                        Xi: GeneralizedTensorField) -> GeneralizedKForm:
    """L_Xi omega by the chartwise classical formula, canonicalized."""
    if not isinstance(omega, GeneralizedKForm):
        raise InvalidDegree("need a form of degree >= 1")
    if not isinstance(Xi, GeneralizedTensorField) or Xi.valence != (1, 0):
        raise InvalidSlots("Lie derivative needs a vector field")
    if Xi.atlas is not omega.atlas or set(Xi.comps) != set(omega.comps):
        raise AtlasMismatch("field and form do not share charts")
    dim = omega.atlas.dim
    k = omega.degree
    comps = {}
    for c in omega.comps:
        xs = [Xi.comps[c][(m,)] for m in range(dim)]
        dxs = [[xs[i].partial(mi.unit(dim, m)) for m in range(dim)]
               for i in range(dim)]
        table = {}
        for K in index_tuples(dim, k):
            acc = None
            for m in range(dim):
                term = xs[m] * omega.comps[c][K].partial(mi.unit(dim, m))
                acc = term if acc is None else acc + term
            for b in range(k):
                for m in range(dim):
                    sign, key = canonical_index(K[:b] + (m,) + K[b + 1:])
                    if sign == 0:
                        continue
                    term = dxs[m][K[b]] * omega.comps[c][key]
                    if sign < 0:
                        term = term * -1.0
                    acc = acc + term
            table[K] = acc
        comps[c] = table
    return GeneralizedKForm(omega.atlas, k, comps, label=f"L_Xi {omega.label}")


# -- homotopy inverse of d ---------------------------------------------------


def _single_star_chart(atlas):
    names = sorted(atlas.charts)
    if len(names) != 1:
        raise DomainError("the homotopy needs a single chart star-shaped about 0")
    c = names[0]
    for lo, hi in atlas.charts[c].sample_box:
        if not (lo <= 0.0 <= hi):
            raise DomainError("chart box does not contain the origin")
    return c


def homotopy_H(omega: GeneralizedKForm, n_t: int = 32):
    """Radial homotopy: (H w)(x)(v...) integrates t^(k-1) w(tx)(x, v...).

    Gauss-Legendre with ``n_t`` nodes in t.  The resulting component
    evaluators carry exact derivative rules, so d(H w) is available
    analytically.  A 1-form collapses to a generalized function.
    """
    if not isinstance(omega, GeneralizedKForm):
        raise InvalidDegree("the homotopy applies to forms of degree >= 1")
    atlas = omega.atlas
    c = _single_star_chart(atlas)
    dim = atlas.dim
    k = omega.degree
    g, w = np.polynomial.legendre.leggauss(int(n_t))
    t_nodes = (g + 1.0) / 2.0
    t_weights = w / 2.0

    def comp_net(J):
        terms = []  # (sign, m, source key)
        for m in range(dim):
            sign, key = canonical_index((m,) + J)
            if sign != 0:
                terms.append((sign, m, key))

        def factory(eps):
            fns = {key: omega.comps[c][key].at(eps) for _, _, key in terms}
            orders = [f.max_order for f in fns.values()]
            max_order = None if (not orders or None in orders) else min(orders)
            uses_fd = any(f.uses_fd for f in fns.values())

            def pfn(alpha, pts):
                n_a = mi.order(alpha)
                out = np.zeros(pts.shape[0])
                for tq, wq in zip(t_nodes, t_weights):
                    scaled = tq * pts
                    layer = np.zeros(pts.shape[0])
                    for sign, m, key in terms:
                        f = fns[key]
                        val = pts[:, m] * tq ** n_a * f._partial_fn(alpha, scaled)
                        if alpha[m]:
                            val = val + alpha[m] * tq ** (n_a - 1) \
                                * f._partial_fn(mi.sub(alpha, mi.unit(dim, m)), scaled)
                        layer = layer + sign * val
                    out = out + wq * tq ** (k - 1) * layer
                return out

            return SmoothFn(dim, pfn, max_order=max_order, uses_fd=uses_fd)

        return Net(dim, factory)

    if k == 1:
        return GeneralizedFunction(atlas, {c: comp_net(())},
                                   label=f"H {omega.label}")
    comps = {c: {J: comp_net(J) for J in index_tuples(dim, k - 1)}}
    return GeneralizedKForm(atlas, k - 1, comps, label=f"H {omega.label}")


def poincare_check(omega: GeneralizedKForm, grid=None, n_samples: int = 21,
                   box=None, tol: float = 1e-7) -> dict:
    """Lattice residual of d(H w) + H(dw) = w, per eps.

    On the top degree the second term is the homotopy of the empty
    (n+1)-form, identically zero.
    """
    if grid is None:
        grid = dyadic_grid()
    atlas = omega.atlas
    c = _single_star_chart(atlas)
    dim = atlas.dim
    if box is None:
        box = atlas.charts[c].sample_box
    pts = box_lattice(box, n_samples)
    recon = exterior_d(homotopy_H(omega))
    if omega.degree < dim:
        recon = recon + homotopy_H(exterior_d(omega))
    rows = []
    worst = 0.0
    zero = (0,) * dim
    for e in grid:
        sup = 0.0
        for K in omega.keys():
            have = recon.comps[c][K].at(e)._partial_fn(zero, pts)
            want = omega.comps[c][K].at(e)._partial_fn(zero, pts)
            sup = max(sup, float(np.max(np.abs(have - want))))
        worst = max(worst, sup)
        rows.append({"eps": float(e), "sup_residual": sup})
    return {"ok": worst < tol, "max_residual": worst, "tol": tol, "rows": rows}


# -- integration and Stokes --------------------------------------------------


def integrate_nform(omega: GeneralizedKForm, box=None, grid=None) -> GeneralizedNumber:
    """Integral of a top-degree form over a chart box, per eps."""
    if not isinstance(omega, GeneralizedKForm):
        raise InvalidDegree("integration needs a form")
    atlas = omega.atlas
    names = sorted(omega.comps)
    if len(names) != 1:
        raise DomainError("top-degree integration works on a single chart")
    c = names[0]
    dim = atlas.dim
    if omega.degree != dim:
        raise DomainError(f"degree {omega.degree} is not the dimension {dim}")
    if grid is None:
        grid = dyadic_grid()
    if box is None:
        box = atlas.charts[c].sample_box
    net = omega.comps[c][tuple(range(dim))]
    values = [integrate_box(net.at(float(e)), box, eps_hint=float(e))
              for e in grid]
    return GeneralizedNumber(grid, values, label=f"int {omega.label}")


def _face_integral(fn: SmoothFn, box, axis: int, value: float) -> float:
    """Integral of fn over the box face with one coordinate pinned."""
    dim = len(box)
    rest = [b for i, b in enumerate(box) if i != axis]
    if not rest:
        return float(np.ravel(fn(np.array([[value]])))[0])
    g, w = np.polynomial.legendre.leggauss(48)
    grids, wgts = [], []
    for lo, hi in rest:
        half = (hi - lo) / 2.0
        grids.append((g + 1.0) * half + lo)
        wgts.append(w * half)
    mesh = np.stack([m.ravel() for m in np.meshgrid(*grids, indexing="ij")], axis=1)
    wmesh = np.prod(np.stack(
        [m.ravel() for m in np.meshgrid(*wgts, indexing="ij")], axis=1), axis=1)
    pts = np.insert(mesh, axis, value, axis=1)
    vals = fn._partial_fn((0,) * dim, pts)
    out = float(np.dot(wmesh, vals))
    if not np.isfinite(out):
        raise QuadratureFailure("face quadrature returned non-finite value")
    return out


def stokes_check(omega, domain, grid=None, tol: float = 1e-6,
                 n_theta: int = 256, n_r: int = 64) -> dict:
    """Residual of the boundary theorem on a supported domain, per eps.

    Domains: ("interval", (a, b)) for 0-forms on a line chart,
    ("disk", radius) for 1-forms in the plane, ("box", box) for
    codimension-one forms on a coordinate box.  Anything else raises
    DomainError.  The report carries lhs (integral of d omega), rhs
    (boundary integral), and their gap for every eps.
    """
    if grid is None:
        grid = dyadic_grid()
    kind = domain[0] if isinstance(domain, (tuple, list)) and domain else None
    atlas = omega.atlas if isinstance(omega, (GeneralizedFunction, GeneralizedKForm)) \
        else None
    if atlas is None:
        raise TypeError("stokes_check needs a form or generalized function")
    names = sorted(omega.comps if isinstance(omega, GeneralizedKForm) else omega.nets)
    if len(names) != 1:
        raise DomainError("the boundary theorem report works on a single chart")
    c = names[0]
    dim = atlas.dim

    rows = []
    if kind == "interval":
        if dim != 1 or not isinstance(omega, GeneralizedFunction):
            raise DomainError("interval domains take 0-forms on a line chart")
        a, b = float(domain[1][0]), float(domain[1][1])
        if not a < b:
            raise DomainError(f"empty interval ({a}, {b})")
        dnet = exterior_d(omega).comps[c][(0,)]
        unet = omega.nets[c]
        for e in grid:
            lhs = integrate_box(dnet.at(float(e)), ((a, b),), eps_hint=float(e))
            fe = unet.at(float(e))
            rhs = float(fe(b)) - float(fe(a))
            rows.append((lhs, rhs))
    elif kind == "disk":
        if dim != 2 or not isinstance(omega, GeneralizedKForm) or omega.degree != 1:
            raise DomainError("disk domains take 1-forms in the plane")
        radius = float(domain[1]) if len(domain) > 1 else 1.0
        if radius <= 0:
            raise DomainError(f"radius {radius} is not positive")
        curl = exterior_d(omega).comps[c][(0, 1)]
        g, w = np.polynomial.legendre.leggauss(int(n_r))
        r_nodes = (g + 1.0) * radius / 2.0
        r_weights = w * radius / 2.0
        theta = np.linspace(0.0, 2.0 * np.pi, int(n_theta), endpoint=False)
        ring = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        area_pts = np.concatenate([r * ring for r in r_nodes])
        area_w = np.concatenate([np.full(len(theta), rw * r)
                                 for r, rw in zip(r_nodes, r_weights)])
        area_w = area_w * (2.0 * np.pi / len(theta))
        bnd = radius * ring
        tangent = radius * np.stack([-np.sin(theta), np.cos(theta)], axis=1)
        w0 = omega.comps[c][(0,)]
        w1 = omega.comps[c][(1,)]
        for e in grid:
            lhs = float(np.dot(area_w, curl.at(float(e))._partial_fn((0, 0), area_pts)))
            v0 = w0.at(float(e))._partial_fn((0, 0), bnd)
            v1 = w1.at(float(e))._partial_fn((0, 0), bnd)
            rhs = float(np.mean(v0 * tangent[:, 0] + v1 * tangent[:, 1])) * 2.0 * np.pi
            rows.append((lhs, rhs))
    elif kind == "box":
        if not isinstance(omega, GeneralizedKForm) or omega.degree != dim - 1:
            raise DomainError("box domains take forms of degree dim - 1")
        box = tuple((float(lo), float(hi)) for lo, hi in domain[1])
        if len(box) != dim:
            raise DomainError(f"box has {len(box)} axes, chart has {dim}")
        top = exterior_d(omega).comps[c][tuple(range(dim))]
        for e in grid:
            lhs = integrate_box(top.at(float(e)), box, eps_hint=float(e))
            rhs = 0.0
            for i in range(dim):
                key = tuple(j for j in range(dim) if j != i)
                f = omega.comps[c][key].at(float(e))
                flux = _face_integral(f, box, i, box[i][1]) \
                    - _face_integral(f, box, i, box[i][0])
                rhs += (-1.0) ** i * flux
            rows.append((lhs, rhs))
    else:
        raise DomainError(f"unsupported domain {domain!r}")

    report_rows = []
    worst = 0.0
    for e, (lhs, rhs) in zip(grid, rows):
        resid = abs(lhs - rhs)
        # relative to the larger side, floored at one so a vanishing
        # flux does not divide roundoff by roundoff
        rel = resid / max(abs(lhs), abs(rhs), 1.0)
        worst = max(worst, rel)
        report_rows.append({"eps": float(e), "lhs": lhs, "rhs": rhs,
                            "residual": resid, "rel_residual": rel})
    return {"domain": list(domain), "ok": worst < tol, "tol": tol,
            "max_rel_residual": worst, "rows": report_rows}


# -- seeded coherent forms ---------------------------------------------------


def random_kform(manifold: Manifold, k: int, seed: int = 0) -> GeneralizedKForm:
    """Seeded coherent k-form from coherent scalar components.

    The builtin periodic manifolds have unit-Jacobian transitions, so
    shared chart expressions satisfy the pullback law for every degree.
    """
    atlas = manifold.atlas
    keys = index_tuples(atlas.dim, int(k))
    fns = random_coherent_functions(manifold, count=max(1, len(keys)), seed=seed)
    comps = {c: {K: fns[t].nets[c] for t, K in enumerate(keys)}
             for c in atlas.charts}
    return GeneralizedKForm(manifold, int(k), comps, label=f"seeded {k}-form")


def coherence_check_form(omega: GeneralizedKForm, **kwargs) -> dict:
    """Overlap residual classification via the antisymmetric tensor view."""
    return coherence_check_tensor(omega.to_tensor(), **kwargs)
