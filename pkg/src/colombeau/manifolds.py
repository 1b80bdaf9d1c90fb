"""Built-in manifolds: Euclidean spaces, the circle, the 2-torus.

Circle points are angles in [0, 2pi).  Chart "A" uses the angle wrapped
to (-pi, pi); chart "B" uses the raw angle on (0, 2pi).  On the two
overlap components the transition is the identity or a shift by 2pi, so
Jacobians are identically one.  The torus is the product construction
with four charts named "AA", "AB", "BA", "BB".

Partition-of-unity members and the tapered coordinate surrogates are
built from 2pi-periodic expressions in cos(theta), which makes one
formula valid in every chart.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import sympy as sp

from .manifold import Atlas, Chart, PartitionOfUnity, Transition
from .smooth import SmoothFn, coordinate, from_sympy, smoothstep_expr

TWO_PI = 2.0 * math.pi

# angular knots for the circle bumps (plateau edge, support edge)
CHI_FLAT, CHI_SUPP = 1.9, 2.9
ZETA_A_SUPP = 3.04
ZETA_B_FLAT = 1.76
TAPER_A_FLAT, TAPER_A_SUPP = 2.6, 2.97
TAPER_B_FLAT, TAPER_B_SUPP = 0.7, 1.1  # measured from theta = pi


def wrap_pi(t):
    return np.mod(np.asarray(t, dtype=float) + math.pi, TWO_PI) - math.pi


def wrap_2pi(t):
    return np.mod(np.asarray(t, dtype=float), TWO_PI)


@dataclass
class CoordinateSurrogate:
    """A global smooth function equal to one coordinate on a core region.

    ``exprs`` holds the chart representations; ``core_mask`` marks the
    coordinate-space region of each chart where the surrogate equals the
    plain coordinate function exactly.
    """

    axis: int
    exprs: dict
    core_mask: dict


@dataclass
class Manifold:
    """Bundle of atlas, partition of unity, and coordinate surrogates."""

    name: str
    atlas: Atlas
    pou: PartitionOfUnity
    surrogates: list = field(default_factory=list)
    spec: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.atlas.dim


# -- Euclidean ---------------------------------------------------------


def euclidean(dim: int, box_halfwidth: float = 3.0) -> Manifold:
    dim = int(dim)
    box = tuple((-box_halfwidth, box_halfwidth) for _ in range(dim))
    chart = Chart(
        name="0", dim=dim,
        contains=lambda p: True,
        to_coords=lambda p: np.atleast_1d(np.asarray(p, dtype=float)),
        from_coords=lambda x: np.atleast_1d(np.asarray(x, dtype=float)),
        sample_box=box,
    )
    atlas = Atlas(
        f"euclidean{dim}", dim, {"0": chart}, {}, {},
        point_dist=lambda p, q: float(np.linalg.norm(
            np.atleast_1d(p) - np.atleast_1d(q))),
    )
    one = sp.Integer(1)
    syms = sp.symbols(f"x0:{dim}") if dim > 1 else (sp.Symbol("x0"),)
    chi = {"0": from_sympy(one, syms)}
    zeta = {"0": from_sympy(one, syms)}
    pou = PartitionOfUnity(atlas, chi, zeta, {"0": box})
    surrogates = [
        CoordinateSurrogate(
            axis=i,
            exprs={"0": coordinate(i, dim)},
            core_mask={"0": lambda pts: np.ones(len(pts), dtype=bool)},
        )
        for i in range(dim)
    ]
    return Manifold(atlas.name, atlas, pou, surrogates,
                    {"name": "euclidean", "dim": dim})


# -- circle ------------------------------------------------------------


def _circle_charts():
    eps_dom = 1e-7
    chart_a = Chart(
        name="A", dim=1,
        contains=lambda p: bool(abs(wrap_pi(p)) < math.pi - eps_dom),
        to_coords=lambda p: np.atleast_1d(wrap_pi(p)),
        from_coords=lambda x: float(wrap_2pi(np.asarray(x).reshape(-1)[0])),
        sample_box=((-2.95, 2.95),),
    )
    chart_b = Chart(
        name="B", dim=1,
        contains=lambda p: bool(eps_dom < wrap_2pi(p) < TWO_PI - eps_dom),
        to_coords=lambda p: np.atleast_1d(wrap_2pi(p)),
        from_coords=lambda x: float(wrap_2pi(np.asarray(x).reshape(-1)[0])),
        sample_box=((0.2, TWO_PI - 0.2),),
    )
    return chart_a, chart_b


def circle() -> Manifold:
    chart_a, chart_b = _circle_charts()

    def a_to_b(x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, x, x + TWO_PI)

    def b_to_a(y):
        y = np.asarray(y, dtype=float)
        return np.where(y < math.pi, y, y - TWO_PI)

    eye1 = lambda x: np.broadcast_to(np.eye(1), (len(x), 1, 1)).copy()
    transitions = {
        ("A", "B"): Transition(a_to_b, eye1, affine_pieces=[
            (lambda pts: pts[:, 0] > 0, 1.0, 0.0),
            (lambda pts: pts[:, 0] <= 0, 1.0, TWO_PI),
        ]),
        ("B", "A"): Transition(b_to_a, eye1, affine_pieces=[
            (lambda pts: pts[:, 0] < math.pi, 1.0, 0.0),
            (lambda pts: pts[:, 0] >= math.pi, 1.0, -TWO_PI),
        ]),
    }
    overlap = {
        ("A", "B"): [((0.15, math.pi - 0.15),), ((-math.pi + 0.15, -0.15),)],
        ("B", "A"): [((0.15, math.pi - 0.15),), ((math.pi + 0.15, TWO_PI - 0.15),)],
    }

    def dist(p, q):
        return float(abs(wrap_pi(np.asarray(p) - np.asarray(q))))

    atlas = Atlas("circle", 1, {"A": chart_a, "B": chart_b}, transitions,
                  overlap, dist)

    th = sp.Symbol("theta")
    chi_a_expr = smoothstep_expr(
        (sp.cos(th) - math.cos(CHI_SUPP)) / (math.cos(CHI_FLAT) - math.cos(CHI_SUPP)))
    zeta_a_expr = smoothstep_expr(
        (sp.cos(th) - math.cos(ZETA_A_SUPP)) / (math.cos(CHI_SUPP) - math.cos(ZETA_A_SUPP)))
    zeta_b_expr = smoothstep_expr(
        (math.cos(ZETA_B_FLAT) - sp.cos(th)) / (math.cos(ZETA_B_FLAT) - math.cos(CHI_FLAT)))
    chi = {
        "A": from_sympy(chi_a_expr, [th], label="chi_A"),
        "B": from_sympy(1 - chi_a_expr, [th], label="chi_B"),
    }
    zeta = {
        "A": from_sympy(zeta_a_expr, [th], label="zeta_A"),
        "B": from_sympy(zeta_b_expr, [th], label="zeta_B"),
    }
    supp = {
        "A": ((-CHI_SUPP, CHI_SUPP),),
        "B": ((CHI_FLAT, TWO_PI - CHI_FLAT),),
    }
    pou = PartitionOfUnity(atlas, chi, zeta, supp)

    surrogates = _circle_surrogates(th)
    return Manifold("circle", atlas, pou, surrogates, {"name": "circle"})


def _circle_surrogates(th):
    # taper_a: 1 for |theta| <= 2.6, 0 beyond 2.97 (periodic in cos)
    taper_a = smoothstep_expr(
        (sp.cos(th) - math.cos(TAPER_A_SUPP))
        / (math.cos(TAPER_A_FLAT) - math.cos(TAPER_A_SUPP)))
    # taper_b: 1 for |theta - pi| <= 0.7, 0 beyond 1.1
    taper_b = smoothstep_expr(
        (-sp.cos(th) - math.cos(TAPER_B_SUPP))
        / (math.cos(TAPER_B_FLAT) - math.cos(TAPER_B_SUPP)))
    # the A-angle as a periodic sawtooth, valid inside supp(taper_a)
    wrap_a = sp.Piecewise((th, th < sp.pi), (th - 2 * sp.pi, True))
    # the B-angle sawtooth, valid inside supp(taper_b)
    wrap_b = sp.Piecewise((th, th > 0), (th + 2 * sp.pi, True))

    w_a = CoordinateSurrogate(
        axis=0,
        exprs={
            "A": from_sympy(th * taper_a, [th], label="W_A|A"),
            "B": from_sympy(wrap_a * taper_a, [th], label="W_A|B"),
        },
        core_mask={
            "A": lambda pts: np.abs(pts[:, 0]) <= TAPER_A_FLAT,
            "B": lambda pts: (pts[:, 0] <= TAPER_A_FLAT)
            | (pts[:, 0] >= TWO_PI - TAPER_A_FLAT),
        },
    )
    w_b = CoordinateSurrogate(
        axis=0,
        exprs={
            "A": from_sympy(wrap_b * taper_b, [th], label="W_B|A"),
            "B": from_sympy(th * taper_b, [th], label="W_B|B"),
        },
        core_mask={
            "A": lambda pts: np.abs(np.abs(pts[:, 0]) - math.pi) <= TAPER_B_FLAT,
            "B": lambda pts: np.abs(pts[:, 0] - math.pi) <= TAPER_B_FLAT,
        },
    )
    return [w_a, w_b]


# -- torus -------------------------------------------------------------


def torus2() -> Manifold:
    circ = circle()
    ca, cb = circ.atlas.charts["A"], circ.atlas.charts["B"]
    factor = {"A": ca, "B": cb}

    charts = {}
    for n1 in "AB":
        for n2 in "AB":
            name = n1 + n2
            c1, c2 = factor[n1], factor[n2]
            charts[name] = Chart(
                name=name, dim=2,
                contains=(lambda c1, c2: lambda p: c1.contains(p[0]) and c2.contains(p[1]))(c1, c2),
                to_coords=(lambda c1, c2: lambda p: np.array(
                    [c1.to_coords(p[0])[0], c2.to_coords(p[1])[0]]))(c1, c2),
                from_coords=lambda x: np.array([wrap_2pi(x[0]), wrap_2pi(x[1])]),
                sample_box=(c1.sample_box[0], c2.sample_box[0]),
            )

    def component_map(src: str, dst: str, col):
        if src == dst:
            return lambda v: v
        if (src, dst) == ("A", "B"):
            return lambda v: np.where(v > 0, v, v + TWO_PI)
        return lambda v: np.where(v < math.pi, v, v - TWO_PI)

    def component_pieces(src: str, dst: str):
        # (scalar mask, shift) pairs covering the overlap in src coords
        if src == dst:
            return [(lambda v: np.ones_like(v, dtype=bool), 0.0)]
        if (src, dst) == ("A", "B"):
            return [(lambda v: v > 0, 0.0), (lambda v: v <= 0, TWO_PI)]
        return [(lambda v: v < math.pi, 0.0), (lambda v: v >= math.pi, -TWO_PI)]

    transitions = {}
    overlap = {}
    comp_overlap = {
        ("A", "B"): [(0.15, math.pi - 0.15), (-math.pi + 0.15, -0.15)],
        ("B", "A"): [(0.15, math.pi - 0.15), (math.pi + 0.15, TWO_PI - 0.15)],
        ("A", "A"): [(-2.9, 2.9)],
        ("B", "B"): [(0.25, TWO_PI - 0.25)],
    }
    names = sorted(charts)
    eye2 = lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy()
    for a in names:
        for b in names:
            if a == b:
                continue
            m1 = component_map(a[0], b[0], 0)
            m2 = component_map(a[1], b[1], 1)

            def fn(x, m1=m1, m2=m2):
                x = np.asarray(x, dtype=float)
                return np.stack([m1(x[:, 0]), m2(x[:, 1])], axis=1)

            pieces = []
            for p1, s1 in component_pieces(a[0], b[0]):
                for p2, s2 in component_pieces(a[1], b[1]):
                    mask = (lambda p1, p2: lambda pts: p1(pts[:, 0]) & p2(pts[:, 1]))(p1, p2)
                    pieces.append((mask, (1.0, 1.0), (s1, s2)))
            transitions[(a, b)] = Transition(fn, eye2, affine_pieces=pieces)
            boxes = []
            for i1 in comp_overlap[(a[0], b[0])]:
                for i2 in comp_overlap[(a[1], b[1])]:
                    boxes.append((i1, i2))
            overlap[(a, b)] = boxes

    def dist(p, q):
        d = wrap_pi(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
        return float(np.linalg.norm(d))

    atlas = Atlas("torus2", 2, charts, transitions, overlap, dist)

    t1, t2 = sp.symbols("t1 t2")
    th = sp.Symbol("theta")
    chi_a = smoothstep_expr(
        (sp.cos(th) - math.cos(CHI_SUPP)) / (math.cos(CHI_FLAT) - math.cos(CHI_SUPP)))
    zeta_a = smoothstep_expr(
        (sp.cos(th) - math.cos(ZETA_A_SUPP)) / (math.cos(CHI_SUPP) - math.cos(ZETA_A_SUPP)))
    zeta_b = smoothstep_expr(
        (math.cos(ZETA_B_FLAT) - sp.cos(th)) / (math.cos(ZETA_B_FLAT) - math.cos(CHI_FLAT)))
    comp_chi = {"A": chi_a, "B": 1 - chi_a}
    comp_zeta = {"A": zeta_a, "B": zeta_b}
    comp_supp = {"A": (-CHI_SUPP, CHI_SUPP), "B": (CHI_FLAT, TWO_PI - CHI_FLAT)}

    chi, zeta, supp = {}, {}, {}
    for name in names:
        e1 = comp_chi[name[0]].subs(th, t1)
        e2 = comp_chi[name[1]].subs(th, t2)
        chi[name] = from_sympy(e1 * e2, [t1, t2], label=f"chi_{name}")
        z1 = comp_zeta[name[0]].subs(th, t1)
        z2 = comp_zeta[name[1]].subs(th, t2)
        zeta[name] = from_sympy(z1 * z2, [t1, t2], label=f"zeta_{name}")
        supp[name] = (comp_supp[name[0]], comp_supp[name[1]])
    pou = PartitionOfUnity(atlas, chi, zeta, supp)

    surrogates = _torus_surrogates(names, t1, t2)
    return Manifold("torus2", atlas, pou, surrogates, {"name": "torus2"})


def _torus_surrogates(names, t1, t2):
    th = sp.Symbol("theta")
    taper_a = smoothstep_expr(
        (sp.cos(th) - math.cos(TAPER_A_SUPP))
        / (math.cos(TAPER_A_FLAT) - math.cos(TAPER_A_SUPP)))
    taper_b = smoothstep_expr(
        (-sp.cos(th) - math.cos(TAPER_B_SUPP))
        / (math.cos(TAPER_B_FLAT) - math.cos(TAPER_B_SUPP)))
    wrap_a = sp.Piecewise((th, th < sp.pi), (th - 2 * sp.pi, True))
    wrap_b = sp.Piecewise((th, th > 0), (th + 2 * sp.pi, True))
    # expression for surrogate of style X as seen from a chart whose
    # relevant factor has style Y
    w_expr = {
        ("A", "A"): th * taper_a,
        ("A", "B"): wrap_a * taper_a,
        ("B", "B"): th * taper_b,
        ("B", "A"): wrap_b * taper_b,
    }

    def mask_a(v):
        return np.abs(wrap_pi(v)) <= TAPER_A_FLAT

    def mask_b(v):
        return np.abs(wrap_2pi(v) - math.pi) <= TAPER_B_FLAT

    masks = {"A": mask_a, "B": mask_b}

    out = []
    for axis in (0, 1):
        sym = (t1, t2)[axis]
        for style in "AB":
            exprs, core = {}, {}
            for name in names:
                chart_style = name[axis]
                expr = w_expr[(style, chart_style)].subs(th, sym)
                exprs[name] = from_sympy(expr, [t1, t2],
                                         label=f"W{axis}_{style}|{name}")
                core[name] = (lambda m, ax: lambda pts: m(pts[:, ax]))(masks[style], axis)
            out.append(CoordinateSurrogate(axis=axis, exprs=exprs, core_mask=core))
    return out


# -- registry ----------------------------------------------------------


def builtin_manifolds() -> dict:
    """Fresh instances of every built-in manifold."""
    return {
        "euclidean1": euclidean(1),
        "euclidean2": euclidean(2),
        "euclidean3": euclidean(3),
        "circle": circle(),
        "torus2": torus2(),
    }


def load_manifold(entry) -> Manifold:
    """Build a manifold from a registry entry (dict or JSON string)."""
    if isinstance(entry, str):
        entry = json.loads(entry)
    name = entry["name"]
    if name == "euclidean":
        return euclidean(int(entry.get("dim", 1)),
                         float(entry.get("box_halfwidth", 3.0)))
    if name == "circle":
        return circle()
    if name == "torus2":
        return torus2()
    raise ValueError(f"unknown manifold {name!r}")


def registry_json() -> str:
    entries = [
        {"name": "euclidean", "dim": 1},
        {"name": "euclidean", "dim": 2},
        {"name": "euclidean", "dim": 3},
        {"name": "circle"},
        {"name": "torus2"},
    ]
    return json.dumps({"manifolds": entries}, indent=2, sort_keys=True)
