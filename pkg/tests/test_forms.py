"""Differential forms: antisymmetric storage, exterior calculus, the
radial homotopy, top-degree integration, and boundary-theorem reports."""

import numpy as np
import pytest
import sympy as sp

from colombeau import forms as F
from colombeau import tensor as T
from colombeau.embed import dirac, embed_rn, heaviside
from colombeau.errors import (AtlasMismatch, DegreeOverflow, DomainError,
                              InvalidDegree, InvalidSlots)
from colombeau.gfunc import GeneralizedFunction, sigma_embed
from colombeau.grid import dyadic_grid
from colombeau.manifold import Atlas, Chart
from colombeau.manifolds import circle, euclidean, torus2
from colombeau.mollifier import build_mollifier
from colombeau.nets import Net, box_lattice
from colombeau.smooth import constant, from_sympy

X0, X1, X2 = sp.symbols("x0 x1 x2")


@pytest.fixture(scope="module")
def fourier():
    return build_mollifier("fourier")


@pytest.fixture(scope="module")
def line():
    return euclidean(1)


@pytest.fixture(scope="module")
def plane():
    return euclidean(2)


@pytest.fixture(scope="module")
def space3():
    return euclidean(3)


@pytest.fixture(scope="module")
def t2():
    return torus2()


def smooth3(expr):
    return from_sympy(expr, [X0, X1, X2])


def values(net, eps, pts):
    return np.asarray(net.at(eps)._partial_fn((0,) * net.dim, pts))


def form_sup(omega, chart, eps, pts):
    worst = 0.0
    for K in omega.keys():
        worst = max(worst, float(np.max(np.abs(values(omega.comps[chart][K], eps, pts)))))
    return worst


def seeded_form(space, k, seed):
    fns = T.random_coherent_functions(space, count=12, seed=seed)
    keys = F.index_tuples(space.atlas.dim, k)
    comps = {c: {K: fns[t].nets[c] for t, K in enumerate(keys)}
             for c in space.atlas.charts}
    return F.GeneralizedKForm(space, k, comps)


def seeded_field(space, seed):
    return T.random_tensor_field(space, (1, 0), seed=seed)


# -- storage and algebra ------------------------------------------------------


def test_antisymmetric_storage(plane):
    w = F.GeneralizedKForm(plane, 2, {"0": {(0, 1): constant(2.0, 2)}})
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 5)
    plus = values(w.component("0", (0, 1)), 0.5, pts)
    minus = values(w.component("0", (1, 0)), 0.5, pts)
    assert np.array_equal(plus, -minus)
    assert np.all(values(w.component("0", (1, 1)), 0.5, pts) == 0.0)
    with pytest.raises(InvalidSlots):
        F.GeneralizedKForm(plane, 2, {"0": {(1, 0): constant(1.0, 2)}})
    with pytest.raises(InvalidDegree):
        F.GeneralizedKForm(plane, 0, {"0": {(): constant(1.0, 2)}})


def test_exterior_d_of_scalar(plane):
    U = sigma_embed(plane, {"0": from_sympy(X0 ** 2 * X1, [X0, X1])})
    dU = F.exterior_d(U)
    assert dU.degree == 1
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 9)
    assert np.allclose(values(dU.comps["0"][(0,)], 0.25, pts),
                       2 * pts[:, 0] * pts[:, 1], rtol=1e-14, atol=0)
    assert np.allclose(values(dU.comps["0"][(1,)], 0.25, pts),
                       pts[:, 0] ** 2, rtol=1e-14, atol=0)


def test_d_squared_vanishes(space3):
    A = seeded_form(space3, 1, seed=2)
    dd = F.exterior_d(F.exterior_d(A))
    assert dd.degree == 3
    pts = box_lattice(space3.atlas.charts["0"].sample_box, 5)
    for eps in (0.5, 2.0 ** -8, 2.0 ** -14):
        assert form_sup(dd, "0", eps, pts) < 1e-13


def test_wedge_overflow_and_anticommutativity(plane):
    A = seeded_form(plane, 1, seed=3)
    B = seeded_form(plane, 1, seed=4)
    with pytest.raises(DegreeOverflow):
        F.wedge(F.wedge(A, B), A)
    AB = F.wedge(A, B)
    BA = F.wedge(B, A)
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 9)
    left = values(AB.comps["0"][(0, 1)], 0.25, pts)
    right = values(BA.comps["0"][(0, 1)], 0.25, pts)
    assert np.allclose(left, -right, rtol=0, atol=1e-14 * (1 + np.max(np.abs(left))))


def test_graded_leibniz(space3):
    A = seeded_form(space3, 1, seed=5)
    B = seeded_form(space3, 1, seed=6)
    resid = F.exterior_d(F.wedge(A, B)) - F.wedge(F.exterior_d(A), B) \
        + F.wedge(A, F.exterior_d(B))
    pts = box_lattice(space3.atlas.charts["0"].sample_box, 5)
    for eps in (0.5, 2.0 ** -8, 2.0 ** -14):
        assert form_sup(resid, "0", eps, pts) < 1e-12


def test_insert_pairs_with_fields(plane):
    A = seeded_form(plane, 1, seed=7)
    Xi = seeded_field(plane, seed=8)
    paired = F.insert(A, Xi)
    assert isinstance(paired, GeneralizedFunction)
    want = (Xi.comps["0"][(0,)] * A.comps["0"][(0,)]
            + Xi.comps["0"][(1,)] * A.comps["0"][(1,)])
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 9)
    assert np.array_equal(values(paired.nets["0"], 0.25, pts),
                          values(want, 0.25, pts))
    with pytest.raises(InvalidDegree):
        F.insert(paired, Xi)


def test_insert_squares_to_zero(space3):
    w = seeded_form(space3, 2, seed=9)
    Xi = seeded_field(space3, seed=10)
    twice = F.insert(F.insert(w, Xi), Xi)
    assert isinstance(twice, GeneralizedFunction)
    pts = box_lattice(space3.atlas.charts["0"].sample_box, 5)
    for eps in (0.5, 2.0 ** -8, 2.0 ** -14):
        assert np.max(np.abs(values(twice.nets["0"], eps, pts))) < 1e-10


def test_cartan_formula(space3):
    w = seeded_form(space3, 2, seed=11)
    Xi = seeded_field(space3, seed=12)
    lhs = F.lie_derivative_form(w, Xi)
    rhs = F.exterior_d(F.insert(w, Xi)) + F.insert(F.exterior_d(w), Xi)
    resid = lhs - rhs
    pts = box_lattice(space3.atlas.charts["0"].sample_box, 5)
    for eps in (0.5, 2.0 ** -8, 2.0 ** -14):
        assert form_sup(resid, "0", eps, pts) < 1e-10


def test_cartan_top_degree(plane):
    # d omega is the empty 3-form on the plane; the identity reduces to
    # L = d(i_Xi omega)
    w = seeded_form(plane, 2, seed=13)
    Xi = seeded_field(plane, seed=14)
    dw = F.exterior_d(w)
    assert dw.keys() == []
    resid = F.lie_derivative_form(w, Xi) \
        - F.exterior_d(F.insert(w, Xi)) - F.insert(dw, Xi)
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 9)
    for eps in (0.5, 2.0 ** -10):
        assert form_sup(resid, "0", eps, pts) < 1e-12


def test_form_lie_matches_tensor_lie(plane):
    w = seeded_form(plane, 2, seed=15)
    Xi = seeded_field(plane, seed=16)
    via_form = F.lie_derivative_form(w, Xi)
    via_tensor = T.gen_lie_derivative(w.to_tensor(), Xi)
    pts = box_lattice(plane.atlas.charts["0"].sample_box, 9)
    a = values(via_form.comps["0"][(0, 1)], 0.125, pts)
    b = values(via_tensor.comps["0"][(0, 1)], 0.125, pts)
    assert np.allclose(a, b, rtol=0, atol=1e-13 * (1 + np.max(np.abs(a))))


# -- homotopy -----------------------------------------------------------------


def test_poincare_identity_all_degrees(space3):
    grid = dyadic_grid(4, 9)
    for k, seed in ((1, 21), (2, 22), (3, 23)):
        rep = F.poincare_check(seeded_form(space3, k, seed), grid=grid,
                               n_samples=5)
        assert rep["ok"], rep["max_residual"]
        assert rep["max_residual"] < 1e-7


def test_homotopy_domain_guard(t2, line):
    w = F.random_kform(t2, 1, seed=1)
    with pytest.raises(DomainError):
        F.homotopy_H(w)
    chart = Chart(name="0", dim=1, contains=lambda p: True,
                  to_coords=lambda p: np.atleast_1d(np.asarray(p, dtype=float)),
                  from_coords=lambda x: np.atleast_1d(np.asarray(x, dtype=float)),
                  sample_box=((1.0, 2.0),))
    off = Atlas("offset-line", 1, {"0": chart}, {}, {},
                point_dist=lambda p, q: abs(float(np.ravel(p)[0]) - float(np.ravel(q)[0])))
    shifted = F.GeneralizedKForm(off, 1, {"0": {(0,): constant(1.0, 1)}})
    with pytest.raises(DomainError):
        F.homotopy_H(shifted)


def test_homotopy_preserves_decay(line):
    from colombeau.asymptotic import estimate_order
    f = from_sympy(1 + X0 ** 2, [X0])
    w = F.GeneralizedKForm(line, 1, {"0": {(0,): Net(1, lambda e: f * e ** 7)}})
    Hw = F.homotopy_H(w)
    grid = dyadic_grid(4, 11)
    pts = box_lattice(line.atlas.charts["0"].sample_box, 41)
    fits = []
    for net in (w.comps["0"][(0,)], Hw.nets["0"]):
        samples = [(float(e), float(np.max(np.abs(values(net, e, pts)))))
                   for e in grid]
        fits.append(estimate_order(samples).slope)
    assert abs(fits[0] - fits[1]) < 0.25


# -- integration and Stokes ---------------------------------------------------


def test_integrate_nform(line, plane, fourier):
    w = F.GeneralizedKForm(line, 1, {"0": {(0,): from_sympy(X0, [X0])}})
    gi = F.integrate_nform(w, box=((0.0, 1.0),), grid=dyadic_grid(4, 8))
    assert np.allclose(gi.values, 0.5, rtol=0, atol=1e-13)
    spike = F.GeneralizedKForm(line, 1, {"0": {(0,): embed_rn(dirac(), fourier)}})
    gs = F.integrate_nform(spike, grid=dyadic_grid(4, 11))
    assert abs(gs.values[-1] - 1.0) < 1e-10
    with pytest.raises(DomainError):
        F.integrate_nform(F.GeneralizedKForm(plane, 1, {
            "0": [constant(1.0, 2), constant(0.0, 2)]}))


def test_stokes_interval_with_jump(line, fourier):
    H = GeneralizedFunction(line.atlas, {"0": embed_rn(heaviside(), fourier)})
    rep = F.stokes_check(H, ("interval", (-1.0, 1.0)), grid=dyadic_grid(4, 11))
    assert rep["ok"]
    assert rep["max_rel_residual"] < 1e-6
    assert {"eps", "lhs", "rhs", "residual"} <= set(rep["rows"][0])
    with pytest.raises(DomainError):
        F.stokes_check(H, ("interval", (1.0, -1.0)))


def test_stokes_disk(plane):
    xy = [X0, X1]
    w = F.GeneralizedKForm(plane, 1, {"0": {
        (0,): from_sympy(-X1 + X0 ** 2 * X1, xy),
        (1,): from_sympy(X0 * X1 ** 2 + X0, xy)}})
    rep = F.stokes_check(w, ("disk", 1.0), grid=dyadic_grid(4, 8))
    assert rep["ok"] and rep["max_rel_residual"] < 1e-9
    assert abs(rep["rows"][0]["lhs"] - 2.0 * np.pi) < 1e-9
    with pytest.raises(DomainError):
        F.stokes_check(w, ("disk", -1.0))
    with pytest.raises(DomainError):
        F.stokes_check(w, ("interval", (0.0, 1.0)))


def test_stokes_box_r3(space3):
    xyz = [X0, X1, X2]
    w = F.GeneralizedKForm(space3, 2, {"0": {
        (0, 1): from_sympy(X0 * X1 * X2, xyz),
        (0, 2): from_sympy(X1 ** 2 - X0, xyz),
        (1, 2): from_sympy(X2 + X0 ** 3 + 2 * X0, xyz)}})
    box = ((-1.0, 1.0), (-0.5, 1.5), (0.0, 2.0))
    rep = F.stokes_check(w, ("box", box), grid=dyadic_grid(4, 8))
    assert rep["ok"] and rep["max_rel_residual"] < 1e-9
    assert abs(rep["rows"][0]["lhs"] - 16.0) < 1e-10
    with pytest.raises(DomainError):
        F.stokes_check(w, ("triangle", box))


# -- coherence on overlaps ----------------------------------------------------


def test_seeded_forms_coherent_on_torus(t2):
    grid = dyadic_grid(4, 9)
    A = F.random_kform(t2, 1, seed=31)
    B = F.random_kform(t2, 1, seed=32)
    for out in (A, F.exterior_d(A), F.wedge(A, B)):
        rep = F.coherence_check_form(out, grid=grid, n_samples=9)
        assert rep["coherent"]


def test_circle_top_degree_d_is_empty(t2):
    s1 = circle()
    A = F.random_kform(s1, 1, seed=33)
    dA = F.exterior_d(A)
    assert dA.degree == 2 and dA.keys() == []
    with pytest.raises(DegreeOverflow):
        F.wedge(A, A)


def test_form_json(plane):
    w = seeded_form(plane, 1, seed=40)
    doc = w.to_json(grid=dyadic_grid(4, 7), n_samples=3)
    assert doc["degree"] == 1
    rows = doc["charts"]["0"]["rows"]
    assert len(rows) == 8 and all(len(r["values"]) == 9 for r in rows)
