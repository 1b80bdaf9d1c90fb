"""Symplectic algebra, strict delta nets, and the reflected oscillator."""

import numpy as np
import pytest
import sympy as sp

from colombeau.asymptotic import estimate_order
from colombeau.errors import (DimensionMismatch, InvalidSlots, NoImpact,
                              StiffnessFailure)
from colombeau.forms import exterior_d, insert
from colombeau.gfunc import GeneralizedFunction, sigma_embed
from colombeau.grid import dyadic_grid
from colombeau.manifolds import euclidean
from colombeau.mechanics import (HamiltonianSystem, StrictDeltaNet,
                                 SymplecticForm, bump_profile, flat,
                                 hamiltonian_vf, poisson,
                                 reflection_limit_check, sharp,
                                 solve_singular_oscillator)
from colombeau.nets import Net, box_lattice
from colombeau.smooth import constant, coordinate, from_sympy
from colombeau.tensor import bracket, field_apply, smooth_vector_field

X0, X1 = sp.symbols("x0 x1")

# normalized bump at the origin, frozen from a 60-digit quadrature
BUMP_PEAK = 0.8285688398691052


@pytest.fixture(scope="module")
def phase():
    return euclidean(2)


@pytest.fixture(scope="module")
def sf():
    return SymplecticForm(1)


def phase_gf(phase, expr, pert=None):
    """Generalized function on the (q, p) plane, optionally eps-dependent."""
    base = from_sympy(expr, (X0, X1))
    if pert is None:
        return sigma_embed(phase, {"0": base})
    p = from_sympy(pert, (X0, X1))
    return GeneralizedFunction(
        phase, {"0": Net(2, lambda e, b=base, q=p: b + q * float(e))})


def comp_vals(T, idx, eps, pts):
    return T.comps["0"][idx].at(eps)(pts)


GRID = dyadic_grid(4, 9)
PTS = box_lattice(((-3.0, 3.0), (-3.0, 3.0)), 7)


# -- strict delta nets ----------------------------------------------------


def test_bump_profile_values():
    rho = bump_profile()
    assert abs(float(rho(0.0)) - BUMP_PEAK) < 1e-12
    xs = np.array([-1.5, -1.0, -0.995, 0.995, 1.0, 1.5])
    assert np.all(rho(xs) == 0.0)
    # even profile, odd derivative
    pair = rho(np.array([0.3, -0.3]))
    assert abs(pair[0] - pair[1]) < 1e-15
    d = rho.partial((1,), np.array([[0.3], [-0.3]]))
    assert abs(d[0] + d[1]) < 1e-12


def test_delta_certificates():
    delta = StrictDeltaNet()
    rep = delta.certify(GRID)
    assert rep["ok"] and rep["mass_ok"] and rep["scaling_exact"]
    assert rep["l1_bound"] < 1.0 + 1e-9
    for row, eps in zip(rep["rows"], GRID):
        assert row["support_radius"] == eps
        assert row["mass_err"] < 1e-10


def test_delta_generator_must_be_univariate():
    with pytest.raises(DimensionMismatch):
        StrictDeltaNet(generator=constant(1.0, 2))


# -- musical isomorphisms -------------------------------------------------


def test_symplectic_matrix_pair():
    for n in (1, 3):
        sf_n = SymplecticForm(n)
        m, inv = sf_n.matrix, sf_n.inverse_matrix
        assert np.array_equal(m @ inv, np.eye(2 * n))
        assert np.array_equal(m.T, -m)
    with pytest.raises(DimensionMismatch):
        SymplecticForm(0)


def test_canonical_form_closed():
    space = euclidean(4)
    om = SymplecticForm(2).as_form(space)
    dom = exterior_d(om)
    pts = box_lattice(tuple((-2.0, 2.0) for _ in range(4)), 3)
    for key in dom.keys():
        assert np.all(dom.component("0", key).at(0.25)(pts) == 0.0)


def test_flat_sign_convention(phase, sf):
    # flat(d/dq) = +dp and sharp(dq) = -d/dp under omega = dq ^ dp
    dq_dir = smooth_vector_field(phase, {"0": [constant(1.0, 2), constant(0.0, 2)]})
    alpha = flat(dq_dir, sf)
    assert np.all(comp_vals(alpha, (0,), 0.5, PTS) == 0.0)
    assert np.all(comp_vals(alpha, (1,), 0.5, PTS) == 1.0)
    q_fn = sigma_embed(phase, {"0": coordinate(0, 2)})
    up = sharp(exterior_d(q_fn), sf)
    assert np.all(comp_vals(up, (0,), 0.5, PTS) == 0.0)
    assert np.all(comp_vals(up, (1,), 0.5, PTS) == -1.0)


def test_sharp_inverts_flat_bitwise(phase, sf):
    Xi = smooth_vector_field(
        phase, {"0": [from_sympy(X1 + X0**2, (X0, X1)),
                      from_sympy(sp.sin(X0) * X1, (X0, X1))]})
    rt = sharp(flat(Xi, sf), sf)
    for e in GRID:
        for i in range(2):
            assert np.array_equal(comp_vals(rt, (i,), e, PTS),
                                  comp_vals(Xi, (i,), e, PTS))


def test_flat_equals_interior_product(phase, sf):
    Xi = smooth_vector_field(
        phase, {"0": [from_sympy(X0 * X1, (X0, X1)),
                      from_sympy(X1**2 - X0, (X0, X1))]})
    alpha = flat(Xi, sf)
    beta = insert(sf.as_form(phase), Xi)
    for e in (GRID[0], GRID[-1]):
        for i in range(2):
            assert np.array_equal(comp_vals(alpha, (i,), e, PTS),
                                  comp_vals(beta, (i,), e, PTS))


def test_flat_pairing_limit(phase, sf):
    # eps-perturbed field: the lowered pairing converges to the classical one
    Xi_nets = {"0": np.array(
        [Net(2, lambda e: from_sympy(X1, (X0, X1)) * (1.0 + e)),
         Net(2, lambda e: from_sympy(-X0, (X0, X1)))], dtype=object)}
    from colombeau.tensor import _make
    Xi = _make(phase, (1, 0), Xi_nets)
    V = smooth_vector_field(phase, {"0": [constant(1.0, 2), constant(2.0, 2)]})
    pairing = flat(Xi, sf)(V)
    target = from_sympy(X0 + 2 * X1, (X0, X1))
    samples = [(e, float(np.max(np.abs(pairing.nets["0"].at(e)(PTS) - target(PTS)))))
               for e in GRID]
    fit = estimate_order(samples)
    assert fit.slope > 0.75


def test_dimension_guards(phase, sf):
    Xi = smooth_vector_field(phase, {"0": [constant(1.0, 2), constant(0.0, 2)]})
    with pytest.raises(DimensionMismatch):
        flat(Xi, SymplecticForm(2))
    with pytest.raises(DimensionMismatch):
        SymplecticForm(2).as_form(phase)
    with pytest.raises(InvalidSlots):
        sharp(Xi, sf)  # a vector field is not a one-form


# -- Hamiltonian fields and Poisson brackets ------------------------------


def test_hamiltonian_field_oscillator(phase, sf):
    H = phase_gf(phase, (X0**2 + X1**2) / 2)
    Xi = hamiltonian_vf(H, sf)
    assert np.array_equal(comp_vals(Xi, (0,), 0.5, PTS), PTS[:, 1])
    assert np.array_equal(comp_vals(Xi, (1,), 0.5, PTS), -PTS[:, 0])


def test_hamiltonian_field_constant(phase, sf):
    Xi = hamiltonian_vf(phase_gf(phase, sp.Integer(7) / 2), sf)
    for i in range(2):
        assert np.all(comp_vals(Xi, (i,), 0.25, PTS) == 0.0)


def test_hamiltonian_field_barrier_components(sf):
    sys = HamiltonianSystem(StrictDeltaNet())
    Xi = sys.vector_field()
    eps = float(GRID[2])
    qs = np.linspace(-2.0, 2.0, 41)
    pts = np.column_stack([qs, np.linspace(-1.0, 1.0, 41)])
    assert np.array_equal(Xi.comps["0"][(0,)].at(eps)(pts), pts[:, 1])
    dref = sys.delta.at(eps)._partial_fn((1,), qs[:, None])
    assert np.array_equal(Xi.comps["0"][(1,)].at(eps)(pts), -dref)


def test_poisson_canonical_pair(phase, sf):
    q_fn = sigma_embed(phase, {"0": coordinate(0, 2)})
    p_fn = sigma_embed(phase, {"0": coordinate(1, 2)})
    qp = poisson(q_fn, p_fn, sf)
    assert np.all(qp.nets["0"].at(0.5)(PTS) == 1.0)


def test_poisson_antisymmetry_bitwise(phase, sf):
    F = phase_gf(phase, X0**2 * X1 + sp.sin(X0), pert=X0 * X1)
    G = phase_gf(phase, X1**3 / 3 + sp.cos(X0) * X1, pert=X1**2 / 2)
    zero_ff = poisson(F, F, sf)
    anti = poisson(F, G, sf) + poisson(G, F, sf)
    for e in GRID:
        assert np.all(zero_ff.nets["0"].at(e)(PTS) == 0.0)
        assert np.all(anti.nets["0"].at(e)(PTS) == 0.0)


def test_poisson_lie_derivative_routes_bitwise(phase, sf):
    F = phase_gf(phase, X0**2 * X1 + sp.sin(X0), pert=X0 * X1)
    G = phase_gf(phase, X1**3 / 3 + sp.cos(X0) * X1, pert=X1**2 / 2)
    FG = poisson(F, G, sf)
    lg = field_apply(hamiltonian_vf(G, sf), F)
    nlf = -field_apply(hamiltonian_vf(F, sf), G)
    for e in GRID:
        ref = FG.nets["0"].at(e)(PTS)
        assert np.array_equal(ref, lg.nets["0"].at(e)(PTS))
        assert np.array_equal(ref, nlf.nets["0"].at(e)(PTS))


def test_poisson_bilinearity(phase, sf):
    F = phase_gf(phase, X0**2 * X1, pert=X0 * X1)
    G = phase_gf(phase, sp.cos(X0) * X1, pert=X1**2 / 2)
    H = phase_gf(phase, X0 * X1 + X0**3 / 6, pert=X0)
    lhs = poisson(2.0 * F + 3.0 * G, H, sf)
    rhs = 2.0 * poisson(F, H, sf) + 3.0 * poisson(G, H, sf)
    for e in GRID:
        gap = np.max(np.abs(lhs.nets["0"].at(e)(PTS) - rhs.nets["0"].at(e)(PTS)))
        assert gap < 1e-12


def test_poisson_jacobi(phase, sf):
    F = phase_gf(phase, X0**2 * X1 + sp.sin(X0), pert=X0 * X1)
    G = phase_gf(phase, X1**3 / 3 + sp.cos(X0) * X1, pert=X1**2 / 2)
    H = phase_gf(phase, X0 * X1 + X0**3 / 6, pert=X0)
    J = (poisson(F, poisson(G, H, sf), sf)
         + poisson(G, poisson(H, F, sf), sf)
         + poisson(H, poisson(F, G, sf), sf))
    worst = max(float(np.max(np.abs(J.nets["0"].at(e)(PTS)))) for e in GRID)
    assert worst < 1e-8


def test_hamiltonian_field_of_bracket(phase, sf):
    # Xi_{F,G} = -[Xi_F, Xi_G]; reassociation leaves a few ulp at scale ~160
    F = phase_gf(phase, X0**2 * X1 + sp.sin(X0), pert=X0 * X1)
    G = phase_gf(phase, X1**3 / 3 + sp.cos(X0) * X1, pert=X1**2 / 2)
    lhs = hamiltonian_vf(poisson(F, G, sf), sf)
    rhs = bracket(hamiltonian_vf(F, sf), hamiltonian_vf(G, sf))
    for e in GRID[:4]:
        for i in range(2):
            gap = np.max(np.abs(comp_vals(lhs, (i,), e, PTS)
                                + comp_vals(rhs, (i,), e, PTS)))
            assert gap < 1e-12


def test_hamiltonian_is_moderate():
    sys = HamiltonianSystem(StrictDeltaNet())
    H = sys.hamiltonian()
    pts = box_lattice(((-3.0, 3.0), (-3.0, 3.0)), 41)
    samples = [(e, float(np.max(np.abs(H.nets["0"].at(e)(pts))))) for e in GRID]
    fit = estimate_order(samples)
    assert fit.verdict == "moderate"
    assert abs(fit.slope + 1.0) < 0.1


# -- the singular oscillator ----------------------------------------------


def test_free_particle_linear():
    sys = HamiltonianSystem(None, 1.0, -1.0)
    tr = solve_singular_oscillator(sys, (0.0, 2.0), [0.05], n_samples=201)[0]
    assert tr.n_segments == 1
    assert float(np.max(np.abs(tr.q - (1.0 - tr.t)))) < 1e-12
    assert tr.energy_drift < 1e-13


def test_smooth_oscillator_closed_form():
    y = sp.Symbol("y")
    sys = HamiltonianSystem(None, 1.0, -1.0, potential=from_sympy(y**2 / 2, (y,)))
    tr = solve_singular_oscillator(sys, (0.0, 2.0), [0.05], n_samples=401)[0]
    ref = np.cos(tr.t) - np.sin(tr.t)
    assert float(np.max(np.abs(tr.q - ref))) < 1e-9
    assert tr.energy_drift < 100.0 * tr.ode_tol


def test_barrier_reflection():
    sys = HamiltonianSystem(StrictDeltaNet(), 1.0, -1.0)
    tr = solve_singular_oscillator(sys, (0.0, 2.0), [0.05], n_samples=801)[0]
    assert tr.n_segments == 3           # coast in, climb the barrier, coast out
    assert 0.0 < float(np.min(tr.q)) < 0.05
    assert abs(tr.p[-1] - 1.0) < 1e-6   # reflected: speed restored, sign flipped
    assert tr.energy_drift < 100.0 * tr.ode_tol
    assert np.array_equal(tr.energy, sys.energy_values(tr.eps, tr.q, tr.p))
    assert set(tr.summary()) == {"eps", "energy_drift", "ode_tol", "n_steps",
                                 "nfev", "n_segments"}


def test_start_inside_barrier():
    sys = HamiltonianSystem(StrictDeltaNet(), 0.0, 1.5)
    tr = solve_singular_oscillator(sys, (0.0, 2.0), [0.05], n_samples=401)[0]
    assert tr.n_segments == 2
    assert tr.q[-1] > 1.0               # launched off the barrier
    assert tr.energy_drift < 100.0 * tr.ode_tol


def test_reflection_limit_sweep():
    sys = HamiltonianSystem(StrictDeltaNet(), 1.0, -1.0)
    trs = solve_singular_oscillator(sys, (0.0, 2.0), [1e-1, 3e-2, 1e-2],
                                    n_samples=801)
    rep = reflection_limit_check(trs, 1.0, -1.0, eta=0.1)
    assert rep["t_star"] == 1.0
    assert rep["decreasing"]
    devs = [r["sup_deviation"] for r in rep["rows"]]
    assert devs[0] < 0.25 and devs[-1] < 0.05
    eps_order = [r["eps"] for r in rep["rows"]]
    assert eps_order == sorted(eps_order, reverse=True)


def test_no_impact():
    still = HamiltonianSystem(None, 1.0, 0.0)
    trs = solve_singular_oscillator(still, (0.0, 2.0), [0.05], n_samples=51)
    with pytest.raises(NoImpact):
        reflection_limit_check(trs, 1.0, 0.0)
    moving = HamiltonianSystem(StrictDeltaNet(), 1.0, -1.0)
    short = solve_singular_oscillator(moving, (0.0, 0.5), [0.05], n_samples=51)
    with pytest.raises(NoImpact):
        reflection_limit_check(short, 1.0, -1.0)


def test_stiffness_budget():
    sys = HamiltonianSystem(StrictDeltaNet(), 1.0, -1.0)
    with pytest.raises(StiffnessFailure):
        solve_singular_oscillator(sys, (0.0, 2.0), [1e-3], max_nfev=40)
    with pytest.raises(ValueError):
        solve_singular_oscillator(sys, (2.0, 0.0), [0.05])
    with pytest.raises(ValueError):
        solve_singular_oscillator(sys, (0.0, 2.0), [])
