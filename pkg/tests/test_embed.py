"""Distribution embedding: closed-form Dirac parts, convolution pieces,
pullback commutator, smoothing consistency."""

import numpy as np
import pytest
import sympy as sp

from colombeau.asymptotic import estimate_order
from colombeau.embed import (
    DistributionSpec,
    dirac,
    dirac_prime,
    embed_rn,
    heaviside,
    pair_net,
    pullback_commutator_demo,
    pullback_spec_affine,
    sigma_rn,
    smooth_piece,
)
from colombeau.errors import UnsupportedDistribution
from colombeau.mollifier import build_mollifier
from colombeau.nets import classify_net, sup_norm_on_box
from colombeau.smooth import from_sympy, smoothstep_expr

X = sp.Symbol("x")


@pytest.fixture(scope="module")
def fourier():
    return build_mollifier("fourier")


@pytest.fixture(scope="module")
def delta_net(fourier):
    return embed_rn(dirac(), fourier)


def test_embedded_delta_is_scaled_profile(fourier, delta_net):
    eps = 2.0 ** -5
    xs = np.linspace(-0.5, 0.5, 11)
    want = fourier.deriv(0, xs / eps) / eps
    assert np.allclose(delta_net.at(eps)(xs), want, rtol=0, atol=0)
    # derivative of the embedded net is the scaled derivative, exactly
    want1 = fourier.deriv(1, xs / eps) / eps ** 2
    assert np.array_equal(delta_net.at(eps).partial((1,), xs), want1)


def test_embedded_delta_order_slopes(delta_net):
    fit0 = classify_net(delta_net, (0,), ((-1.0, 1.0),), n_samples="auto")
    assert fit0.slope == pytest.approx(-1.0, abs=0.01)
    assert fit0.verdict == "moderate" and fit0.order == 1
    fit1 = classify_net(delta_net, (1,), ((-1.0, 1.0),), n_samples="auto")
    assert fit1.slope == pytest.approx(-2.0, abs=0.05)
    assert fit1.order == 2


def test_derivative_entry_sign_conventions(fourier):
    eps = 0.125
    xs = np.linspace(-1, 1, 9)
    # raw entry (beta=1, weight=1) embeds as -(1/eps^2) rho'(x/eps)
    raw = embed_rn(dirac(0.0, beta=(1,), weight=1.0), fourier)
    want = -fourier.deriv(1, xs / eps) / eps ** 2
    assert np.allclose(raw.at(eps)(xs), want, rtol=0, atol=0)
    # the classical delta' flips the sign back
    dp = embed_rn(dirac_prime(), fourier)
    assert np.allclose(dp.at(eps)(xs), -want, rtol=0, atol=0)


def test_dirac_action_and_smooth_multiplication():
    phi = from_sympy(sp.sin(X) + X ** 2, [X])
    assert dirac().action(phi) == pytest.approx(0.0)
    assert dirac(0.5).action(phi) == pytest.approx(np.sin(0.5) + 0.25)
    assert dirac_prime().action(phi) == pytest.approx(-1.0)  # -phi'(0)
    # x * delta' = -delta as functionals
    xfn = from_sympy(X, [X])
    prod = dirac_prime().mul_smooth(xfn)
    for test in (phi, from_sympy(sp.cos(X), [X])):
        assert prod.action(test) == pytest.approx(-dirac().action(test), abs=1e-14)


def test_regular_piece_against_trapezoid_oracle(fourier):
    dens = from_sympy(sp.exp(-X ** 2), [X])
    net = embed_rn(smooth_piece(dens, -4.0, 4.0), fourier)
    eps = 2.0 ** -4
    f = net.at(eps)
    for x0 in (0.0, 0.4, -1.1):
        lo = max(-4.0, x0 - fourier.support_radius_hint * eps)
        hi = min(4.0, x0 + fourier.support_radius_hint * eps)
        ys = np.linspace(lo, hi, 40001)
        vals = np.exp(-ys ** 2) * fourier.deriv(0, (x0 - ys) / eps) / eps
        oracle = np.trapezoid(vals, ys)
        assert f(x0) == pytest.approx(oracle, rel=1e-9)


def test_embedding_linearity_exact_per_eps(fourier):
    u = dirac(0.3)
    v = dirac(-0.2, beta=(1,), weight=2.0)
    both = DistributionSpec(1)
    both.singular = u.singular + v.singular
    lhs = embed_rn(both, fourier)
    rhs = embed_rn(u, fourier) + embed_rn(v, fourier)
    xs = np.linspace(-1, 1, 33)
    for eps in (0.25, 2.0 ** -6):
        assert np.array_equal(lhs.at(eps)(xs), rhs.at(eps)(xs))


def test_support_localization_of_embedding(fourier, delta_net):
    fit = classify_net(delta_net, (0,), ((2.0, 3.0),), n_samples=51)
    assert fit.verdict == "negligible"


def test_heaviside_embedding_and_derivative(fourier):
    net = embed_rn(heaviside(), fourier)
    eps = 2.0 ** -6
    f = net.at(eps)
    assert f(0.0) == pytest.approx(0.5, abs=1e-8)
    assert f(1.0) == pytest.approx(1.0, abs=1e-9)
    assert f(-1.0) == pytest.approx(0.0, abs=1e-9)
    # d/dx (H * rho_eps) = rho_eps exactly (modulo the far window edge)
    xs = np.array([-0.5, 0.0, 0.7])
    want = fourier.deriv(0, xs / eps) / eps
    got = f.partial((1,), xs)
    assert np.allclose(got, want, rtol=1e-8, atol=1e-10)


def test_unsupported_specs():
    with pytest.raises(UnsupportedDistribution):
        smooth_piece(from_sympy(X, [X]), 0.0, np.inf)
    with pytest.raises(UnsupportedDistribution):
        DistributionSpec(2).piece(from_sympy(X, [X]), 0.0, 1.0)
    with pytest.raises(UnsupportedDistribution):
        dirac((0.0, 0.0), dim=1)


def test_pullback_commutator_identity_map_is_zero(fourier):
    net, report = pullback_commutator_demo(1.0, 0.0, dirac(), fourier)
    assert report["identity_map"]
    assert report["order_fit"]["verdict"] == "negligible"
    assert report["order_fit"]["slope"] == np.inf
    xs = np.linspace(-1, 1, 21)
    assert np.max(np.abs(net.at(0.125)(xs))) == 0.0


def test_pullback_commutator_doubling_map(fourier):
    # iota(mu^* delta) - mu^* iota(delta) = rho_eps(x)/2 - rho_eps(2x):
    # a nonzero moderate net of order one
    spec = pullback_spec_affine(dirac(), 2.0)
    assert spec.singular[0].weight == pytest.approx(0.5)
    net, report = pullback_commutator_demo(2.0, 0.0, dirac(), fourier)
    fit = report["order_fit"]
    assert fit["verdict"] == "moderate" and fit["order"] == 1
    assert fit["slope"] == pytest.approx(-1.0, abs=0.02)
    # yet all pairings against test densities go to zero, far below the
    # association tolerance of 1e-3
    dens = from_sympy(sp.exp(-X ** 2) * (1 + X), [X])
    vals = [abs(pair_net(net, dens, -4.0, 4.0, eps)) for eps in (2.0 ** -4, 2.0 ** -6, 2.0 ** -8)]
    assert all(v < 1e-6 for v in vals)
    assert vals[-1] < 1e-10


def _window_expr(flat, outer):
    w = outer - flat
    return smoothstep_expr((X + outer) / w) * smoothstep_expr((outer - X) / w)


@pytest.mark.slow
def test_smoothing_consistency_fourier(fourier):
    # windowed sine agrees with sin on [-1, 1]; the embedding residual
    # decays faster than any power readable on this grid
    wind = from_sympy(sp.sin(X) * _window_expr(1.2, 2.0), [X])
    target = sigma_rn(from_sympy(sp.sin(X), [X]))
    resid = embed_rn(smooth_piece(wind, -2.0, 2.0), fourier) - target
    samples = []
    for k in range(4, 9):
        eps = 2.0 ** -k
        samples.append((eps, sup_norm_on_box(resid.at(eps), (0,), ((-1.0, 1.0),), 21)))
    fit = estimate_order(samples)
    assert fit.slope >= 6.0
    assert fit.verdict == "negligible"


@pytest.mark.slow
def test_smoothing_consistency_gausspoly():
    mol = build_mollifier("gausspoly", order=2)
    wind = from_sympy(sp.sin(X) * _window_expr(1.2, 2.0), [X])
    target = sigma_rn(from_sympy(sp.sin(X), [X]))
    resid = embed_rn(smooth_piece(wind, -2.0, 2.0), mol) - target
    samples = []
    for k in range(4, 8):
        eps = 2.0 ** -k
        samples.append((eps, sup_norm_on_box(resid.at(eps), (0,), ((-1.0, 1.0),), 21)))
    fit = estimate_order(samples)
    # order 2 cancels moments through 5: residual ~ eps^6 >> M+1 = 3
    assert fit.slope >= 2.75
    assert fit.slope == pytest.approx(6.0, abs=1.0)
