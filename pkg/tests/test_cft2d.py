import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from stressdist import cft2d, dist, func
from stressdist.cft2d import CftParams
from stressdist.errors import FlowPole, OutOfRadius
from stressdist.func import SamplingFunction

P1 = CftParams(1, 1.0)


def _gamma2_by_quadrature(f, c):
    prof = func.frequency_profile(f)
    val = quad(lambda w: w**3 * prof(w) ** 2, 0, np.inf, epsrel=1e-13)[0]
    return c / (48 * math.pi**2) * val


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_gamma2_gaussian(tau):
    f = SamplingFunction.gaussian(tau)
    expected = 1 / (24 * math.pi**2 * tau**4)
    assert cft2d.gamma2(f, CftParams(1, tau)) == pytest.approx(expected, rel=1e-14)
    assert _gamma2_by_quadrature(f, 1) == pytest.approx(expected, rel=1e-10)
    assert cft2d.gamma2(f.to_grid(1024), P1) == pytest.approx(expected, rel=1e-9)


def test_gamma2_lorentzian_closed_form():
    # (c / 48 pi^2) * integral w^3 e^{-2w} = c / (128 pi^2)
    assert cft2d.gamma2(SamplingFunction.lorentzian(), CftParams(3)) == pytest.approx(
        3 / (128 * math.pi**2), rel=1e-11)


def test_recursion_first_values():
    seq = cft2d.moments_recursion_gaussian(P1, 6)
    assert seq.values[:5] == (1, 0, Fraction(1, 24), Fraction(1, 12), Fraction(49, 192))
    assert seq.exact
    assert seq.scale == cft2d.PI
    floats = cft2d.moments_recursion_gaussian(CftParams(1.5), 4)
    assert not floats.exact
    assert floats.values[2] == pytest.approx(1.5 / 24)


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=Fraction(1, 100), max_value=Fraction(100), max_denominator=100),
       st.integers(2, 12))
def test_recursion_equals_shifted_gamma_moments(c, n):
    rec = cft2d.moments_recursion_gaussian(CftParams(c), n)
    gam = dist.moments(cft2d.chiral_distribution(CftParams(c), exact=True), n)
    assert rec.values == gam.values
    assert rec.scale == gam.scale


def test_recursion_against_taylor_series_of_closed_form():
    # third route: expand exp(W) with W = (c/24)(-log(1 - mu/pi) - mu/pi), tau = 1
    mpmath.mp.dps = 40
    c = mpmath.mpf(2)
    coeffs = mpmath.taylor(lambda m: mpmath.exp(c / 24 * (-mpmath.log(1 - m / mpmath.pi)
                                                          - m / mpmath.pi)), 0, 10)
    rec = cft2d.moments_recursion_gaussian(CftParams(2), 10)
    for n in range(11):
        moment = coeffs[n] * mpmath.factorial(n) * mpmath.pi**n
        assert float(moment) == pytest.approx(float(rec.values[n]), rel=1e-25, abs=1e-30)


def test_flow_amplitude():
    assert cft2d.flow_amplitude_gaussian(1.0, 0.0) == 1.0
    assert cft2d.flow_amplitude_gaussian(1.0, -math.pi) == pytest.approx(0.5)
    with pytest.raises(FlowPole):
        cft2d.flow_amplitude_gaussian(1.0, math.pi)


@pytest.mark.parametrize("lam", [1.0, -1.5])
def test_numeric_flow_of_gaussian_is_a_rescaling(lam):
    f = SamplingFunction.gaussian()
    path = cft2d.flow_numeric(f, lam)
    assert not path.blown_up
    g = path.last.f
    expected = cft2d.flow_amplitude_gaussian(1.0, lam) * func.evaluate(f, g.points())
    assert np.max(np.abs(g.samples - expected)) < 1e-8 * np.max(expected)
    mid = path.at(lam / 2).samples
    expected_mid = cft2d.flow_amplitude_gaussian(1.0, lam / 2) * func.evaluate(f, g.points())
    assert np.max(np.abs(mid - expected_mid)) < 1e-7 * np.max(expected_mid)


def test_flow_blowup_is_detected_near_the_pole():
    path = cft2d.flow_numeric(SamplingFunction.gaussian(), 4.0)
    assert path.blown_up
    assert path.blowup_lambda == pytest.approx(math.pi, rel=0.02)


def test_gaussian_cgf_closed_form():
    f = SamplingFunction.gaussian()
    assert cft2d.cgf(f, P1, 0.0) == 0.0
    mu = 1.0
    expected = (math.log(math.pi / (math.pi - mu)) - mu / math.pi) / 24
    assert cft2d.cgf(f, P1, mu) == pytest.approx(expected, rel=1e-15)
    z = 0.5 + 2j
    assert cft2d.cgf(f, P1, z) == pytest.approx(
        (np.log(math.pi / (math.pi - z)) - z / math.pi) / 24, rel=1e-14)
    with pytest.raises(OutOfRadius):
        cft2d.cgf(f, P1, math.pi)
    # matches the shifted-Gamma law
    assert cft2d.cgf(f, P1, mu) == pytest.approx(
        cft2d.chiral_distribution(P1).cgf(mu).real, rel=1e-14)


def test_cgf_curve_against_closed_form_for_a_gaussian_grid():
    f = SamplingFunction.gaussian()
    mus = [-1.2, -0.3, 0.4, 1.0]
    curve = cft2d.cgf_curve(f.to_grid(512), P1, mus)
    for m, w in zip(mus, curve.W_values):
        assert w == pytest.approx(cft2d.cgf(f, P1, m), rel=1e-7)
    assert curve.is_convex()


def _mixture_grid(n=512, half=16.0):
    a, b = SamplingFunction.gaussian(0.7), SamplingFunction.gaussian(1.4)
    u = np.linspace(-half, half, n)
    vals = 0.4 * func.evaluate(a, u) + 0.6 * func.evaluate(b, u)
    return SamplingFunction.from_samples(vals, u[1] - u[0], u[0])


def test_cgf_of_a_non_gaussian_window():
    g = _mixture_grid()
    curve = cft2d.cgf_curve(g, P1, [-0.2, -0.1, 0.0, 0.1, 0.2, 0.6])
    assert curve.W_values[2] == 0.0
    assert curve.is_convex()
    # small-mu behaviour: W ~ G_2 mu^2 / 2
    g2 = cft2d.gamma2(g, P1)
    wp, wm = curve.W_values[3], curve.W_values[1]
    assert (wp + wm) / 0.1**2 == pytest.approx(g2, rel=1e-3)


def test_cgf_curve_serialization():
    curve = cft2d.cgf_curve(SamplingFunction.gaussian(), P1, [-1.0, 0.0, 0.5])
    back = cft2d.CgfCurve.from_json(curve.to_json())
    assert back.to_json() == curve.to_json()
    assert curve.to_csv().splitlines()[0] == "mu,W"


def test_cgf_curve_beyond_blowup_raises():
    with pytest.raises(OutOfRadius):
        cft2d.cgf_curve(SamplingFunction.gaussian().to_grid(512), P1, [3.5])


def test_energy_density_is_two_independent_chiral_halves():
    ch = cft2d.chiral_distribution(P1)
    ed = cft2d.energy_density_distribution(P1)
    for mu in (-2.0, 0.5, 2.0):
        assert ed.cgf(mu) == pytest.approx(2 * ch.cgf(mu), rel=1e-14)
    assert ed.omega0 == pytest.approx(1 / (12 * math.pi))


def test_chiral_parameters_scale_with_tau():
    d1 = cft2d.chiral_distribution(CftParams(1, 1.0))
    d2 = cft2d.chiral_distribution(CftParams(1, 2.0))
    assert d2.alpha == d1.alpha
    assert d2.omega0 == pytest.approx(d1.omega0 / 4)
    assert d2.beta == pytest.approx(d1.beta * 4)
    exact = cft2d.chiral_distribution(CftParams(24), exact=True).physical_params()
    assert str(exact["alpha"]) == "1"
    assert str(exact["omega0"]) == "1·π^-1"
