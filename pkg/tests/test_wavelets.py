import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from kpotential import (
    DEFAULT_CFG,
    DomainError,
    InversionReport,
    PotentialKind,
    WaveletFamily,
    WaveletMeasure,
    c_constant,
    design_measure,
    inversion_sweep,
    measure_laplace,
    wavelet_transform,
)
from kpotential.wavelets import c_constant_routes, sigma_function, spectral_window

from conftest import exp_profile


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_design_measure_moments(m):
    mu = design_measure(m)
    assert mu.certified_moments == m
    assert len(mu.atoms) == m + 2
    for i in range(m + 1):
        assert mu.moment(i) == 0.0
    # the first surviving moment of the N-th difference is (-1)^N N!
    assert mu.moment(m + 1) == pytest.approx((-1) ** (m + 1) * math.factorial(m + 1))


def test_certify_finds_largest_order():
    assert WaveletMeasure.certify([(1, 0), (-2, 1), (1, 2)]).certified_moments == 1
    assert WaveletMeasure.certify([(1, 1), (-1, 3)]).certified_moments == 0


@pytest.mark.parametrize(
    "atoms,m",
    [
        ([(1, 0), (1, 1)], 0),          # mass not zero
        ([(1, 0), (-2, 1), (1, 2)], 2),  # second moment is 2
        ([(1, 1), (-1, 1)], 0),          # repeated location
        ([(1, -1), (-1, 1)], 0),         # negative location
        ([(0, 1), (0, 2)], 0),           # zero total variation
        ([], 0),
    ],
)
def test_invalid_measures_rejected(atoms, m):
    with pytest.raises(DomainError):
        WaveletMeasure(tuple(atoms), m)


def test_certify_rejects_non_wavelet():
    with pytest.raises(DomainError):
        WaveletMeasure.certify([(1, 0), (1, 1)])


def test_design_measure_rejects_bad_order():
    with pytest.raises(DomainError):
        design_measure(-1)
    with pytest.raises(DomainError):
        design_measure(1.5)


@given(t=st.floats(min_value=0.0, max_value=40.0), m=st.integers(min_value=0, max_value=3))
def test_laplace_of_binomial_measure(t, m):
    got = measure_laplace(design_measure(m), t)
    ref = (-math.expm1(-t)) ** (m + 1)
    assert got == pytest.approx(ref, rel=1e-11, abs=1e-300)


def test_laplace_raw_atoms_and_arrays():
    t = np.array([[0.0, 1.0], [2.0, 3.0]])
    got = measure_laplace([(2.0, 0.5)], t)
    assert got.shape == (2, 2)
    assert np.allclose(got, 2 * np.exp(-0.5 * t))
    with pytest.raises(DomainError):
        measure_laplace(design_measure(0), -1.0)


def test_c_golden_values():
    assert c_constant(0.5, design_measure(0)) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)
    assert c_constant(1.0, design_measure(1)) == pytest.approx(2 * math.log(2), rel=1e-12)


@pytest.mark.parametrize("theta", [0.3, 0.5, 0.9, 1.0, 1.7, 2.0, 2.5])
def test_c_constant_against_scipy(theta):
    m = math.floor(theta)
    mu = design_measure(m)
    f = lambda u: (-math.expm1(-u)) ** (m + 1) * u ** (-1 - theta)  # noqa: E731
    ref = sum(integrate.quad(f, a, b, limit=200, epsabs=0, epsrel=1e-12)[0] for a, b in ((0, 1), (1, np.inf)))
    closed, quad = c_constant_routes(theta, mu)
    assert closed == pytest.approx(ref, rel=1e-8)
    assert quad == pytest.approx(closed, rel=1e-9)


def test_c_constant_general_measure():
    mu = WaveletMeasure.certify([(2.0, 0.0), (-3.0, 1.0), (1.0, 3.0)])
    assert mu.certified_moments == 1
    closed, quad = c_constant_routes(1.4, mu)
    assert quad == pytest.approx(closed, rel=1e-9)


@pytest.mark.parametrize("theta,m", [(1.2, 0), (2.0, 1), (-0.5, 1)])
def test_theta_precondition(theta, m):
    with pytest.raises(DomainError):
        c_constant(theta, design_measure(m))


def test_theta_zero_needs_no_atom_at_origin():
    with pytest.raises(DomainError):
        c_constant(0.0, design_measure(0))
    mu = WaveletMeasure.certify([(1.0, 1.0), (-1.0, 2.0)])
    assert c_constant(0.0, mu) == pytest.approx(math.log(2.0), rel=1e-10)


@pytest.mark.parametrize("theta", [0.5, 1.0, 1.5])
def test_sigma_function_integrates_to_c(theta):
    mu = design_measure(math.floor(theta))
    sig = sigma_function(theta, mu)
    h = lambda u: float(sig(np.array([u]))[0])  # noqa: E731
    a, _ = integrate.quad(h, 0, 12, limit=200, points=[1, 2, 3, 8])
    b, _ = integrate.quad(h, 12, np.inf, limit=200)
    assert a + b == pytest.approx(c_constant(theta, mu), rel=1e-7)


@pytest.mark.parametrize("theta", [0.4, 1.0, 1.6])
def test_spectral_window_against_quadrature(theta):
    mu = design_measure(math.floor(theta))
    m = mu.certified_moments
    a = np.array([0.0, 1e-3, 0.1, 0.25, 0.3, 1.0, 5.0])
    got = spectral_window(theta, mu, a)
    for ai, gi in zip(a, got):
        f = lambda u: (-math.expm1(-u)) ** (m + 1) * u ** (-1 - theta)  # noqa: E731
        ref = integrate.quad(f, ai, 1, epsabs=0, epsrel=1e-12, limit=200)[0] if ai < 1 else 0.0
        ref += integrate.quad(f, max(ai, 1.0), np.inf, epsabs=0, epsrel=1e-12, limit=200)[0]
        assert gi == pytest.approx(ref, rel=1e-9)


def test_family_validation_and_multipliers():
    with pytest.raises(DomainError):
        WaveletFamily("flett", 1.0)
    with pytest.raises(DomainError):
        WaveletFamily.riesz(0.0)
    with pytest.raises(DomainError):
        WaveletFamily("other")
    s = np.array([0.0, 4.0])
    assert np.allclose(WaveletFamily.flett().g(s), [1, 3])
    assert np.allclose(WaveletFamily.riesz(1.0).g(s), [0, 2])
    assert np.allclose(WaveletFamily.biparam(2.0).g(s), [1, 5])
    assert not WaveletFamily.riesz(2.0).damped
    with pytest.raises(DomainError):
        WaveletFamily.for_potential(PotentialKind.bessel(1.0))


def test_riesz_transform_of_exponential_closed_form(params):
    # undamped heat family: sum_j w_j H_{t s_j} exp(-r), each term in closed form
    nu = params.nu
    mu = design_measure(1)
    t = 0.4
    w = wavelet_transform(WaveletFamily.riesz(2.0), exp_profile(), mu, t, params, DEFAULT_CFG)
    r = np.linspace(0, 10, 21)
    ref = sum(wj * (1 + t * sj) ** (-nu - 1) * np.exp(-r / (1 + t * sj)) for wj, sj in mu.atoms)
    assert np.allclose(w(r), ref, atol=1e-9)
    with pytest.raises(DomainError):
        wavelet_transform(WaveletFamily.riesz(2.0), exp_profile(), mu, 0.0, params)


def test_damped_transform_carries_exponential_factor(params2):
    nu = params2.nu
    mu = design_measure(0)
    t = 0.3
    w = wavelet_transform(WaveletFamily.biparam(2.0), exp_profile(), mu, t, params2, DEFAULT_CFG)
    r = np.linspace(0, 8, 9)
    ref = np.exp(-r) - math.exp(-t) * (1 + t) ** (-nu - 1) * np.exp(-r / (1 + t))
    assert np.allclose(w(r), ref, atol=1e-9)


@pytest.mark.parametrize(
    "kind", [PotentialKind.flett(0.7), PotentialKind.riesz(0.5), PotentialKind.biparam(0.8, 1.5)], ids=str
)
def test_inversion_converges_with_two_moments(params2, kind):
    eps = (1.0, 0.5, 0.25, 0.125, 0.0625)
    rep = inversion_sweep(kind, exp_profile(), design_measure(2), eps, params2, DEFAULT_CFG)
    assert rep.converged
    assert all(b <= a for a, b in zip(rep.sup_errors, rep.sup_errors[1:]))
    assert rep.sup_errors[-1] < 0.01
    assert rep.route_gap < 1e-4
    assert np.allclose(rep.sup_errors, rep.shortcut_sup_errors, atol=1e-4)


def test_inversion_report_json_round_trip(params2):
    rep = inversion_sweep(PotentialKind.flett(0.7), exp_profile(), design_measure(2), (0.5, 0.25), params2)
    back = InversionReport.from_json(rep.to_json())
    assert back == rep
    assert back.to_json() == rep.to_json()


def test_inversion_rejects_bad_input(params2):
    with pytest.raises(DomainError):
        inversion_sweep(PotentialKind.flett(1.5), exp_profile(), design_measure(0), (0.5,), params2)
    with pytest.raises(DomainError):
        inversion_sweep(PotentialKind.flett(0.5), exp_profile(), design_measure(0), (0.0,), params2)
    with pytest.raises(DomainError):
        inversion_sweep(PotentialKind.bessel(0.5), exp_profile(), design_measure(0), (0.5,), params2)


@pytest.mark.parametrize("kind", [PotentialKind.flett(0.7), PotentialKind.riesz(0.5)], ids=str)
def test_single_moment_inversion_rate(params2, kind):
    # with m = 0 the truncation error decays like eps^(1 - theta)
    eps = [2.0**-k for k in range(0, 21, 4)]
    rep = inversion_sweep(kind, exp_profile(), design_measure(0), eps, params2, DEFAULT_CFG)
    errs = rep.sup_errors
    assert all(b < a for a, b in zip(errs, errs[1:]))
    order = math.log2(errs[-2] / errs[-1]) / 4.0
    assert order == pytest.approx(1.0 - rep.theta, abs=0.03)
    assert rep.route_gap < 1e-4
