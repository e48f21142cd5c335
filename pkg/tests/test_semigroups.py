import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from kpotential import (
    DEFAULT_CFG,
    GOLDEN_CFG,
    DomainError,
    SemigroupKind,
    default_grid,
    hankel_apply,
    kernel_profile,
    make_params,
    radial_mass,
    semigroup_apply,
    semigroup_multiplier,
    strip_spectrum,
    subordinate_poisson_from_heat,
    unit_mass,
)
from kpotential.semigroups import beta_kernel_tail, poisson_constant, subordinator_density

from conftest import exp_profile


def test_kind_validation():
    with pytest.raises(DomainError):
        SemigroupKind("wave")
    with pytest.raises(DomainError):
        SemigroupKind.with_beta(0.0)
    with pytest.raises(DomainError):
        SemigroupKind("heat", 2.0)


def test_canonical_kinds():
    assert SemigroupKind.with_beta(1.0).canonical() == SemigroupKind.poisson()
    assert SemigroupKind.with_beta(2.0).canonical() == SemigroupKind.heat()
    assert SemigroupKind.with_beta(1.5).canonical() == SemigroupKind.with_beta(1.5)


def test_negative_time_rejected(params2):
    with pytest.raises(DomainError):
        semigroup_multiplier(SemigroupKind.heat(), -1.0)
    with pytest.raises(DomainError):
        kernel_profile(SemigroupKind.poisson(), 0.0, params2)


def test_time_zero_is_identity(params2):
    f = exp_profile()
    assert semigroup_apply(SemigroupKind.poisson(), 0.0, f, params2) is f


def test_poisson_constant_formula():
    # 4^{2 gamma + n - 1} Gamma(2 gamma + n - 1/2) / sqrt(pi)
    for n, g in [(1, 0.5), (2, 0.5), (3, 1.0), (2, 1.25)]:
        p = make_params(n, g)
        ref = 4.0 ** (2 * g + n - 1) * special.gamma(2 * g + n - 0.5) / math.sqrt(math.pi)
        assert poisson_constant(p) == pytest.approx(ref, rel=1e-14)


def test_poisson_kernel_value_at_origin(params2):
    k = kernel_profile(SemigroupKind.poisson(), 1.0, params2)
    assert k(0.0) == pytest.approx(12.0, rel=1e-14)  # nu = 1: 16 Gamma(5/2) / sqrt(pi)


@pytest.mark.parametrize("t", [0.5, 2.0])
def test_heat_kernel_transform(params, t):
    k = strip_spectrum(kernel_profile(SemigroupKind.heat(), t, params))
    s = np.linspace(0, 10, 21)
    assert np.allclose(hankel_apply(k, params, GOLDEN_CFG)(s), np.exp(-t * s), atol=1e-10)


def test_poisson_kernel_transform(params):
    k = strip_spectrum(kernel_profile(SemigroupKind.poisson(), 1.0, params))
    s = np.concatenate([[0.0], np.geomspace(1e-2, 20, 12)])
    assert np.allclose(hankel_apply(k, params, GOLDEN_CFG)(s), np.exp(-np.sqrt(s)), atol=1e-8)


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5, 2.0])
def test_kernel_unit_mass(params2, beta):
    k = kernel_profile(SemigroupKind.with_beta(beta), 0.8, params2, DEFAULT_CFG)
    assert radial_mass(k, params2, DEFAULT_CFG) == pytest.approx(unit_mass(params2), rel=1e-6)


def test_beta_kernel_reduces_to_closed_forms(params2):
    r = np.linspace(0.0, 12.0, 13)
    pois = kernel_profile(SemigroupKind.poisson(), 1.0, params2)
    heat = kernel_profile(SemigroupKind.heat(), 1.0, params2)
    assert np.allclose(kernel_profile(SemigroupKind.with_beta(1.0), 1.0, params2)(r), pois(r))
    assert np.allclose(kernel_profile(SemigroupKind.with_beta(2.0), 1.0, params2)(r), heat(r))


@pytest.mark.parametrize("beta", [0.5, 1.5])
def test_beta_kernel_positive_and_origin_value(params2, beta):
    k = kernel_profile(SemigroupKind.with_beta(beta), 1.0, params2, DEFAULT_CFG)
    r = np.geomspace(1e-3, 50, 40)
    assert np.all(k(r) > 0)
    # W(0) = int e^{-u^b} u^nu du / Gamma(nu+1) = Gamma((nu+1)/b) / (b Gamma(nu+1)), b = beta/2
    b, nu = beta / 2, params2.nu
    ref = special.gamma((nu + 1) / b) / (b * special.gamma(nu + 1))
    assert k(0.0) == pytest.approx(ref, rel=1e-7)


def test_beta_three_kernel_changes_sign(params2):
    k = kernel_profile(SemigroupKind.with_beta(3.0), 1.0, params2, DEFAULT_CFG)
    vals = k(np.linspace(0.0, 15.0, 61))
    assert vals.min() < -1e-3 and vals.max() > 0


def test_beta_series_matches_quadrature(params2):
    # the large-r expansion against a direct scipy oscillatory integral
    beta, nu = 0.5, params2.nu
    r = np.array([3.0, 6.0])
    val, err = beta_kernel_tail(r, beta, nu)
    for ri, vi, ei in zip(r, val, err):
        y = math.sqrt(ri)

        def h(x):
            return 2 * x ** (2 * nu + 1) * math.exp(-x**0.5) * special.jv(nu, 2 * x * y) / (x * y) ** nu

        ref = integrate.quad(h, 0, 4000, limit=4000, epsabs=1e-13)[0]
        assert vi == pytest.approx(ref, abs=max(10 * ei, 1e-9))


def test_beta_scaling_law(params2):
    beta, nu = 1.5, params2.nu
    kind = SemigroupKind.with_beta(beta)
    r = np.linspace(0.1, 5, 9)
    for lam in (0.5, 2.0):
        k_lam = kernel_profile(kind, lam, params2, DEFAULT_CFG)
        k_1 = kernel_profile(kind, 1.0, params2, DEFAULT_CFG)
        expect = lam ** (-2 * (nu + 1) / beta) * k_1(r * lam ** (-2 / beta))
        assert np.allclose(k_lam(r), expect, rtol=1e-12)


def test_heat_on_exponential_closed_form(params):
    # heat(t) e^{-r} = (1+t)^{-(nu+1)} exp(-r/(1+t))
    f = strip_spectrum(exp_profile())
    r = np.linspace(0.0, 10.0, 21)
    t = 0.6
    got = semigroup_apply(SemigroupKind.heat(), t, f, params, DEFAULT_CFG)(r)
    ref = (1 + t) ** (-(params.nu + 1)) * np.exp(-r / (1 + t))
    assert np.max(np.abs(got - ref)) < 1e-7


@pytest.mark.parametrize("kind", [SemigroupKind.heat(), SemigroupKind.poisson(), SemigroupKind.with_beta(1.5)],
                         ids=str)
def test_semigroup_composition_numeric(params2, kind):
    f = exp_profile()
    grid = default_grid(60)
    inner = strip_spectrum(semigroup_apply(kind, 0.7, f, params2, DEFAULT_CFG))
    a = semigroup_apply(kind, 0.5, inner, params2, DEFAULT_CFG)(grid)
    b = semigroup_apply(kind, 1.2, f, params2, DEFAULT_CFG)(grid)
    assert np.max(np.abs(a - b)) < 1e-6


def test_subordinator_density_laplace_transform():
    for w in (0.3, 1.0, 4.0):
        val = integrate.quad(lambda u: subordinator_density(u) * math.exp(-w * u), 0, np.inf, limit=200)[0]
        assert val == pytest.approx(math.exp(-math.sqrt(w)), rel=1e-8)


def test_subordinated_poisson_matches_direct(params2):
    f = exp_profile()
    r = default_grid(30)
    a = subordinate_poisson_from_heat(f, 0.8, params2, DEFAULT_CFG)(r)
    b = semigroup_apply(SemigroupKind.poisson(), 0.8, f, params2, DEFAULT_CFG)(r)
    assert np.max(np.abs(a - b)) < 1e-7


def test_poisson_approximate_identity(params2):
    f = exp_profile()
    grid = default_grid(60)
    errs = [
        np.max(np.abs(semigroup_apply(SemigroupKind.poisson(), t, f, params2)(grid) - f(grid)))
        for t in (1.0, 0.5, 0.25, 0.125)
    ]
    assert all(b < a for a, b in zip(errs, errs[1:]))


@given(t=st.floats(min_value=0.05, max_value=5.0), s=st.floats(min_value=0.0, max_value=50.0))
def test_multipliers_bounded_and_monotone(t, s):
    for kind in (SemigroupKind.heat(), SemigroupKind.poisson(), SemigroupKind.with_beta(0.7)):
        m = semigroup_multiplier(kind, t)
        v = float(m(np.array([s]))[0])
        assert 0.0 <= v <= 1.0
        assert float(m(np.array([s + 1.0]))[0]) <= v


@given(t1=st.floats(min_value=0.01, max_value=3.0), t2=st.floats(min_value=0.01, max_value=3.0))
@settings(max_examples=30)
def test_multiplier_semigroup_law(t1, t2):
    s = np.linspace(0, 30, 31)
    for kind in (SemigroupKind.heat(), SemigroupKind.poisson(), SemigroupKind.with_beta(0.7)):
        lhs = semigroup_multiplier(kind, t1)(s) * semigroup_multiplier(kind, t2)(s)
        assert np.allclose(lhs, semigroup_multiplier(kind, t1 + t2)(s), rtol=1e-12, atol=1e-300)
