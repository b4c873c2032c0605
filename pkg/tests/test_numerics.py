"""Tests for the big-float layer: AGM, K, Gamma, zeta/L, quadrature, Legendre, pFq."""

from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from ellk.numerics import (
    BigReal,
    DomainError,
    PoleError,
    agm,
    bits_for_digits,
    dirichlet_l,
    ellip_k,
    ellip_k_complement,
    gamma,
    hurwitz_zeta,
    legendre_p,
    pfq_partial_sum,
    pi_const,
    tanh_sinh_integrate,
    zeta,
)


def bits(digits):
    return bits_for_digits(digits)


def close(x, y, digits):
    def conv(v):
        if isinstance(v, Fraction):
            return mp.mpf(v.numerator) / v.denominator
        return mp.mpf(v)

    with mp.workprec(bits(digits) + 16):
        return abs(conv(x) - conv(y)) < mp.mpf(10) ** (-digits)


# ---------------------------------------------------------------------------
# BigReal basics

def test_bigreal_exact_int_has_zero_err():
    x = BigReal.exact(7, bits(50))
    assert x.err == 0
    assert float(x) == 7.0


def test_bigreal_arithmetic_tracks_error():
    p = bits(50)
    x = BigReal.exact(Fraction(1, 3), p)
    y = BigReal.exact(Fraction(2, 7), p)
    z = (x * y + x) / y
    assert z.err > 0
    with mp.workprec(p):
        expected = (mp.mpf(1) / 3 * (mp.mpf(2) / 7) + mp.mpf(1) / 3) / (mp.mpf(2) / 7)
    assert abs(z.value - expected) <= 16 * z.err + mp.mpf(2) ** (-p + 4)


def test_bigreal_integer_pow():
    x = BigReal.exact(3, bits(30))
    assert (x ** 4).value == 81
    assert close((x ** -2).value * 9, 1, 25)


def test_bigreal_sqrt_and_compare():
    x = BigReal.exact(2, bits(40)).sqrt()
    assert close(x.value * x.value, 2, 35)
    assert BigReal.exact(1, 64) < BigReal.exact(2, 64)


# ---------------------------------------------------------------------------
# AGM

def test_agm_fixed_point():
    assert agm(1, 1, bits(40)).value == 1


def test_agm_matches_lemniscatic_gamma_value():
    # agm(1, 1/sqrt(2)) = 2 pi^{3/2} / Gamma(1/4)^2, checked at 100 digits
    d = 100
    p = bits(d)
    with mp.workprec(p + 16):
        lhs = agm(1, 1 / mp.sqrt(2), p).value
        rhs = 2 * mp.pi ** mp.mpf("1.5") / gamma(Fraction(1, 4), p).value ** 2
    assert close(lhs, rhs, d - 2)


def test_agm_self_consistent_at_doubled_precision():
    d = 60
    lo = agm(1, 3, bits(d))
    hi = agm(1, 3, bits(2 * d))
    assert close(lo.value, hi.value, d - 2)


def test_agm_rejects_nonpositive():
    with pytest.raises(DomainError):
        agm(0, 1, 64)
    with pytest.raises(DomainError):
        agm(1, -2, 64)


# ---------------------------------------------------------------------------
# complete elliptic integral

def test_ellip_k_at_zero_is_half_pi():
    d = 60
    with mp.workprec(bits(d) + 8):
        assert close(ellip_k(0, bits(d)).value, pi_const(bits(d)).value / 2, d - 2)


def test_ellip_k_diverges_at_one():
    with pytest.raises(DomainError):
        ellip_k(1, 64)
    with pytest.raises(DomainError):
        ellip_k(-0.25, 64)


def test_ellip_k_half_against_defining_integral():
    # oracle: tanh-sinh quadrature of int_0^1 dt / sqrt((1-t^2)(1-m t^2))
    d = 60
    p = bits(d)
    with mp.workprec(p + 16):
        m = mp.mpf(1) / 2
        res = tanh_sinh_integrate(
            lambda t: 1 / mp.sqrt((1 - t) * (1 + t) * (1 - m * t * t)), 0, 1, p)
        assert res.converged
        closed = gamma(Fraction(1, 4), p).value ** 2 / (4 * mp.sqrt(mp.pi))
    assert close(res.value.value, closed, d - 5)
    assert close(ellip_k(m, p).value, closed, d - 5)


def test_ellip_k_complement_avoids_cancellation():
    # K(1 - mc) for tiny mc must match the log asymptote K(m) ~ log(4/sqrt(1-m))
    d = 50
    p = bits(d)
    with mp.workprec(p):
        mc = mp.mpf(10) ** -30
        v = ellip_k_complement(mc, p).value
        asym = mp.log(4 / mp.sqrt(mc))
    assert abs(v - asym) < mp.mpf("1e-28")


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_agm_k_consistency(m):
    # ellip_K(m) * (2/pi) * agm(1, sqrt(1-m)) = 1
    p = bits(40)
    with mp.workprec(p + 16):
        lhs = ellip_k(m, p).value * 2 / mp.pi * agm(1, mp.sqrt(1 - mp.mpf(m)), p).value
    assert close(lhs, 1, 35)


# ---------------------------------------------------------------------------
# gamma

def test_gamma_half_and_factorial():
    p = bits(50)
    with mp.workprec(p):
        assert close(gamma(Fraction(1, 2), p).value, mp.sqrt(mp.pi), 45)
    assert close(gamma(5, p).value, 24, 45)


def test_gamma_quarter_against_agm_oracle():
    # Gauss: agm(1, sqrt(2)) = (2 pi)^{3/2} / Gamma(1/4)^2, an independent route
    d = 80
    p = bits(d)
    with mp.workprec(p + 16):
        oracle = mp.sqrt((2 * mp.pi) ** mp.mpf("1.5") / agm(1, mp.sqrt(2), p).value)
        g = gamma(Fraction(1, 4), p).value
    assert close(g, oracle, d - 3)
    assert str(g)[:10] == "3.62560990"


def test_gamma_pole():
    with pytest.raises(PoleError):
        gamma(0, 64)
    with pytest.raises(PoleError):
        gamma(-3, 64)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.05, max_value=5))
def test_gamma_legendre_duplication(x):
    # Gamma(x) Gamma(x + 1/2) = 2^{1-2x} sqrt(pi) Gamma(2x)
    d = 40
    p = bits(d)
    with mp.workprec(p + 16):
        xv = mp.mpf(x)
        lhs = gamma(xv, p).value * gamma(xv + mp.mpf(1) / 2, p).value
        rhs = 2 ** (1 - 2 * xv) * mp.sqrt(mp.pi) * gamma(2 * xv, p).value
        assert abs(lhs / rhs - 1) < mp.mpf(10) ** (-d + 4)


# ---------------------------------------------------------------------------
# zeta and Dirichlet L

def test_zeta_even_closed_forms():
    p = bits(60)
    with mp.workprec(p):
        assert close(zeta(2, p).value, mp.pi ** 2 / 6, 55)
        assert close(zeta(4, p).value, mp.pi ** 4 / 90, 55)


def test_zeta_three_against_independent_oracle():
    # oracle: mpmath's zeta (independent implementation of the same constant)
    d = 70
    p = bits(d)
    with mp.workprec(p + 8):
        assert close(zeta(3, p).value, mp.zeta(3), d - 2)
    assert str(zeta(3, p).value)[:16] == "1.20205690315959"[:16]


def test_zeta_rejects_small_s():
    with pytest.raises(DomainError):
        zeta(1, 64)


def test_hurwitz_zeta_splits_zeta():
    # zeta(s) = 2^-s (zeta(s, 1/2) + zeta(s, 1))
    d = 50
    p = bits(d)
    with mp.workprec(p):
        lhs = (hurwitz_zeta(3, Fraction(1, 2), p).value + hurwitz_zeta(3, 1, p).value) / 8
    assert close(lhs, zeta(3, p).value, d - 3)


def test_dirichlet_l_leibniz():
    d = 60
    p = bits(d)
    with mp.workprec(p):
        assert close(dirichlet_l(-4, 1, p).value, mp.pi / 4, d - 3)


def test_dirichlet_l_catalan():
    d = 60
    p = bits(d)
    with mp.workprec(p + 8):
        # oracle: accelerated alternating series (mpmath nsum with alternation)
        oracle = mp.nsum(lambda n: mp.mpf(-1) ** int(n) / mp.mpf(2 * int(n) + 1) ** 2,
                         [0, mp.inf])
        assert close(dirichlet_l(-4, 2, p).value, oracle, d - 3)
    assert str(dirichlet_l(-4, 2, p).value)[:17] == "0.915965594177219"


def test_dirichlet_l8_functional_equation():
    # completed-L symmetry for chi_8 pins L(chi_8, 2) = pi^2 / (8 sqrt(2))
    d = 60
    p = bits(d)
    with mp.workprec(p):
        assert close(dirichlet_l(8, 2, p).value, mp.pi ** 2 / (8 * mp.sqrt(2)), d - 3)
    lo = dirichlet_l(8, 2, bits(40))
    hi = dirichlet_l(8, 2, bits(80))
    assert close(lo.value, hi.value, 38)


def test_dirichlet_l_pole_and_domain():
    with pytest.raises(PoleError):
        dirichlet_l(1, 1, 64)
    with pytest.raises(DomainError):
        dirichlet_l(5, 2, 64)


# ---------------------------------------------------------------------------
# tanh-sinh quadrature

def test_tanh_sinh_algebraic_endpoint():
    p = bits(50)
    res = tanh_sinh_integrate(lambda x: 1 / mp.sqrt(x), 0, 1, p)
    assert res.converged
    assert close(res.value.value, 2, 45)


def test_tanh_sinh_log_endpoint():
    p = bits(50)
    res = tanh_sinh_integrate(lambda x: mp.log(1 / x), 0, 1, p)
    assert res.converged
    assert close(res.value.value, 1, 45)


def test_tanh_sinh_k_moment_is_two():
    # int_0^1 K(m) dm = 2 by interchanging the order of integration
    d = 50
    p = bits(d)
    res = tanh_sinh_integrate(lambda m: ellip_k(m, p + 16).value, 0, 1, p)
    assert res.converged
    assert close(res.value.value, 2, d - 4)


def test_tanh_sinh_matches_agm_k_values():
    # quadrature of the defining integral vs AGM-based K at three parameters
    d = 45
    p = bits(d)
    for mm in (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
        with mp.workprec(p + 16):
            m = mp.mpf(mm.numerator) / mm.denominator
            res = tanh_sinh_integrate(
                lambda t: 1 / mp.sqrt((1 - t) * (1 + t) * (1 - m * t * t)), 0, 1, p)
        assert close(res.value.value, ellip_k(mm, p).value, d - 5)


def test_tanh_sinh_reports_nonconvergence():
    res = tanh_sinh_integrate(lambda x: mp.sin(1 / x) / x, 0, 1, bits(40), max_levels=3)
    assert not res.converged
    assert res.value.err > mp.mpf(10) ** -40


# ---------------------------------------------------------------------------
# Legendre polynomials

def test_legendre_constant_and_endpoint():
    p = bits(40)
    x = BigReal.exact(Fraction(3, 7), p)
    assert legendre_p(0, x).value == 1
    assert legendre_p(2, BigReal.exact(1, p)).value == 1


def test_legendre_orthonormalization_integral():
    # int_0^1 P_2(2x-1)^2 dx = 1/5
    d = 45
    p = bits(d)
    res = tanh_sinh_integrate(
        lambda x: legendre_p(2, BigReal.from_mpf(2 * x - 1, p + 16)).value ** 2, 0, 1, p)
    assert close(res.value.value, Fraction(1, 5), d - 4)


# ---------------------------------------------------------------------------
# hypergeometric partial sums

APPENDIX_NUMS = [Fraction(1, 2)] * 8 + [Fraction(5, 4)]
APPENDIX_DENS = [Fraction(1)] * 7 + [Fraction(1, 4)]


def test_pfq_zero_numerator_parameter():
    out = pfq_partial_sum([0, Fraction(1, 2)], [1], 1, 50, bits(30))
    assert out.value == 1


def test_pfq_appendix_truncations():
    p = bits(40)
    two = pfq_partial_sum(APPENDIX_NUMS, APPENDIX_DENS, 1, 2, p)
    assert close(two.value, Fraction(261, 256), 35)
    one = pfq_partial_sum(APPENDIX_NUMS, APPENDIX_DENS, 1, 1, p)
    assert one.value == 1


def test_pfq_denominator_pole_detected():
    with pytest.raises(PoleError):
        pfq_partial_sum([Fraction(1, 2)], [Fraction(-3, 1)], 1, 10, bits(30))


# ---------------------------------------------------------------------------
# precision-doubling stability across the module

@pytest.mark.parametrize("fn", [
    lambda p: agm(2, 3, p),
    lambda p: ellip_k(Fraction(1, 3), p),
    lambda p: ellip_k_complement(Fraction(1, 3), p),
    lambda p: gamma(Fraction(3, 8), p),
    lambda p: zeta(5, p),
    lambda p: dirichlet_l(-8, 3, p),
    lambda p: dirichlet_l(8, 1, p),
    lambda p: pfq_partial_sum(APPENDIX_NUMS, APPENDIX_DENS, 1, 40, p),
])
def test_precision_doubling(fn):
    p = bits(45)
    lo = fn(p)
    hi = fn(2 * p)
    assert abs(lo.value - hi.value) <= lo.err + mp.mpf(2) ** (-p + 6)
