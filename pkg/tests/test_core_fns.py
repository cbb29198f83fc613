import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from sineq.core_fns import (
    HalfLineMeasure,
    c_norm,
    inv_T,
    partial_moment_S,
    phi,
    phi_stack,
    reg_gamma_p,
    reg_gamma_q,
    s_identity_residual,
    tail_T,
)
from sineq.errors import DomainError

E = math.e


@pytest.mark.parametrize(
    "s, x, expected",
    [(1, 1, 1 - 1 / E), (2, 0, 0.0), (2, 1, 1 - 2 / E)],
)
def test_reg_gamma_p_closed_forms(s, x, expected):
    assert reg_gamma_p(s, x) == pytest.approx(expected, abs=1e-14)


def test_reg_gamma_p_limits_and_domain():
    assert reg_gamma_p(3.0, math.inf) == 1.0
    assert reg_gamma_q(3.0, 0.0) == 1.0
    for bad in [(0.0, 1.0), (-1.0, 1.0), (1.0, -0.5)]:
        with pytest.raises(DomainError):
            reg_gamma_p(*bad)


@settings(max_examples=300, deadline=None)
@given(s=st.floats(0.1, 100.0), x=st.floats(0.0, 300.0))
def test_reg_gamma_p_against_scipy(s, x):
    assert abs(reg_gamma_p(s, x) - special.gammainc(s, x)) <= 1e-12
    assert abs(reg_gamma_p(s, x) + reg_gamma_q(s, x) - 1.0) <= 1e-12


@pytest.mark.parametrize("s, x", [(0.1, 1e-3), (0.5, 0.3), (4.0, 3.9), (4.0, 5.1), (50.0, 49.0), (100.0, 120.0)])
def test_reg_gamma_q_against_mpmath(s, x):
    ref = float(mpmath.gammainc(s, x, mpmath.inf, regularized=True))
    assert reg_gamma_q(s, x) == pytest.approx(ref, rel=1e-11, abs=1e-15)


@pytest.mark.parametrize(
    "p, u, expected",
    [(1, 0, 1.0), (1, 1, 1 / E), (0.5, 1, 2 / E)],
)
def test_tail_T_examples(p, u, expected):
    assert tail_T(p, u) == pytest.approx(expected, abs=1e-14)


def test_partial_moment_S_examples():
    assert partial_moment_S(0.7, 0.0) == 0.0
    assert partial_moment_S(0.5, math.inf) == 2.0
    assert partial_moment_S(1, 1) == pytest.approx(1 - 2 / E, abs=1e-14)


@pytest.mark.parametrize("p", [0.25, 0.5, 1.0, 1.5, 3.0])
@pytest.mark.parametrize("u", [0.05, 0.7, 2.0])
def test_T_and_S_against_quadrature(p, u):
    c = c_norm(p)
    T_ref = c * integrate.quad(lambda x: math.exp(-(x**p)), u, math.inf, epsabs=1e-14)[0]
    S_ref = c * integrate.quad(lambda x: x**p * math.exp(-(x**p)), 0, u, epsabs=1e-14)[0]
    assert tail_T(p, u) == pytest.approx(T_ref, abs=1e-10)
    assert partial_moment_S(p, u) == pytest.approx(S_ref, abs=1e-10)


def test_T_and_S_reject_bad_exponent():
    with pytest.raises(DomainError):
        tail_T(0.0, 1.0)
    with pytest.raises(DomainError):
        partial_moment_S(-1.0, 1.0)


@pytest.mark.parametrize("p, u", [(1, 1), (0.5, 4), (0.3, 0.1)])
def test_s_identity_examples(p, u):
    assert abs(s_identity_residual(p, u)) <= 1e-11


@settings(max_examples=200, deadline=None)
@given(p=st.floats(0.1, 4.0), u=st.floats(1e-3, 30.0))
def test_s_identity_property(p, u):
    assert abs(s_identity_residual(p, u)) <= 1e-11


def test_inv_T_examples():
    assert inv_T(1, 1.0) == 0.0
    assert inv_T(1, 1 / E) == pytest.approx(1.0, abs=1e-12)
    assert inv_T(0.5, 2 / E) == pytest.approx(1.0, abs=1e-11)
    assert inv_T(0.5, 0.0) == math.inf
    for bad in (-0.1, 1.2):
        with pytest.raises(DomainError):
            inv_T(1.0, bad)


@settings(max_examples=300, deadline=None)
@given(p=st.floats(0.1, 4.0), v=st.floats(1e-12, 1.0))
def test_inv_T_round_trip(p, v):
    assert abs(tail_T(p, inv_T(p, v)) - v) <= 1e-12


def test_half_line_measure_normalized():
    for p in (0.25, 0.5, 1.0, 2.0, 5.0):
        mu = HalfLineMeasure(p)
        c = mpmath.mpf(mu.c)
        total = float(mpmath.quad(lambda x: c * mpmath.exp(-(x**p)), [0, 1, 10, mpmath.inf]))
        assert mu.density(1.0) == pytest.approx(float(c * mpmath.exp(-1)), rel=1e-15)
        assert abs(total - 1.0) <= 1e-12
        assert mu.tail(0.0) == 1.0
        assert mu.partial_moment(math.inf) == pytest.approx(1 / p, abs=1e-15)


def test_phi_boundary_values():
    assert phi_stack(1.0, 1.0).value == 0.0
    assert phi_stack(0.5, 0.0).value == 2.0
    assert phi(0.5, 0.0) == 2.0
    with pytest.raises(DomainError):
        phi_stack(1.0, 1.5)


def test_phi_exponential_closed_form():
    st_ = phi_stack(1.0, 0.5)
    assert st_.value == pytest.approx(0.1534264097200273, abs=1e-12)
    assert st_.d1 == pytest.approx(math.log(0.5), abs=1e-12)
    assert st_.d2 == pytest.approx(2.0, abs=1e-12)
    assert st_.f_point == pytest.approx(math.log(2.0), abs=1e-12)
    # p = 1: 1/phi'' = v, so (1/phi'')' = 1 and (1/phi'')'' = 0
    assert st_.inv_d2_d1 == pytest.approx(1.0, abs=1e-12)
    assert st_.inv_d2_d2 == 0.0


@pytest.mark.parametrize("p", [0.3, 0.5, 1.0, 1.5, 2.5])
@pytest.mark.parametrize("v", [0.05, 0.3, 0.6, 0.9])
def test_phi_derivatives_match_finite_differences(p, v):
    h = 1e-5
    st_ = phi_stack(p, v)
    lo, hi = phi_stack(p, v - h), phi_stack(p, v + h)
    assert st_.d1 == pytest.approx((phi(p, v + h) - phi(p, v - h)) / (2 * h), rel=1e-6)
    assert st_.d2 == pytest.approx((lo.d1 - hi.d1) / (-2 * h), rel=1e-6)
    inv = lambda s: 1.0 / s.d2  # noqa: E731
    assert st_.inv_d2_d1 == pytest.approx((inv(hi) - inv(lo)) / (2 * h), rel=1e-5, abs=1e-8)
    assert st_.inv_d2_d2 == pytest.approx((hi.inv_d2_d1 - lo.inv_d2_d1) / (2 * h), rel=1e-5, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(p=st.floats(0.1, 3.0), v=st.floats(1e-3, 0.999))
def test_phi_sign_pattern(p, v):
    st_ = phi_stack(p, v)
    assert st_.d2 > 0
    if p < 1:
        assert st_.inv_d2_d2 <= 0
    elif p > 1:
        assert st_.inv_d2_d2 >= 0
