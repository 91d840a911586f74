import os
import sys
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

# Add the project root to the Python path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

from bggpoincare.derham import (cartan_scale, curl, div, exterior_d, grad,
                                homotopy_check_derham, interior_euler,
                                koszul_poincare, proxy_operator)
from bggpoincare.forms import PolyForm, form_to_proxy, random_form
from bggpoincare.ratpoly import Poly

X = sympy.symbols("x1 x2 x3")


def x(axis, n=3):
    return Poly.variable(n, axis)


def xm(*exponents):
    """Monomial x1^e1 x2^e2 x3^e3"""
    return Poly.monomial(exponents)


def to_sympy(p):
    return sum(
        (sympy.Rational(c.numerator, c.denominator) * sympy.prod([s ** e for s, e in zip(X, m)])
         for m, c in p.terms.items()),
        sympy.Integer(0),
    )


def test_koszul_of_constant_one_form():
    """P(dx1) = x1"""
    u = PolyForm(3, 1, "R", {((0,), 0): Poly.constant(3, 1)})
    assert form_to_proxy(koszul_poincare(u)) == x(0)


def test_koszul_rejects_zero_forms():
    """There is no P on 0-forms"""
    with pytest.raises(ValueError):
        koszul_poincare(PolyForm(3, 0, "R", {((), 0): x(0)}))
    with pytest.raises(ValueError):
        interior_euler(PolyForm(3, 0, "R"))


def test_exterior_d_undefined_above_top_degree():
    """d on (n+1)-forms raises"""
    with pytest.raises(ValueError):
        exterior_d(PolyForm(2, 3, "R"))


def test_d_of_top_form_is_zero():
    """d maps n-forms to the empty (n+1)-forms"""
    u = PolyForm(3, 3, "R", {((0, 1, 2), 0): x(0)})
    assert exterior_d(u).is_zero()


def test_two_form_sign_convention():
    """d(x1 dx2) = dx1 ^ dx2 reads as the third component of curl"""
    u = PolyForm(3, 1, "R", {((1,), 0): x(0)})
    assert form_to_proxy(exterior_d(u)) == (Poly.zero(3), Poly.zero(3), Poly.constant(3, 1))


def test_proxy_operators_match_sympy():
    """grad, curl and div agree with sympy on a fixed field"""
    f = x(0) * x(1) * x(1) + x(2) * 3
    g = sympy.expand(to_sympy(f))
    assert [to_sympy(c) for c in grad(f)] == [sympy.diff(g, s) for s in X]
    v = (x(1) * x(2), x(0) * x(0), x(2))
    sv = [to_sympy(c) for c in v]
    expected_curl = [
        sympy.diff(sv[2], X[1]) - sympy.diff(sv[1], X[2]),
        sympy.diff(sv[0], X[2]) - sympy.diff(sv[2], X[0]),
        sympy.diff(sv[1], X[0]) - sympy.diff(sv[0], X[1]),
    ]
    assert [sympy.expand(to_sympy(c) - e) for c, e in zip(curl(v), expected_curl)] == [0, 0, 0]
    assert to_sympy(div(v)) == sum(sympy.diff(sv[i], X[i]) for i in range(3))


def test_curl_requires_three_dimensions():
    """curl and div are 3D operators"""
    with pytest.raises(ValueError):
        curl((x(0, 2), x(1, 2)))
    with pytest.raises(ValueError):
        div(x(0))


def test_named_operator_errors():
    """Wrong field kinds and unknown names raise"""
    with pytest.raises(ValueError):
        proxy_operator("hess", (x(0), x(1), x(2)))
    with pytest.raises(ValueError):
        proxy_operator("laplace", x(0))


def test_hessian_of_quadratic():
    """hess(x1 x2) has ones off the diagonal"""
    h = proxy_operator("hess", x(0) * x(1))
    one, zero = Poly.constant(3, 1), Poly.zero(3)
    assert h == ((zero, one, zero), (one, zero, zero), (zero, zero, zero))


def test_inc_of_def_vanishes():
    """The elasticity operators compose to zero"""
    w = (x(0) * x(1) * x(2), x(2) * x(2), xm(3, 0, 0))
    strain = proxy_operator("def", w)
    zero = Poly.zero(3)
    assert proxy_operator("inc", strain) == ((zero,) * 3,) * 3
    assert proxy_operator("div", proxy_operator("inc", (
        (xm(2, 0, 0), x(1), zero), (x(1), xm(0, 0, 3), x(0)), (zero, x(0), x(1) * x(2))
    ))) == (zero, zero, zero)


def test_conformal_operators_compose_to_zero():
    """div cot = 0 and cot devdef = 0 on sample fields"""
    zero = Poly.zero(3)
    w = (xm(3, 1, 0), xm(0, 0, 4), xm(1, 1, 2))
    assert proxy_operator("cot", proxy_operator("devdef", w)) == ((zero,) * 3,) * 3
    sigma = ((xm(4, 0, 0), xm(0, 3, 1), zero), (xm(0, 3, 1), -xm(4, 0, 0), xm(4, 0, 0)), (zero, xm(4, 0, 0), zero))
    assert proxy_operator("div", proxy_operator("cot", sigma)) == (zero, zero, zero)


def test_degree_zero_contract():
    """P d u = u - u(0)"""
    u = PolyForm(3, 0, "R", {((), 0): x(0) * x(1) + 5})
    assert koszul_poincare(exterior_d(u)) == u - u.evaluate_at_origin()


def test_cartan_scale():
    """(r + k) on homogeneous forms"""
    u = PolyForm(3, 2, "R", {((0, 1), 0): x(2) * x(2)})
    assert cartan_scale(u) == 4
    with pytest.raises(ValueError):
        cartan_scale(PolyForm(3, 1, "R", {((0,), 0): x(0) + 1}))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_homotopy_check_all_degrees(n):
    """Every monomial form up to degree 4 satisfies the Cartan identity"""
    for k in range(n + 1):
        report = homotopy_check_derham(k, 4, n)
        assert report.passed, report.counterexample
        assert report.checked > 0


def test_homotopy_check_rejects_bad_degree():
    """Form degree above n raises"""
    with pytest.raises(ValueError):
        homotopy_check_derham(4, 2, 3)


class TestCartanIdentity:
    @given(st.integers(1, 3), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_dp_plus_pd(self, k, seed):
        """dP + Pd = I on random forms"""
        u = random_form(np.random.default_rng(seed), 3, k, "V", 3)
        lhs = exterior_d(koszul_poincare(u))
        du = exterior_d(u)
        if du:
            lhs = lhs + koszul_poincare(du)
        assert lhs == u

    @given(st.integers(2, 3), st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_koszul_squares_to_zero(self, k, seed):
        """P P = 0"""
        u = random_form(np.random.default_rng(seed), 3, k, "R", 3)
        assert koszul_poincare(koszul_poincare(u)).is_zero()

    @given(st.integers(0, 10_000))
    @settings(max_examples=30, deadline=None)
    def test_d_squares_to_zero(self, seed):
        """d d = 0"""
        u = random_form(np.random.default_rng(seed), 3, 1, "R", 4)
        assert exterior_d(exterior_d(u)).is_zero()


def test_koszul_scaling_on_homogeneous_form():
    """P u = i_E u / (r + k)"""
    u = PolyForm(3, 1, "R", {((0,), 0): x(1) * x(2)})
    assert koszul_poincare(u) == interior_euler(u) * Fraction(1, 3)
