import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from polyharm.fd import radial_laplacian_fd
from polyharm.radial_expr import (RadialExpr, RadialTerm, b_coefficients, evaluate, laplacian,
                                  neg_laplacian_power, power_law_coefficient)


def random_terms():
    term = st.builds(
        RadialTerm,
        coeff=st.floats(-3, 3, allow_nan=False).filter(lambda c: abs(c) > 1e-3),
        j=st.integers(0, 3),
        a=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
        s=st.sampled_from([0.5, 1.0, 1.25, 2.0, 3.5]),
    )
    return st.lists(term, min_size=1, max_size=4).map(RadialExpr)


# --- evaluation -----------------------------------------------------------

def test_eval_examples():
    assert evaluate(RadialExpr.shifted_power(1.0, 1.0), 1.0) == 0.5
    assert evaluate(RadialExpr(), 3.7) == 0.0
    assert evaluate(RadialExpr([RadialTerm(2.0, 1, 0.0, 2.0)]), 2.0) == pytest.approx(0.5)


def test_eval_rejects_singular_origin():
    with pytest.raises(ValueError):
        evaluate(RadialExpr.power(-1.0), 0.0)
    assert evaluate(RadialExpr.shifted_power(1.0, 2.0), 0.0) == 1.0


def test_canonical_merging_and_zero_removal():
    e = RadialExpr([RadialTerm(1.0, 0, 1.0, 1.0), RadialTerm(2.0, 0, 1.0, 1.0)])
    assert len(e) == 1 and e.terms[0].coeff == 3.0
    assert not RadialExpr([RadialTerm(1.0, 0, 1.0, 1.0), RadialTerm(-1.0, 0, 1.0, 1.0)])
    # r^2 * r^-4 and r^-2 are the same pure power
    assert RadialExpr([RadialTerm(1.0, 1, 0.0, 2.0)]) == RadialExpr.power(-2.0)


def test_json_round_trip():
    e = RadialExpr([RadialTerm(1.5, 2, 1.0, 0.75), RadialTerm(-2.0, 0, 0.0, 0.5)])
    assert RadialExpr.loads(e.dumps()) == e


# --- Laplacian --------------------------------------------------------------

def test_laplacian_examples():
    lap = laplacian(RadialExpr.shifted_power(1.0, 1.0), 3)
    assert evaluate(lap, 0.0) == pytest.approx(-6.0)
    assert not laplacian(RadialExpr.constant(4.0), 5)
    assert not laplacian(RadialExpr.power(-1.0), 3)
    assert neg_laplacian_power(RadialExpr.power(-1.0), 5, 1) == RadialExpr.power(-3.0, 2.0)
    assert not neg_laplacian_power(RadialExpr.constant(2.0), 4, 2)


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8])
def test_laplacian_rule_matches_sympy(N):
    r = sympy.Symbol("r", positive=True)
    for j, a, s in [(0, 1, sympy.Rational(1, 2)), (1, 2, sympy.Rational(3, 2)), (2, 1, 3)]:
        f = r ** (2 * j) * (a + r ** 2) ** (-s)
        oracle = sympy.diff(f, r, 2) + (N - 1) / r * sympy.diff(f, r)
        ours = laplacian(RadialExpr([RadialTerm(1.0, j, float(a), float(s))]), N)
        for x in [0.3, 1.0, 4.2]:
            assert evaluate(ours, x) == pytest.approx(float(oracle.subs(r, x)), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(random_terms(), st.integers(1, 12), st.floats(0.1, 100))
def test_laplacian_agrees_with_finite_differences(expr, N, r):
    fd = radial_laplacian_fd(expr, N, r)
    assert abs(evaluate(laplacian(expr, N), r) - fd) <= 1e-6 * (1 + abs(fd))


@settings(max_examples=40, deadline=None)
@given(random_terms(), random_terms(), st.floats(-2, 2), st.floats(-2, 2), st.integers(1, 9))
def test_laplacian_is_linear(f, g, alpha, beta, N):
    lhs = laplacian(alpha * f + beta * g, N)
    rhs = alpha * laplacian(f, N) + beta * laplacian(g, N)
    x = np.geomspace(0.1, 50, 7)
    assert np.allclose(lhs(x), rhs(x), rtol=1e-10, atol=1e-10 * np.abs(rhs(x)).max())


@settings(max_examples=30, deadline=None)
@given(random_terms(), st.integers(1, 9))
def test_laplacian_closure(expr, N):
    out = laplacian(expr, N)
    assert isinstance(out, RadialExpr)
    keys = [(t.j, t.a, t.s) for t in out.terms]
    assert len(keys) == len(set(keys)) and all(t.coeff != 0 for t in out.terms)


# --- power-law coefficients -----------------------------------------------

def test_power_law_coefficient_examples():
    assert power_law_coefficient(5, 1, 1) == 2
    assert power_law_coefficient(9, 2, 2) == 120
    assert power_law_coefficient(7, 2, 3) == 0  # kappa = N - 2m


def test_power_law_image_matches_coefficient():
    N, m, kappa = 9, 2, 1.5
    img = neg_laplacian_power(RadialExpr.power(-kappa), N, m)
    assert len(img) == 1 and img.tail_exponent == -kappa - 2 * m
    assert math.isclose(img.tail_coefficient, power_law_coefficient(N, m, kappa), rel_tol=1e-12)


def test_exact_with_fractions():
    kappa = Fraction(7, 3)
    img = neg_laplacian_power(RadialExpr.power(-kappa, Fraction(1)), 11, 3)
    (t,) = img.terms
    assert isinstance(t.coeff, Fraction)
    assert t.coeff == power_law_coefficient(11, 3, kappa)


def test_b_coefficients_examples():
    assert b_coefficients(5, 1, 1.0, 1.0) == pytest.approx([5.0, 2.0])
    assert b_coefficients(5, 1, 1.0, 0.0) == pytest.approx([0.0, 2.0])
    b = b_coefficients(9, 2, Fraction(2), Fraction(0))
    assert b == [0, 0, 120]
    with pytest.raises(ValueError):
        b_coefficients(5, 1, 3.0, 0.0)  # kappa = N - 2m is outside the open interval


def test_b_coefficients_reassemble_image():
    N, m, kappa, a = 9, 2, 3.5, 0.75
    b = b_coefficients(N, m, kappa, a)
    img = neg_laplacian_power(RadialExpr.shifted_power(a, kappa / 2), N, m)
    r = np.geomspace(0.05, 40, 9)
    poly = sum(bj * r ** (2 * j) for j, bj in enumerate(b))
    assert np.allclose(img(r), (a + r * r) ** (-kappa / 2 - 2 * m) * poly, rtol=1e-12)


@pytest.mark.parametrize("N,m,kappa", [(3, 1, 0.025), (7, 2, 2.175), (8, 3, 0.05)])
def test_power_image_stays_a_single_term(N, m, kappa):
    # repeated Laplacians of r^-kappa must not split into near-duplicate exponents
    img = neg_laplacian_power(RadialExpr.power(-kappa), N, m)
    assert len(img) == 1
    assert math.isclose(img.tail_coefficient, power_law_coefficient(N, m, kappa), rel_tol=1e-12)
