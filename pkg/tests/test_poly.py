from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abel_periodic.poly import (NonIncreasingNodes, Polynomial, PrecisionMismatch, ZeroPolynomial,
                                count_distinct_roots, derivative, isolate_real_roots, lagrange_node_product,
                                poly_gcd, square_free_factors)

small_int = st.integers(-6, 6)
rationals = st.fractions(min_value=-8, max_value=8, max_denominator=6)
exact_polys = st.lists(small_int, min_size=1, max_size=6).map(Polynomial)


def test_trailing_zeros_are_trimmed_and_exactness_follows_inputs():
    p = Polynomial([1, 2, 0, 0])
    assert p.coeffs == (1, 2) and p.degree == 1 and p.exact
    assert not Polynomial([1, 0.5]).exact
    assert Polynomial([0, 0]).is_zero()


def test_mixing_exact_and_float_raises():
    with pytest.raises(PrecisionMismatch):
        Polynomial([1, 2]) + Polynomial([1.0, 2.0])
    with pytest.raises(PrecisionMismatch):
        Polynomial([1, 2]) * 0.5
    assert (Polynomial([1, 2]).as_float() * 0.5).coeffs == (0.5, 1.0)


@given(exact_polys, exact_polys, rationals)
def test_ring_operations_evaluate_pointwise(p, q, x):
    assert (p + q)(x) == p(x) + q(x)
    assert (p * q)(x) == p(x) * q(x)
    assert (p - q)(x) == p(x) - q(x)


@given(exact_polys, exact_polys.filter(lambda q: not q.is_zero()))
def test_divmod_reconstructs(p, q):
    quo, rem = divmod(p, q)
    assert quo * q + rem == p
    assert rem.is_zero() or rem.degree < q.degree


def test_derivative_and_lagrange_product():
    f = lagrange_node_product([-2, 0, 2, 4])
    assert f.coeffs == (0, 16, -4, -4, 1)
    assert derivative(f) == f.derivative() == Polynomial([16, -8, -12, 4])
    assert all(f(v) == 0 for v in (-2, 0, 2, 4))


def test_lagrange_product_rejects_unordered_nodes():
    with pytest.raises(NonIncreasingNodes):
        lagrange_node_product([0, 0, 1])
    with pytest.raises(NonIncreasingNodes):
        lagrange_node_product([1, 0])


def test_gcd_is_monic_common_factor():
    a = lagrange_node_product([1, 2, 3])
    b = lagrange_node_product([2, 3, 5])
    assert poly_gcd(a * 3, b * 7) == lagrange_node_product([2, 3])
    with pytest.raises(PrecisionMismatch):
        poly_gcd(a.as_float(), b.as_float())


def test_square_free_factors_read_multiplicities():
    p = Polynomial([1, -1]) ** 3 * Polynomial([2, 1]) ** 2 * Polynomial([0, 1])  # (x-1)^3 (x+2)^2 x
    parts = {k: g for g, k in square_free_factors(p)}
    assert parts[1] == Polynomial([0, 1])
    assert parts[2] == Polynomial([2, 1])
    assert parts[3] == Polynomial([-1, 1])
    with pytest.raises(ZeroPolynomial):
        square_free_factors(Polynomial())


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=5), st.integers(-3, 3), st.integers(1, 4))
def test_sturm_count_matches_distinct_roots(roots, lo, width):
    p = lagrange_node_product(sorted(set(roots)))
    hi = lo + width
    expected = sum(1 for r in set(roots) if lo < r <= hi)
    assert count_distinct_roots(p, lo, hi) == expected


def test_isolation_of_rational_and_irrational_roots():
    p = Polynomial([-2, 0, 1]) * Polynomial([1, -2]) ** 2  # (x^2 - 2)(1 - 2x)^2
    iso = isolate_real_roots(p)
    assert iso.method == "sturm_exact"
    vals = iso.values
    assert np.allclose(vals, [-2 ** 0.5, 0.5, 2 ** 0.5], atol=1e-12)
    half = iso.roots[1]
    assert half.exact == Fraction(1, 2) and half.multiplicity == 2
    r = iso.roots[2]
    assert r.exact is None and r.lo < r.hi and r.hi - r.lo <= 1e-12
    assert r.lo ** 2 < 2 < r.hi ** 2


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=5, unique=True), st.integers(1, 3))
def test_isolated_intervals_hold_the_roots(roots, den):
    lams = sorted(Fraction(r, den) for r in roots)
    iso = isolate_real_roots(lagrange_node_product(lams))
    assert len(iso) == len(lams)
    for r, lam in zip(iso.roots, lams):
        assert r.lo <= lam <= r.hi


def test_sign_of_is_exact_at_algebraic_roots():
    sqrt2 = isolate_real_roots(Polynomial([-2, 0, 1])).roots[1]
    assert sqrt2.sign_of(Polynomial([-2, 0, 1])) == 0
    assert sqrt2.sign_of(Polynomial([Fraction(-141421356237, 10 ** 11), 1])) == 1
    assert sqrt2.sign_of(Polynomial([Fraction(-141421356238, 10 ** 11), 1])) == -1
    assert sqrt2.sign_of(Polynomial([-4, 0, 2])) == 0


def test_float_isolation_finds_simple_roots():
    p = lagrange_node_product([-1.5, 0.25, 2.0])
    iso = isolate_real_roots(p)
    assert iso.method == "bisection_float"
    assert np.allclose(iso.values, [-1.5, 0.25, 2.0], atol=1e-10)
