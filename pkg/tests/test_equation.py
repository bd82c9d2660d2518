from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abel_periodic.equation import (AbelEquation, CurveFamily, EquationError, HarmonicDegreeTooHigh,
                                    PositivityNotCertified, det_along_curve, eval_S, eval_S_x, eval_S_xx,
                                    transform, trig_reduce)
from abel_periodic.examples import cubic_cos, cubic_cos_cubed, cubic_cos_cubed_curves, quartic_four_cycles
from abel_periodic.poly import Polynomial
from abel_periodic.trig import TrigPoly

coef = st.fractions(min_value=-3, max_value=3, max_denominator=3)
trig1 = st.builds(lambda c, a, b: TrigPoly(c, [(a, b)]), coef, coef, coef)
equations = st.lists(trig1, min_size=2, max_size=4).filter(lambda cs: not cs[-1].is_zero()).map(AbelEquation)
curve_families = st.builds(
    lambda a0, a1, b0, b1: CurveFamily(TrigPoly(a0, [(a1, 0)]), TrigPoly(b0, [(0, b1)])),
    st.fractions(2, 4, max_denominator=2), st.fractions(-1, 1, max_denominator=2), coef, coef)
T = np.linspace(0, 1, 41)


def test_degree_and_leading_coefficient_checks():
    eq = quartic_four_cycles()
    assert eq.degree == 4 and eq.harmonic_degree == 0 and eq.exact
    with pytest.raises(EquationError):
        AbelEquation([TrigPoly(1), TrigPoly(0)])
    with pytest.raises(EquationError):
        AbelEquation([TrigPoly(1)])
    assert AbelEquation.zero(3).is_zero()


def test_mixed_precision_coefficients_become_float():
    eq = AbelEquation([TrigPoly(1), TrigPoly(0.5)])
    assert not eq.exact and not eq.coefficients[0].exact


@given(equations, st.fractions(-3, 3, max_denominator=4))
def test_along_line_is_S_at_fixed_x(eq, lam):
    line = eq.along_line(lam)
    assert line.exact
    assert np.allclose(line(T), eval_S(eq, float(lam), T), atol=1e-9)


@given(equations)
def test_x_derivatives_match_finite_differences(eq):
    x, h = 0.37, 1e-5
    assert np.allclose(eval_S_x(eq, x, T), (eval_S(eq, x + h, T) - eval_S(eq, x - h, T)) / (2 * h), atol=1e-6)
    assert np.allclose(eval_S_xx(eq, x, T), (eval_S_x(eq, x + h, T) - eval_S_x(eq, x - h, T)) / (2 * h), atol=1e-6)


def test_trig_reduce_splits_into_three_polynomials():
    f_a, f_b, f_c = trig_reduce(cubic_cos())
    assert f_a == Polynomial([0, -4, 0, 1])
    assert f_b == Polynomial([15, -5, -15, 5])
    assert f_c.is_zero()
    with pytest.raises(HarmonicDegreeTooHigh):
        trig_reduce(cubic_cos_cubed())


@given(equations, curve_families)
def test_transform_conjugates_the_vector_field(eq, curves):
    tr = transform(eq, curves)
    a, b = curves.a, curves.b
    for y in (-1.3, 0.0, 0.8):
        lhs = eval_S(tr, y, T)
        rhs = (eval_S(eq, a(T) * y + b(T), T) - a.derivative()(T) * y - b.derivative()(T)) / a(T)
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_constant_scaling_keeps_the_equation_exact():
    curves = CurveFamily(TrigPoly(2), TrigPoly(Fraction(1, 3)))
    tr = transform(cubic_cos(), curves)
    assert tr.exact and tr.denominator is None


def test_nonconstant_scaling_uses_a_denominator():
    tr = transform(cubic_cos_cubed(), cubic_cos_cubed_curves())
    assert tr.denominator == cubic_cos_cubed_curves().a.as_float()
    assert tr.degree == 3


def test_identity_curves_change_nothing():
    assert transform(cubic_cos(), CurveFamily.identity()) == cubic_cos()


def test_nonpositive_scaling_is_refused():
    with pytest.raises(PositivityNotCertified):
        transform(cubic_cos(), CurveFamily(TrigPoly(1, [(1, 0)]), TrigPoly(0)))


def test_curve_determinant_for_the_cosine_cubed_example():
    det = det_along_curve(cubic_cos_cubed(), cubic_cos_cubed_curves(), 0)
    t = np.arange(1000) / 1000
    assert np.max(np.abs(det(t) + 1)) <= 1e-10


def test_curve_coordinates_round_trip():
    curves = cubic_cos_cubed_curves()
    for t in (0.0, 0.3):
        assert curves.to_x(curves.to_y(1.7, t), t) == pytest.approx(1.7)
