from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abel_periodic.poly import PrecisionMismatch
from abel_periodic.trig import TrigPoly, certify_sign, is_certified_positive

coef = st.fractions(min_value=-4, max_value=4, max_denominator=4)
trig_polys = st.builds(TrigPoly, coef, st.lists(st.tuples(coef, coef), max_size=3))
T = np.linspace(0, 1, 257)


def reference(p, t):
    out = float(p.constant) * np.ones_like(t)
    for k, (a, b) in enumerate(p.harmonics, 1):
        out += float(a) * np.cos(2 * np.pi * k * t) + float(b) * np.sin(2 * np.pi * k * t)
    return out


def test_constructors_and_normal_form():
    p = TrigPoly.cos(2, 3)
    assert p.harmonics == ((0, 0), (3, 0)) and p.degree == 2 and p.exact
    assert TrigPoly(1, [(0, 0), (0, 0)]).degree == 0
    assert TrigPoly.from_arrays(1, [2], [3]) == TrigPoly(1, [(2, 3)])
    with pytest.raises(ValueError):
        TrigPoly.from_arrays(1, [2, 3], [1])
    assert not TrigPoly(0.5, [(1, 0)]).exact


@given(trig_polys)
def test_scalar_and_array_evaluation_agree(p):
    assert np.allclose(p(T), reference(p, T), atol=1e-12)
    assert p(0.3) == pytest.approx(float(reference(p, np.array([0.3]))[0]), abs=1e-12)


@given(trig_polys, trig_polys)
def test_product_to_sum_multiplication_is_exact(p, q):
    r = p * q
    assert r.exact
    assert np.allclose(r(T), p(T) * q(T), atol=1e-9)
    assert r.degree <= p.degree + q.degree


@given(trig_polys, trig_polys)
def test_sum_and_difference(p, q):
    assert np.allclose((p + q)(T), p(T) + q(T), atol=1e-12)
    assert np.allclose((p - q)(T), p(T) - q(T), atol=1e-12)


@given(trig_polys)
def test_derivative_matches_central_differences(p):
    h = 1e-6
    t = T[1:-1]
    fd = (p(t + h) - p(t - h)) / (2 * h)
    assert np.allclose(p.derivative()(t), fd, atol=1e-5 * (1 + p.derivative_bound))
    assert np.max(np.abs(p.derivative()(T))) <= p.derivative_bound + 1e-9


def test_mean_is_the_constant_term():
    p = TrigPoly(Fraction(3, 2), [(1, 2), (5, -1)])
    tt = np.arange(4096) / 4096
    assert p.mean() == Fraction(3, 2)
    assert np.mean(p(tt)) == pytest.approx(1.5, abs=1e-12)


def test_exact_and_float_do_not_mix():
    with pytest.raises(PrecisionMismatch):
        TrigPoly(1, [(1, 0)]) + TrigPoly(0.5, [(1.0, 0.0)])


def test_exact_amplitude_boundary_cases():
    touching = certify_sign(TrigPoly(5, [(3, 4)]))  # 5 - 5 cos: touches zero
    assert touching.sign == "nonneg" and touching.method == "exact_amplitude" and touching.margin == 0
    assert touching.amplitude == (25, 25)
    below = certify_sign(TrigPoly(-2, [(1, 1)]))
    assert below.sign == "nonpos" and below.margin == pytest.approx(2 - 2 ** 0.5)
    assert certify_sign(TrigPoly(0)).sign == "zero_identically"


def test_sign_change_carries_a_witness():
    p = TrigPoly(Fraction(1, 2), [(1, 0)])
    check = certify_sign(p)
    assert check.sign is None
    t_hi, t_lo = check.witness
    assert p(t_hi) > 0 > p(t_lo)


@given(trig_polys)
def test_certified_sign_is_never_contradicted(p):
    check = certify_sign(p)
    v = p(np.linspace(0, 1, 10007))
    if check.sign == "nonneg":
        assert v.min() >= -1e-12
    elif check.sign == "nonpos":
        assert v.max() <= 1e-12
    elif check.sign == "zero_identically":
        assert np.all(v == 0)
    elif check.witness is not None:
        t1, t2 = check.witness
        assert p(t1) * p(t2) < 0


def test_grid_certificate_for_higher_harmonics():
    p = TrigPoly(3, [(1, 0), (0, 1), (Fraction(1, 2), 0)])
    check = certify_sign(p)
    assert check.method == "grid_lipschitz" and check.sign == "nonneg" and check.margin > 0
    q = TrigPoly(Fraction(1, 10), [(0, 0), (1, 0)])
    bad = certify_sign(q)
    assert bad.sign is None and q(bad.witness[0]) > 0 > q(bad.witness[1])


def test_strict_positivity():
    assert is_certified_positive(TrigPoly(3, [(1, 0)]))
    assert not is_certified_positive(TrigPoly(1, [(1, 0)]))  # touches zero
    assert not is_certified_positive(TrigPoly(-1))
