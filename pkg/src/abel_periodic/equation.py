"""Generalized Abel equations ``x' = S(x, t) = sum_i a_i(t) x**i`` with trig coefficients."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .poly import Number, Polynomial, is_rational
from .trig import TWO_PI, TrigPoly, is_certified_positive


class EquationError(ValueError):
    pass


class HarmonicDegreeTooHigh(EquationError):
    pass


class PositivityNotCertified(EquationError):
    pass


def _unify(polys: Sequence[TrigPoly]) -> tuple:
    if all(p.exact for p in polys):
        return tuple(polys)
    return tuple(p.as_float() for p in polys)


@dataclass(frozen=True, init=False)
class AbelEquation:
    """``coefficients[i]`` is ``a_i(t)``.

    ``denominator`` is only set for equations produced by :func:`transform`
    with a non-constant scaling curve; then ``S = numerator / denominator``
    with a certified positive denominator, and every sign question can be
    asked of the numerator alone.
    """

    coefficients: tuple
    denominator: TrigPoly | None

    def __init__(self, coefficients: Sequence[TrigPoly], denominator: TrigPoly | None = None):
        coeffs = [c if isinstance(c, TrigPoly) else TrigPoly(c) for c in coefficients]
        if len(coeffs) < 2:
            raise EquationError("an equation of degree m needs m + 1 >= 2 coefficients")
        if coeffs[-1].is_zero() and not all(c.is_zero() for c in coeffs):
            raise EquationError(f"leading coefficient a_{len(coeffs) - 1} is identically zero; degree is overstated")
        group = coeffs + ([denominator] if denominator is not None else [])
        group = _unify(group)
        object.__setattr__(self, "coefficients", group[: len(coeffs)])
        object.__setattr__(self, "denominator", group[-1] if denominator is not None else None)

    @classmethod
    def zero(cls, degree: int = 1) -> "AbelEquation":
        return cls([TrigPoly(0)] * (degree + 1))

    @classmethod
    def autonomous(cls, poly: Polynomial | Sequence[Number]) -> "AbelEquation":
        coeffs = poly.coeffs if isinstance(poly, Polynomial) else poly
        return cls([TrigPoly(c) for c in coeffs])

    @classmethod
    def from_polynomials(cls, f_a: Polynomial, f_b: Polynomial | None = None, f_c: Polynomial | None = None) -> "AbelEquation":
        """``S = f_a(x) + f_b(x) cos(2 pi t) + f_c(x) sin(2 pi t)``."""
        f_b = f_b or Polynomial()
        f_c = f_c or Polynomial()
        n = max(len(f_a.coeffs), len(f_b.coeffs), len(f_c.coeffs), 2)

        def get(p, i):
            return p.coeffs[i] if i < len(p.coeffs) else 0

        return cls([TrigPoly(get(f_a, i), [(get(f_b, i), get(f_c, i))]) for i in range(n)])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def exact(self) -> bool:
        return self.coefficients[0].exact

    @property
    def harmonic_degree(self) -> int:
        return max(c.degree for c in self.coefficients)

    @property
    def leading(self) -> TrigPoly:
        return self.coefficients[-1]

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coefficients)

    def as_float(self) -> "AbelEquation":
        den = self.denominator.as_float() if self.denominator is not None else None
        return AbelEquation([c.as_float() for c in self.coefficients], den)

    def along_line(self, lam: Number) -> TrigPoly:
        """The function ``t -> S(lam, t)`` (the numerator when a denominator is present)."""
        exact = self.exact and is_rational(lam)
        coeffs = self.coefficients if exact else [c.as_float() for c in self.coefficients]
        lam = lam if exact else float(lam)
        acc = coeffs[-1]
        for c in reversed(coeffs[:-1]):
            acc = acc * lam + c
        return acc

    def poly_at(self, t: float) -> Polynomial:
        """``S(., t)`` as a float polynomial in x."""
        den = float(self.denominator(t)) if self.denominator is not None else 1.0
        return Polynomial([float(c(t)) / den for c in self.coefficients])

    def coefficient_matrix(self):
        """Dense arrays ``(const, cos, sin)`` of shapes (m+1,), (m+1, N), (m+1, N)."""
        n = self.harmonic_degree
        const = np.array([float(c.constant) for c in self.coefficients])
        cos = np.zeros((self.degree + 1, n))
        sin = np.zeros((self.degree + 1, n))
        for i, c in enumerate(self.coefficients):
            for k, (a, b) in enumerate(c.harmonics):
                cos[i, k] = float(a)
                sin[i, k] = float(b)
        return const, cos, sin


def eval_S(eq: AbelEquation, x, t):
    """``S(x, t)``: Horner in x over the coefficient values at t."""
    acc = 0
    for c in reversed(eq.coefficients):
        acc = acc * x + c(t)
    if eq.denominator is not None:
        acc = acc / eq.denominator(t)
    return acc


def eval_S_x(eq: AbelEquation, x, t):
    acc = 0
    for i in range(eq.degree, 0, -1):
        acc = acc * x + i * eq.coefficients[i](t)
    if eq.denominator is not None:
        acc = acc / eq.denominator(t)
    return acc


def eval_S_xx(eq: AbelEquation, x, t):
    acc = 0
    for i in range(eq.degree, 1, -1):
        acc = acc * x + i * (i - 1) * eq.coefficients[i](t)
    if eq.denominator is not None:
        acc = acc / eq.denominator(t)
    return acc


def trig_reduce(eq: AbelEquation):
    """Split a degree-one trig equation into ``(f_a, f_b, f_c)``.

    ``S(x, t) = f_a(x) + f_b(x) cos(2 pi t) + f_c(x) sin(2 pi t)``.
    """
    if eq.harmonic_degree > 1:
        raise HarmonicDegreeTooHigh(f"harmonic degree {eq.harmonic_degree} > 1")
    if eq.denominator is not None:
        raise HarmonicDegreeTooHigh("quotient-form equations have no degree-one reduction")
    zero = eq.coefficients[0].constant * 0
    f_a = Polynomial([c.constant for c in eq.coefficients])
    f_b = Polynomial([c.harmonics[0][0] if c.harmonics else zero for c in eq.coefficients])
    f_c = Polynomial([c.harmonics[0][1] if c.harmonics else zero for c in eq.coefficients])
    return f_a, f_b, f_c


@dataclass(frozen=True)
class CurveFamily:
    """The curves ``x = lam * a(t) + b(t)``; ``a`` must be positive."""

    a: TrigPoly
    b: TrigPoly

    @classmethod
    def identity(cls) -> "CurveFamily":
        return cls(TrigPoly(1), TrigPoly(0))

    def is_identity(self) -> bool:
        return self.a.is_constant() and self.a.constant == 1 and self.b.is_zero()

    def certify_positive(self) -> bool:
        return is_certified_positive(self.a)

    def to_y(self, x, t=0.0):
        return (x - self.b(t)) / self.a(t)

    def to_x(self, y, t=0.0):
        return self.a(t) * y + self.b(t)


def _binomial_powers(curves: CurveFamily, m: int, exact: bool):
    """``pa[k] = a**k`` and ``pb[k] = b**k`` for k = 0..m."""
    a, b = curves.a, curves.b
    if not exact:
        a, b = a.as_float(), b.as_float()
    one = TrigPoly(Fraction(1) if exact else 1.0)
    pa, pb = [one], [one]
    for _ in range(m):
        pa.append(pa[-1] * a)
        pb.append(pb[-1] * b)
    return pa, pb


def transform(eq: AbelEquation, curves: CurveFamily) -> AbelEquation:
    """Rewrite the equation in ``y = (x - b(t)) / a(t)``.

    The new right-hand side is ``(S(a y + b, t) - a' y - b') / a``.  The
    numerator is expanded with exact product-to-sum algebra; division by a
    non-constant ``a`` is kept symbolic as the equation's denominator.
    """
    if eq.denominator is not None:
        raise EquationError("transform of a quotient-form equation is not supported")
    if not curves.certify_positive():
        raise PositivityNotCertified(f"could not certify a(t) > 0 for {curves.a!r}")
    if curves.is_identity():
        return eq
    m = eq.degree
    needs_float = not curves.a.is_constant() or not curves.b.is_constant()
    exact = eq.exact and curves.a.exact and curves.b.exact and not needs_float
    coeffs = list(eq.coefficients) if exact else [c.as_float() for c in eq.coefficients]
    pa, pb = _binomial_powers(curves, m, exact)
    zero = TrigPoly(Fraction(0) if exact else 0.0)
    num = []
    for k in range(m + 1):
        acc = zero
        for i in range(k, m + 1):
            if coeffs[i].is_zero():
                continue
            acc = acc + coeffs[i] * pa[k] * pb[i - k] * math.comb(i, k)
        num.append(acc)
    if needs_float:
        num[1] = num[1] - curves.a.derivative()
        num[0] = num[0] - curves.b.derivative()
    while len(num) > 2 and num[-1].is_zero():
        num.pop()
    if curves.a.is_constant():
        scale = curves.a.constant if exact else float(curves.a.constant)
        return AbelEquation([c * (1 / scale) if exact else c * (1.0 / scale) for c in num])
    return AbelEquation(num, curves.a.as_float())


def det_along_curve(eq: AbelEquation, curves: CurveFamily, lam: Number) -> TrigPoly:
    """``det(gamma_lam', v_S)`` along ``gamma_lam``, i.e. ``a(t) * S~(lam, t)``.

    Returned as a trig polynomial so its sign can be certified with the usual
    amplitude and derivative bounds.
    """
    tr = transform(eq, curves)
    line = tr.along_line(lam)
    if tr.denominator is not None:
        return line
    if curves.a.is_constant():
        a = curves.a.constant if line.exact else float(curves.a.constant)
        return line * a
    return line * curves.a.as_float()
