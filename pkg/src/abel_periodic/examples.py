"""The worked equations used throughout the test-suite and ``abel-periodic reproduce``."""
from __future__ import annotations

from .equation import AbelEquation, CurveFamily
from .poly import Polynomial
from .trig import TrigPoly

COS = TrigPoly.cos()


def quartic_four_cycles() -> AbelEquation:
    """``x' = x^4 + x^3 - 13 x^2 - x + 12 = (x+4)(x+1)(x-1)(x-3)``."""
    return AbelEquation.autonomous([12, -1, -13, 1, 1])


def cubic_cos() -> AbelEquation:
    """``x' = (1+5c) x^3 - 15c x^2 - (4+5c) x + 15c`` with ``c = cos(2 pi t)``."""
    return AbelEquation([15 * COS, -(4 + 5 * COS), -15 * COS, 1 + 5 * COS])


def quartic_cos() -> AbelEquation:
    """Degree-one trigonometric quartic; every coefficient changes sign."""
    return AbelEquation([
        6 * (3 + 5 * COS),
        45 + 47 * COS,
        -2 * (3 + 10 * COS),
        -(15 + 17 * COS),
        3 + 5 * COS,
    ])


def cubic_cos_cubed() -> AbelEquation:
    """Cubic whose coefficients contain ``cos^2`` and ``cos^3``; needs a curve family."""
    return AbelEquation([
        TrigPoly(-1),
        -(36 * COS + 24 * COS**2 + 4 * COS**3),
        2 + 9 * COS + 3 * COS**2,
        COS,
    ])


def cubic_cos_cubed_curves() -> CurveFamily:
    return CurveFamily(3 + COS, TrigPoly(0))


def sharp_example(lambdas) -> AbelEquation:
    """``x' = prod (x - lambda_i)``: exactly m hyperbolic periodic solutions."""
    from .poly import lagrange_node_product

    return AbelEquation.autonomous(lagrange_node_product(lambdas))


__all__ = [
    "quartic_four_cycles",
    "cubic_cos",
    "quartic_cos",
    "cubic_cos_cubed",
    "cubic_cos_cubed_curves",
    "sharp_example",
    "Polynomial",
]
