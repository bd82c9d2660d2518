"""Univariate real polynomials with an exact (Fraction) and a float representation.

A polynomial is *exact* when every coefficient is rational; it is then stored
as a tuple of :class:`fractions.Fraction`.  A single float coefficient makes
the whole polynomial a float polynomial.  Arithmetic between an exact and a
float polynomial raises :class:`PrecisionMismatch`; call :meth:`Polynomial.as_float`
first when that is really what you want.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction, float]

#: degree of the zero polynomial
ZERO_DEGREE = -math.inf


class PolynomialError(ValueError):
    pass


class ZeroPolynomial(PolynomialError):
    pass


class NonIncreasingNodes(PolynomialError):
    pass


class PrecisionMismatch(TypeError):
    pass


def is_rational(value) -> bool:
    return isinstance(value, Rational) and not isinstance(value, bool)


def normalize_coefficients(values: Iterable[Number]) -> tuple:
    """Return a trimmed tuple of Fractions, or of floats if any input is inexact."""
    values = list(values)
    if all(is_rational(v) for v in values):
        out = [Fraction(v) for v in values]
    else:
        out = [float(v) for v in values]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass(frozen=True, init=False)
class Polynomial:
    """``coeffs[i]`` is the coefficient of ``x**i``."""

    coeffs: tuple = field(default=())

    def __init__(self, coeffs: Iterable[Number] = ()):
        object.__setattr__(self, "coeffs", normalize_coefficients(coeffs))

    @classmethod
    def constant(cls, c: Number) -> "Polynomial":
        return cls([c])

    @classmethod
    def x(cls) -> "Polynomial":
        return cls([0, 1])

    @property
    def exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.coeffs)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> Number:
        return self.coeffs[-1] if self.coeffs else 0

    def as_float(self) -> "Polynomial":
        return Polynomial([float(c) for c in self.coeffs])

    def __call__(self, x):
        return eval_poly(self, x)

    def _check(self, other: "Polynomial"):
        if self.coeffs and other.coeffs and self.exact != other.exact:
            raise PrecisionMismatch("mixing exact and float polynomials; convert explicitly with as_float()")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        if isinstance(other, (int, float, Fraction)):
            if self.exact and not is_rational(other):
                raise PrecisionMismatch("float scalar with an exact polynomial")
            return Polynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (0,) * (n - len(self.coeffs))
        b = other.coeffs + (0,) * (n - len(other.coeffs))
        return Polynomial([u + v for u, v in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return Polynomial([-c for c in self.coeffs])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Polynomial([Fraction(1) if self.exact else 1.0])
        for _ in range(n):
            result = result * self
        return result

    def __divmod__(self, other: "Polynomial"):
        self._check(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(other.coeffs) - 1
        lead = other.coeffs[-1]
        quot = [0] * max(len(rem) - dq, 0)
        for k in range(len(rem) - dq - 1, -1, -1):
            q = rem[k + dq] / lead
            quot[k] = q
            for j, b in enumerate(other.coeffs):
                rem[k + j] -= q * b
            rem[k + dq] = 0
        return Polynomial(quot), Polynomial(rem[:dq])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self) -> "Polynomial":
        if self.is_zero():
            return self
        return Polynomial([c / self.leading for c in self.coeffs])

    def derivative(self) -> "Polynomial":
        return derivative(self)

    def __repr__(self):
        return f"Polynomial({[str(c) if isinstance(c, Fraction) else c for c in self.coeffs]})"


def eval_poly(p: Polynomial, x):
    """Horner evaluation; exact when ``p`` is exact and ``x`` is rational."""
    acc = 0
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def derivative(p: Polynomial) -> Polynomial:
    return Polynomial([i * c for i, c in enumerate(p.coeffs)][1:])


def lagrange_node_product(lambdas: Sequence[Number]) -> Polynomial:
    """Monic polynomial ``prod (x - lambda_i)`` over strictly increasing nodes."""
    for a, b in zip(lambdas, lambdas[1:]):
        if not a < b:
            raise NonIncreasingNodes(f"nodes must be strictly increasing, got {a} >= {b}")
    exact = all(is_rational(v) for v in lambdas)
    one = Fraction(1) if exact else 1.0
    f = Polynomial([one])
    for lam in lambdas:
        f = f * Polynomial([-lam, one])
    return f


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd of two exact polynomials (Euclid over the rationals)."""
    if not (p.exact and q.exact):
        raise PrecisionMismatch("gcd is only defined for exact polynomials")
    a, b = p, q
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def square_free_factors(p: Polynomial) -> list:
    """Yun's algorithm: ``[(g_1, 1), (g_2, 2), ...]`` with ``p = c * prod g_k**k``."""
    if p.is_zero():
        raise ZeroPolynomial("square-free decomposition of the zero polynomial")
    out = []
    dp = p.derivative()
    a = poly_gcd(p, dp)
    b = p // a
    c = dp // a
    d = c - b.derivative()
    k = 1
    while b.degree > 0:
        g = poly_gcd(b, d)
        if g.degree > 0:
            out.append((g, k))
        b = b // g
        c = d // g
        d = c - b.derivative()
        k += 1
    return out


def sturm_sequence(p: Polynomial) -> list:
    """Sturm chain; each member scaled by a positive constant to curb coefficient growth."""
    seq = [p, p.derivative()]
    while not seq[-1].is_zero():
        r = -(seq[-2] % seq[-1])
        if r.is_zero():
            break
        seq.append(Polynomial([c / abs(r.leading) for c in r.coeffs]))
    return [s for s in seq if not s.is_zero()]


def _variations(seq: list, x) -> int:
    signs = [s for s in (_sign(eval_poly(q, x)) for q in seq) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_distinct_roots(p: Polynomial, lo, hi, seq: list | None = None) -> int:
    """Number of distinct real roots of exact ``p`` in ``(lo, hi]``."""
    if seq is None:
        seq = sturm_sequence(p)
    return _variations(seq, lo) - _variations(seq, hi)


def cauchy_bound(p: Polynomial):
    """Every real root lies strictly inside ``(-B, B)``."""
    lead = abs(p.leading)
    m = max((abs(c) for c in p.coeffs[:-1]), default=0)
    return 1 + m / lead


@dataclass(frozen=True)
class IsolatedRoot:
    """A real root enclosed by ``[lo, hi]``.

    For the exact path ``factor`` is a square-free exact polynomial having this
    root and no other root in ``(lo, hi]``; ``exact`` holds the root itself
    when it turned out to be rational.
    """

    lo: Number
    hi: Number
    multiplicity: int
    value: float
    exact: Fraction | None = None
    factor: Polynomial | None = None

    def __float__(self):
        return float(self.exact) if self.exact is not None else self.value

    def refined(self, width) -> "IsolatedRoot":
        if self.exact is not None or self.factor is None:
            return self
        lo, hi = _refine(self.factor, self.lo, self.hi, width)
        if lo == hi:
            return IsolatedRoot(lo, hi, self.multiplicity, float(lo), lo, self.factor)
        return IsolatedRoot(lo, hi, self.multiplicity, float((lo + hi) / 2), None, self.factor)

    def sign_of(self, q: Polynomial) -> int:
        """Exact sign of ``q`` at this root (exact path only)."""
        if self.exact is not None:
            return _sign(eval_poly(q, self.exact))
        if self.factor is None or not q.exact:
            return _sign(eval_poly(q, self.value))
        if q.is_zero():
            return 0
        h = poly_gcd(self.factor, q)
        if h.degree > 0 and count_distinct_roots(h, self.lo, self.hi) > 0:
            return 0
        lo, hi = self.lo, self.hi
        qs = sturm_sequence(q)
        while count_distinct_roots(q, lo, hi, qs) > 0:
            lo, hi = _refine(self.factor, lo, hi, (hi - lo) / 4)
            if lo == hi:
                return _sign(eval_poly(q, lo))
        return _sign(eval_poly(q, hi))


@dataclass(frozen=True)
class RootIsolation:
    roots: tuple
    method: str  # "sturm_exact" | "bisection_float"

    @property
    def values(self) -> list:
        return [float(r) for r in self.roots]

    def __len__(self):
        return len(self.roots)


def _refine(g: Polynomial, lo, hi, width):
    """Bisect a sign-changing isolating interval ``(lo, hi]`` of square-free ``g``."""
    glo = _sign(eval_poly(g, lo))
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign(eval_poly(g, mid))
        if s == 0:
            return mid, mid
        if s == glo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _as_rational(g: Polynomial, lo, hi):
    """Look for a small-denominator rational root inside ``[lo, hi]``."""
    mid = (lo + hi) / 2
    for bound in (1, 10, 100, 10**4, 10**6):
        q = mid.limit_denominator(bound)
        if lo <= q <= hi and eval_poly(g, q) == 0:
            return q
    return None


def _isolate_square_free(g: Polynomial, tol) -> list:
    seq = sturm_sequence(g)
    B = Fraction(cauchy_bound(g))
    stack = [(-B, B)]
    found = []
    while stack:
        lo, hi = stack.pop()
        n = count_distinct_roots(g, lo, hi, seq)
        if n == 0:
            continue
        if eval_poly(g, hi) == 0 and n == 1:
            found.append((hi, hi))
            continue
        if n == 1 and eval_poly(g, lo) != 0:
            found.append((lo, hi))
            continue
        mid = (lo + hi) / 2
        stack.append((lo, mid))
        stack.append((mid, hi))
    out = []
    for lo, hi in found:
        if lo != hi:
            lo, hi = _refine(g, lo, hi, Fraction(tol))
        exact = lo if lo == hi else _as_rational(g, lo, hi)
        out.append((lo, hi, exact))
    return out


def _isolate_exact(p: Polynomial, tol) -> RootIsolation:
    factors = square_free_factors(p)
    sqf = Polynomial([1])
    for g, _ in factors:
        sqf = sqf * g
    roots = []
    for lo, hi, exact in _isolate_square_free(sqf, tol):
        if exact is not None:
            mult = next(k for g, k in factors if eval_poly(g, exact) == 0)
            roots.append(IsolatedRoot(exact, exact, mult, float(exact), exact, sqf))
            continue
        mult = next(k for g, k in factors if count_distinct_roots(g, lo, hi) > 0)
        roots.append(IsolatedRoot(lo, hi, mult, float((lo + hi) / 2), None, sqf))
    roots.sort(key=lambda r: r.lo)
    return RootIsolation(tuple(roots), "sturm_exact")


def _scale(coeffs, x) -> float:
    r = max(1.0, abs(x))
    return sum(abs(c) * r**i for i, c in enumerate(coeffs)) or 1.0


def _float_critical_roots(coeffs: tuple, tol: float) -> list:
    """Distinct real roots of a float polynomial via Rolle recursion on derivatives."""
    deg = len(coeffs) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [-coeffs[0] / coeffs[1]]
    d = tuple(i * c for i, c in enumerate(coeffs))[1:]
    crit = sorted(_float_critical_roots(d, tol))
    B = float(cauchy_bound(Polynomial(coeffs)))
    pts = [-B] + [c for c in crit if -B < c < B] + [B]

    def val(x):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    cands = []
    for a, b in zip(pts, pts[1:]):
        fa, fb = val(a), val(b)
        if fa == 0:
            cands.append(a)
            continue
        if fa * fb < 0:
            lo, hi = a, b
            while hi - lo > tol * max(1.0, abs(lo)):
                mid = 0.5 * (lo + hi)
                fm = val(mid)
                if fm == 0:
                    lo = hi = mid
                    break
                if (fm > 0) == (fa > 0):
                    lo = mid
                else:
                    hi = mid
            cands.append(0.5 * (lo + hi))
    for c in crit:
        if abs(val(c)) <= 1e-9 * _scale(coeffs, c):
            cands.append(c)
    cands.sort()
    merged = []
    for c in cands:
        if merged and abs(c - merged[-1]) <= 1e-7 * max(1.0, abs(c)):
            continue
        merged.append(c)
    return merged


def _isolate_float(p: Polynomial, tol) -> RootIsolation:
    roots = []
    derivs = [p]
    for _ in range(len(p.coeffs) - 1):
        derivs.append(derivs[-1].derivative())
    for r in _float_critical_roots(p.coeffs, tol):
        mult = 1
        while mult < p.degree and abs(derivs[mult](r)) <= 1e-9 * _scale(derivs[mult].coeffs, r) * math.factorial(mult):
            mult += 1
        half = tol * max(1.0, abs(r))
        roots.append(IsolatedRoot(r - half, r + half, mult, r))
    return RootIsolation(tuple(roots), "bisection_float")


def isolate_real_roots(p: Polynomial, tol: float = 1e-12) -> RootIsolation:
    """Enclose every real root of ``p`` in a disjoint interval of width <= ``tol``.

    Exact polynomials go through square-free decomposition and Sturm counting,
    so each interval provably holds exactly one distinct root whose
    multiplicity is read off the square-free factor it belongs to.  Float
    polynomials use bisection between consecutive critical points.
    """
    if p.is_zero():
        raise ZeroPolynomial("cannot isolate the roots of the zero polynomial")
    if p.exact:
        return _isolate_exact(p, tol)
    return _isolate_float(p, tol)
