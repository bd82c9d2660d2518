"""Real trigonometric polynomials of period 1.

``p(t) = c0 + sum_k (a_k cos(2 pi k t) + b_k sin(2 pi k t))``.  Exactness
follows the rule used for :class:`~abel_periodic.poly.Polynomial`: all-rational
coefficients are kept as Fractions, otherwise everything is float.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .poly import Number, PrecisionMismatch, is_rational

TWO_PI = 2.0 * math.pi

#: grid size for the Lipschitz sign certificate
DEFAULT_SIGN_GRID = 4096


def _normalize(constant, harmonics):
    flat = [constant] + [v for pair in harmonics for v in pair]
    if all(is_rational(v) for v in flat):
        conv = Fraction
    else:
        conv = float
    c0 = conv(constant)
    hs = [(conv(a), conv(b)) for a, b in harmonics]
    while hs and hs[-1][0] == 0 and hs[-1][1] == 0:
        hs.pop()
    return c0, tuple(hs)


@dataclass(frozen=True, init=False)
class TrigPoly:
    constant: Number
    harmonics: tuple  # entry k-1 is (cos coefficient, sin coefficient) of harmonic k

    def __init__(self, constant: Number = 0, harmonics: Iterable[Sequence[Number]] = ()):
        c0, hs = _normalize(constant, [tuple(h) for h in harmonics])
        object.__setattr__(self, "constant", c0)
        object.__setattr__(self, "harmonics", hs)

    @classmethod
    def cos(cls, k: int = 1, coeff: Number = 1) -> "TrigPoly":
        return cls(0, [(0, 0)] * (k - 1) + [(coeff, 0)])

    @classmethod
    def sin(cls, k: int = 1, coeff: Number = 1) -> "TrigPoly":
        return cls(0, [(0, 0)] * (k - 1) + [(0, coeff)])

    @classmethod
    def from_arrays(cls, constant, cos_coeffs, sin_coeffs) -> "TrigPoly":
        if len(cos_coeffs) != len(sin_coeffs):
            raise ValueError("cos and sin coefficient lists differ in length")
        return cls(constant, zip(cos_coeffs, sin_coeffs))

    @property
    def degree(self) -> int:
        return len(self.harmonics)

    @property
    def exact(self) -> bool:
        return isinstance(self.constant, Fraction)

    def is_zero(self) -> bool:
        return self.constant == 0 and not self.harmonics

    def is_constant(self) -> bool:
        return not self.harmonics

    @property
    def cos_coeffs(self) -> list:
        return [a for a, _ in self.harmonics]

    @property
    def sin_coeffs(self) -> list:
        return [b for _, b in self.harmonics]

    def as_float(self) -> "TrigPoly":
        return TrigPoly(float(self.constant), [(float(a), float(b)) for a, b in self.harmonics])

    @property
    def amplitude_bound(self) -> float:
        return abs(self.constant) + sum(abs(a) + abs(b) for a, b in self.harmonics)

    @property
    def derivative_bound(self) -> float:
        return TWO_PI * float(sum(k * (abs(a) + abs(b)) for k, (a, b) in enumerate(self.harmonics, 1)))

    def mean(self) -> Number:
        """Integral over one period."""
        return self.constant

    def __call__(self, t):
        if not self.harmonics:
            if isinstance(t, np.ndarray):
                return np.full(t.shape, float(self.constant))
            return self.constant
        if isinstance(t, np.ndarray):
            tt = np.mod(t, 1.0)
            out = np.full(tt.shape, float(self.constant))
            for k, (a, b) in enumerate(self.harmonics, 1):
                w = TWO_PI * k * tt
                if a:
                    out += float(a) * np.cos(w)
                if b:
                    out += float(b) * np.sin(w)
            return out
        tt = float(t) % 1.0
        out = float(self.constant)
        for k, (a, b) in enumerate(self.harmonics, 1):
            w = TWO_PI * k * tt
            out += float(a) * math.cos(w) + float(b) * math.sin(w)
        return out

    def derivative(self) -> "TrigPoly":
        """Exact-in-form derivative; the 2*pi factor makes the result float."""
        hs = [(TWO_PI * k * float(b), -TWO_PI * k * float(a)) for k, (a, b) in enumerate(self.harmonics, 1)]
        return TrigPoly(0.0, hs)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "TrigPoly":
        if isinstance(other, TrigPoly):
            if self.exact != other.exact and not (self.is_zero() or other.is_zero()):
                raise PrecisionMismatch("mixing exact and float trig polynomials; use as_float()")
            return other
        if isinstance(other, (int, float, Fraction)):
            if self.exact and not is_rational(other) and not self.is_zero():
                raise PrecisionMismatch("float scalar with an exact trig polynomial")
            return TrigPoly(other)
        return NotImplemented

    def _arrays(self, n: int):
        cos = [self.constant] + [a for a, _ in self.harmonics]
        sin = [0] + [b for _, b in self.harmonics]
        pad = n + 1 - len(cos)
        return cos + [0] * pad, sin + [0] * pad

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(self.degree, other.degree)
        c1, s1 = self._arrays(n)
        c2, s2 = other._arrays(n)
        return TrigPoly(c1[0] + c2[0], [(c1[k] + c2[k], s1[k] + s2[k]) for k in range(1, n + 1)])

    __radd__ = __add__

    def __neg__(self):
        return TrigPoly(-self.constant, [(-a, -b) for a, b in self.harmonics])

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
        if self.is_zero() or other.is_zero():
            return TrigPoly(Fraction(0) if self.exact and other.exact else 0.0)
        n1, n2 = self.degree, other.degree
        c1, s1 = self._arrays(n1)
        c2, s2 = other._arrays(n2)
        n = n1 + n2
        zero = c1[0] - c1[0]
        cos = [zero] * (n + 1)
        sin = [zero] * (n + 1)
        half = Fraction(1, 2) if self.exact else 0.5
        # product-to-sum with index 0 the constant term (sin_0 = 0)
        for j in range(n1 + 1):
            for k in range(n2 + 1):
                cc = c1[j] * c2[k]
                ss = s1[j] * s2[k]
                sc = s1[j] * c2[k]
                cs = c1[j] * s2[k]
                if not (cc or ss or sc or cs):
                    continue
                p, d = j + k, abs(j - k)
                sgn = 1 if j >= k else -1
                cos[p] += half * (cc - ss)
                cos[d] += half * (cc + ss)
                sin[p] += half * (sc + cs)
                sin[d] += half * sgn * (sc - cs)
        return TrigPoly(cos[0], [(cos[k], sin[k]) for k in range(1, n + 1)])

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = TrigPoly(Fraction(1) if self.exact else 1.0)
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        def fmt(v):
            return str(v) if isinstance(v, Fraction) else repr(v)

        hs = ", ".join(f"({fmt(a)}, {fmt(b)})" for a, b in self.harmonics)
        return f"TrigPoly({fmt(self.constant)}, [{hs}])"


@dataclass(frozen=True)
class SignCheck:
    """Outcome of a rigorous sign check of a trigonometric polynomial on [0, 1].

    ``sign`` is ``"nonneg"``, ``"nonpos"``, ``"zero_identically"`` or ``None``
    when no fixed sign could be certified.  ``witness`` holds two times with
    values of opposite strict sign when a sign change was proven.
    """

    sign: str | None
    method: str
    margin: float
    witness: tuple | None = None
    amplitude: tuple | None = None

    @property
    def certified(self) -> bool:
        return self.sign is not None


def _exact_amplitude(p: TrigPoly) -> SignCheck:
    a0 = p.constant
    if p.harmonics:
        c, s = p.harmonics[0]
    else:
        c = s = a0 - a0
    r2 = c * c + s * s
    amp = (a0 * a0, r2)
    if a0 == 0 and r2 == 0:
        return SignCheck("zero_identically", "exact_amplitude", 0.0, amplitude=amp)
    if a0 * a0 >= r2 and a0 != 0:
        margin = abs(float(a0)) - math.sqrt(float(r2))
        return SignCheck("nonneg" if a0 > 0 else "nonpos", "exact_amplitude", max(margin, 0.0), amplitude=amp)
    t_max = (math.atan2(float(s), float(c)) / TWO_PI) % 1.0
    t_min = (t_max + 0.5) % 1.0
    return SignCheck(None, "exact_amplitude", 0.0, witness=(t_max, t_min), amplitude=amp)


def _grid_lipschitz(p: TrigPoly, n: int) -> SignCheck:
    t = np.arange(n) / n
    v = p(t)
    # cell slack plus a floating-point allowance for evaluating the grid values
    slack = p.derivative_bound * (0.5 / n) + 1e-13 * p.amplitude_bound
    lo, hi = float(v.min()), float(v.max())
    if lo > slack:
        return SignCheck("nonneg", "grid_lipschitz", lo - slack)
    if hi < -slack:
        return SignCheck("nonpos", "grid_lipschitz", -hi - slack)
    if lo < 0 < hi:
        return SignCheck(None, "grid_lipschitz", 0.0, witness=(float(t[v.argmax()]), float(t[v.argmin()])))
    return SignCheck(None, "grid_lipschitz", 0.0)


def certify_sign(p: TrigPoly, grid: int = DEFAULT_SIGN_GRID) -> SignCheck:
    """Decide whether ``p`` keeps a fixed sign on [0, 1].

    Harmonic degree <= 1 is decided exactly by ``c0**2 >= a1**2 + b1**2``;
    higher degrees use a uniform grid plus the derivative bound.
    """
    if p.is_zero():
        return SignCheck("zero_identically", "exact_amplitude", 0.0, amplitude=(p.constant * 0, p.constant * 0))
    if p.degree <= 1:
        return _exact_amplitude(p)
    return _grid_lipschitz(p, grid)


def is_certified_positive(p: TrigPoly, grid: int = DEFAULT_SIGN_GRID) -> bool:
    """Strict positivity: cheap amplitude test first, grid certificate second."""
    harm = sum(abs(a) + abs(b) for a, b in p.harmonics)
    if p.constant - harm > 0:
        return True
    check = certify_sign(p, grid)
    if check.sign != "nonneg":
        return False
    if check.method == "exact_amplitude":
        a0, r2 = check.amplitude
        return a0 > r2
    return check.margin > 0
