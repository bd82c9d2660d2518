"""Sign certificates on straight lines and curves, and the Lagrange decomposition.

A certificate for ``m`` nodes ``l_1 < ... < l_m`` proves that
``(-1)**i * S(l_i, t)`` keeps one fixed sign (>= 0 for every i, or <= 0 for
every i), which caps the number of isolated periodic solutions at ``m``.
"""
from __future__ import annotations

import decimal
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .equation import AbelEquation, CurveFamily, HarmonicDegreeTooHigh, transform, trig_reduce
from .poly import (
    IsolatedRoot,
    Number,
    Polynomial,
    ZeroPolynomial,
    eval_poly,
    is_rational,
    isolate_real_roots,
    lagrange_node_product,
    poly_gcd,
)
from .trig import DEFAULT_SIGN_GRID, SignCheck, TrigPoly, certify_sign

NONNEG = "alternating_start_nonneg"
NONPOS = "alternating_start_nonpos"

#: relative tolerance for calling a float value of f_a zero at a root of F
FLOAT_ZERO_RTOL = 1e-9


class CertificationError(Exception):
    pass


class WrongNodeCount(CertificationError, ValueError):
    pass


class NotCertifiable(CertificationError):
    """A node whose line is not sign-definite, or whose sign breaks the alternation.

    ``reason`` is ``"sign_change"`` (``witness`` holds two times with values of
    opposite sign), ``"inconclusive"`` (grid certificate too coarse) or
    ``"pattern"`` (definite sign, but the wrong one; ``conflicts_with`` is the
    index of the node that fixed the pattern).
    """

    def __init__(self, index: int, node, reason: str, witness=None, conflicts_with: int | None = None, evidence=()):
        self.index = index
        self.node = node
        self.reason = reason
        self.witness = witness
        self.conflicts_with = conflicts_with
        self.evidence = tuple(evidence)
        msg = f"node {index} (lambda = {_fmt(node)}) not certifiable: {reason}"
        if witness is not None:
            msg += f", witness t = {witness}"
        if conflicts_with is not None:
            msg += f", conflicts with node {conflicts_with}"
        super().__init__(msg)


class NoAdmissibleSubsequence(CertificationError):
    def __init__(self, roots):
        self.roots = tuple(roots)
        super().__init__(f"no admissible alternating choice among {len(self.roots)} real zeros of f_a^2 - f_b^2 - f_c^2")


class NodeEvaluation(ValueError):
    pass


def _fmt(node) -> str:
    if isinstance(node, IsolatedRoot):
        return f"{node.value:.15g}"
    return str(node)


def node_value(node) -> float:
    return float(node)


@dataclass(frozen=True)
class SignEvidence:
    """Per-node outcome.  ``value`` is the mean of ``S(node, .)`` over a period."""

    node: object
    sign: str
    method: str
    margin: float
    witness: tuple | None
    value: Number

    @property
    def sigma(self) -> int:
        return {"nonneg": 1, "nonpos": -1}.get(self.sign, 0)


@dataclass(frozen=True)
class HypothesisCertificate:
    kind: str  # "H" | "C" | "H_prime"
    nodes: tuple
    pattern: str
    evidence: tuple
    bound: int
    all_nodes_identically_zero: bool
    curves: CurveFamily | None = None
    alternatives: tuple = ()

    @property
    def node_values(self) -> list:
        return [float(n) for n in self.nodes]


def _check_nodes(nodes: Sequence, m: int):
    if len(nodes) != m:
        raise WrongNodeCount(f"expected {m} nodes, got {len(nodes)}")
    vals = [float(n) if isinstance(n, IsolatedRoot) else n for n in nodes]
    for a, b in zip(vals, vals[1:]):
        if not a < b:
            raise WrongNodeCount(f"nodes must be strictly increasing ({a} >= {b})")


def _algebraic_line_check(eq: AbelEquation, root: IsolatedRoot):
    """Exact sign check of ``S(root, .)`` for degree-one trig equations at an algebraic node."""
    f_a, f_b, f_c = trig_reduce(eq)
    F = f_a * f_a - f_b * f_b - f_c * f_c
    sa = root.sign_of(f_a)
    if sa == 0 and root.sign_of(f_b) == 0 and root.sign_of(f_c) == 0:
        return SignCheck("zero_identically", "exact_amplitude", 0.0, amplitude=(0.0, 0.0)), 0.0
    va, vb, vc = (float(eval_poly(p.as_float(), root.value)) for p in (f_a, f_b, f_c))
    amp = (va * va, vb * vb + vc * vc)
    if root.sign_of(F) >= 0 and sa != 0:
        margin = max(abs(va) - math.sqrt(amp[1]), 0.0)
        return SignCheck("nonneg" if sa > 0 else "nonpos", "exact_amplitude", margin, amplitude=amp), va
    t_max = (math.atan2(vc, vb) / (2 * math.pi)) % 1.0
    return SignCheck(None, "exact_amplitude", 0.0, witness=(t_max, (t_max + 0.5) % 1.0), amplitude=amp), va


def line_evidence(eq: AbelEquation, node, grid: int = DEFAULT_SIGN_GRID) -> tuple:
    """``(SignCheck, mean value)`` for the line ``x = node``."""
    if isinstance(node, IsolatedRoot):
        if node.exact is not None:
            node = node.exact
        elif eq.exact and eq.harmonic_degree <= 1 and eq.denominator is None:
            return _algebraic_line_check(eq, node)
        else:
            node = node.value
    line = eq.along_line(node)
    return certify_sign(line, grid), line.constant


def _resolve_pattern(evidence: Sequence[SignEvidence], nodes) -> str:
    pattern_sigma = None
    fixer = None
    for i, ev in enumerate(evidence, 1):
        if ev.sigma == 0:
            continue
        want = (-1) ** i * ev.sigma
        if pattern_sigma is None:
            pattern_sigma, fixer = want, i
        elif want != pattern_sigma:
            raise NotCertifiable(i, nodes[i - 1], "pattern", conflicts_with=fixer, evidence=evidence)
    return NONPOS if pattern_sigma == -1 else NONNEG


def certify_H(eq: AbelEquation, lambdas: Sequence, grid: int = DEFAULT_SIGN_GRID, kind: str = "H") -> HypothesisCertificate:
    """Certify that ``(-1)**i S(lambda_i, t)`` has one fixed sign for all i and t.

    Raises :class:`NotCertifiable` naming the first offending node.
    """
    _check_nodes(lambdas, eq.degree)
    evidence = []
    for i, lam in enumerate(lambdas, 1):
        check, value = line_evidence(eq, lam, grid)
        if check.sign is None:
            reason = "sign_change" if check.witness is not None else "inconclusive"
            raise NotCertifiable(i, lam, reason, witness=check.witness, evidence=evidence)
        evidence.append(SignEvidence(lam, check.sign, check.method, check.margin, check.amplitude, value))
    pattern = _resolve_pattern(evidence, lambdas)
    all_zero = all(ev.sign == "zero_identically" for ev in evidence)
    return HypothesisCertificate(kind, tuple(lambdas), pattern, tuple(evidence), eq.degree, all_zero)


def certify_H_prime(eq: AbelEquation, curves: CurveFamily, lambdas: Sequence, grid: int = DEFAULT_SIGN_GRID) -> HypothesisCertificate:
    """Certify the alternating sign of ``det(gamma_lam', v_S)`` along the curve family.

    Equivalent to :func:`certify_H` on the transformed equation; only the
    numerator matters because ``a(t) > 0``.
    """
    tr = transform(eq, curves)
    cert = certify_H(tr, lambdas, grid, kind="H_prime")
    return HypothesisCertificate("H_prime", cert.nodes, cert.pattern, cert.evidence, cert.bound,
                                 cert.all_nodes_identically_zero, curves)


@dataclass(frozen=True)
class AnnotatedRoot:
    root: IsolatedRoot | Fraction | float
    f_a_sign: int
    f_a_value: Number

    @property
    def value(self) -> float:
        return float(self.root)


def _annotate_roots(f_a: Polynomial, F: Polynomial) -> list:
    iso = isolate_real_roots(F)
    out = []
    for r in iso.roots:
        if r.exact is not None:
            v = eval_poly(f_a, r.exact)
            out.append(AnnotatedRoot(r.exact, (v > 0) - (v < 0), v))
        elif F.exact:
            s = r.sign_of(f_a)
            out.append(AnnotatedRoot(r, s, float(eval_poly(f_a.as_float(), r.value)) if s else 0.0))
        else:
            v = float(eval_poly(f_a, r.value))
            scale = sum(abs(c) * max(1.0, abs(r.value)) ** i for i, c in enumerate(f_a.coeffs)) or 1.0
            s = 0 if abs(v) <= FLOAT_ZERO_RTOL * scale else (1 if v > 0 else -1)
            out.append(AnnotatedRoot(r.value, s, v))
    return out


def _degenerate_candidates(f_a: Polynomial) -> list:
    """``F`` vanishes identically: every point qualifies, so sample around the roots of f_a."""
    exact = f_a.exact
    if f_a.is_zero():
        pts = [Fraction(k) if exact else float(k) for k in range(-1, 2 * 8)]
        return [AnnotatedRoot(p, 0, 0 * p) for p in pts]
    roots = [float(r) if not exact or r.exact is None else r.exact for r in isolate_real_roots(f_a).roots] if f_a.degree > 0 else []
    pts = []
    if roots:
        one = Fraction(1) if exact else 1.0
        pts.append(roots[0] - one)
        for a, b in zip(roots, roots[1:]):
            pts.append(a)
            pts.append((a + b) / 2)
        pts.append(roots[-1])
        pts.append(roots[-1] + one)
    else:
        pts.append(Fraction(0) if exact else 0.0)
    out = []
    for p in pts:
        v = eval_poly(f_a, p)
        out.append(AnnotatedRoot(p, (v > 0) - (v < 0), v))
    return out


def admissible_subsequences(roots: Sequence[AnnotatedRoot], m: int, limit: int = 100_000) -> list:
    """All length-m index tuples whose f_a signs alternate (zeros allowed), both patterns."""
    found = set()
    n = len(roots)
    signs = [r.f_a_sign for r in roots]

    for sigma in (1, -1):
        stack = [()]
        while stack and len(found) < limit:
            chosen = stack.pop()
            i = len(chosen) + 1
            if i > m:
                found.add(chosen)
                continue
            start = chosen[-1] + 1 if chosen else 0
            need = sigma * (-1) ** i
            for j in range(n - (m - i) - 1, start - 1, -1):
                if signs[j] == 0 or signs[j] == need:
                    stack.append(chosen + (j,))
    return sorted(found)


def certify_C(eq: AbelEquation) -> HypothesisCertificate:
    """Algebraic criterion for degree-one trig equations.

    Finds zeros ``k_1 < ... < k_m`` of ``f_a^2 - f_b^2 - f_c^2`` at which f_a
    alternates in sign.  Every admissible choice is listed in
    ``alternatives``; the lexicographically smallest one is the certificate's
    node sequence.
    """
    f_a, f_b, f_c = trig_reduce(eq)
    m = eq.degree
    F = f_a * f_a - f_b * f_b - f_c * f_c
    if F.is_zero():
        roots = _degenerate_candidates(f_a)
    else:
        roots = _annotate_roots(f_a, F)
    choices = admissible_subsequences(roots, m)
    if not choices:
        raise NoAdmissibleSubsequence(roots)
    # prefer choices with the fewest identically-zero lines, then lexicographic
    choices.sort(key=lambda c: (sum(roots[j].f_a_sign == 0 for j in c), c))
    picks = [tuple(roots[j] for j in c) for c in choices]
    nodes = [tuple(r.root for r in p) for p in picks]
    evidence = []
    for r in picks[0]:
        if r.f_a_sign == 0:
            sign = "zero_identically"
        else:
            sign = "nonneg" if r.f_a_sign > 0 else "nonpos"
        fa = r.f_a_value
        evidence.append(SignEvidence(r.root, sign, "exact_amplitude", 0.0, (fa * fa, fa * fa), fa))
    pattern = _resolve_pattern(evidence, nodes[0])
    all_zero = all(ev.sign == "zero_identically" for ev in evidence)
    return HypothesisCertificate("C", nodes[0], pattern, tuple(evidence), m, all_zero, alternatives=tuple(nodes))


def has_constant_periodic_solution(eq: AbelEquation) -> bool:
    """True when some real x makes ``S(x, .)`` vanish identically (exact, degree-one trig)."""
    f_a, f_b, f_c = trig_reduce(eq)
    if not eq.exact:
        raise ValueError("constant-solution test needs exact coefficients")
    g = f_a
    for p in (f_b, f_c):
        if not p.is_zero():
            g = poly_gcd(g, p) if not g.is_zero() else p
    if g.is_zero():
        return True
    if g.degree <= 0:
        return False
    return len(isolate_real_roots(g)) > 0


# -- node search --------------------------------------------------------------


def suggest_nodes(eq: AbelEquation, x_range=(-10, 10), step: Number = Fraction(1, 4), grid: int = DEFAULT_SIGN_GRID):
    """Look for nodes satisfying the line hypothesis; ``None`` means nothing was found.

    Degree-one trig equations try the algebraic criterion first.  Otherwise
    (or if that fails) scan lines ``x = const`` on a grid, keep the
    sign-definite ones, and take m consecutive runs of alternating sign.
    """
    m = eq.degree
    algebraic = None
    if eq.harmonic_degree <= 1 and eq.denominator is None and not eq.is_zero():
        try:
            cert = certify_C(eq)
        except (NoAdmissibleSubsequence, ZeroPolynomial):
            cert = None
        if cert is not None:
            if not cert.all_nodes_identically_zero:
                return list(cert.nodes)
            algebraic = list(cert.nodes)
    scanned = _scan_lines(eq, m, x_range, step, grid)
    return scanned if scanned is not None else algebraic


def _scan_lines(eq: AbelEquation, m: int, x_range, step, grid):
    lo, hi = x_range
    if eq.exact:
        xs, x = [], Fraction(lo)
        while x <= hi:
            xs.append(x)
            x += Fraction(step)
    else:
        xs = list(np.arange(float(lo), float(hi) + 1e-12, float(step)))
    runs: list[list] = []
    for x in xs:
        check = certify_sign(eq.along_line(x), grid)
        if check.sign not in ("nonneg", "nonpos"):
            continue
        s = 1 if check.sign == "nonneg" else -1
        if runs and runs[-1][0] == s:
            runs[-1][1].append((check.margin, x))
        else:
            runs.append([s, [(check.margin, x)]])
    if len(runs) < m:
        return None
    reps = [max(r[1], key=lambda mx: mx[0]) for r in runs]
    best = max(range(len(reps) - m + 1), key=lambda k: min(r[0] for r in reps[k:k + m]))
    nodes = [x for _, x in reps[best:best + m]]
    try:
        certify_H(eq, nodes, grid)
    except CertificationError:
        return None
    return nodes


# -- Lagrange decomposition ---------------------------------------------------


@dataclass(frozen=True)
class Decomposition:
    """``S = (leading + sum_i w_i / (x - l_i)) * f`` with ``f = prod (x - l_i)``.

    For quotient-form equations everything refers to the numerator.
    """

    lambdas: tuple
    f: Polynomial
    weights: tuple
    leading: TrigPoly
    numerator: AbelEquation = field(repr=False)

    def _weights_at(self, t):
        return [w(t) for w in self.weights]

    def _check_x(self, x):
        lam = np.asarray([float(v) for v in self.lambdas])
        if np.any(np.isin(np.asarray(x, dtype=float), lam)):
            raise NodeEvaluation("I_S, R_S and G are undefined at a node")


def _node_scalar(node):
    if isinstance(node, IsolatedRoot):
        return node.exact if node.exact is not None else node.value
    return node


def decompose(eq: AbelEquation, lambdas: Sequence) -> Decomposition:
    _check_nodes(lambdas, eq.degree)
    lams = [_node_scalar(v) for v in lambdas]
    exact = eq.exact and all(is_rational(v) for v in lams)
    if exact:
        lams = [Fraction(v) for v in lams]
    else:
        lams = [float(v) for v in lams]
    num = AbelEquation(eq.coefficients) if eq.denominator is not None else eq
    if not exact and num.exact:
        num = num.as_float()
    f = lagrange_node_product(lams)
    weights = []
    for i, li in enumerate(lams):
        denom = 1
        for j, lj in enumerate(lams):
            if j != i:
                denom *= li - lj
        weights.append(num.along_line(li) * (1 / denom))
    return Decomposition(tuple(lams), f, tuple(weights), num.leading, num)


def compose(lambdas: Sequence[Number], node_functions: Sequence[TrigPoly], leading: TrigPoly) -> AbelEquation:
    """Inverse of :func:`decompose`: the equation with prescribed ``S(l_i, .)`` and ``a_m``."""
    m = len(lambdas)
    if len(node_functions) != m:
        raise WrongNodeCount(f"{m} nodes but {len(node_functions)} node functions")
    f = lagrange_node_product(lambdas)
    exact = f.exact and leading.exact and all(p.exact for p in node_functions)
    zero = TrigPoly(Fraction(0) if exact else 0.0)
    if not exact:
        f = f.as_float()
        leading = leading.as_float()
        node_functions = [p.as_float() for p in node_functions]
    coeffs = [zero] * (m + 1)
    for k, c in enumerate(f.coeffs):
        coeffs[k] = coeffs[k] + leading * c
    for i, li in enumerate(lambdas):
        basis = lagrange_node_product([lj for j, lj in enumerate(lambdas) if j != i])
        denom = eval_poly(basis, li)
        if not exact:
            basis = basis.as_float()
        for k, c in enumerate(basis.coeffs):
            coeffs[k] = coeffs[k] + node_functions[i] * (c / denom)
    return AbelEquation(coeffs)


def eval_R_S(dec: Decomposition, x, t):
    """``R_S = sum_i w_i(t) / (x - l_i)``."""
    dec._check_x(x)
    return sum(w / (x - float(li)) for w, li in zip(dec._weights_at(t), dec.lambdas))


def eval_I_S(dec: Decomposition, x, t):
    """``I_S = sum_i w_i(t) / (x - l_i)^2``."""
    dec._check_x(x)
    return sum(w / (x - float(li)) ** 2 for w, li in zip(dec._weights_at(t), dec.lambdas))


def eval_G(dec: Decomposition, x, t):
    """``G = -I_S * f``; equals ``S_x - (f'/f) S`` away from the nodes."""
    return -eval_I_S(dec, x, t) * eval_poly(dec.f.as_float(), x)


def eval_G_direct(dec: Decomposition, x, t):
    """``S_x + F S`` with ``F = -f'/f``, computed from the equation itself."""
    from .equation import eval_S, eval_S_x

    dec._check_x(x)
    ff = dec.f.as_float()
    F = -eval_poly(ff.derivative(), x) / eval_poly(ff, x)
    return eval_S_x(dec.numerator, x, t) + F * eval_S(dec.numerator, x, t)


def residual(dec: Decomposition, x, t):
    """``S - (a_m + R_S) f``; zero up to rounding away from the nodes."""
    from .equation import eval_S

    return eval_S(dec.numerator, x, t) - (dec.leading(t) + eval_R_S(dec, x, t)) * eval_poly(dec.f.as_float(), x)


def _dec(v) -> decimal.Decimal:
    if isinstance(v, Fraction):
        return decimal.Decimal(v.numerator) / decimal.Decimal(v.denominator)
    return decimal.Decimal(float(v))


def residual_grid(dec: Decomposition, xs, ts, digits: int = 40) -> np.ndarray:
    """``residual`` on the grid ``xs`` x ``ts``, evaluated with ``digits`` significant digits.

    Every float grid point and every value ``cos(2 pi k t)``, ``sin(2 pi k t)``
    converts to a decimal without loss, so the result measures the
    decomposition itself and not double rounding, which reaches 1e-9 once
    ``|S|`` is in the 1e5 range.  Shape ``(len(xs), len(ts))``.
    """
    xs = np.asarray(xs, dtype=float)
    ts = np.asarray(ts, dtype=float)
    dec._check_x(xs)
    coeffs = list(dec.numerator.coefficients)
    polys = coeffs + list(dec.weights) + [dec.leading]
    n_h = max(p.degree for p in polys)
    out = np.empty((xs.size, ts.size))
    with decimal.localcontext() as ctx:
        ctx.prec = digits
        lams = [_dec(v) for v in dec.lambdas]
        f = [_dec(c) for c in dec.f.coeffs]
        tables = [(_dec(p.constant), [(_dec(a), _dec(b)) for a, b in p.harmonics]) for p in polys]
        xd = [_dec(x) for x in xs]
        fx = []
        for x in xd:
            acc = decimal.Decimal(0)
            for c in reversed(f):
                acc = acc * x + c
            fx.append(acc)
        for j, t in enumerate(ts):
            k = np.arange(1, n_h + 1)
            basis = [(_dec(c), _dec(s)) for c, s in zip(np.cos(2 * np.pi * k * t), np.sin(2 * np.pi * k * t))]
            vals = []
            for c0, hs in tables:
                acc = c0
                for (a, b), (cb, sb) in zip(hs, basis):
                    acc += a * cb + b * sb
                vals.append(acc)
            a = vals[: len(coeffs)]
            w = vals[len(coeffs): -1]
            lead = vals[-1]
            for i, x in enumerate(xd):
                s = decimal.Decimal(0)
                for c in reversed(a):
                    s = s * x + c
                r = lead + sum(wi / (x - li) for wi, li in zip(w, lams))
                out[i, j] = float(s - r * fx[i])
    return out


__all__ = [
    "NONNEG",
    "NONPOS",
    "AnnotatedRoot",
    "CertificationError",
    "Decomposition",
    "HypothesisCertificate",
    "NoAdmissibleSubsequence",
    "NodeEvaluation",
    "NotCertifiable",
    "SignEvidence",
    "WrongNodeCount",
    "admissible_subsequences",
    "certify_C",
    "certify_H",
    "certify_H_prime",
    "compose",
    "decompose",
    "eval_G",
    "eval_G_direct",
    "eval_I_S",
    "eval_R_S",
    "has_constant_periodic_solution",
    "line_evidence",
    "residual",
    "residual_grid",
    "suggest_nodes",
]
