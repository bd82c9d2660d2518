"""Built-in regression claims for the four worked equations.

Each claim is a named check returning ``(passed, detail)``.  The finder
tolerance is a parameter so that a degraded configuration can be shown to
fail.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .certify import certify_C, certify_H, certify_H_prime
from .equation import det_along_curve, transform
from .examples import cubic_cos, cubic_cos_cubed, cubic_cos_cubed_curves, quartic_cos, quartic_four_cycles
from .flow import NONHYPERBOLIC, assign_components, find_periodic_solutions

ROOT_TOL = 1e-8


@dataclass(frozen=True)
class Claim:
    name: str
    statement: str
    check: Callable  # (tol) -> (bool, str)


def _find(eq, x_range, tol):
    # the bracket refinement width follows the acceptance tolerance
    return find_periodic_solutions(eq, x_range, tol=tol, bisection_tol=min(1e-12, tol * 1e-4))


def _in(x, lo, hi):
    return lo < x < hi


def _values(cert):
    return tuple(ev.value for ev in cert.evidence)


def _quartic_certificate(tol):
    cert = certify_H(quartic_four_cycles(), [-2, 0, 2, 4])
    vals = _values(cert)
    return vals == (-30, 12, -18, 120) and cert.bound == 4, f"S(lambda_i) = {list(map(str, vals))}"


def _quartic_solutions(tol):
    rep = _find(quartic_four_cycles(), (-10, 10), tol)
    want = [-4, -1, 1, 3]
    roots = rep.roots
    ok = (len(roots) == 4 and all(abs(r - w) <= ROOT_TOL for r, w in zip(roots, want))
          and all(s.kind != NONHYPERBOLIC for s in rep.isolated) and rep.stability_alternates()
          and not rep.has_continuum)
    return ok, f"roots {[round(r, 10) for r in roots]}, continuum={rep.has_continuum}"


def _cubic_certificate(tol):
    cert = certify_H(cubic_cos(), [-1, 1, 3])
    vals = _values(cert)
    return vals == (3, -3, 15) and cert.bound == 3, f"S(lambda_i) means = {list(map(str, vals))}"


def _cubic_solutions(tol):
    rep = assign_components(_find(cubic_cos(), (-5, 5), tol), [-1, 1, 3], bound=3)
    comps = [s.component for s in rep.isolated]
    ok = ("(-1, 1)" in comps and "(1, 3)" in comps and rep.count <= 3 and rep.per_component_ok()
          and not rep.has_continuum)
    return ok, f"roots {[round(r, 8) for r in rep.roots]} in {comps}"


def _cubic_tolerance_agreement(tol):
    eq = cubic_cos()
    a = find_periodic_solutions(eq, (-5, 5), tol=tol, bisection_tol=1e-12).roots
    b = find_periodic_solutions(eq, (-5, 5), grid=1001, tol=tol, bisection_tol=1e-10).roots
    ok = len(a) == len(b) and len(a) >= 2 and all(abs(x - y) <= 1e-8 for x, y in zip(a, b))
    return ok, f"{[round(x, 11) for x in a]} vs {[round(x, 11) for x in b]}"


def _quartic_cos_certificate(tol):
    cert = certify_C(quartic_cos())
    ok = (tuple(cert.nodes) == (-2, -1, 1, 3) and _values(cert) == (72, -15, 45, -63)
          and (Fraction(-3, 2), Fraction(-1, 2), 2, 4) in cert.alternatives)
    alt_vals = None
    if ok:
        alt = (Fraction(-3, 2), Fraction(-1, 2), 2, 4)
        alt_vals = tuple(quartic_cos().along_line(k).constant for k in alt)
        ok = alt_vals == (Fraction(45, 16), Fraction(-63, 16), 12, -90)
    return ok, f"kappa = {list(map(str, cert.nodes))}, alternative f_a = {alt_vals and list(map(str, alt_vals))}"


def _quartic_cos_solutions(tol):
    rep = _find(quartic_cos(), (-10, 10), tol)
    r = rep.roots
    ok = (any(_in(x, -1.5, -1) for x in r) and any(_in(x, -0.5, 1) for x in r) and any(_in(x, 2, 3) for x in r)
          and rep.count <= 4 and not rep.has_continuum)
    return ok, f"roots {[round(x, 8) for x in r]}"


def _curves_certificate(tol):
    cert = certify_H_prime(cubic_cos_cubed(), cubic_cos_cubed_curves(), [-4, 0, 1])
    t = np.arange(1000) / 1000
    det = det_along_curve(cubic_cos_cubed(), cubic_cos_cubed_curves(), 0)
    err = float(np.max(np.abs(np.asarray(det(t), dtype=float) + 1)))
    return cert.bound == 3 and err <= 1e-10, f"bound {cert.bound}, max |a S~(0,t) + 1| = {err:.1e}"


def _curves_solutions(tol):
    tr = transform(cubic_cos_cubed(), cubic_cos_cubed_curves())
    rep = assign_components(_find(tr, (-10, 10), tol), [-4, 0, 1], bound=3)
    return rep.bound_satisfied() and not rep.has_continuum, f"roots {[round(x, 8) for x in rep.roots]}"


CLAIMS = (
    Claim("quartic/certificate", "lines -2,0,2,4 alternate with S = -30, 12, -18, 120", _quartic_certificate),
    Claim("quartic/solutions", "exactly -4, -1, 1, 3; hyperbolic; stability alternates", _quartic_solutions),
    Claim("cubic-cos/certificate", "lines -1,1,3 alternate with mean S = 3, -3, 15", _cubic_certificate),
    Claim("cubic-cos/solutions", "one solution in (-1,1), one in (1,3), at most 3", _cubic_solutions),
    Claim("cubic-cos/agreement", "roots agree to 1e-8 across two refinement settings", _cubic_tolerance_agreement),
    Claim("quartic-cos/certificate", "kappa = -2,-1,1,3 (f_a 72,-15,45,-63), alternative -3/2,-1/2,2,4",
          _quartic_cos_certificate),
    Claim("quartic-cos/solutions", "solutions in (-3/2,-1), (-1/2,1), (2,3); at most 4", _quartic_cos_solutions),
    Claim("curves/certificate", "curves 3+cos(2 pi t) with lambda -4,0,1 certify bound 3; a S~(0,t) = -1",
          _curves_certificate),
    Claim("curves/solutions", "transformed equation has at most 3 solutions, one per component",
          _curves_solutions),
)


@dataclass(frozen=True)
class ClaimResult:
    claim: Claim
    passed: bool
    detail: str
    seconds: float


def run_claims(tol: float = 1e-8, claims=CLAIMS) -> list:
    out = []
    for c in claims:
        t0 = time.perf_counter()
        try:
            passed, detail = c.check(tol)
        except Exception as exc:  # a crash is a failed claim, reported with its message
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(ClaimResult(c, bool(passed), detail, time.perf_counter() - t0))
    return out


def format_table(results) -> str:
    w = max(len(r.claim.name) for r in results)
    lines = [f"{'claim':<{w}}  result  seconds  detail"]
    for r in results:
        lines.append(f"{r.claim.name:<{w}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.2f}  {r.detail}")
    return "\n".join(lines)


def format_list(claims=CLAIMS) -> str:
    w = max(len(c.name) for c in claims)
    return "\n".join(f"{c.name:<{w}}  {c.statement}" for c in claims)


__all__ = ["Claim", "ClaimResult", "CLAIMS", "run_claims", "format_table", "format_list", "ROOT_TOL"]
