"""Locating and classifying periodic solutions through the displacement ``D = H - x``.

The set of starting values whose solution survives a full period is an
interval (solutions keep their order), so ``D`` is continuous between any two
samples that return.  Sign changes are therefore only bracketed between
returned neighbours; a neighbour pair with one escaped sample is subdivided
once to look for returned points closer to the escape edge.

Near an unstable solution the forward map is violently expanding while the
backward (inverse) map ``G`` contracts, so the grid is scanned in both
directions: unstable roots of ``H`` are stable roots of ``G``.  Derivatives
then follow from ``H' = 1 / G'`` and ``H'' = -G'' / G'**3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .equation import AbelEquation
from .integrate import ESCAPED, RETURNED, UNDERFLOW, BatchResult, IntegrationConfig, integrate_batch
from .poly import NonIncreasingNodes, Number, lagrange_node_product
from .trig import TrigPoly

HYPERBOLIC_STABLE = "hyperbolic_stable"
HYPERBOLIC_UNSTABLE = "hyperbolic_unstable"
NONHYPERBOLIC = "nonhyperbolic"

SIMPLE = "simple"
AT_LEAST_TWO = "at_least_two"
CONTINUUM = "continuum"

EXTERIOR_LEFT = "exterior_left"
EXTERIOR_RIGHT = "exterior_right"

#: |H' - 1| above this is hyperbolic
HYPERBOLICITY_TOL = 1e-6
#: a solution closer than this to a node is the node itself
NODE_TOL = 1e-8


class EmptyUsableRange(ValueError):
    pass


@dataclass(frozen=True)
class PeriodicSolution:
    """One periodic solution, or one continuum when ``interval`` is set."""

    x0: float
    kind: str
    log_dH: float
    ddH: float
    multiplicity_flag: str
    displacement: float = 0.0
    interval: tuple | None = None
    component: str | None = None
    refined_with: str = "forward"

    @property
    def dH(self) -> float:
        try:
            return math.exp(self.log_dH)
        except OverflowError:
            return math.inf

    @property
    def isolated(self) -> bool:
        return self.multiplicity_flag != CONTINUUM

    @property
    def multiplicity_lower_bound(self) -> int:
        return {SIMPLE: 1, AT_LEAST_TWO: 2}.get(self.multiplicity_flag, 0)


@dataclass(frozen=True)
class ScanInfo:
    range: tuple
    grid: int
    tol: float
    bisection_tol: float
    config: IntegrationConfig
    escaped: int
    underflow: int


@dataclass(frozen=True)
class PeriodicSolutionReport:
    solutions: tuple
    scan: ScanInfo
    samples: BatchResult | None = field(default=None, repr=False, compare=False)
    nodes_used: tuple | None = None
    bound: int | None = None
    component_counts: dict | None = None

    @property
    def isolated(self) -> list:
        return [s for s in self.solutions if s.isolated]

    @property
    def count(self) -> int:
        return len(self.isolated)

    @property
    def has_continuum(self) -> bool:
        return any(not s.isolated for s in self.solutions)

    @property
    def roots(self) -> list:
        return [s.x0 for s in self.isolated]

    def stability_alternates(self) -> bool:
        """Consecutive hyperbolic solutions have opposite stability."""
        hyp = [s.kind for s in self.isolated if s.kind != NONHYPERBOLIC]
        return all(a != b for a, b in zip(hyp, hyp[1:]))

    def per_component_ok(self) -> bool:
        """At most one isolated solution in each open component between nodes."""
        if self.component_counts is None:
            return True
        return all(n <= 1 for k, n in self.component_counts.items() if not k.startswith("node"))

    def exteriors_ok(self) -> bool:
        """At least one of the two unbounded components carries no solution."""
        if self.component_counts is None:
            return True
        return not (self.component_counts.get(EXTERIOR_LEFT, 0) and self.component_counts.get(EXTERIOR_RIGHT, 0))

    def bound_satisfied(self) -> bool | None:
        if self.bound is None:
            return None
        return self.count <= self.bound and self.per_component_ok() and self.exteriors_ok()


def _kind(log_dH: float) -> str:
    gap = math.expm1(log_dH) if log_dH < 700 else math.inf
    if abs(gap) <= HYPERBOLICITY_TOL:
        return NONHYPERBOLIC
    return HYPERBOLIC_STABLE if gap < 0 else HYPERBOLIC_UNSTABLE


def _signed_displacement(res: BatchResult) -> np.ndarray:
    d = np.where(res.status == RETURNED, res.x1 - res.x0, np.nan)
    esc = res.status == ESCAPED
    d[esc] = np.sign(res.x1[esc]) * np.inf
    return d


def _evaluate(eq, x, cfg, backward, second_order=False) -> np.ndarray:
    """Signed displacement of the forward or backward map."""
    return _signed_displacement(integrate_batch(eq, x, cfg, backward=backward, second_order=second_order))


def _changes(res: BatchResult) -> np.ndarray:
    """Samples next to a change of outcome or of the sign of the displacement."""
    d = _signed_displacement(res)
    st = res.status
    edge = (st[:-1] != st[1:]) | ((st[:-1] == RETURNED) & (np.sign(d[:-1]) != np.sign(d[1:])))
    out = np.zeros(st.shape, dtype=bool)
    out[:-1] |= edge
    out[1:] |= edge
    return out


def _scan(eq, xs, cfg, scan_cfg, backward, screen) -> BatchResult:
    """Integrate the grid with ``scan_cfg``, then redo with ``cfg`` every sample a decision rests on.

    Those are the samples with ``|D| < screen`` and the neighbours of every
    sign or outcome change, repeated until the changes only involve samples
    computed with ``cfg``.  Elsewhere ``|D|`` is large enough that the looser
    scan still has the right sign.
    """
    res = integrate_batch(eq, xs, scan_cfg, backward=backward, second_order=False)
    if scan_cfg == cfg:
        return res
    done = np.zeros(len(xs), dtype=bool)
    need = (res.status == RETURNED) & (np.abs(res.x1 - res.x0) < screen)
    while True:
        need = (need | _changes(res)) & ~done
        if not need.any():
            return res
        fine = integrate_batch(eq, xs[need], cfg, backward=backward, second_order=False)
        for name in ("x1", "log_dH", "k", "status", "t_stop"):
            getattr(res, name)[need] = getattr(fine, name)
        done |= need
        need[:] = False


def _bisect(eq, lo, hi, dlo, cfg, backward, xtol, sections=32, max_iter=100):
    """Shrink many sign-change brackets at once.

    Each pass evaluates ``sections`` interior points of every active bracket
    in one batch and keeps the sub-interval where the sign changes, so the
    width drops by a factor ``sections + 1`` per pass.  Returns the bracket
    midpoints.
    """
    lo, hi = lo.astype(float).copy(), hi.astype(float).copy()
    slo = np.sign(dlo)
    frac = np.arange(1, sections + 1) / (sections + 1)
    for _ in range(max_iter):
        idx = np.flatnonzero(np.abs(hi - lo) > xtol)
        if not idx.size:
            break
        pts = lo[idx, None] + frac[None, :] * (hi - lo)[idx, None]
        d = _evaluate(eq, pts.ravel(), cfg, backward).reshape(pts.shape)
        # underflowed samples carry no sign; they are skipped
        sign = np.where(np.isnan(d), 0.0, np.sign(d))
        for row, i in enumerate(idx):
            flip = np.flatnonzero(sign[row] == -slo[i])
            first = flip[0] if flip.size else sections
            keep = np.flatnonzero(sign[row, :first] == slo[i])
            new_lo = pts[row, keep[-1]] if keep.size else lo[i]
            new_hi = pts[row, first] if flip.size else hi[i]
            if new_lo == lo[i] and new_hi == hi[i]:
                # every interior sample underflowed: stop refining this bracket
                new_lo = new_hi = 0.5 * (lo[i] + hi[i])
            lo[i], hi[i] = new_lo, new_hi
    return 0.5 * (lo + hi)


#: |log H'| below which H'' is recomputed under full step-size control
SECOND_ORDER_WINDOW = 1e-2


def _classify_points(eq, x, cfg, backward):
    """``(ok, x1 - x, log H', H'')`` at each point, computed with the chosen map.

    ``H''`` only decides multiplicity for near-neutral roots, so it is held to
    tolerance only there; elsewhere it is the value carried along uncontrolled.
    """
    x = np.asarray(x, dtype=float)
    res = integrate_batch(eq, x, cfg, backward=backward, second_order=False)
    near = (res.status == RETURNED) & (np.abs(res.log_dH) < SECOND_ORDER_WINDOW)
    if near.any():
        fine = integrate_batch(eq, x[near], cfg, backward=backward, second_order=True)
        for name in ("x1", "log_dH", "k", "status"):
            getattr(res, name)[near] = getattr(fine, name)
    ok = res.status == RETURNED
    disp = res.x1 - res.x0
    if not backward:
        return ok, disp, res.log_dH, res.ddH
    # H = G^{-1}: H' = 1/G', H'' = -G''/G'^3 = -k_G / G'
    with np.errstate(over="ignore", invalid="ignore"):
        ddH = -res.k * np.exp(-res.log_dH)
    return ok, -disp, -res.log_dH, ddH


def _runs(mask: np.ndarray, min_len: int) -> list:
    out, start = [], None
    for i, v in enumerate(list(mask) + [False]):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if i - start >= min_len:
                out.append((start, i - 1))
            start = None
    return out


def _make_solution(x0, disp, log_dH, ddH, refined_with) -> PeriodicSolution:
    kind = _kind(float(log_dH))
    flag = SIMPLE if kind != NONHYPERBOLIC else AT_LEAST_TWO
    return PeriodicSolution(float(x0), kind, float(log_dH), float(ddH), flag, float(disp), refined_with=refined_with)


def _sign_brackets(xs, D) -> list:
    """``(lo, hi, D(lo))`` for neighbouring returned samples of opposite sign; ``D`` is nan where escaped."""
    ok = np.isfinite(D)
    sg = np.sign(D)
    idx = np.flatnonzero(ok[:-1] & ok[1:] & (sg[:-1] * sg[1:] < 0))
    return [(float(xs[i]), float(xs[i + 1]), float(D[i])) for i in idx]


def _escape_edge_brackets(eq, xs, D, cfg, backward, sections=16) -> list:
    """Subdivide each returned/escaped neighbour pair once and bracket inside it."""
    ok = np.isfinite(D)
    pairs = np.flatnonzero(ok[:-1] ^ ok[1:])
    if not pairs.size:
        return []
    frac = np.arange(1, sections + 1) / (sections + 1)
    pts = xs[pairs, None] + frac[None, :] * (xs[pairs + 1] - xs[pairs])[:, None]
    d = _evaluate(eq, pts.ravel(), cfg, backward).reshape(pts.shape)
    out = []
    for row, i in enumerate(pairs):
        sub_x = np.concatenate([[xs[i]], pts[row], [xs[i + 1]]])
        sub_d = np.concatenate([[D[i]], d[row], [D[i + 1]]])
        out.extend(_sign_brackets(sub_x, sub_d))
    return out


def _dedupe_brackets(brackets) -> list:
    """Overlapping brackets from the two scans hold the same root; keep the narrower one."""
    out = []
    for br in sorted(brackets, key=lambda b: (b[0], b[1] - b[0])):
        if out and br[0] < out[-1][1]:
            if br[1] - br[0] < out[-1][1] - out[-1][0]:
                out[-1] = br
            continue
        out.append(br)
    return out


def _refine_brackets(eq, brackets, exact_hits, cfg, xtol, polish_tol) -> list:
    """Refine brackets ``(lo, hi, D(lo), backward)`` and classify the roots.

    ``D(lo)`` belongs to the map named by ``backward``; the displacements of
    the two maps have opposite signs, which lets a bracket be retried with the
    other map when the first refinement leaves a large residual.
    """
    brackets = _dedupe_brackets(brackets)
    found = {}  # key -> (x, disp, log_dH, ddH, direction)

    def keep(key, cand):
        if key not in found or abs(cand[1]) < abs(found[key][1]):
            found[key] = cand

    def run(items, direction):
        if not items:
            return
        lo = np.array([brackets[k][0] for k in items])
        hi = np.array([brackets[k][1] for k in items])
        # the sign is that of the map the bracket is refined with
        dlo = np.array([brackets[k][2] if brackets[k][3] == direction else -brackets[k][2] for k in items])
        mids = _bisect(eq, lo, hi, dlo, cfg, direction, xtol)
        ok, disp, log_dH, ddH = _classify_points(eq, mids, cfg, direction)
        for j, k in enumerate(items):
            if ok[j]:
                keep(k, (float(mids[j]), float(disp[j]), float(log_dH[j]), float(ddH[j]), direction))

    for direction in (False, True):
        run([k for k, b in enumerate(brackets) if b[3] == direction], direction)
    retry = [k for k in range(len(brackets)) if k not in found or abs(found[k][1]) > polish_tol]
    for direction in (False, True):
        run([k for k in retry if brackets[k][3] != direction], direction)
    if exact_hits:
        for direction in (False, True):
            ok, disp, log_dH, ddH = _classify_points(eq, exact_hits, cfg, direction)
            for j, x in enumerate(exact_hits):
                if ok[j]:
                    keep(("hit", x), (x, float(disp[j]), float(log_dH[j]), float(ddH[j]), direction))
    sols = []
    for x, disp, log_dH, ddH, direction in sorted(found.values()):
        if sols and abs(x - sols[-1].x0) < 1e3 * xtol:
            if abs(disp) < abs(sols[-1].displacement):
                sols[-1] = _make_solution(x, disp, log_dH, ddH, "backward" if direction else "forward")
            continue
        sols.append(_make_solution(x, disp, log_dH, ddH, "backward" if direction else "forward"))
    return sols


def find_periodic_solutions(eq: AbelEquation, x_range: Sequence[float] = (-10.0, 10.0),
                            cfg: IntegrationConfig = IntegrationConfig(), grid: int = 2001, tol: float = 1e-8,
                            bisection_tol: float = 1e-12, tangency_screen: float = 5e-2,
                            polish_tol: float = 1e-6, scan_rel_tol: float | None = 1e-8) -> PeriodicSolutionReport:
    """All periodic solutions starting in ``x_range`` that the grid can resolve.

    ``tol`` is the zero threshold for ``D`` used by continuum and tangency
    detection; brackets are bisected until they are ``bisection_tol`` wide.
    A root whose displacement is still above ``polish_tol`` after refinement
    is refined again with the map running the other way.

    The grid is first integrated with relative tolerance ``scan_rel_tol``
    (``None`` scans with ``cfg`` throughout); samples with
    ``|D| < tangency_screen`` and both neighbours of every sign or outcome
    change are then recomputed with ``cfg``.  Brackets, continua and
    tangencies only ever use recomputed values.
    """
    lo, hi = float(x_range[0]), float(x_range[1])
    if not lo < hi:
        raise ValueError(f"empty range [{lo}, {hi}]")
    if grid < 2:
        raise ValueError("grid needs at least 2 points")
    if not tol > 0:
        raise ValueError("tol must be positive")
    xs = np.linspace(lo, hi, grid)
    scan_cfg = cfg
    if scan_rel_tol is not None and scan_rel_tol > cfg.rel_tol:
        scan_cfg = replace(cfg, rel_tol=scan_rel_tol, far_rel_tol=max(cfg.far_rel_tol, scan_rel_tol))
    res = _scan(eq, xs, cfg, scan_cfg, False, tangency_screen)
    scan = ScanInfo((lo, hi), grid, tol, bisection_tol, cfg,
                    int(np.sum(res.status == ESCAPED)), int(np.sum(res.status == UNDERFLOW)))
    if not np.any(res.status == RETURNED):
        raise EmptyUsableRange(f"no sample in [{lo}, {hi}] stays bounded over a period")
    D = _signed_displacement(res)
    with np.errstate(invalid="ignore"):
        gap = np.abs(np.expm1(res.log_dH))
    solutions = []

    # continua: H = identity on at least three consecutive samples
    flat = (res.status == RETURNED) & (np.abs(D) < tol) & (gap < tol)
    in_continuum = np.zeros(grid, dtype=bool)
    for a, b in _runs(flat, 3):
        in_continuum[a:b + 1] = True
        mid = (a + b) // 2
        solutions.append(PeriodicSolution(float(xs[mid]), NONHYPERBOLIC, float(res.log_dH[mid]),
                                          float(res.ddH[mid]), CONTINUUM, float(D[mid]),
                                          interval=(float(xs[a]), float(xs[b]))))

    usable = ~np.isnan(D) & ~in_continuum
    D_fwd = np.where(usable, D, np.nan)
    back = _scan(eq, xs, cfg, scan_cfg, True, tangency_screen)
    D_bwd = np.where(back.status == RETURNED, back.x1 - back.x0, np.nan)
    D_bwd[in_continuum] = np.nan
    brackets = []
    for direction, DD in ((False, D_fwd), (True, D_bwd)):
        for lo_, hi_, d_ in _sign_brackets(xs, DD) + _escape_edge_brackets(eq, xs, DD, cfg, direction):
            # a map whose displacement falls from + to - across the root contracts there;
            # the other map's displacement has the opposite sign
            brackets.append((lo_, hi_, abs(d_), direction) if d_ > 0 else (lo_, hi_, -d_, not direction))
    exact_hits = [float(xs[i]) for i in np.flatnonzero(usable & (D == 0))]
    solutions.extend(_refine_brackets(eq, brackets, exact_hits, cfg, bisection_tol, polish_tol))
    sg = np.sign(D)

    # tangencies: local minima of |D| with no sign change around them
    absD = np.where(usable, np.abs(D), np.inf)
    known = [p.x0 for p in solutions]
    for i in range(1, grid - 1):
        if not (absD[i] < tangency_screen and absD[i] <= absD[i - 1] and absD[i] <= absD[i + 1]):
            continue
        if sg[i - 1] * sg[i] <= 0 or sg[i] * sg[i + 1] <= 0:
            continue
        if any(xs[i - 1] <= x <= xs[i + 1] for x in known):
            continue
        back = bool(res.log_dH[i] > 0)

        def objective(x, back=back):
            d = _evaluate(eq, np.array([x]), cfg, back)[0]
            return abs(d) if np.isfinite(d) else math.inf

        opt = minimize_scalar(objective, bounds=(float(xs[i - 1]), float(xs[i + 1])), method="bounded",
                              options={"xatol": bisection_tol})
        if opt.fun < tol:
            ok, disp, log_dH, ddH = _classify_points(eq, [opt.x], cfg, back)
            if ok[0]:
                solutions.append(PeriodicSolution(float(opt.x), NONHYPERBOLIC, float(log_dH[0]), float(ddH[0]),
                                                  AT_LEAST_TWO, float(disp[0]),
                                                  refined_with="backward" if back else "forward"))
    solutions.sort(key=lambda p: p.x0)
    return PeriodicSolutionReport(tuple(solutions), scan, res)


def _label(v) -> str:
    return str(v) if isinstance(v, (int, Fraction)) else repr(float(v))


def component_of(x: float, lambdas: Sequence[Number]) -> str:
    """Tag of the component of ``R minus {lambdas}`` holding ``x``."""
    lams = [float(v) for v in lambdas]
    for i, v in enumerate(lams):
        if abs(x - v) <= NODE_TOL * max(1.0, abs(v)):
            return f"node {i + 1}"
    if x < lams[0]:
        return EXTERIOR_LEFT
    if x > lams[-1]:
        return EXTERIOR_RIGHT
    for a, b, la, lb in zip(lams, lams[1:], lambdas, lambdas[1:]):
        if a < x < b:
            return f"({_label(la)}, {_label(lb)})"
    raise AssertionError("unreachable")


def assign_components(report: PeriodicSolutionReport, lambdas: Sequence[Number],
                      bound: int | None = None) -> PeriodicSolutionReport:
    """Tag each solution with its component and count isolated solutions per component."""
    lams = list(lambdas)
    for a, b in zip(lams, lams[1:]):
        if not float(a) < float(b):
            raise NonIncreasingNodes(f"nodes must be strictly increasing ({a} >= {b})")
    counts = {EXTERIOR_LEFT: 0}
    for la, lb in zip(lams, lams[1:]):
        counts[f"({_label(la)}, {_label(lb)})"] = 0
    counts[EXTERIOR_RIGHT] = 0
    tagged = []
    for sol in report.solutions:
        tag = component_of(sol.x0, lams)
        if sol.isolated:
            counts[tag] = counts.get(tag, 0) + 1
        tagged.append(replace(sol, component=tag))
    return replace(report, solutions=tuple(tagged), nodes_used=tuple(lams),
                   bound=len(lams) if bound is None else bound, component_counts=counts)


def perturb(eq: AbelEquation, eps1: Number, eps2: Number, lambdas: Sequence[Number]) -> AbelEquation:
    """``S + eps1 f + eps2 f'`` with ``f = prod (x - lambda_i)``."""
    f = lagrange_node_product(lambdas)
    df = f.derivative()
    exact = eq.exact and f.exact and isinstance(eps1, (int, Fraction)) and isinstance(eps2, (int, Fraction))
    coeffs = list(eq.coefficients)
    if not exact:
        coeffs = [c.as_float() for c in coeffs]
        f, df = f.as_float(), df.as_float()
    n = max(len(coeffs), len(f.coeffs))
    zero = TrigPoly(Fraction(0) if exact else 0.0)
    coeffs += [zero] * (n - len(coeffs))
    for k in range(n):
        extra = 0
        if k < len(f.coeffs):
            extra += eps1 * f.coeffs[k]
        if k < len(df.coeffs):
            extra += eps2 * df.coeffs[k]
        if extra:
            coeffs[k] = coeffs[k] + (extra if exact else float(extra))
    den = eq.denominator
    return AbelEquation(coeffs, den)


__all__ = [
    "HYPERBOLIC_STABLE",
    "HYPERBOLIC_UNSTABLE",
    "NONHYPERBOLIC",
    "SIMPLE",
    "AT_LEAST_TWO",
    "CONTINUUM",
    "EXTERIOR_LEFT",
    "EXTERIOR_RIGHT",
    "EmptyUsableRange",
    "PeriodicSolution",
    "ScanInfo",
    "PeriodicSolutionReport",
    "find_periodic_solutions",
    "component_of",
    "assign_components",
    "perturb",
]
