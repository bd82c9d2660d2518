"""Dormand-Prince 5(4) integration of ``x' = S(x, t)`` with variational equations.

Every trajectory carries its own step size; the stepping loop is compiled with
numba and runs over a whole grid of initial conditions at once.  Besides ``x``
the state holds

* ``l``  with ``l' = S_x(x, t)``, so ``H'(x0) = exp(l(1))`` (kept in log form);
* ``k``  with ``k' = S_xx(x, t) - S_x(x, t) k``; then ``H''(x0) = H'(x0)**2 k(1)``.

``k`` is ``exp(-l) * int_0^t S_xx v ds`` with ``v = dx/dx0``; this scaling keeps
it free of exponentials.  Near strongly hyperbolic orbits ``k`` still grows
like ``exp(|l|)``, which makes it expensive to control; ``second_order=False``
leaves it out of step-size control.

Escape: ``|x|`` above ``escape_radius``, or ``|x|`` above ``far_field`` while the
required step drops below ``far_min_step`` (the solution runs away faster than
the period can be resolved, typically on a stiff approach to infinity).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba
import numpy as np

from .equation import AbelEquation

RETURNED, ESCAPED, UNDERFLOW = 0, 1, 2

# Dormand-Prince 5(4) tableau; row s of _A holds the stage weights of stage s
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.zeros((7, 7))
_A[1, :1] = [1 / 5]
_A[2, :2] = [3 / 40, 9 / 40]
_A[3, :3] = [44 / 45, -56 / 15, 32 / 9]
_A[4, :4] = [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]
_A[5, :5] = [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]
_A[6, :6] = [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

_TWO_PI = 2.0 * math.pi


def _configure_threads():
    # the system TBB is too old for numba; prefer OpenMP or the builtin work queue
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
    cap = os.environ.get("ABEL_THREADS")
    if cap:
        try:
            numba.set_num_threads(max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS)))
        except ValueError:
            pass


_configure_threads()


class StepSizeUnderflow(RuntimeError):
    pass


@dataclass(frozen=True)
class IntegrationConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1e-2
    escape_radius: float = 1e6
    min_step: float = 1e-13
    max_iterations: int = 200_000
    #: relative tolerance for the second-variation state when it is error-controlled
    second_order_rel_tol: float = 1e-8
    #: beyond ``far_field`` steps use ``far_rel_tol``; a trajectory there that needs
    #: steps below ``far_min_step`` is running away and counts as escaped.  Orbits
    #: that swing out past ``far_field`` and come back still need full accuracy, so
    #: the default does not loosen the tolerance.
    far_field: float = 1e2
    far_rel_tol: float = 1e-10
    far_min_step: float = 1e-6
    #: every ``progress_window`` iterations the rate of progress in t is projected
    #: forward; a trajectory that cannot finish within ``max_iterations`` at that
    #: rate (a stiff approach to a slow curve) stops early as unresolved
    progress_window: int = 2_000

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0 and self.escape_radius > 0):
            raise ValueError("tolerances, max_step and escape_radius must be positive")
        if not 0 < self.far_field <= self.escape_radius:
            raise ValueError("far_field must lie in (0, escape_radius]")
        if self.progress_window < 1:
            raise ValueError("progress_window must be positive")

    def _params(self) -> np.ndarray:
        return np.array([self.rel_tol, self.abs_tol, self.max_step, self.escape_radius, self.min_step,
                         float(self.max_iterations), self.second_order_rel_tol, self.far_field,
                         self.far_rel_tol, self.far_min_step, float(self.progress_window)])


@numba.njit(cache=True)
def _coefficients(t, const, cos, sin, den, out):
    """``out[i] = a_i(t)``, divided by the denominator when ``den`` is non-empty."""
    m1, nh = cos.shape
    for i in range(m1):
        out[i] = const[i]
    for h in range(nh):
        w = _TWO_PI * (h + 1) * t
        c, s = math.cos(w), math.sin(w)
        for i in range(m1):
            out[i] += cos[i, h] * c + sin[i, h] * s
    if den.shape[0]:
        # den = [c0, a_1, b_1, a_2, b_2, ...]
        d = den[0]
        for h in range((den.shape[0] - 1) // 2):
            w = _TWO_PI * (h + 1) * t
            d += den[1 + 2 * h] * math.cos(w) + den[2 + 2 * h] * math.sin(w)
        for i in range(m1):
            out[i] /= d


@numba.njit(cache=True)
def _rhs(tau, x, k, backward, const, cos, sin, den, buf):
    t = 1.0 - tau if backward else tau
    _coefficients(t, const, cos, sin, den, buf)
    m = buf.shape[0] - 1
    s = buf[m]
    sx = 0.0
    sxx = 0.0
    for i in range(m - 1, -1, -1):
        sxx = sxx * x + 2.0 * sx
        sx = sx * x + s
        s = s * x + buf[i]
    if backward:
        s, sx, sxx = -s, -sx, -sxx
    return s, sx, sxx - sx * k


@numba.njit(cache=True)
def _integrate_one(x0, backward, second_order, const, cos, sin, den, p, C, A, B5, E, rec_t, rec_x):
    """One trajectory; returns ``(x, l, k, status, tau, n_recorded)``."""
    rel_tol, abs_tol, max_step, escape_radius, min_step = p[0], p[1], p[2], p[3], p[4]
    max_iter, k_tol, far_field, far_tol, far_min_step = int(p[5]), p[6], p[7], p[8], p[9]
    window = int(p[10])
    tau_mark = 0.0
    record = rec_t.shape[0] > 0
    buf = np.empty(const.shape[0])
    K = np.empty((7, 3))
    y = np.array([x0, 0.0, 0.0])
    tau = 0.0
    h = min(max_step, 1e-3)
    n_rec = 0
    if record:
        rec_t[0] = tau
        rec_x[0] = x0
        n_rec = 1
    fresh = False  # K[0] already holds the slope at (tau, y)
    status = -1
    it = 0
    while status < 0:
        it += 1
        if it > max_iter:
            status = 2
            break
        if it % window == 0:
            done = tau - tau_mark
            if done <= 0.0 or (1.0 - tau) / done * window > max_iter - it:
                status = 2
                break
            tau_mark = tau
        hh = min(h, 1.0 - tau)
        if not fresh:
            K[0, 0], K[0, 1], K[0, 2] = _rhs(tau, y[0], y[2], backward, const, cos, sin, den, buf)
        for st in range(1, 7):
            yx, yl, yk = y[0], y[1], y[2]
            for j in range(st):
                a = A[st, j]
                if a != 0.0:
                    yx += hh * a * K[j, 0]
                    yl += hh * a * K[j, 1]
                    yk += hh * a * K[j, 2]
            K[st, 0], K[st, 1], K[st, 2] = _rhs(tau + C[st] * hh, yx, yk, backward, const, cos, sin, den, buf)
        y5x, y5l, y5k = y[0], y[1], y[2]
        ex, el, ek = 0.0, 0.0, 0.0
        for j in range(7):
            b, e = hh * B5[j], hh * E[j]
            y5x += b * K[j, 0]
            y5l += b * K[j, 1]
            y5k += b * K[j, 2]
            ex += e * K[j, 0]
            el += e * K[j, 1]
            ek += e * K[j, 2]
        far = abs(y[0]) > far_field
        rt = max(rel_tol, far_tol) if far else rel_tol
        t0 = ex / (abs_tol + rt * max(abs(y[0]), abs(y5x)))
        t1 = el / (abs_tol + rt * max(abs(y[1]), abs(y5l)))
        total = t0 * t0 + t1 * t1
        count = 2.0
        if second_order:
            t2 = ek / (abs_tol + max(rt, k_tol) * max(abs(y[2]), abs(y5k)))
            # k overflows on strongly contracting orbits; it then leaves step control
            if math.isfinite(t2):
                total += t2 * t2
                count = 3.0
        ratio = math.sqrt(total / count)
        bad = not (math.isfinite(ratio) and math.isfinite(y5x) and math.isfinite(y5l))
        if bad:
            fac = 0.2
        elif ratio == 0.0:
            fac = 5.0
        else:
            fac = min(5.0, max(0.2, 0.9 * ratio ** -0.2))
        accept = (not bad) and ratio <= 1.0
        new_h = min(hh * fac, max_step)
        if accept:
            y[0], y[1], y[2] = y5x, y5l, y5k
            tau = tau + hh
            if tau >= 1.0 - 1e-14:
                tau = 1.0
            # first-same-as-last: the seventh stage is the next step's first
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            fresh = True
            if record and n_rec < rec_t.shape[0]:
                rec_t[n_rec] = tau
                rec_x[n_rec] = y[0]
                n_rec += 1
            if abs(y[0]) > escape_radius:
                status = 1
            elif tau >= 1.0:
                status = 0
        h = new_h
        if status < 0 and abs(y[0]) > far_field and new_h < far_min_step:
            status = 1
        elif status < 0 and not accept and new_h < min_step:
            status = 2
    return y[0], y[1], y[2], status, tau, n_rec


@numba.njit(cache=True, parallel=True)
def _integrate_many(x0, backward, second_order, const, cos, sin, den, p, C, A, B5, E):
    n = x0.shape[0]
    x1 = np.empty(n)
    l1 = np.empty(n)
    k1 = np.empty(n)
    status = np.empty(n, dtype=np.int64)
    tau = np.empty(n)
    empty = np.empty(0)
    for i in numba.prange(n):
        x1[i], l1[i], k1[i], status[i], tau[i], _ = _integrate_one(
            x0[i], backward, second_order, const, cos, sin, den, p, C, A, B5, E, empty, empty)
    return x1, l1, k1, status, tau


def _equation_arrays(eq: AbelEquation):
    const, cos, sin = eq.coefficient_matrix()
    if eq.denominator is not None:
        d = eq.denominator.as_float()
        den = [float(d.constant)]
        for a, b in d.harmonics:
            den += [float(a), float(b)]
        den = np.array(den)
    else:
        den = np.empty(0)
    return np.ascontiguousarray(const), np.ascontiguousarray(cos), np.ascontiguousarray(sin), den


@dataclass
class BatchResult:
    x0: np.ndarray
    x1: np.ndarray
    log_dH: np.ndarray
    k: np.ndarray
    status: np.ndarray
    t_stop: np.ndarray

    @property
    def returned(self) -> np.ndarray:
        return self.status == RETURNED

    @property
    def escape_sign(self) -> np.ndarray:
        return np.where(self.status == ESCAPED, np.sign(self.x1), 0.0)

    @property
    def dH(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_dH)

    @property
    def ddH(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(2.0 * self.log_dH) * self.k


def integrate_batch(eq: AbelEquation, x0, cfg: IntegrationConfig = IntegrationConfig(), backward: bool = False,
                    record: bool = False, second_order: bool = True):
    """Integrate every ``x0`` over one period; returns a :class:`BatchResult`.

    With ``backward=True`` the flow runs from t = 1 down to t = 0, giving the
    inverse return map and its derivatives.  ``record=True`` additionally
    returns the accepted ``(t, x)`` points of every trajectory.
    """
    const, cos, sin, den = _equation_arrays(eq)
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    p = cfg._params()
    if not record:
        x1, l1, k1, status, tau = _integrate_many(x0, backward, second_order, const, cos, sin, den, p,
                                                  _C, _A, _B5, _E)
        tracks = None
    else:
        n = x0.shape[0]
        x1, l1, k1, tau = np.empty(n), np.empty(n), np.empty(n), np.empty(n)
        status = np.empty(n, dtype=np.int64)
        tracks = []
        size = min(cfg.max_iterations, 1_000_000) + 1
        for i in range(n):
            rec_t, rec_x = np.empty(size), np.empty(size)
            x1[i], l1[i], k1[i], status[i], tau[i], m = _integrate_one(
                x0[i], backward, second_order, const, cos, sin, den, p, _C, _A, _B5, _E, rec_t, rec_x)
            ts = 1.0 - rec_t[:m] if backward else rec_t[:m]
            tracks.append(list(zip(ts.tolist(), rec_x[:m].tolist())))
    t_stop = 1.0 - tau if backward else tau
    res = BatchResult(x0, x1, l1, k1, status, t_stop)
    if record:
        return res, tracks
    return res


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    escaped: bool
    t_escape: float | None


def integrate(eq: AbelEquation, x0: float, cfg: IntegrationConfig = IntegrationConfig()) -> Trajectory:
    """Adaptive solution on [0, 1]; stops early once ``|x|`` exceeds the escape radius."""
    res, tracks = integrate_batch(eq, [x0], cfg, record=True)
    if res.status[0] == UNDERFLOW:
        raise StepSizeUnderflow(f"step size underflow at t = {res.t_stop[0]:.6g} starting from x0 = {x0}")
    pts = np.array(tracks[0])
    escaped = res.status[0] == ESCAPED
    return Trajectory(pts[:, 0], pts[:, 1], bool(escaped), float(res.t_stop[0]) if escaped else None)


@dataclass(frozen=True)
class ReturnMapSample:
    """One evaluation of the return map ``H``.  ``dH`` is stored as its logarithm."""

    x0: float
    returned: bool
    x1: float | None = None
    log_dH: float | None = None
    ddH: float | None = None
    t_escape: float | None = None
    escape_direction: int = 0

    @property
    def dH(self) -> float | None:
        if self.log_dH is None:
            return None
        try:
            return math.exp(self.log_dH)
        except OverflowError:
            return math.inf

    @property
    def displacement(self) -> float | None:
        return None if self.x1 is None else self.x1 - self.x0


def samples_from_batch(res: BatchResult) -> list:
    out = []
    ddH = res.ddH
    for i in range(res.x0.shape[0]):
        if res.status[i] == RETURNED:
            out.append(ReturnMapSample(float(res.x0[i]), True, float(res.x1[i]), float(res.log_dH[i]), float(ddH[i])))
        elif res.status[i] == ESCAPED:
            out.append(ReturnMapSample(float(res.x0[i]), False, t_escape=float(res.t_stop[i]),
                                       escape_direction=int(np.sign(res.x1[i]))))
        else:
            raise StepSizeUnderflow(f"step size underflow at t = {res.t_stop[i]:.6g} from x0 = {res.x0[i]}")
    return out


def return_map(eq: AbelEquation, x0: float, cfg: IntegrationConfig = IntegrationConfig()) -> ReturnMapSample:
    """``H(x0) = x(1, x0)`` together with ``H'(x0)`` (log form) and ``H''(x0)``."""
    return samples_from_batch(integrate_batch(eq, [x0], cfg))[0]


def inverse_return_map(eq: AbelEquation, x1: float, cfg: IntegrationConfig = IntegrationConfig()) -> ReturnMapSample:
    """Backward flow from t = 1 to t = 0: the inverse map ``H^{-1}`` and its derivatives."""
    return samples_from_batch(integrate_batch(eq, [x1], cfg, backward=True))[0]
