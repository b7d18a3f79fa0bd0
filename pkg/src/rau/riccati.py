"""Factor-function ODE systems and their Riccati reduction.

The factorized propagator U = e^{-ia} e^{ib s+} e^{ic s-} e^{d sz} turns the
Schrodinger equation into four real consistency equations.  For the PT model
these reduce to

    da/dt = nu
    db/dt = 2 kappa b - 2 lambda b^2 - lambda/2      (Riccati)
    dd/dt = kappa - 2 b lambda
    dc/dt = -lambda/2 - 2 c dd/dt

and for the spin model to

    da/dt = -omega/2
    db/dt = -alpha kappa b - kappa b^2 - kappa/4     (Riccati)
    dd/dt = -alpha kappa/2 - b kappa
    dc/dt = -kappa/4 - 2 c dd/dt

Riccati solutions can blow up in finite time while the propagator itself
stays regular (the factorization is a coordinate chart that fails where
U_22 = 0).  The integrator therefore watches for divergence: when b heads to
infinity it switches to the reciprocal variable w = 1/b, whose flow is
regular through the pole, and brackets the zero crossing of w.  States past
a pole are invalidated (NaN) until an explicit re-anchor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .models import PTModelParams, SpinModelParams

__all__ = [
    "FactorState",
    "FactorTrajectory",
    "PoleEvent",
    "IntegratorConfig",
    "IntegrationBudgetError",
    "riccati_rhs_pt",
    "riccati_rhs_spin",
    "integrate_factors_pt",
    "integrate_factors_spin",
    "particular_b0",
    "ParticularRoots",
    "closed_form_b_proportional",
    "ClosedFormSolution",
    "consistency_residuals",
]


class IntegrationBudgetError(RuntimeError):
    """The adaptive integrator exceeded its max_steps budget."""


class InsufficientGridError(ValueError):
    """Fewer than 3 grid points; central differences undefined."""


@dataclass(frozen=True)
class FactorState:
    a: float
    b: float
    c: float
    d: float


@dataclass(frozen=True)
class PoleEvent:
    t_lo: float
    t_hi: float
    diverging_component: str  # "b", "c" or "d"


@dataclass(frozen=True)
class IntegratorConfig:
    initial_step: float = 1e-3
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    pole_threshold: float = 1e6
    max_steps: int = 10_000_000

    def __post_init__(self):
        for name in ("initial_step", "rel_tol", "abs_tol", "pole_threshold"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass
class FactorTrajectory:
    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    pole_events: List[PoleEvent]
    model_tag: str  # "pt" | "spin"

    @property
    def states(self) -> List[FactorState]:
        return [FactorState(float(a), float(b), float(c), float(d))
                for a, b, c, d in zip(self.a, self.b, self.c, self.d)]

    def valid_mask(self) -> np.ndarray:
        return np.isfinite(self.b) & np.isfinite(self.c) & np.isfinite(self.d)


# ---------------------------------------------------------------------------
# right-hand sides


def riccati_rhs_pt(b: float, kappa_val: float, lambda_val: float) -> float:
    return 2.0 * kappa_val * b - 2.0 * lambda_val * b * b - lambda_val / 2.0


def riccati_rhs_spin(b: float, kappa_val: float, alpha_coeff: float) -> float:
    # kappa multiplies every term of the spin Riccati equation
    k = kappa_val
    return -alpha_coeff * k * b - k * b * b - k / 4.0


def _rhs_pt(model: PTModelParams):
    def f(t, y):
        b, d, c = y
        k = model.kappa(t)
        l = model.lam(t)
        db = riccati_rhs_pt(b, k, l)
        dd = k - 2.0 * b * l
        dc = -l / 2.0 - 2.0 * c * dd
        return np.array([db, dd, dc])
    return f


def _rhs_spin(model: SpinModelParams):
    def f(t, y):
        b, d, c = y
        k = model.kappa(t)
        db = riccati_rhs_spin(b, k, model.alpha_coeff)
        dd = -model.alpha_coeff * k / 2.0 - b * k
        dc = -k / 4.0 - 2.0 * c * dd
        return np.array([db, dd, dc])
    return f


def _reciprocal_rhs_pt(model: PTModelParams):
    # w = 1/b; regular through the pole of b
    def g(t, w):
        k = model.kappa(t)
        l = model.lam(t)
        return -2.0 * k * w + 2.0 * l - l * w * w / 2.0
    return g


def _reciprocal_rhs_spin(model: SpinModelParams):
    def g(t, w):
        k = model.kappa(t)
        return model.alpha_coeff * k * w + k + k * w * w / 4.0
    return g


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) embedded pair

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


def _dp45_step(f, t, y, h):
    """One Dormand-Prince step; returns (y5, error_estimate)."""
    k = [np.asarray(f(t, y))]
    for i in range(1, 7):
        yi = y + h * sum(aij * kj for aij, kj in zip(_DP_A[i], k))
        k.append(np.asarray(f(t + _DP_C[i] * h, yi)))
    y5 = y + h * sum(bj * kj for bj, kj in zip(_DP_B5, k))
    y4 = y + h * sum(bj * kj for bj, kj in zip(_DP_B4, k))
    return y5, y5 - y4


class _BudgetCounter:
    def __init__(self, limit):
        self.limit = limit
        self.used = 0

    def spend(self):
        self.used += 1
        if self.used > self.limit:
            raise IntegrationBudgetError(
                f"adaptive integration exceeded max_steps={self.limit}")


def _advance(f, t, y, target, h, cfg, counter, max_step=np.inf,
             stop_predicate=None):
    """Adaptively integrate from t to target, yielding nothing but the final
    state, unless stop_predicate(t, y) fires after an accepted step (then the
    pre- and post-step points are returned for bracketing).

    Returns (status, t, y, h, t_prev, y_prev) where status is "reached" or
    "stopped".
    """
    t_prev, y_prev = t, y.copy()
    while t < target:
        h = min(h, max_step, target - t)
        if h <= 0 or t + h == t:
            raise IntegrationBudgetError("step size underflow")
        counter.spend()
        y_new, err = _dp45_step(f, t, y, h)
        if not np.all(np.isfinite(y_new)):
            # overflow inside the step: treat like a rejected step
            h *= 0.2
            continue
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t_prev, y_prev = t, y
            t, y = t + h, y_new
            if stop_predicate is not None and stop_predicate(t, y):
                return "stopped", t, y, h, t_prev, y_prev
        factor = 0.9 * (err_norm ** -0.2) if err_norm > 0 else 5.0
        h = h * min(5.0, max(0.2, factor))
    return "reached", t, y, h, t_prev, y_prev


def _scalar_w_bracket(recip_rhs, t_start, w_start, t_max, cfg, counter):
    """Follow w = 1/b alone (regular through the pole) until it changes sign;
    the crossing step brackets the pole of b.  Returns a PoleEvent, or None
    if w never crosses before t_max."""
    t, w = t_start, np.array([w_start])
    h = min(cfg.initial_step, 1e-3)
    sign0 = math.copysign(1.0, w_start)

    def crossed(tc, wc):
        return math.copysign(1.0, wc[0]) != sign0 or wc[0] == 0.0

    def f(tc, yc):
        return np.array([recip_rhs(tc, yc[0])])

    status, t, w, h, t_prev, _ = _advance(
        f, t, w, t_max, h, cfg, counter, max_step=1e-3,
        stop_predicate=crossed)
    if status == "stopped":
        return PoleEvent(t_lo=t_prev, t_hi=t, diverging_component="b")
    return None


# ---------------------------------------------------------------------------
# trajectory integration


def _integrate_factors(model, t0, t1, cfg, times, initial_state, model_tag):
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    if times is None:
        n = max(2, int(round((t1 - t0) / 1e-3)) + 1)
        times = np.linspace(t0, t1, n)
    else:
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing with >= 2 points")

    if model_tag == "pt":
        f = _rhs_pt(model)
        recip = _reciprocal_rhs_pt(model)

        def dd_of(t, b):
            return model.kappa(t) - 2.0 * b * model.lam(t)

        def dc_of(t, c, dd):
            return -model.lam(t) / 2.0 - 2.0 * c * dd

        a_rate = model.nu
    else:
        f = _rhs_spin(model)
        recip = _reciprocal_rhs_spin(model)

        def dd_of(t, b):
            k = model.kappa(t)
            return -model.alpha_coeff * k / 2.0 - b * k

        def dc_of(t, c, dd):
            return -model.kappa(t) / 4.0 - 2.0 * c * dd

        a_rate = -model.omega / 2.0

    def f_recip_joint(tc, z):
        # z = (w, d, c) with w = 1/b; valid while w != 0
        w, d, c = z
        dd = dd_of(tc, 1.0 / w)
        return np.array([recip(tc, w), dd, dc_of(tc, c, dd)])

    a0, b0, c0, d0 = initial_state
    a_vals = a0 + a_rate * (times - times[0])
    b_vals = np.full(len(times), np.nan)
    c_vals = np.full(len(times), np.nan)
    d_vals = np.full(len(times), np.nan)
    b_vals[0], c_vals[0], d_vals[0] = b0, c0, d0

    counter = _BudgetCounter(cfg.max_steps)
    pole_events: List[PoleEvent] = []
    # switch to the reciprocal chart well before the official threshold so
    # the blow-up location can still be bracketed accurately
    b_switch = min(1e3, cfg.pole_threshold)
    w_deep = 1.0 / cfg.pole_threshold

    def diverging(tc, yc):
        return (abs(yc[0]) > b_switch
                or abs(yc[1]) > cfg.pole_threshold
                or abs(yc[2]) > cfg.pole_threshold)

    def excursion_over(tc, zc):
        # leave the reciprocal chart: b came back down, or truly diverging
        return abs(zc[0]) >= 1.0 / b_switch or abs(zc[0]) <= w_deep

    t = times[0]
    y = np.array([b0, d0, c0])
    h = cfg.initial_step
    chart = "b"  # "b" = direct, "w" = reciprocal during a large-b excursion
    i = 1
    while i < len(times):
        try:
            if chart == "b":
                status, t, y, h, t_prev, y_prev = _advance(
                    f, t, y, times[i], h, cfg, counter,
                    stop_predicate=diverging)
            else:
                status, t, y, h, t_prev, y_prev = _advance(
                    f_recip_joint, t, y, times[i], h, cfg, counter,
                    max_step=1e-3, stop_predicate=excursion_over)
        except IntegrationBudgetError:
            if counter.used > counter.limit:
                raise
            # step underflow: blow-up outpaced the stop predicate; bracket
            # the pole from the last accepted point
            if chart == "w":
                event = _scalar_w_bracket(recip, t, y[0], times[-1], cfg,
                                          counter)
            else:
                event = _scalar_w_bracket(recip, t, 1.0 / y[0], times[-1],
                                          cfg, counter) if y[0] != 0 else None
            if event is None:
                event = PoleEvent(t_lo=t, t_hi=t + max(h, 1e-12),
                                  diverging_component="b")
            pole_events.append(event)
            break

        if status == "reached":
            if chart == "b":
                b_vals[i], d_vals[i], c_vals[i] = y
            else:
                b_vals[i], d_vals[i], c_vals[i] = 1.0 / y[0], y[1], y[2]
            i += 1
            continue

        # stopped by a predicate
        if chart == "b":
            b_c, d_c, c_c = y
            if abs(d_c) > cfg.pole_threshold or abs(c_c) > cfg.pole_threshold:
                comp = "d" if abs(d_c) >= abs(c_c) else "c"
                pole_events.append(
                    PoleEvent(t_lo=t_prev, t_hi=t, diverging_component=comp))
                break
            # enter the reciprocal chart
            y = np.array([1.0 / b_c, d_c, c_c])
            chart = "w"
            h = min(h, 1e-3)
            continue

        # chart == "w": either b returned below the switch level, or it is
        # past the official threshold (genuine blow-up)
        w_c, d_c, c_c = y
        if abs(w_c) >= 1.0 / b_switch:
            y = np.array([1.0 / w_c, d_c, c_c])
            chart = "b"
            continue
        event = _scalar_w_bracket(recip, t, w_c, times[-1], cfg, counter)
        if event is None:
            # |b| > pole_threshold without a sign flip of w before t1:
            # report the deep excursion itself as the event
            event = PoleEvent(t_lo=t_prev, t_hi=t, diverging_component="b")
        pole_events.append(event)
        break

    return FactorTrajectory(times=times, a=a_vals, b=b_vals, c=c_vals,
                            d=d_vals, pole_events=pole_events,
                            model_tag=model_tag)


def integrate_factors_pt(model: PTModelParams, t0: float, t1: float,
                         cfg: IntegratorConfig = IntegratorConfig(),
                         times: Optional[Sequence[float]] = None,
                         initial_state=(0.0, 0.0, 0.0, 0.0)) -> FactorTrajectory:
    """Integrate (a, b, c, d) for the PT model with U(t0, t0) = I
    (all factors zero) unless an explicit initial_state re-anchors the run."""
    return _integrate_factors(model, t0, t1, cfg, times, initial_state, "pt")


def integrate_factors_spin(model: SpinModelParams, t0: float, t1: float,
                           cfg: IntegratorConfig = IntegratorConfig(),
                           times: Optional[Sequence[float]] = None,
                           initial_state=(0.0, 0.0, 0.0, 0.0)) -> FactorTrajectory:
    return _integrate_factors(model, t0, t1, cfg, times, initial_state, "spin")


# ---------------------------------------------------------------------------
# proportional-coupling closed form


@dataclass(frozen=True)
class ParticularRoots:
    """Constant solutions of the PT Riccati equation under lambda = 2p k/(1-p^2).

    Roots of 4p b0^2 - 2(1-p^2) b0 + p = 0; real iff 1 - 6p^2 + p^4 >= 0,
    i.e. p^2 <= 3 - 2 sqrt(2).
    """

    real: bool
    roots: tuple  # (larger, smaller) by |.| descending when real


def particular_b0(p: float) -> ParticularRoots:
    if p == 0.0 or abs(p) == 1.0:
        raise ValueError("p must differ from 0 and +-1")
    disc = 1.0 - 6.0 * p * p + p ** 4
    if disc < 0.0:
        mu = math.sqrt(-disc)
        r1 = ((1 - p * p) + 1j * mu) / (4 * p)
        r2 = ((1 - p * p) - 1j * mu) / (4 * p)
        return ParticularRoots(real=False, roots=(r1, r2))
    sq = math.sqrt(disc)
    r1 = ((1 - p * p) + sq) / (4 * p)
    r2 = ((1 - p * p) - sq) / (4 * p)
    if abs(r1) < abs(r2):
        r1, r2 = r2, r1
    return ParticularRoots(real=True, roots=(r1, r2))


@dataclass
class ClosedFormSolution:
    times: np.ndarray
    b: np.ndarray
    pole_events: List[PoleEvent] = field(default_factory=list)


def _cumulative_simpson_uniform(y: np.ndarray, h: float) -> np.ndarray:
    """Cumulative integral on a uniform grid, 4th order, out[0] = 0."""
    from scipy.integrate import cumulative_simpson
    return np.concatenate(([0.0], cumulative_simpson(y, dx=h)))


def closed_form_b_proportional(p: float, kappa, t0: float, t1: float,
                               samples: int, root: str = "small",
                               b_initial: float = 0.0,
                               refine: int = 32) -> ClosedFormSolution:
    """Quadrature solution of the PT Riccati equation for lambda = 2p k/(1-p^2).

    With a constant particular root b0, b = b0 + 1/u linearizes the Riccati
    equation to u' = -(2 kappa - 4 lambda b0) u + 2 lambda, solved by an
    integrating factor evaluated with composite-Simpson quadrature on a grid
    `refine` times finer than the requested samples.

    The smaller-magnitude root conditions u best and is the default.
    """
    roots = particular_b0(p)
    if not roots.real:
        raise ValueError(f"p={p}: particular roots are a complex pair; "
                         "no real constant solution exists")
    b0 = roots.roots[0] if root == "large" else roots.roots[1]
    gamma = 2.0 * p / (1.0 - p * p)  # lambda = gamma * kappa

    if samples < 2:
        raise ValueError("samples must be >= 2")
    refine = max(2, refine + (refine % 2))
    n_fine = (samples - 1) * refine
    t_fine = np.linspace(t0, t1, n_fine + 1)
    h = (t1 - t0) / n_fine

    k_fine = np.array([kappa(t) for t in t_fine])
    lam_fine = gamma * k_fine
    # u' = -q u + 2 lambda with q = 2 kappa - 4 lambda b0
    q = 2.0 * k_fine - 4.0 * lam_fine * b0
    phi = _cumulative_simpson_uniform(q, h)
    inner = _cumulative_simpson_uniform(np.exp(phi) * 2.0 * lam_fine, h)

    v0 = b_initial - b0
    if v0 == 0.0:
        b_fine = np.full(n_fine + 1, b0)
        u = None
    else:
        u = np.exp(-phi) * (1.0 / v0 + inner)
        b_fine = b0 + np.where(u != 0.0, 1.0 / u, np.nan)

    pole_events: List[PoleEvent] = []
    if u is not None:
        sign_change = np.where(np.diff(np.sign(u)) != 0)[0]
        if len(sign_change):
            j = int(sign_change[0])
            pole_events.append(PoleEvent(t_lo=float(t_fine[j]),
                                         t_hi=float(t_fine[j + 1]),
                                         diverging_component="b"))
            b_fine[j + 1:] = np.nan

    idx = np.arange(0, n_fine + 1, refine)
    return ClosedFormSolution(times=t_fine[idx], b=b_fine[idx],
                              pole_events=pole_events)


# ---------------------------------------------------------------------------
# consistency diagnostics


def consistency_residuals(traj: FactorTrajectory, model) -> np.ndarray:
    """Max absolute residual of the four consistency equations at each
    interior grid time, using central-difference derivatives."""
    mask = traj.valid_mask()
    if np.count_nonzero(mask) < 3:
        raise InsufficientGridError("need >= 3 pole-free grid points")
    n = int(np.count_nonzero(mask))
    t = traj.times[:n]
    if not np.all(mask[:n]):
        raise ValueError("pole event inside the queried range")

    def cd(y):
        return (y[2:] - y[:-2]) / (t[2:] - t[:-2])

    da, db, dc, dd = cd(traj.a[:n]), cd(traj.b[:n]), cd(traj.c[:n]), cd(traj.d[:n])
    ti = t[1:-1]
    b, c = traj.b[1:n - 1], traj.c[1:n - 1]

    kap = np.array([model.kappa(x) for x in ti])
    if isinstance(model, PTModelParams):
        lam = np.array([model.lam(x) for x in ti])
        r1 = da - model.nu
        r2 = -4 * b * dc + dd - 8 * b * c * dd - kap
        r3 = db + 4 * b * b * dc - 2 * b * dd + 8 * b * b * c * dd + lam / 2
        r4 = dc + 2 * c * dd + lam / 2
    elif isinstance(model, SpinModelParams):
        al = model.alpha_coeff
        r1 = da + model.omega / 2
        r2 = -4 * b * dc + dd - 8 * b * c * dd + al * kap / 2
        r3 = db + 4 * b * b * dc - 2 * b * dd + 8 * b * b * c * dd + kap / 4
        r4 = dc + 2 * c * dd + kap / 4
    else:
        raise TypeError(f"unknown model type {type(model).__name__}")

    return np.max(np.abs(np.vstack([r1, r2, r3, r4])), axis=0)
