"""
Adaptive integration of the geodesic flow with dense output and events.

Steps are taken by scipy's Dormand-Prince 5(4) stepper (``RK45``) whose free
4th-order interpolant doubles as the dense output. Events are watched between
accepted steps and localized on the interpolant with Brent's method, so the
boundary handling (axis guard bands, the origin guard, the diagonal crossing)
all lives here and never inside the right-hand side.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.integrate import RK45, solve_ivp
from scipy.optimize import brentq

from .core_ode import PhaseState, flow_rhs, graphical_rhs
from .exceptions import DomainError, OutOfSpanError, ShrinkerError, StepSizeCollapse

logger = logging.getLogger(__name__)

STEP_FLOOR = 1e-14


class EventKind(str, Enum):
    CROSS_L = 'CrossL'
    ANGLE_LIMIT = 'AngleLimit'
    AXIS_X = 'AxisX'
    AXIS_Y = 'AxisY'
    ORIGIN_GUARD = 'OriginGuard'
    TIME_LIMIT = 'TimeLimit'


@dataclass(frozen=True)
class EventSpec:
    kind: EventKind
    value: float = None
    arming_delay: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, 'kind', EventKind(self.kind))
        if self.kind == EventKind.ANGLE_LIMIT and (self.value is None or not math.isfinite(self.value)):
            raise ShrinkerError("AngleLimit needs a finite angle")
        if self.arming_delay < 0:
            raise ShrinkerError("arming_delay must be non-negative")

    @classmethod
    def cross_l(cls, arming_delay=0.0):
        return cls(EventKind.CROSS_L, arming_delay=arming_delay)

    @classmethod
    def angle_limit(cls, value):
        return cls(EventKind.ANGLE_LIMIT, value=value)

    @classmethod
    def axis_x(cls):
        return cls(EventKind.AXIS_X)

    @classmethod
    def axis_y(cls):
        return cls(EventKind.AXIS_Y)

    @classmethod
    def origin_guard(cls):
        return cls(EventKind.ORIGIN_GUARD)

    @classmethod
    def time_limit(cls):
        return cls(EventKind.TIME_LIMIT)

    @property
    def label(self):
        if self.kind == EventKind.ANGLE_LIMIT:
            return f"{self.kind.value}({self.value!r})"
        return self.kind.value


AXIS_KINDS = (EventKind.AXIS_X, EventKind.AXIS_Y)


def guard_events():
    return [EventSpec.axis_x(), EventSpec.axis_y(), EventSpec.origin_guard(), EventSpec.time_limit()]


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    h_init: float = 1e-3
    h_max: float = 0.05
    t_max: float = 200.0
    eps_axis: float = 1e-8
    eps_origin: float = 1e-6
    event_tol: float = 1e-12
    axis_band: float = 5e-2

    def __post_init__(self):
        for name in ('rel_tol', 'abs_tol', 'h_init', 'h_max', 't_max', 'eps_axis', 'eps_origin', 'event_tol',
                     'axis_band'):
            if not getattr(self, name) > 0:
                raise ShrinkerError(f"{name} must be strictly positive")
        if self.eps_axis >= 1:
            raise ShrinkerError("eps_axis must be below 1")

    @property
    def outer_axis_band(self):
        """Distance from an axis where integration stops; never inside the guard band."""
        return max(self.axis_band, self.eps_axis)

    @classmethod
    def from_settings(cls, **overrides):
        from django.conf import settings

        values = dict(settings.SHRINKERS.get('INTEGRATOR', {}))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def with_overrides(self, **overrides):
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


@dataclass(frozen=True)
class TerminalEvent:
    spec: EventSpec
    t: float
    state: PhaseState

    @property
    def kind(self):
        return self.spec.kind


@dataclass(frozen=True)
class IntegrationStats:
    accepted_steps: int
    rejected_steps: int
    rhs_evaluations: int


@dataclass(frozen=True, eq=False)
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    segments: tuple
    terminal_event: TerminalEvent
    stats: IntegrationStats
    params: object = None
    config: IntegratorConfig = field(default=None, compare=False)

    def __post_init__(self):
        self.t.setflags(write=False)
        self.states.setflags(write=False)

    @property
    def samples(self):
        return [(float(t), PhaseState.from_array(z)) for t, z in zip(self.t, self.states)]

    @property
    def t_start(self):
        return float(self.t[0])

    @property
    def t_end(self):
        return float(self.t[-1])

    @property
    def initial(self):
        return PhaseState.from_array(self.states[0])

    @property
    def final(self):
        return PhaseState.from_array(self.states[-1])

    def __len__(self):
        return len(self.t)


def event_value(state, spec, p, cfg=None):
    cfg = cfg or IntegratorConfig()
    kind = spec.kind
    if kind == EventKind.CROSS_L:
        return p.signed_ell_distance(state.x, state.y)
    if kind == EventKind.ANGLE_LIMIT:
        return state.theta - spec.value
    if kind == EventKind.AXIS_X:
        return state.y - cfg.eps_axis
    if kind == EventKind.AXIS_Y:
        return state.x - cfg.eps_axis
    if kind == EventKind.ORIGIN_GUARD:
        return state.x ** 2 + state.y ** 2 - cfg.eps_origin ** 2
    # TimeLimit is handled by the stepper's t_bound
    return 1.0


class _Watch:
    """Sign tracker for one event; CrossL stays disarmed until the state leaves the line."""

    def __init__(self, spec, p, cfg, state, t):
        self.spec = spec
        self.p = p
        self.cfg = cfg
        self.armed = False
        self.previous = None
        # axis events are watched at the outer band, AxisApproach covers the rest;
        # a start already inside the outer band is watched at the guard band
        self.band = cfg.eps_axis
        if spec.kind in AXIS_KINDS and self._distance(state) > cfg.outer_axis_band:
            self.band = cfg.outer_axis_band
        self.update(state, t)

    def _distance(self, state):
        return state.y if self.spec.kind == EventKind.AXIS_X else state.x

    @property
    def extrapolates(self):
        return self.band > self.cfg.eps_axis

    def value(self, state):
        if self.spec.kind in AXIS_KINDS:
            return self._distance(state) - self.band
        return event_value(state, self.spec, self.p, self.cfg)

    def update(self, state, t):
        g = self.value(state)
        if not self.armed and t >= self.spec.arming_delay:
            if self.spec.kind != EventKind.CROSS_L or abs(g) > 10 * self.cfg.event_tol:
                self.armed = True
                self.previous = g
                return False
        if not self.armed:
            return False
        fired = (self.previous > 0 >= g) or (self.previous < 0 <= g)
        self.previous = g
        return fired


class AxisApproach:
    """
    Continuation from the outer axis band down to the guard band.

    Near an axis the flow has a regular branch meeting the axis orthogonally
    and a mode growing like distance**-(n-1); integrating into the axis
    amplifies round-off along that mode. Below the band the path follows the
    regular branch: the tangent component along the axis shrinks in
    proportion to the distance, so the terminal angle tends to orthogonal
    as eps_axis goes to zero.
    """

    def __init__(self, kind, t0, state, eps_axis):
        self.kind = kind
        self.t0 = t0
        self.theta0 = state.theta
        if kind == EventKind.AXIS_X:
            self.along0, self.q0, self.a0 = state.x, state.y, math.cos(state.theta)
        else:
            self.along0, self.q0, self.a0 = state.y, state.x, math.sin(state.theta)
        self.eps_axis = eps_axis
        self.t_end = t0 + (self.q0 - eps_axis)

    def _at(self, q):
        a = np.clip(self.a0 * q / self.q0, -1.0, 1.0)
        along = self.along0 + self.a0 * (self.q0 ** 2 - q ** 2) / (2 * self.q0)
        approach = -np.sqrt(1.0 - a ** 2)
        if self.kind == EventKind.AXIS_X:
            x, y, angle = along, q, np.arctan2(approach, a)
        else:
            x, y, angle = q, along, np.arctan2(a, approach)
        # keep theta on the unwrapped branch it had at the band
        theta = self.theta0 + (angle - self.theta0 + math.pi) % (2 * math.pi) - math.pi
        return np.array([x, y, theta])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        q = np.clip(self.q0 - (t - self.t0), self.eps_axis, self.q0)
        return self._at(q)

    @property
    def end_state(self):
        return PhaseState.from_array(self._at(self.eps_axis))


def _rejected_steps(solver, accepted):
    # every RK45 attempt costs six evaluations, plus the initial one
    attempts = max((solver.nfev - 1) // 6, accepted)
    return attempts - accepted


def integrate(initial, events, cfg, p):
    """Advance (x, y, theta) from `initial` until the first event or cfg.t_max."""
    if not events:
        raise ShrinkerError("At least one event must be supplied")
    if not (initial.x > 0 and initial.y > 0):
        raise DomainError(f"Initial point ({initial.x}, {initial.y}) is not in the open quadrant")

    watched = [spec for spec in events if spec.kind != EventKind.TIME_LIMIT]
    time_spec = next((spec for spec in events if spec.kind == EventKind.TIME_LIMIT), EventSpec.time_limit())

    solver = RK45(
        lambda t, z: flow_rhs(t, z, p.m, p.n),
        0.0,
        initial.as_array(),
        cfg.t_max,
        max_step=cfg.h_max,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        first_step=cfg.h_init,
    )
    watches = [_Watch(spec, p, cfg, initial, 0.0) for spec in watched]

    times = [0.0]
    states = [initial.as_array()]
    segments = []
    accepted = 0
    terminal = None

    with np.errstate(divide='ignore', invalid='ignore', over='ignore'):
        while terminal is None:
            message = solver.step()
            if solver.status == 'failed':
                raise StepSizeCollapse(f"Step size collapsed at t={solver.t}: {message}", t=solver.t)
            t_old, t_new = solver.t_old, solver.t
            new_state = PhaseState.from_array(solver.y)
            dense = solver.dense_output()

            fired = [w for w in watches if w.update(new_state, t_new)]
            if fired:
                terminal, watch = _localize(fired, dense, t_old, t_new, cfg)
                times.append(terminal.t)
                states.append(terminal.state.as_array())
                segments.append(dense)
                accepted += 1
                if terminal.kind in AXIS_KINDS and watch.extrapolates:
                    approach = AxisApproach(terminal.kind, terminal.t, terminal.state, cfg.eps_axis)
                    terminal = TerminalEvent(terminal.spec, approach.t_end, approach.end_state)
                    times.append(terminal.t)
                    states.append(terminal.state.as_array())
                    segments.append(approach)
                break

            times.append(t_new)
            states.append(solver.y.copy())
            segments.append(dense)
            accepted += 1

            if solver.status == 'finished':
                terminal = TerminalEvent(time_spec, t_new, new_state)
            elif solver.step_size < STEP_FLOOR:
                raise StepSizeCollapse(f"Step size {solver.step_size:.3e} below floor at t={t_new}", t=t_new)

    stats = IntegrationStats(
        accepted_steps=accepted,
        rejected_steps=_rejected_steps(solver, accepted),
        rhs_evaluations=solver.nfev,
    )
    logger.debug("Integration ended with %s at t=%.6f after %d steps",
                 terminal.spec.label, terminal.t, accepted)
    return Trajectory(
        t=np.asarray(times, dtype=float),
        states=np.vstack(states),
        segments=tuple(segments),
        terminal_event=terminal,
        stats=stats,
        params=p,
        config=cfg,
    )


def _localize(fired, dense, t_old, t_new, cfg):
    best = None
    for watch in fired:
        def g(t, watch=watch):
            return watch.value(PhaseState.from_array(dense(t)))

        g_old, g_new = g(t_old), g(t_new)
        if g_new == 0.0:
            t_root = t_new
        elif g_old == 0.0 or g_old * g_new > 0:
            t_root = t_new
        else:
            t_root = brentq(g, t_old, t_new, xtol=cfg.event_tol)
        if best is None or t_root < best[0]:
            best = (t_root, watch)
    t_root, watch = best
    return TerminalEvent(watch.spec, t_root, PhaseState.from_array(dense(t_root))), watch


def _segment_index(traj, t):
    index = int(np.searchsorted(traj.t, t, side='right')) - 1
    return min(max(index, 0), len(traj.segments) - 1)


def evaluate(traj, t):
    """Interpolated state at parameter t; sample times return the stored sample exactly."""
    t = float(t)
    if t < traj.t[0] or t > traj.t[-1]:
        raise OutOfSpanError(f"t={t} outside [{traj.t[0]}, {traj.t[-1]}]")
    index = int(np.searchsorted(traj.t, t, side='left'))
    if index < len(traj.t) and traj.t[index] == t:
        return PhaseState.from_array(traj.states[index])
    return PhaseState.from_array(traj.segments[_segment_index(traj, t)](t))


def evaluate_many(traj, times):
    """Vectorized evaluate; returns an (N, 3) array."""
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < traj.t[0] or times.max() > traj.t[-1]):
        raise OutOfSpanError("Requested times fall outside the trajectory span")
    out = np.empty((times.size, 3))
    indices = np.clip(np.searchsorted(traj.t, times, side='right') - 1, 0, len(traj.segments) - 1)
    for index in np.unique(indices):
        mask = indices == index
        out[mask] = traj.segments[index](times[mask]).T
    return out


def dense_grid(traj, refine=8):
    """Sample times with `refine` subdivisions per accepted step, endpoints included."""
    pieces = [np.linspace(a, b, refine, endpoint=False) for a, b in zip(traj.t[:-1], traj.t[1:])]
    pieces.append(traj.t[-1:])
    return np.concatenate(pieces)


def integrate_graphical(x0, u0, du0, x_end, p, cfg):
    """Integrate the graph form u'' = F(x, u, u') as a first-order system."""
    def rhs(x, z):
        return [z[1], graphical_rhs(x, z[0], z[1], p)]

    def leaves_quadrant(x, z):
        return z[0] - cfg.eps_axis
    leaves_quadrant.terminal = True

    solution = solve_ivp(
        rhs, (x0, x_end), [u0, du0], method='RK45', dense_output=True,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, max_step=cfg.h_max, events=leaves_quadrant,
    )
    if solution.status < 0:
        raise StepSizeCollapse(f"Graphical integration failed: {solution.message}")
    return solution


def oracle_difference(x0, u0, du0, x_end, p, cfg):
    """Sup of |y_parametric(x) - u(x)| over the span both formulations cover."""
    if x_end <= x0:
        raise DomainError("The graphical span must run in the +x direction")
    graph = integrate_graphical(x0, u0, du0, x_end, p, cfg)
    initial = PhaseState(x0, u0, math.atan(du0))
    span_cfg = cfg.with_overrides(t_max=4 * (x_end - x0) * math.sqrt(1 + du0 ** 2) + 1.0)
    traj = integrate(initial, guard_events(), span_cfg, p)

    grid = evaluate_many(traj, dense_grid(traj))
    x_hi = min(float(graph.t[-1]), x_end)
    # only the leading stretch where x keeps increasing is a graph over the x-axis
    monotone = np.cumprod(np.concatenate([[True], np.diff(grid[:, 0]) > 0])).astype(bool)
    keep = monotone & (grid[:, 0] <= x_hi)
    xs, ys = grid[keep, 0], grid[keep, 1]
    return float(np.max(np.abs(ys - graph.sol(xs)[0])))
