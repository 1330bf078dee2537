"""
The one-parameter family of geodesics launched orthogonally from the diagonal.

A shot starts on the diagonal at distance R from the origin heading into the
region x > y (theta = -pi/4). It ends at the first of: a transversal return to
the diagonal, the tangent turning parallel-and-back to orthogonal
(theta = -5pi/4), or the x-axis guard band. The signed shooting function vanishes exactly at an
orthogonal return, which is what the closed profile needs.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core_ode import PhaseState
from .exceptions import ClassificationError, DomainError, NoSignChange, NonConvergence, ShrinkerError
from .integrator import (
    EventKind, EventSpec, dense_grid, evaluate, evaluate_many, guard_events, integrate,
)

logger = logging.getLogger(__name__)

LAUNCH_ANGLE = -math.pi / 4
PARALLEL_ANGLE = -3 * math.pi / 4
RETURN_ANGLE = -5 * math.pi / 4
DEFAULT_BRACKET_HIGH = 30.0
MAX_ITERATIONS = 200
POLISH_TOL = 1e-12


class Outcome(str, Enum):
    RETURNS_TO_L = 'ReturnsToL'
    TURNS_PARALLEL = 'TurnsParallel'
    HITS_X_AXIS = 'HitsXAxis'
    ORIGIN_FAILURE = 'OriginFailure'
    TIMEOUT = 'Timeout'


OUTCOME_BY_EVENT = {
    EventKind.CROSS_L: Outcome.RETURNS_TO_L,
    EventKind.ANGLE_LIMIT: Outcome.TURNS_PARALLEL,
    EventKind.AXIS_X: Outcome.HITS_X_AXIS,
    EventKind.ORIGIN_GUARD: Outcome.ORIGIN_FAILURE,
    EventKind.TIME_LIMIT: Outcome.TIMEOUT,
}


@dataclass(frozen=True, eq=False)
class ShotResult:
    R: float
    trajectory: object
    outcome: Outcome
    theta_end: float
    s_end: float
    shooting_value: float = None

    @property
    def classified(self):
        return self.outcome in (Outcome.RETURNS_TO_L, Outcome.TURNS_PARALLEL, Outcome.HITS_X_AXIS)


@dataclass(frozen=True, eq=False)
class RStarResult:
    r_star: float
    bracket_history: list
    final_shot: ShotResult
    orthogonality_residual: float
    s_residual: float
    iterations: int = 0


@dataclass(frozen=True)
class LargeRDiagnostics:
    R: float
    s_max: float
    r_at_s_max: float
    r_at_parallel: float
    theta_at_r0: float
    r0: float
    outcome: Outcome
    theta_monotone: bool = True


@dataclass(frozen=True, eq=False)
class ExploreResult:
    trajectory: object
    near_closures: list = field(default_factory=list)


def _require_symmetric(p):
    if not p.symmetric:
        raise DomainError(f"Orthogonal launch from the diagonal needs m == n, got m={p.m}, n={p.n}")


def initial_state(R, p):
    _require_symmetric(p)
    if not R > 0:
        raise DomainError(f"Launch radius must be positive, got {R}")
    a = R / math.sqrt(2.0)
    return PhaseState(a, a, LAUNCH_ANGLE)


def shot_events():
    return [
        EventSpec.cross_l(),
        EventSpec.angle_limit(RETURN_ANGLE),
        EventSpec.axis_x(),
        EventSpec.origin_guard(),
        EventSpec.time_limit(),
    ]


def shoot(R, p, cfg):
    traj = integrate(initial_state(R, p), shot_events(), cfg, p)
    end = traj.terminal_event
    outcome = OUTCOME_BY_EVENT[end.kind]
    shot = ShotResult(
        R=float(R),
        trajectory=traj,
        outcome=outcome,
        theta_end=end.state.theta,
        s_end=p.signed_ell_distance(end.state.x, end.state.y),
    )
    if shot.classified:
        shot = ShotResult(shot.R, traj, outcome, shot.theta_end, shot.s_end, shooting_function(shot))
    logger.debug("Shot R=%.15g ended %s (theta=%.6f, s=%.3e)", R, outcome.value, shot.theta_end, shot.s_end)
    return shot


def shooting_function(shot):
    """Positive on transversal returns, negative otherwise, zero at an orthogonal return."""
    if shot.outcome == Outcome.RETURNS_TO_L:
        return shot.theta_end - RETURN_ANGLE
    if shot.outcome in (Outcome.TURNS_PARALLEL, Outcome.HITS_X_AXIS):
        return -shot.s_end
    raise ClassificationError(f"Shot at R={shot.R} ended with {shot.outcome.value}; no shooting value")


def default_bracket(p, high=DEFAULT_BRACKET_HIGH):
    return (math.sqrt(2 * (2 * p.n - 1)) + 0.01, high)


def scan_bracket(p, cfg, bracket=None, samples=64):
    """Shooting values on a uniform grid and every bracket where the sign flips."""
    lo, hi = bracket or default_bracket(p)
    grid = np.linspace(lo, hi, samples)
    values = [shooting_function(shoot(R, p, cfg)) for R in grid]
    return list(zip(grid.tolist(), values)), sign_changes(grid, values)


def sign_changes(grid, values):
    return [
        (float(grid[i]), float(grid[i + 1]))
        for i in range(len(values) - 1)
        if values[i] * values[i + 1] < 0
    ]


def locate_bracket(p, cfg, bracket=None, samples=64, max_high=240.0, scan=scan_bracket):
    """Grid pre-scan that doubles the upper end until a sign change appears.

    `scan` has the signature of `scan_bracket`; the sweep service passes one
    that fans the grid out over Celery.
    """
    lo, hi = bracket or default_bracket(p)
    while hi <= max_high:
        _, changes = scan(p, cfg, (lo, hi), samples)
        if changes:
            return changes
        logger.info("No sign change on [%.4f, %.4f] for n=%d; widening", lo, hi, p.n)
        hi *= 2
    raise NoSignChange(f"No sign change of the shooting function below R={max_high}")


def find_rstar(p, cfg, bracket=None, solve_tol=1e-7, polish_width=1e-4, max_iterations=MAX_ITERATIONS):
    """Bisection on the shooting function, finished with Illinois false position.

    Polishing runs until the shooting value drops below POLISH_TOL or the
    bracket collapses to rounding; `solve_tol` only decides acceptance.
    The seam of the reflected profile carries any leftover angle as a kink.
    """
    _require_symmetric(p)
    lo, hi = bracket or default_bracket(p)
    shots = {lo: shoot(lo, p, cfg), hi: shoot(hi, p, cfg)}
    f_lo, f_hi = (_value(shots[lo]), _value(shots[hi]))
    history = [(lo, _sign(f_lo)), (hi, _sign(f_hi))]
    if f_lo * f_hi >= 0:
        raise NoSignChange(
            f"Shooting function has no sign change on [{lo}, {hi}] (values {f_lo:.3e}, {f_hi:.3e})",
            bracket=(lo, hi),
        )

    side = 0
    best = shots[lo] if f_lo > 0 else shots[hi]
    for iteration in range(1, max_iterations + 1):
        if hi - lo > polish_width:
            mid = 0.5 * (lo + hi)
        else:
            mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if not lo < mid < hi:
                mid = 0.5 * (lo + hi)
        shot = shoot(mid, p, cfg)
        f_mid = _value(shot)
        history.append((mid, _sign(f_mid)))
        logger.debug("find_rstar n=%d iter %d: R=%.15g f=%.3e", p.n, iteration, mid, f_mid)

        if 0 < f_mid < _value(best):
            best = shot
        if 0 < f_mid < POLISH_TOL:
            return _finish(best, history, iteration, solve_tol)

        if f_mid * f_lo > 0:
            lo, f_lo = mid, f_mid
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi, f_hi = mid, f_mid
            if side == 1:
                f_lo *= 0.5
            side = 1
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            return _finish(best, history, iteration, solve_tol)

    return _finish(best, history, max_iterations, solve_tol)


def _value(shot):
    return shooting_function(shot)


def _sign(value):
    return 1 if value > 0 else -1 if value < 0 else 0


def _finish(shot, history, iterations, solve_tol):
    orthogonality = abs(shot.theta_end - RETURN_ANGLE)
    s_residual = abs(shot.s_end)
    if orthogonality >= solve_tol or s_residual >= solve_tol:
        raise NonConvergence(
            f"R* search stalled at R={shot.R:.15g}: orthogonality {orthogonality:.3e}, s {s_residual:.3e}",
            history=history,
        )
    logger.info("R* = %.15g after %d iterations (orthogonality %.2e)", shot.R, iterations, orthogonality)
    return RStarResult(
        r_star=shot.R,
        bracket_history=history,
        final_shot=shot,
        orthogonality_residual=orthogonality,
        s_residual=s_residual,
        iterations=iterations,
    )


@dataclass(frozen=True, eq=False)
class RStarCandidate:
    bracket: tuple
    result: RStarResult = None
    error: ShrinkerError = None

    @property
    def ok(self):
        return self.result is not None

    def as_dict(self):
        lo, hi = self.bracket
        entry = {'bracket': [lo, hi], 'r_star': None, 'orthogonality_residual': None, 'error': ''}
        if self.ok:
            entry.update(r_star=self.result.r_star, orthogonality_residual=self.result.orthogonality_residual)
        else:
            entry['error'] = str(self.error)
        return entry


def find_all_rstar(p, cfg, bracket=None, samples=64, solve_tol=1e-7, brackets=None, scan=scan_bracket):
    """Polish every sign change independently; one failed polish does not stop the others.

    `brackets` skips the pre-scan when the sign changes are already known.
    """
    if brackets is None:
        brackets = locate_bracket(p, cfg, bracket, samples, scan=scan)
    candidates = []
    for pair in brackets:
        try:
            candidates.append(RStarCandidate(tuple(pair), result=find_rstar(p, cfg, pair, solve_tol)))
        except ShrinkerError as exc:
            logger.warning("Polishing bracket %s for n=%d failed: %s", pair, p.n, exc)
            candidates.append(RStarCandidate(tuple(pair), error=exc))
    return candidates


def _rotated(states):
    root2 = math.sqrt(2.0)
    return (states[:, 0] + states[:, 1]) / root2, (states[:, 0] - states[:, 1]) / root2


def _first_root(traj, fn, times, values):
    hits = np.nonzero(np.diff(np.sign(values)) != 0)[0]
    if not len(hits):
        return None
    i = hits[0]
    return brentq(lambda t: fn(evaluate(traj, t)), times[i], times[i + 1], xtol=1e-13)


def large_R_diagnostics(R, p, cfg, r0=3.0):
    shot = shoot(R, p, cfg)
    traj = shot.trajectory
    times = dense_grid(traj, refine=16)
    states = evaluate_many(traj, times)
    r, s = _rotated(states)
    peak = int(np.argmax(s))

    def theta_offset(state):
        return state.theta - PARALLEL_ANGLE

    t_parallel = _first_root(traj, theta_offset, times, states[:, 2] - PARALLEL_ANGLE)
    r_parallel = math.nan
    if t_parallel is not None:
        here = evaluate(traj, t_parallel)
        r_parallel = (here.x + here.y) / math.sqrt(2.0)

    def r_offset(state):
        return (state.x + state.y) / math.sqrt(2.0) - r0

    t_r0 = _first_root(traj, r_offset, times, r - r0)
    theta_r0 = math.nan if t_r0 is None else evaluate(traj, t_r0).theta - PARALLEL_ANGLE
    return LargeRDiagnostics(
        R=float(R),
        s_max=float(s[peak]),
        r_at_s_max=float(r[peak]),
        r_at_parallel=r_parallel,
        theta_at_r0=theta_r0,
        r0=r0,
        outcome=shot.outcome,
        theta_monotone=not angle_monotonicity_violations(traj),
    )


def angle_monotonicity_violations(traj, slack=1e-9):
    """Times where theta increases by more than `slack` between dense samples."""
    times = dense_grid(traj, refine=8)
    theta = evaluate_many(traj, times)[:, 2]
    jumps = np.diff(theta)
    return times[1:][jumps > slack].tolist()


def _wrapped(delta):
    return (delta + math.pi) % (2 * math.pi) - math.pi


def closure_gap(state, initial):
    return math.sqrt(
        (state.x - initial.x) ** 2 + (state.y - initial.y) ** 2 + _wrapped(state.theta - initial.theta) ** 2
    )


def explore(initial, p, cfg, t_long, gap_threshold=1e-2, min_separation=1.0):
    """Long free integration reporting times where the state nearly repeats."""
    if not (initial.x > 0 and initial.y > 0):
        raise DomainError("Exploration must start in the open quadrant")
    traj = integrate(initial, guard_events(), cfg.with_overrides(t_max=t_long), p)
    times = dense_grid(traj, refine=8)
    states = evaluate_many(traj, times)
    gaps = np.sqrt(
        (states[:, 0] - initial.x) ** 2
        + (states[:, 1] - initial.y) ** 2
        + _wrapped(states[:, 2] - initial.theta) ** 2
    )
    closures = []
    for i in range(1, len(times) - 1):
        if times[i] < min_separation or not (gaps[i] <= gaps[i - 1] and gaps[i] <= gaps[i + 1]):
            continue
        if gaps[i] > 10 * gap_threshold:
            continue
        refined = minimize_scalar(
            lambda t: closure_gap(evaluate(traj, t), initial),
            bounds=(times[i - 1], times[i + 1]),
            method='bounded',
            options={'xatol': 1e-12},
        )
        if refined.fun < gap_threshold:
            closures.append((float(refined.x), float(refined.fun)))
    logger.info("Explored t in [0, %.3f]: %d near closures", traj.t_end, len(closures))
    return ExploreResult(traj, closures)


@dataclass(frozen=True)
class MonotoneInterval:
    t_start: float
    t_end: float
    side: int
    turning: int


def ell_side_monotonicity(traj, p, refine=8):
    """Maximal intervals on one side of the diagonal where x, y and theta are all monotone.

    `side` is the sign of the signed diagonal distance and `turning` the sign
    of dtheta/dt over the interval.
    """
    times = dense_grid(traj, refine=refine)
    states = evaluate_many(traj, times)
    x, y, theta = states.T
    beta = p.ell_angle
    side = np.sign(x * math.sin(beta) - y * math.cos(beta))
    turning = np.sign((x / 2 - (p.m - 1) / x) * np.sin(theta) + ((p.n - 1) / y - y / 2) * np.cos(theta))
    key = np.column_stack([side, turning, np.sign(np.cos(theta)), np.sign(np.sin(theta))])
    valid = np.all(key != 0, axis=1)

    intervals = []
    start = None
    for i in range(len(times)):
        if start is not None and (not valid[i] or np.any(key[i] != key[start])):
            intervals.append(MonotoneInterval(float(times[start]), float(times[i - 1]),
                                              int(side[start]), int(turning[start])))
            start = None
        if start is None and valid[i]:
            start = i
    if start is not None:
        intervals.append(MonotoneInterval(float(times[start]), float(times[-1]),
                                          int(side[start]), int(turning[start])))
    return [interval for interval in intervals if interval.t_end > interval.t_start]
