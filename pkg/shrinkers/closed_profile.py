"""
Closing a half-profile by reflection through the diagonal, plus the
certificates a closed profile has to carry: seam gap, embeddedness, number of
diagonal contacts and an independent finite-difference shrinker residual.
"""
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .core_ode import CurveJet, shrinker_residual, weighted_length
from .exceptions import DegenerateSegment, NotOrthogonal, ProfileError, SeamMismatch
from .integrator import dense_grid, evaluate, evaluate_many

logger = logging.getLogger(__name__)

COLLAR = 1e-12
ELL_TOL = 1e-9
ORTHOGONALITY_TOL = 1e-6
PROFILE_STEP_RATIO = 5


@dataclass(frozen=True, eq=False)
class ClosedProfile:
    points: np.ndarray
    params: object
    r_star: float
    max_residual: float = math.nan
    embedded: bool = False
    ell_contacts: int = 0
    closure_gap: float = math.nan
    spacing: float = math.nan

    def __post_init__(self):
        self.points.setflags(write=False)

    @property
    def certified(self):
        return (self.embedded and self.ell_contacts >= 2
                and self.closure_gap < self.spacing / 10 and self.max_residual < 1e-6)


@dataclass(frozen=True)
class AlternationReport:
    x_critical: list = field(default_factory=list)
    y_critical: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


def profile_config(cfg, resample_h):
    """Step cap for a half-profile resampled at `resample_h`.

    The residual stencil divides interpolant error by resample_h**2, so the
    steps it reads from may be at most a few spacings long.
    """
    return cfg.with_overrides(h_max=min(cfg.h_max, PROFILE_STEP_RATIO * resample_h))


def _ell_tangency(theta):
    """|cos| of the angle between the velocity and the diagonal direction."""
    return abs(math.cos(theta) + math.sin(theta)) / math.sqrt(2.0)


def reflect_close(half, p, resample_h, r_star=math.nan, orthogonality_tol=ORTHOGONALITY_TOL):
    """Resample a diagonal-to-diagonal arc at uniform arc length and append its mirror image."""
    if not p.symmetric:
        raise ProfileError("Reflection through the diagonal needs m == n")
    start, end = half.initial, half.final
    for label, state in (('start', start), ('end', end)):
        tangency = _ell_tangency(state.theta)
        if tangency > orthogonality_tol:
            raise NotOrthogonal(f"Half-profile {label} meets the diagonal at tangency {tangency:.3e}")

    count = max(int(math.ceil((half.t_end - half.t_start) / resample_h)) + 1, 3)
    times = np.linspace(half.t_start, half.t_end, count)
    arc = evaluate_many(half, times)[:, :2]
    mirror = arc[::-1, ::-1]

    gap = float(np.hypot(*(arc[-1] - mirror[0])))
    spacing = (half.t_end - half.t_start) / (count - 1)
    if gap >= spacing / 10:
        raise SeamMismatch(f"Seam gap {gap:.3e} exceeds a tenth of the spacing {spacing:.3e}")

    # mirror[0] duplicates the end seam and mirror[-1] equals arc[0]
    points = np.vstack([arc, mirror[1:]])
    points[-1] = points[0]
    return ClosedProfile(points=points, params=p, r_star=r_star, closure_gap=gap, spacing=spacing)


def _orientation(ax, ay, bx, by, cx, cy):
    value = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return np.where(np.abs(value) <= COLLAR, 0.0, value)


def _segments_cross(p1, p2, q1, q2):
    """Vectorized orientation test; touching counts as an intersection."""
    d1 = _orientation(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p1[:, 0], p1[:, 1])
    d2 = _orientation(q1[:, 0], q1[:, 1], q2[:, 0], q2[:, 1], p2[:, 0], p2[:, 1])
    d3 = _orientation(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q1[:, 0], q1[:, 1])
    d4 = _orientation(p1[:, 0], p1[:, 1], p2[:, 0], p2[:, 1], q2[:, 0], q2[:, 1])
    proper = (d1 * d2 <= 0) & (d3 * d4 <= 0)
    collinear = (d1 == 0) & (d2 == 0) & (d3 == 0) & (d4 == 0)
    if np.any(collinear):
        overlap = (
            (np.maximum(p1[:, 0], p2[:, 0]) >= np.minimum(q1[:, 0], q2[:, 0]))
            & (np.maximum(q1[:, 0], q2[:, 0]) >= np.minimum(p1[:, 0], p2[:, 0]))
            & (np.maximum(p1[:, 1], p2[:, 1]) >= np.minimum(q1[:, 1], q2[:, 1]))
            & (np.maximum(q1[:, 1], q2[:, 1]) >= np.minimum(p1[:, 1], p2[:, 1]))
        )
        proper = np.where(collinear, overlap, proper)
    return proper


def _candidate_pairs(start, stop, accelerate):
    count = len(start)
    if not accelerate:
        i, j = np.triu_indices(count, k=2)
        return i, j
    lengths = np.hypot(*(stop - start).T)
    tree = cKDTree(0.5 * (start + stop))
    pairs = tree.query_pairs(r=float(lengths.max()) * (1 + 1e-9), output_type='ndarray')
    if not len(pairs):
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    pairs.sort(axis=1)
    return pairs[:, 0], pairs[:, 1]


def is_embedded(points, accelerate=True):
    """True iff no two non-adjacent segments of the closed polyline meet."""
    points = np.asarray(points, dtype=float)
    if np.allclose(points[0], points[-1]):
        points = points[:-1]
    if len(points) < 3:
        raise ProfileError("A closed polyline needs at least four points")
    start = points
    stop = np.roll(points, -1, axis=0)
    if np.any(np.hypot(*(stop - start).T) == 0):
        raise DegenerateSegment("Closed polyline has a zero-length segment")

    count = len(start)
    i, j = _candidate_pairs(start, stop, accelerate)
    adjacent = (j - i == 1) | ((i == 0) & (j == count - 1))
    i, j = i[~adjacent], j[~adjacent]
    if not len(i):
        return True
    hits = _segments_cross(start[i], stop[i], start[j], stop[j])
    if np.any(hits):
        first = int(np.argmax(hits))
        logger.info("Self-intersection between segments %d and %d", i[first], j[first])
        return False
    return True


def signed_ell_distances(points, p):
    beta = p.ell_angle
    return points[:, 0] * math.sin(beta) - points[:, 1] * math.cos(beta)


def ell_contacts(profile, tol=ELL_TOL):
    """Maximal runs of the closed profile on the diagonal, plus transversal sign flips."""
    points = profile.points
    p = profile.params
    if np.any(points <= 0):
        raise ProfileError("Profile leaves the open quadrant; diagonal contacts are undefined")
    s = signed_ell_distances(points[:-1], p)
    if abs(s[0]) > tol:
        raise ProfileError("Profile is not seamed on the diagonal")
    on_line = np.abs(s) <= tol
    count = int(np.sum(on_line & ~np.roll(on_line, 1)))
    if on_line.all():
        count = 1
    signs = np.sign(np.where(on_line, 0.0, s))
    flips = (signs * np.roll(signs, -1)) < 0
    return count + int(np.sum(flips))


def _stencil_derivative(values, h, wrap=False):
    """Five-point central difference on a closed, uniformly spaced sample; `wrap` for angles."""
    def spread(k):
        delta = np.roll(values, -k) - np.roll(values, k)
        return (delta + math.pi) % (2 * math.pi) - math.pi if wrap else delta
    return (8 * spread(1) - spread(2)) / (12 * h)


def polyline_residuals(points, p, closed=True, spacing=None):
    """Shrinker residual at each point from finite-difference jets along arc length.

    The tangent angle comes from stencils of the coordinates and the curvature
    from a stencil of the angle. The step is `spacing` when the arc length
    between samples is known, otherwise the mean chord, which is short of the
    arc by O(h**2).
    """
    points = np.asarray(points, dtype=float)
    if closed:
        if np.allclose(points[0], points[-1]):
            points = points[:-1]
        steps = np.hypot(*(np.roll(points, -1, axis=0) - points).T)
    else:
        steps = np.hypot(*(points[1:] - points[:-1]).T)
    chord = float(np.mean(steps))
    if np.max(np.abs(steps - chord)) > 1e-3 * chord:
        raise ProfileError("Finite-difference jets need uniform spacing")
    h = spacing if spacing and math.isfinite(spacing) else chord

    theta = np.arctan2(_stencil_derivative(points[:, 1], h), _stencil_derivative(points[:, 0], h))
    kappa = _stencil_derivative(theta, h, wrap=True)
    if not closed:
        # two stencils deep on each end
        interior = slice(4, len(points) - 4)
        points, theta, kappa = points[interior], theta[interior], kappa[interior]
    return np.array([
        shrinker_residual(CurveJet(x, y, t, k), p)
        for x, y, t, k in zip(points[:, 0], points[:, 1], theta, kappa)
    ])


def profile_residual(profile):
    """Largest |residual| over the closed profile; returns the profile with it recorded."""
    residuals = polyline_residuals(profile.points, profile.params, closed=True, spacing=profile.spacing)
    worst = float(np.max(np.abs(residuals)))
    return worst, replace(profile, max_residual=worst)


def certify(profile, residual_limit=1e-6):
    """Fill in every certificate and fail unless all of them pass."""
    _, profile = profile_residual(profile)
    profile = replace(profile, embedded=is_embedded(profile.points), ell_contacts=ell_contacts(profile))
    problems = []
    if not profile.embedded:
        problems.append("profile is not embedded")
    if profile.ell_contacts < 2:
        problems.append(f"profile meets the diagonal {profile.ell_contacts} time(s), expected at least 2")
    if not profile.closure_gap < profile.spacing / 10:
        problems.append(f"seam gap {profile.closure_gap:.3e} too large")
    if not profile.max_residual < residual_limit:
        problems.append(f"residual {profile.max_residual:.3e} above {residual_limit:.1e}")
    if problems:
        raise ProfileError("Certificate failed: " + "; ".join(problems), profile=profile)
    return profile


def alternation_violations(critical, centre, label):
    """Check successive critical values straddle `centre`: maxima above, minima below."""
    violations = []
    for index, (t, value, kind) in enumerate(critical):
        offset = value - centre
        if kind == 'min' and offset > 0:
            violations.append((label, t, 'positive minimum'))
        if kind == 'max' and offset < 0:
            violations.append((label, t, 'negative maximum'))
        if index:
            previous = critical[index - 1][1] - centre
            if previous * offset > 0:
                violations.append((label, t, 'no sign change since previous critical point'))
    return violations


def _critical_points(traj, component, times, states):
    # x' = cos(theta), y' = sin(theta)
    trig = np.cos if component == 0 else np.sin
    rate = trig(states[:, 2])
    found = []
    for i in np.nonzero(np.diff(np.sign(rate)) != 0)[0]:
        if rate[i] == 0 and i == 0:
            continue
        t0 = brentq(lambda t: float(trig(evaluate(traj, t).theta)), times[i], times[i + 1], xtol=1e-13)
        if t0 <= traj.t_start or t0 >= traj.t_end:
            continue
        if found and t0 - found[-1][0] < 1e-9:
            continue
        state = evaluate(traj, t0)
        kind = 'max' if rate[i] > 0 else 'min'
        found.append((float(t0), state.x if component == 0 else state.y, kind))
    return found


def critical_alternation(traj, p):
    """Interior extrema of x(t) and y(t) must alternate around the cylinder radii."""
    times = dense_grid(traj, refine=8)
    states = evaluate_many(traj, times)
    x_critical = _critical_points(traj, 0, times, states)
    y_critical = _critical_points(traj, 1, times, states)
    violations = (alternation_violations(x_critical, p.cyl_x, 'x')
                  + alternation_violations(y_critical, p.cyl_y, 'y'))
    return AlternationReport(x_critical, y_critical, violations)


def _normals(points):
    closed = points[:-1]
    tangent = np.roll(closed, -1, axis=0) - np.roll(closed, 1, axis=0)
    tangent /= np.hypot(*tangent.T)[:, None]
    return np.column_stack([-tangent[:, 1], tangent[:, 0]])


def first_variation_exponent(profile, amplitudes=(0.02, 0.01, 0.005), mode=3):
    """Fitted power of |L(perturbed) - L| in the perturbation amplitude."""
    points = np.asarray(profile.points)
    p = profile.params
    base = weighted_length(points, p)
    closed = points[:-1]
    phase = np.linspace(0.0, 2 * math.pi, len(closed), endpoint=False)
    bump = np.sin(mode * phase) + 0.5 * np.cos((mode + 2) * phase)
    normals = _normals(points)
    changes = []
    for eps in amplitudes:
        moved = closed + eps * bump[:, None] * normals
        moved = np.vstack([moved, moved[:1]])
        changes.append(abs(weighted_length(moved, p) - base))
    slope, _ = np.polyfit(np.log(amplitudes), np.log(changes), 1)
    return float(slope), changes
