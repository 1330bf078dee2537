"""
Linearization of the profile equation about the diagonal (m == n).

Writing a nearby profile as a normal graph s = f(r) over the diagonal, with
r = (x + y)/sqrt(2), s = (x - y)/sqrt(2) and 2xy = r^2 - s^2, the geodesic
equation of the conformal metric exp(2w)|dz|^2 with
w = (n - 1) log(r^2 - s^2) - (r^2 + s^2)/4 reads

    f'' / (1 + f'^2) = w_s - f' w_r.

Dropping quadratic terms gives, with a = 2(n - 1),

    g'' + (a/r - r/2) g' + (1/2 + a/r^2) g = 0.          (rederived)

The printed linearization carries a = n - 1 instead. Both are kept; the
indicial equation at r = 0 is alpha^2 + (a - 1) alpha + a = 0, which for
a = n - 1 is alpha^2 + (n - 2) alpha + (n - 1) = 0.

The substitution h = exp(-r^2/8) g turns the linear equation into

    h'' + (a/r) h' + (1/4 + a/4 - r^2/16 + 1/2 + a/r^2) h = 0,

which for a = n - 1 is h'' + (n-1)/r h' + (n/4 - r^2/16 + 1/2 + (n-1)/r^2) h = 0.
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import solve_ivp

from .core_ode import PhaseState, SymmetryParams
from .exceptions import DomainError, StepSizeCollapse
from .integrator import EventSpec, dense_grid, evaluate_many, integrate

logger = logging.getLogger(__name__)

PROBE_AMPLITUDES = (1e-4, 1e-5, 1e-6)


class Variant(str, Enum):
    PRINTED = 'printed'
    REDERIVED = 'rederived'


class Classification(str, Enum):
    OSCILLATORY = 'Oscillatory'
    REAL_SINGULAR = 'RealSingular'


def coupling(n, variant):
    """The coefficient a multiplying 1/r and 1/r^2 in the linear equation."""
    return (n - 1) if Variant(variant) == Variant.PRINTED else 2 * (n - 1)


@dataclass(frozen=True)
class IndicialReport:
    n: int
    variant: Variant
    b: float
    c: float
    discriminant: float
    roots: tuple
    classification: Classification

    @property
    def coefficients(self):
        return (1.0, self.b, self.c)

    @property
    def near_origin_exponent(self):
        """Real part of the leading behaviour; -(n-2)/2 for oscillatory printed roots."""
        return min(root.real for root in self.roots)

    @property
    def integer_roots(self):
        return all(root.imag == 0 and float(root.real).is_integer() for root in self.roots)

    def root_residuals(self):
        return [abs(root * root + self.b * root + self.c) for root in self.roots]


def indicial_roots(n, variant=Variant.PRINTED):
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    a = coupling(n, variant)
    b, c = float(a - 1), float(a)
    discriminant = b * b - 4 * c
    root = cmath.sqrt(discriminant)
    roots = ((-b + root) / 2, (-b - root) / 2)
    if discriminant >= 0:
        roots = tuple(complex(r.real, 0.0) for r in roots)
    classification = Classification.OSCILLATORY if discriminant < 0 else Classification.REAL_SINGULAR
    return IndicialReport(n, Variant(variant), b, c, discriminant, roots, classification)


def printed_discriminant(n):
    return n * n - 8 * n + 8


def discriminant_integrality_scan(n_max):
    """True iff the printed discriminant is a perfect square for no n in [2, n_max] except n = 7.

    At n = 7 the discriminant is 1 and the roots -2, -3 differ by an integer, so
    n = 7 is reported separately by `resonant_orders` instead of failing the scan.
    """
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    return resonant_orders(n_max) == ([7] if n_max >= 7 else [])


def resonant_orders(n_max):
    ns = np.arange(2, n_max + 1, dtype=np.int64)
    disc = ns * ns - 8 * ns + 8
    positive = disc > 0
    roots = np.zeros_like(disc)
    roots[positive] = np.floor(np.sqrt(disc[positive].astype(float))).astype(np.int64)
    # correct floating sqrt at large n
    roots[positive] += (roots[positive] + 1) ** 2 <= disc[positive]
    roots[positive] -= roots[positive] ** 2 > disc[positive]
    square = positive & (roots * roots == disc)
    return ns[square].tolist()


@dataclass(frozen=True, eq=False)
class LinearSolution:
    n: int
    variant: Variant
    r: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    h: np.ndarray
    h_residual: float
    solution: object = field(repr=False, default=None)


def _linear_rhs(a):
    def rhs(r, z):
        g, dg = z
        return [dg, -(a / r - r / 2) * dg - (0.5 + a / r ** 2) * g]
    return rhs


def linearized_solution(n, variant, r_span, initial, samples=400, rel_tol=1e-11, abs_tol=1e-14):
    """Integrate the linear equation from r_span[0] towards r_span[1] and check the h-form."""
    r_from, r_to = (float(v) for v in r_span)
    if min(r_from, r_to) <= 0:
        raise DomainError("r = 0 is a regular singular point; the span must stay positive")
    a = coupling(n, variant)
    solution = solve_ivp(
        _linear_rhs(a), (r_from, r_to), list(initial), method='RK45',
        dense_output=True, rtol=rel_tol, atol=abs_tol,
    )
    if solution.status < 0:
        raise StepSizeCollapse(f"Linear integration failed: {solution.message}")

    lo, hi = sorted((r_from, r_to))
    r = np.geomspace(lo, hi, samples)
    g, dg = solution.sol(r)
    ddg = -(a / r - r / 2) * dg - (0.5 + a / r ** 2) * g
    weight = np.exp(-r ** 2 / 8)
    h = weight * g
    dh = weight * (dg - r * g / 4)
    ddh = weight * (ddg - r * dg / 2 + (r ** 2 / 16 - 0.25) * g)
    potential = 0.25 + a / 4 - r ** 2 / 16 + 0.5 + a / r ** 2
    residual = ddh + (a / r) * dh + potential * h
    scale = np.maximum(1.0, np.abs(ddh) + np.abs(a / r * dh) + np.abs(potential * h))
    return LinearSolution(
        n=n, variant=Variant(variant), r=r, g=g, dg=dg, h=h,
        h_residual=float(np.max(np.abs(residual) / scale)), solution=solution,
    )


def sign_changes(values):
    signs = np.sign(values[values != 0])
    return int(np.sum(signs[1:] != signs[:-1]))


def fitted_exponent(r, g):
    """Log-log slope of |g| against r."""
    slope, _ = np.polyfit(np.log(r), np.log(np.abs(g)), 1)
    return float(slope)


@dataclass(frozen=True)
class ProbeReport:
    n: int
    amplitudes: tuple
    linearity_error: float
    sign_changes: int
    oscillatory: bool
    distances: dict
    predicted_oscillatory: dict
    matched_variant: Variant

    @property
    def linear(self):
        return self.linearity_error < 0.01


def _displacement(n, eps, r_start, r_stop, r_grid, cfg):
    """Normal displacement s(r)/eps of the nonlinear flow started parallel to the diagonal."""
    p = SymmetryParams(n, n)
    root2 = math.sqrt(2.0)
    start = PhaseState((r_start + eps) / root2, (r_start - eps) / root2, -3 * math.pi / 4)
    # the run hugs the diagonal into the origin, well inside any outer axis band
    probe_cfg = cfg.with_overrides(eps_origin=r_stop, t_max=4 * r_start, axis_band=cfg.eps_axis)
    events = [EventSpec.axis_x(), EventSpec.axis_y(), EventSpec.origin_guard(), EventSpec.time_limit()]
    traj = integrate(start, events, probe_cfg, p)
    states = evaluate_many(traj, dense_grid(traj, refine=8))
    r = (states[:, 0] + states[:, 1]) / root2
    s = (states[:, 0] - states[:, 1]) / root2
    decreasing = np.cumprod(np.concatenate([[True], np.diff(r) < 0])).astype(bool)
    r, s = r[decreasing][::-1], s[decreasing][::-1]
    if r_grid[0] < r[0]:
        raise DomainError(f"Probe stopped at r={r[0]:.3e} before reaching the window")
    return np.interp(r_grid, r, s) / eps


def numeric_indicial_probe(n, cfg, amplitudes=PROBE_AMPLITUDES, r_start=1.0, r_stop=None, samples=200):
    """Compare the nonlinear flow near the diagonal with both linear predictions.

    Real roots grow like a large negative power of r, so the default window shrinks
    towards the origin only as far as the perturbation stays linear.
    """
    if r_stop is None:
        r_stop = {2: 0.02, 3: 0.1}.get(n, 0.5)
    r_grid = np.geomspace(r_stop * 1.05, r_start, samples)
    fields = [_displacement(n, eps, r_start, r_stop, r_grid, cfg) for eps in amplitudes]

    errors = []
    for coarse, fine in zip(fields[:-1], fields[1:]):
        errors.append(float(np.max(np.abs(coarse - fine)) / np.max(np.abs(fine))))
    reference = fields[-1]
    linearity_error = max(errors) if errors else 0.0

    distances, predicted = {}, {}
    for variant in Variant:
        linear = linearized_solution(n, variant, (r_start, r_grid[0]), (1.0, 0.0))
        g = linear.solution.sol(r_grid)[0]
        distances[variant] = float(np.max(np.abs(g - reference)) / np.max(np.abs(reference)))
        predicted[variant] = indicial_roots(n, variant).classification == Classification.OSCILLATORY
    matched = min(distances, key=distances.get)
    changes = sign_changes(reference)
    report = ProbeReport(
        n=n,
        amplitudes=tuple(amplitudes),
        linearity_error=linearity_error,
        sign_changes=changes,
        oscillatory=changes > 0,
        distances=distances,
        predicted_oscillatory=predicted,
        matched_variant=matched,
    )
    if matched != Variant.PRINTED:
        logger.info("Indicial probe for n=%d matches the %s linearization, not the printed one",
                    n, matched.value)
    return report
