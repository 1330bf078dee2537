"""
Reduced equations for O(m)xO(n)-invariant self-shrinkers.

A profile curve (x(t), y(t)) in the open quadrant, traversed at unit speed with
velocity angle theta, is the orbit projection of a self-shrinker exactly when

    kappa = (x sin(theta) - y cos(theta)) / 2
            + (n - 1) cos(theta) / y - (m - 1) sin(theta) / x

with kappa the counterclockwise-positive curvature. Equivalently the curve is
a geodesic of  x^(2(m-1)) y^(2(n-1)) exp(-(x^2 + y^2) / 2) (dx^2 + dy^2).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError


@dataclass(frozen=True)
class SymmetryParams:
    m: int
    n: int
    ell_slope: float = field(init=False)
    sphere_radius: float = field(init=False)
    cyl_x: float = field(init=False)
    cyl_y: float = field(init=False)

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n) != self.n or self.m < 2 or self.n < 2:
            raise DomainError(f"Both rotation factors must be integers >= 2, got m={self.m}, n={self.n}")
        object.__setattr__(self, 'ell_slope', math.sqrt((self.n - 1) / (self.m - 1)))
        object.__setattr__(self, 'sphere_radius', math.sqrt(2 * (self.m + self.n - 1)))
        object.__setattr__(self, 'cyl_x', math.sqrt(2 * (self.m - 1)))
        object.__setattr__(self, 'cyl_y', math.sqrt(2 * (self.n - 1)))

    @property
    def symmetric(self):
        return self.m == self.n

    @property
    def ell_angle(self):
        """Angle of the line through the origin that every cone solution follows."""
        return math.atan(self.ell_slope)

    def signed_ell_distance(self, x, y):
        """Positive below the line (the side where x/y exceeds its slope ratio)."""
        beta = self.ell_angle
        return x * math.sin(beta) - y * math.cos(beta)


@dataclass(frozen=True)
class PhaseState:
    x: float
    y: float
    theta: float

    def as_array(self):
        return np.array([self.x, self.y, self.theta], dtype=float)

    @classmethod
    def from_array(cls, values):
        return cls(float(values[0]), float(values[1]), float(values[2]))

    def reflected(self):
        """Mirror image through the diagonal; an isometry of the metric when m == n."""
        return PhaseState(self.y, self.x, math.pi / 2 - self.theta)


@dataclass(frozen=True)
class RotatedView:
    r: float
    s: float
    psi: float


@dataclass(frozen=True)
class CurveJet:
    x: float
    y: float
    theta: float
    kappa: float


@dataclass(frozen=True)
class PrincipalCurvatures:
    kappa_m: float
    kappa_n: float
    kappa_profile: float
    m: int
    n: int

    @property
    def mean_curvature(self):
        return (self.m - 1) * self.kappa_m + (self.n - 1) * self.kappa_n + self.kappa_profile


def _require_interior(x, y):
    if not (x > 0 and y > 0):
        raise DomainError(f"Point ({x}, {y}) is not in the open quadrant")


def theta_rhs(state, p):
    """dtheta/dt of the geodesic flow on the unit tangent bundle."""
    x, y, theta = state.x, state.y, state.theta
    _require_interior(x, y)
    return ((x / 2 - (p.m - 1) / x) * math.sin(theta)
            + ((p.n - 1) / y - y / 2) * math.cos(theta))


def flow_rhs(t, z, m, n):
    """Right-hand side of (x, y, theta) for the step-level solvers; no domain checks."""
    x, y, theta = z[0], z[1], z[2]
    c, s = math.cos(theta), math.sin(theta)
    return np.array([c, s, (x / 2 - (m - 1) / x) * s + ((n - 1) / y - y / 2) * c])


def theta_acceleration(state, p):
    """Second derivative of theta along the flow."""
    x, y, theta = state.x, state.y, state.theta
    _require_interior(x, y)
    c, s = math.cos(theta), math.sin(theta)
    a = x / 2 - (p.m - 1) / x
    b = (p.n - 1) / y - y / 2
    da = 0.5 + (p.m - 1) / x ** 2
    db = -(p.n - 1) / y ** 2 - 0.5
    theta_dot = a * s + b * c
    return da * c * s + db * s * c + theta_dot * (a * c - b * s)


def shrinker_residual(jet, p):
    x, y, theta = jet.x, jet.y, jet.theta
    _require_interior(x, y)
    c, s = math.cos(theta), math.sin(theta)
    rhs = (x * s - y * c) / 2 + (p.n - 1) * c / y - (p.m - 1) * s / x
    return jet.kappa - rhs


def graphical_rhs(x, u, uprime, p):
    """u'' for a profile written as a graph y = u(x)."""
    _require_interior(x, u)
    return ((x * uprime - u) / 2 + (p.n - 1) / u - (p.m - 1) * uprime / x) * (1 + uprime ** 2)


def principal_curvatures(jet, p):
    _require_interior(jet.x, jet.y)
    return PrincipalCurvatures(
        kappa_m=math.sin(jet.theta) / jet.x,
        kappa_n=-math.cos(jet.theta) / jet.y,
        kappa_profile=jet.kappa,
        m=p.m,
        n=p.n,
    )


def metric_weight(x, y, p):
    """Conformal factor of the reduced metric; vanishes on the axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    weight = x ** (2 * (p.m - 1)) * y ** (2 * (p.n - 1)) * np.exp(-(x ** 2 + y ** 2) / 2)
    return float(weight) if weight.ndim == 0 else weight


def length_element(x, y, p):
    """Square root of metric_weight: the factor multiplying Euclidean arc length."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x ** (p.m - 1) * y ** (p.n - 1) * np.exp(-(x ** 2 + y ** 2) / 4)


def weighted_length(polyline, p):
    points = np.asarray(polyline, dtype=float).reshape(-1, 2)
    if len(points) < 2:
        return 0.0
    mid = 0.5 * (points[1:] + points[:-1])
    seg = np.hypot(*(points[1:] - points[:-1]).T)
    return float(np.sum(length_element(mid[:, 0], mid[:, 1], p) * seg))


def rotated_view(state):
    root2 = math.sqrt(2.0)
    return RotatedView(
        r=(state.x + state.y) / root2,
        s=(state.x - state.y) / root2,
        psi=state.theta - math.pi / 4,
    )


@dataclass(frozen=True)
class SolutionFamily:
    """One closed-form solution family, sampled over its natural parameter range."""
    name: str
    parameter_range: tuple
    jet_at: object

    def sample(self, count):
        lo, hi = self.parameter_range
        return [self.jet_at(float(value)) for value in np.linspace(lo, hi, count)]


def known_solutions(p):
    beta = p.ell_angle
    rho = p.sphere_radius

    def ray(a):
        return CurveJet(a * math.cos(beta), a * math.sin(beta), beta, 0.0)

    def circle(phi):
        # counterclockwise, so the curvature is +1/rho
        return CurveJet(rho * math.cos(phi), rho * math.sin(phi), phi + math.pi / 2, 1.0 / rho)

    def vertical(t):
        return CurveJet(p.cyl_x, t, math.pi / 2, 0.0)

    def horizontal(t):
        return CurveJet(t, p.cyl_y, 0.0, 0.0)

    edge = 1e-2
    return {
        'ray': SolutionFamily('ray', (0.1, 10.0), ray),
        'circle': SolutionFamily('circle', (edge, math.pi / 2 - edge), circle),
        'vertical': SolutionFamily('vertical', (0.1, 10.0), vertical),
        'horizontal': SolutionFamily('horizontal', (0.1, 10.0), horizontal),
    }


def max_known_residual(p, count=256):
    """Largest |residual| over every exact family sampled at `count` points."""
    worst = 0.0
    for family in known_solutions(p).values():
        for jet in family.sample(count):
            worst = max(worst, abs(shrinker_residual(jet, p)))
    return worst
