import math
from functools import lru_cache

import numpy as np

from shrinkers.closed_profile import ClosedProfile, certify, profile_config, reflect_close
from shrinkers.core_ode import SymmetryParams
from shrinkers.integrator import IntegratorConfig
from shrinkers.shooting import find_rstar, locate_bracket

SOLVE_TOL = 1e-7
RESAMPLE_H = 1e-3


def default_config(**overrides):
    return IntegratorConfig().with_overrides(**overrides)


@lru_cache(maxsize=None)
def solved(n):
    """R* solve and certified closed profile for m = n; shared by every test module."""
    p = SymmetryParams(n, n)
    cfg = default_config()
    brackets = locate_bracket(p, cfg, samples=24)
    rstar = find_rstar(p, profile_config(cfg, RESAMPLE_H), brackets[0], SOLVE_TOL)
    profile = certify(reflect_close(rstar.final_shot.trajectory, p, RESAMPLE_H, r_star=rstar.r_star))
    return rstar, profile


def circle_polyline(centre, radius, count, start=0.0, closed=True):
    phase = start + np.linspace(0.0, 2 * math.pi, count, endpoint=False)
    points = np.column_stack([centre[0] + radius * np.cos(phase), centre[1] + radius * np.sin(phase)])
    return np.vstack([points, points[:1]]) if closed else points


def fake_profile(points, p, spacing=None):
    points = np.asarray(points, dtype=float)
    step = float(np.mean(np.hypot(*np.diff(points, axis=0).T)))
    return ClosedProfile(points=points, params=p, r_star=math.nan, closure_gap=0.0, spacing=spacing or step)
