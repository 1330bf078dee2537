import math

import numpy as np
from django.test import SimpleTestCase

from shrinkers.closed_profile import critical_alternation
from shrinkers.core_ode import PhaseState, SymmetryParams
from shrinkers.exceptions import DomainError, NoSignChange
from shrinkers.integrator import dense_grid, evaluate_many
from shrinkers.shooting import (
    RETURN_ANGLE, Outcome, angle_monotonicity_violations, closure_gap, default_bracket, ell_side_monotonicity,
    explore, find_all_rstar, find_rstar, initial_state, large_R_diagnostics, scan_bracket, shoot,
    shooting_function,
)

from .helpers import default_config, solved


class LaunchTests(SimpleTestCase):

    def test_initial_state(self):
        p = SymmetryParams(3, 3)
        state = initial_state(2.0, p)
        self.assertAlmostEqual(math.hypot(state.x, state.y), 2.0, places=15)
        self.assertEqual(state.x, state.y)
        self.assertAlmostEqual(state.theta, -math.pi / 4, places=15)

    def test_rejects_asymmetric_and_non_positive(self):
        with self.assertRaises(DomainError):
            initial_state(2.0, SymmetryParams(2, 3))
        with self.assertRaises(DomainError):
            initial_state(0.0, SymmetryParams(2, 2))

    def test_default_bracket_starts_beyond_the_sphere(self):
        lo, hi = default_bracket(SymmetryParams(2, 2))
        self.assertGreater(lo, math.sqrt(6.0))
        self.assertEqual(hi, 30.0)


class RStarTests(SimpleTestCase):

    def test_rstar_is_an_orthogonal_return(self):
        for n in (2, 3, 4):
            with self.subTest(n=n):
                rstar, _ = solved(n)
                self.assertLess(rstar.orthogonality_residual, 1e-6)
                self.assertLess(rstar.s_residual, 1e-6)
                self.assertGreater(rstar.r_star, math.sqrt(2 * (2 * n - 1)))
                self.assertLess(rstar.r_star, 30.0)
                self.assertEqual(rstar.final_shot.outcome, Outcome.RETURNS_TO_L)
                self.assertAlmostEqual(rstar.final_shot.theta_end, RETURN_ANGLE, delta=1e-6)

    def test_bracket_history_is_recorded(self):
        rstar, _ = solved(2)
        signs = {sign for _, sign in rstar.bracket_history}
        self.assertTrue({-1, 1} <= signs)
        self.assertGreater(rstar.iterations, 0)

    def test_shooting_function_changes_sign_across_rstar(self):
        rstar, _ = solved(2)
        p = SymmetryParams(2, 2)
        cfg = default_config()
        below = shooting_function(shoot(rstar.r_star - 1e-3, p, cfg))
        above = shooting_function(shoot(rstar.r_star + 1e-3, p, cfg))
        self.assertLess(below * above, 0)

    def test_scan_reports_the_sign_change(self):
        rstar, _ = solved(2)
        p = SymmetryParams(2, 2)
        values, changes = scan_bracket(p, default_config(), (rstar.r_star - 0.05, rstar.r_star + 0.05), samples=4)
        self.assertEqual(len(values), 4)
        self.assertTrue(any(lo < rstar.r_star < hi for lo, hi in changes))

    def test_no_sign_change(self):
        p = SymmetryParams(2, 2)
        lo = default_bracket(p)[0]
        with self.assertRaises(NoSignChange):
            find_rstar(p, default_config(), (lo, lo + 1e-3))

    def test_polishing_drives_the_return_angle_to_rounding(self):
        rstar, _ = solved(3)
        self.assertLess(rstar.orthogonality_residual, 1e-8)

    def test_default_grid_has_exactly_one_sign_change(self):
        for n in (2, 3, 4):
            with self.subTest(n=n):
                p = SymmetryParams(n, n)
                values, changes = scan_bracket(p, default_config())
                shots = [value for _, value in values]
                self.assertEqual(len(shots), 64)
                self.assertTrue(all(math.isfinite(value) and value != 0 for value in shots))
                self.assertEqual(len(changes), 1)

    def test_every_bracket_is_polished_independently(self):
        rstar, _ = solved(2)
        p = SymmetryParams(2, 2)
        lo = default_bracket(p)[0]
        good = (rstar.r_star - 0.01, rstar.r_star + 0.01)
        candidates = find_all_rstar(p, default_config(), brackets=[(lo, lo + 1e-3), good])
        self.assertEqual([c.bracket for c in candidates], [(lo, lo + 1e-3), good])
        failed, polished = candidates
        self.assertFalse(failed.ok)
        self.assertIsInstance(failed.error, NoSignChange)
        self.assertIn('no sign change', failed.as_dict()['error'])
        self.assertTrue(polished.ok)
        self.assertAlmostEqual(polished.result.r_star, rstar.r_star, delta=1e-5)
        self.assertEqual(polished.as_dict()['r_star'], polished.result.r_star)


class AlternationTests(SimpleTestCase):

    def test_random_shots_alternate_around_the_cylinders(self):
        rng = np.random.default_rng(2024)
        cfg = default_config()
        for n, R in zip(rng.choice([2, 3, 4], size=100), rng.uniform(1.0, 20.0, size=100)):
            p = SymmetryParams(int(n), int(n))
            shot = shoot(float(R), p, cfg)
            report = critical_alternation(shot.trajectory, p)
            self.assertTrue(report.ok, msg=f"n={n}, R={R}: {report.violations}")


class LargeRTests(SimpleTestCase):

    def test_large_r_scaling(self):
        p = SymmetryParams(2, 2)
        cfg = default_config()
        sweep = [large_R_diagnostics(R, p, cfg) for R in (20.0, 40.0, 80.0)]
        peaks = [d.s_max * d.R for d in sweep]
        turns = [(d.R - d.r_at_parallel) * d.R for d in sweep]
        self.assertLess(max(peaks) / min(peaks), 2.0)
        self.assertLess(max(turns) / min(turns), 2.0)

    def test_angle_settles_near_the_diagonal_as_r_grows(self):
        p = SymmetryParams(2, 2)
        cfg = default_config()
        offsets = [abs(large_R_diagnostics(R, p, cfg).theta_at_r0) for R in (20.0, 40.0, 80.0)]
        self.assertTrue(all(math.isfinite(offset) for offset in offsets))
        self.assertLess(offsets[1], offsets[0])
        self.assertLess(offsets[2], offsets[1])

    def test_angle_is_non_increasing_for_large_launches(self):
        cfg = default_config()
        for n in (2, 3):
            p = SymmetryParams(n, n)
            for R in (20.0, 30.0):
                with self.subTest(n=n, R=R):
                    traj = shoot(R, p, cfg).trajectory
                    self.assertEqual(angle_monotonicity_violations(traj, slack=1e-9), [])
                    theta = evaluate_many(traj, dense_grid(traj, refine=8))[:, 2]
                    self.assertLessEqual(np.max(np.diff(theta)), 1e-9)
                    self.assertTrue(large_R_diagnostics(R, p, cfg).theta_monotone)


class MonotonicityTests(SimpleTestCase):

    def test_sphere_arc_is_one_monotone_piece(self):
        p = SymmetryParams(3, 3)
        shot = shoot(p.sphere_radius, p, default_config())
        intervals = ell_side_monotonicity(shot.trajectory, p)
        first = intervals[0]
        self.assertEqual(first.side, 1)
        self.assertEqual(first.turning, -1)
        self.assertGreater(first.t_end, 0.9 * shot.trajectory.t_end)


class ExploreTests(SimpleTestCase):

    def test_rstar_orbit_closes_up(self):
        rstar, _ = solved(2)
        p = SymmetryParams(2, 2)
        half = rstar.final_shot.trajectory.t_end
        result = explore(initial_state(rstar.r_star, p), p, default_config(), 2 * half + 1.0)
        closures = [(t, gap) for t, gap in result.near_closures if abs(t - 2 * half) < 0.1]
        self.assertTrue(closures, msg=str(result.near_closures))
        self.assertLess(min(gap for _, gap in closures), 1e-4)

    def test_closure_gap_wraps_angles(self):
        a = PhaseState(1.0, 1.0, math.pi - 1e-9)
        b = PhaseState(1.0, 1.0, -math.pi + 1e-9)
        self.assertLess(closure_gap(a, b), 1e-8)

    def test_explore_needs_interior_start(self):
        with self.assertRaises(DomainError):
            explore(PhaseState(-1.0, 1.0, 0.0), SymmetryParams(2, 2), default_config(), 1.0)
