import math

import numpy as np
from django.test import SimpleTestCase

from shrinkers.core_ode import (
    CurveJet, PhaseState, SymmetryParams, graphical_rhs, known_solutions, length_element,
    max_known_residual, metric_weight, principal_curvatures, rotated_view, shrinker_residual,
    theta_acceleration, theta_rhs, weighted_length,
)
from shrinkers.exceptions import DomainError


def sample_states(count=25, seed=7):
    rng = np.random.default_rng(seed)
    for x, y, theta in zip(rng.uniform(0.2, 6, count), rng.uniform(0.2, 6, count), rng.uniform(-4, 4, count)):
        yield PhaseState(float(x), float(y), float(theta))


class SymmetryParamsTests(SimpleTestCase):

    def test_derived_constants(self):
        p = SymmetryParams(3, 5)
        self.assertAlmostEqual(p.ell_slope, math.sqrt(2.0), places=15)
        self.assertAlmostEqual(p.sphere_radius, math.sqrt(14.0), places=15)
        self.assertAlmostEqual(p.cyl_x, 2.0, places=15)
        self.assertAlmostEqual(p.cyl_y, math.sqrt(8.0), places=15)
        self.assertFalse(p.symmetric)
        self.assertAlmostEqual(SymmetryParams(4, 4).ell_angle, math.pi / 4, places=15)

    def test_rejects_small_factors(self):
        with self.assertRaises(DomainError):
            SymmetryParams(1, 3)
        with self.assertRaises(DomainError):
            SymmetryParams(2, 2.5)


class KnownSolutionTests(SimpleTestCase):

    def test_all_families_solve_the_equation(self):
        for m in range(2, 6):
            for n in range(2, 6):
                with self.subTest(m=m, n=n):
                    self.assertLess(max_known_residual(SymmetryParams(m, n), count=256), 1e-12)

    def test_mean_curvature_matches_support_function(self):
        p = SymmetryParams(3, 4)
        for family in known_solutions(p).values():
            for jet in family.sample(16):
                expected = (jet.x * math.sin(jet.theta) - jet.y * math.cos(jet.theta)) / 2
                self.assertAlmostEqual(principal_curvatures(jet, p).mean_curvature, expected, delta=1e-11)

    def test_families_are_the_expected_curves(self):
        p = SymmetryParams(2, 3)
        families = known_solutions(p)
        self.assertEqual(set(families), {'ray', 'circle', 'vertical', 'horizontal'})
        for jet in families['circle'].sample(8):
            self.assertAlmostEqual(math.hypot(jet.x, jet.y), p.sphere_radius, places=12)
        for jet in families['ray'].sample(8):
            self.assertAlmostEqual(jet.y / jet.x, p.ell_slope, places=12)


class ResidualTests(SimpleTestCase):

    def test_flow_curvature_has_zero_residual(self):
        p = SymmetryParams(2, 4)
        for state in sample_states():
            jet = CurveJet(state.x, state.y, state.theta, theta_rhs(state, p))
            self.assertLess(abs(shrinker_residual(jet, p)), 1e-12)

    def test_residual_is_orientation_invariant(self):
        p = SymmetryParams(3, 3)
        jet = CurveJet(1.3, 2.1, 0.4, 0.75)
        reversed_jet = CurveJet(jet.x, jet.y, jet.theta + math.pi, -jet.kappa)
        self.assertAlmostEqual(abs(shrinker_residual(jet, p)), abs(shrinker_residual(reversed_jet, p)), places=13)

    def test_reflection_reverses_turning_when_symmetric(self):
        p = SymmetryParams(4, 4)
        for state in sample_states():
            self.assertAlmostEqual(theta_rhs(state.reflected(), p), -theta_rhs(state, p), places=11)

    def test_graph_form_agrees_with_geodesic_form(self):
        p = SymmetryParams(3, 2)
        x, u, du = 1.4, 0.9, -0.3
        ddu = graphical_rhs(x, u, du, p)
        kappa = ddu / (1 + du ** 2) ** 1.5
        self.assertLess(abs(shrinker_residual(CurveJet(x, u, math.atan(du), kappa), p)), 1e-12)

    def test_theta_acceleration_matches_difference_quotient(self):
        p = SymmetryParams(2, 3)
        h = 1e-5
        for state in sample_states(count=10):
            c, s = math.cos(state.theta), math.sin(state.theta)
            rate = theta_rhs(state, p)
            ahead = PhaseState(state.x + h * c, state.y + h * s, state.theta + h * rate)
            behind = PhaseState(state.x - h * c, state.y - h * s, state.theta - h * rate)
            estimate = (theta_rhs(ahead, p) - theta_rhs(behind, p)) / (2 * h)
            self.assertAlmostEqual(theta_acceleration(state, p), estimate, delta=1e-4 * max(1.0, abs(estimate)))

    def test_axes_are_outside_the_domain(self):
        p = SymmetryParams(2, 2)
        with self.assertRaises(DomainError):
            theta_rhs(PhaseState(0.0, 1.0, 0.0), p)
        with self.assertRaises(DomainError):
            shrinker_residual(CurveJet(1.0, -0.5, 0.0, 0.0), p)


class MetricTests(SimpleTestCase):

    def test_length_element_is_root_of_weight(self):
        p = SymmetryParams(3, 4)
        x = np.linspace(0.5, 3, 7)
        np.testing.assert_allclose(length_element(x, x[::-1], p) ** 2, metric_weight(x, x[::-1], p), rtol=1e-13)
        self.assertIsInstance(metric_weight(1.0, 2.0, p), float)

    def test_weighted_length_of_segment(self):
        p = SymmetryParams(2, 2)
        segment = np.array([[1.0, 1.0], [1.0 + 1e-4, 1.0]])
        expected = length_element(1.0 + 5e-5, 1.0, p) * 1e-4
        self.assertAlmostEqual(weighted_length(segment, p), expected, places=15)
        self.assertEqual(weighted_length(segment[:1], p), 0.0)

    def test_rotated_view(self):
        view = rotated_view(PhaseState(3.0, 1.0, math.pi / 4))
        self.assertAlmostEqual(view.r, 4 / math.sqrt(2), places=14)
        self.assertAlmostEqual(view.s, 2 / math.sqrt(2), places=14)
        self.assertAlmostEqual(view.psi, 0.0, places=15)
