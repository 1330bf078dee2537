import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from shrinkers.core_ode import SymmetryParams
from shrinkers.exceptions import ProfileError, SchemaError
from shrinkers.exports import (
    ProfileDocument, atomic_write, export_point_cloud, export_profile, export_trajectory,
    import_profile, import_trajectory, orbit_projection, parse_document, render_document,
    sample_hypersurface,
)
from shrinkers.shooting import shoot

from .helpers import circle_polyline, default_config, fake_profile, solved


class WorkdirMixin:

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()
        super().tearDown()


class TrajectoryCsvTests(WorkdirMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        p = SymmetryParams(2, 2)
        self.traj = shoot(p.sphere_radius, p, default_config()).trajectory

    def test_round_trip_is_exact(self):
        path = export_trajectory(self.traj, self.workdir / 'circle.csv')
        table = import_trajectory(path)
        np.testing.assert_array_equal(table.t, self.traj.t)
        np.testing.assert_array_equal(table.states, self.traj.states)
        self.assertTrue(np.all(np.diff(table.t) > 0))

    def test_terminal_event_row(self):
        path = export_trajectory(self.traj, self.workdir / 'circle.csv')
        table = import_trajectory(path)
        self.assertEqual(table.events, [(len(self.traj.t) - 1, 'AxisX')])
        with open(path, encoding='utf-8') as handle:
            self.assertEqual(handle.readline().strip(), 't,x,y,theta,event')

    def test_header_mismatch(self):
        path = self.workdir / 'bad.csv'
        path.write_text('t,x,y\n0,1,1\n', encoding='utf-8')
        with self.assertRaises(SchemaError):
            import_trajectory(path)

    def test_unsorted_times(self):
        path = self.workdir / 'unsorted.csv'
        path.write_text('t,x,y,theta,event\n0.5,1,1,0,\n0.25,1,1,0,\n', encoding='utf-8')
        with self.assertRaises(SchemaError):
            import_trajectory(path)


class ProfileDocumentTests(WorkdirMixin, SimpleTestCase):

    def setUp(self):
        super().setUp()
        _, self.profile = solved(2)

    def test_round_trip_is_byte_identical(self):
        first = export_profile(self.profile, self.workdir / 'one.json', {'provenance': 'test', 'seed': 1})
        document = import_profile(first)
        second = export_profile(document, self.workdir / 'two.json')
        self.assertEqual(first.read_bytes(), second.read_bytes())
        self.assertTrue(first.read_text().startswith('{\n  "'))
        self.assertTrue(first.read_text().startswith('{\n  "'))

    def test_certificates_are_preserved(self):
        path = export_profile(self.profile, self.workdir / 'profile.json')
        restored = import_profile(path).to_profile()
        self.assertEqual(restored.embedded, self.profile.embedded)
        self.assertEqual(restored.ell_contacts, self.profile.ell_contacts)
        self.assertEqual(restored.max_residual, self.profile.max_residual)
        self.assertEqual(restored.closure_gap, self.profile.closure_gap)
        self.assertEqual(restored.r_star, self.profile.r_star)
        np.testing.assert_array_equal(restored.points, self.profile.points)
        self.assertTrue(restored.certified)

    def edited(self, **changes):
        data = json.loads(render_document(ProfileDocument.from_profile(self.profile)))
        for key, value in changes.items():
            if value is None:
                del data[key]
            else:
                data[key] = value
        return json.dumps(data).encode()

    def test_missing_r_star(self):
        with self.assertRaises(SchemaError):
            parse_document(self.edited(r_star=None))

    def test_schema_version_mismatch(self):
        with self.assertRaises(SchemaError):
            parse_document(self.edited(schema_version=2))

    def test_open_polyline_is_rejected(self):
        points = self.profile.points[:-1].tolist()
        with self.assertRaises(SchemaError):
            parse_document(self.edited(points=points))

    def test_not_json(self):
        with self.assertRaises(SchemaError):
            parse_document(b'{not json')


class HypersurfaceTests(SimpleTestCase):

    def test_lift_preserves_orbit_radii(self):
        _, profile = solved(2)
        p = profile.params
        cloud = sample_hypersurface(profile, p, counts=3, seed=11)
        self.assertEqual(cloud.shape, ((len(profile.points) - 1) * 3, p.m + p.n))
        radii = np.repeat(profile.points[:-1], 3, axis=0)
        np.testing.assert_allclose(orbit_projection(cloud, p), radii, rtol=0, atol=1e-12)

    def test_sphere_profile_lifts_to_the_sphere(self):
        p = SymmetryParams(3, 3)
        arc = circle_polyline((0.0, 0.0), p.sphere_radius, 400, closed=False)
        arc = arc[(arc[:, 0] > 0) & (arc[:, 1] > 0)]
        cloud = sample_hypersurface(arc, p, counts=4, seed=3)
        self.assertLess(np.max(np.abs(np.linalg.norm(cloud, axis=1) - math.sqrt(2 * (2 * 3 - 1)))), 1e-7)

    def test_seeded_sampling_is_deterministic(self):
        p = SymmetryParams(2, 3)
        points = np.array([[1.0, 2.0], [1.5, 1.5]])
        np.testing.assert_array_equal(sample_hypersurface(points, p, 5, seed=9), sample_hypersurface(points, p, 5, seed=9))

    def test_uncertified_profile_is_refused(self):
        p = SymmetryParams(2, 2)
        profile = fake_profile(circle_polyline((3.0, 3.0), 0.5, 64), p)
        with self.assertRaises(ProfileError):
            sample_hypersurface(profile, p, 2, seed=1)


class AtomicWriteTests(WorkdirMixin, SimpleTestCase):

    def test_replaces_whole_file_without_leftovers(self):
        path = self.workdir / 'nested' / 'data.txt'
        atomic_write(path, 'first')
        atomic_write(path, b'second')
        self.assertEqual(path.read_text(), 'second')
        self.assertEqual(os.listdir(path.parent), ['data.txt'])

    def test_point_cloud_file(self):
        p = SymmetryParams(2, 2)
        cloud = sample_hypersurface(np.array([[1.0, 2.0]]), p, 3, seed=5)
        path = export_point_cloud(cloud, self.workdir / 'cloud.csv', 5, p)
        loaded = np.loadtxt(path, delimiter=',')
        np.testing.assert_array_equal(loaded, cloud)
        self.assertIn('seed=5', path.read_text().splitlines()[0])
