import json
import tempfile
import xml.etree.ElementTree as ET
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase, override_settings

from shrinkers.exports import export_profile, import_profile, import_trajectory
from shrinkers.models import GoldenValue, ProfileRun

from .helpers import solved


class CommandTestCase(TestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.workdir = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def call(self, *args):
        out = StringIO()
        call_command(*args, stdout=out)
        return out.getvalue()


class VerifyKnownCommandTests(CommandTestCase):

    def test_residuals_are_tiny(self):
        output = self.call('verify_known', '--m', '3', '--n', '5')
        line = next(row for row in output.splitlines() if row.startswith('max residual:'))
        self.assertLess(float(line.split(':')[1]), 1e-12)

    def test_failure_exits_one(self):
        with self.assertRaises(CommandError) as caught:
            self.call('verify_known', '--m', '2', '--n', '2', '--limit', '0')
        self.assertEqual(caught.exception.returncode, 1)

    def test_bad_options_exit_two(self):
        with self.assertRaises(CommandError) as caught:
            self.call('verify_known', '--m', '1', '--n', '2')
        self.assertEqual(caught.exception.returncode, 2)


class ShootCommandTests(CommandTestCase):

    def test_writes_trajectory(self):
        out = self.workdir / 'shot.csv'
        output = self.call('shoot', '--n', '2', '--radius', '2.449489742783178', '--out', str(out))
        self.assertIn('outcome: HitsXAxis', output)
        self.assertEqual(import_trajectory(out).events[-1][1], 'AxisX')

    def test_negative_radius_is_a_usage_error(self):
        with self.assertRaises(CommandError) as caught:
            self.call('shoot', '--n', '2', '--radius', '-1', '--out', str(self.workdir / 'x.csv'))
        self.assertEqual(caught.exception.returncode, 2)


class IndicialCommandTests(CommandTestCase):

    def test_n7_printed_roots(self):
        output = self.call('indicial', '--n', '7', '--variant', 'printed')
        self.assertIn('roots: -2.0, -3.0', output)
        self.assertIn('classification: RealSingular', output)

    def test_scan(self):
        output = self.call('indicial', '--n', '2', '--scan', '1000')
        self.assertIn('[7] (only n=7)', output)


class FindClosedCommandTests(CommandTestCase):

    def test_writes_certified_profile_and_regoldens(self):
        fixture = self.workdir / 'golden.json'
        out = self.workdir / 'profile.json'
        summary = self.workdir / 'run.json'
        conf = {**settings.SHRINKERS, 'GOLDEN_FIXTURE': fixture}
        with override_settings(SHRINKERS=conf):
            output = self.call(
                'find_closed', '--n', '2', '--samples', '16', '--out', str(out), '--regolden', '--summary', str(summary),
            )
        self.assertIn('embedded: True', output)

        document = import_profile(out)
        self.assertTrue(document.certificates['embedded'])
        self.assertEqual(document.certificates['ell_contacts'], 2)
        run = ProfileRun.objects.get()
        self.assertEqual(run.state, 'CERTIFIED')
        self.assertEqual(run.output_path, str(out))

        golden = GoldenValue.objects.get(key='r_star_n2')
        self.assertEqual(golden.value, document.r_star)
        dumped = json.loads(fixture.read_text())
        self.assertEqual([row['fields']['key'] for row in dumped], ['r_star_n2'])

        record = json.loads(summary.read_text())
        self.assertEqual(record['reference'], run.reference)
        self.assertEqual(record['candidates'][0]['r_star'], run.r_star)
        self.assertEqual(record['state_history'][-1]['to_state'], 'CERTIFIED')


class ExploreCommandTests(CommandTestCase):

    def test_explore_writes_csv(self):
        out = self.workdir / 'explore.csv'
        output = self.call('explore', '--n', '2', '--x', '2.0', '--y', '1.5', '--theta', '0.5',
                           '--tmax', '5', '--out', str(out))
        self.assertIn('terminated by:', output)
        self.assertTrue(np.all(np.diff(import_trajectory(out).t) > 0))


class PlotAndSurfaceCommandTests(CommandTestCase):

    def setUp(self):
        super().setUp()
        _, profile = solved(2)
        self.profile = profile
        self.document = export_profile(profile, self.workdir / 'profile.json')

    def test_plot_mixed_inputs(self):
        shot = self.workdir / 'shot.csv'
        self.call('shoot', '--n', '2', '--radius', '5', '--out', str(shot))
        svg = self.workdir / 'figure.svg'
        self.call('plot', '--in', str(self.document), str(shot), '--out', str(svg))
        root = ET.parse(svg).getroot()
        ids = {element.get('id') for element in root.iter()}
        self.assertTrue({'ell', 'curve-profile', 'curve-shot'} <= ids)

    def test_plot_needs_input(self):
        with self.assertRaises(CommandError) as caught:
            self.call('plot', '--out', str(self.workdir / 'nothing.svg'))
        self.assertEqual(caught.exception.returncode, 2)

    def test_surface(self):
        out = self.workdir / 'cloud.csv'
        output = self.call('surface', '--in', str(self.document), '--counts', '2', '--seed', '4', '--out', str(out))
        self.assertIn('in R^4 (seed 4)', output)
        cloud = np.loadtxt(out, delimiter=',')
        self.assertEqual(cloud.shape, ((len(self.profile.points) - 1) * 2, 4))
