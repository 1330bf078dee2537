import hashlib
import io
import json
import logging
import math
import uuid
from dataclasses import asdict

import numpy as np
from celery import group
from django.conf import settings
from django.core.management import call_command
from django.db import transaction
from rest_framework.renderers import JSONRenderer

from .closed_profile import certify, profile_config, reflect_close
from .core_ode import SymmetryParams
from .exceptions import ClassificationError, ShrinkerError
from .exports import atomic_write, export_profile, generation_metadata
from .figures import LabeledCurve
from .integrator import dense_grid, evaluate_many
from .models import GoldenValue, ProfileRun
from .serializers import GoldenValueSerializer, ProfileRunSerializer
from .shooting import (
    default_bracket, explore, find_all_rstar, initial_state, locate_bracket, shoot, sign_changes,
)
from .tasks import large_r_task, shooting_value_task

logger = logging.getLogger(__name__)


def config_hash(cfg, **extra):
    """Stable digest of the integrator settings plus any solver options."""
    payload = {'integrator': asdict(cfg), **extra}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def trajectory_points(traj, refine=8):
    return evaluate_many(traj, dense_grid(traj, refine=refine))[:, :2]


class SweepService:
    """Fans shots out over Celery; runs in-process when tasks are eager."""

    @staticmethod
    def scan(p, cfg, bracket=None, samples=64):
        lo, hi = bracket or default_bracket(p)
        grid = np.linspace(lo, hi, samples)
        job = group(shooting_value_task.s(float(R), p.m, p.n, asdict(cfg)) for R in grid)
        results = job.apply_async().get()
        unclassified = [r for r in results if r['value'] is None]
        if unclassified:
            first = unclassified[0]
            raise ClassificationError(f"Shot at R={first['R']} ended with {first['outcome']}; no shooting value")
        values = [r['value'] for r in results]
        return list(zip(grid.tolist(), values)), sign_changes(grid, values)

    @classmethod
    def locate(cls, p, cfg, bracket=None, samples=64):
        return locate_bracket(p, cfg, bracket, samples, scan=cls.scan)

    @staticmethod
    def large_r_sweep(n, radii, cfg, r0=3.0):
        job = group(large_r_task.s(float(R), n, n, asdict(cfg), r0) for R in radii)
        return job.apply_async().get()


class ProfileService:

    @staticmethod
    def generate_run_reference():
        """Generate unique run reference"""
        return f"RUN{uuid.uuid4().hex[:10].upper()}"

    @classmethod
    def find_closed(cls, n, cfg, bracket=None, solve_tol=None, resample_h=None, out=None, samples=None):
        """
        Solve for R*, close the half-profile by reflection and certify it.
        Every sign change of the pre-scan is polished and kept on the run; the
        first one that polishes is closed. Returns (run, profile, rstar).
        """
        conf = settings.SHRINKERS
        solve_tol = solve_tol or conf['SOLVE_TOL']
        resample_h = resample_h or conf['RESAMPLE_H']
        samples = samples or conf['SCAN_SAMPLES']
        p = SymmetryParams(n, n)
        digest = config_hash(cfg, solve_tol=solve_tol, resample_h=resample_h)

        run = ProfileRun.objects.create(
            reference=cls.generate_run_reference(),
            m=n,
            n=n,
            solve_tol=solve_tol,
            config_hash=digest,
        )
        try:
            brackets = [bracket] if bracket else SweepService.locate(p, cfg, samples=samples)
        except ShrinkerError as exc:
            run.transition_to('FAILED', notes=str(exc))
            raise
        run.bracket_lo, run.bracket_hi = brackets[0]
        run.transition_to('BRACKETED', notes=f"{len(brackets)} sign change(s): {brackets}")

        candidates = find_all_rstar(p, profile_config(cfg, resample_h), solve_tol=solve_tol, brackets=brackets)
        run.candidates = [candidate.as_dict() for candidate in candidates]
        chosen = next((candidate for candidate in candidates if candidate.ok), None)
        if chosen is None:
            run.transition_to('FAILED', notes=str(candidates[0].error))
            raise candidates[0].error
        if len(candidates) > 1:
            logger.info("Run %s: %d R* candidates, closing the one from %s",
                        run.reference, len(candidates), chosen.bracket)

        rstar = chosen.result
        run.bracket_lo, run.bracket_hi = chosen.bracket
        run.r_star = rstar.r_star
        run.orthogonality_residual = rstar.orthogonality_residual
        run.s_residual = rstar.s_residual
        run.transition_to('SOLVED', notes=f"R* = {rstar.r_star!r} after {rstar.iterations} iterations")

        try:
            profile = reflect_close(rstar.final_shot.trajectory, p, resample_h, r_star=rstar.r_star)
            profile = certify(profile)
        except ShrinkerError as exc:
            rejected = exc.details.get('profile')
            if rejected is not None:
                cls._record_certificates(run, rejected)
            run.transition_to('REJECTED', notes=str(exc))
            logger.warning("Run %s rejected: %s", run.reference, exc)
            raise

        cls._record_certificates(run, profile)
        if out:
            generation = generation_metadata(cfg, solve_tol, resample_h, digest, provenance=run.reference)
            run.output_path = str(export_profile(profile, out, generation))
        run.transition_to('CERTIFIED')
        return run, profile, rstar

    @staticmethod
    def write_summary(run, path):
        """JSON record of the run and its state history."""
        content = JSONRenderer().render(ProfileRunSerializer(run).data, renderer_context={'indent': 2})
        return atomic_write(path, content)

    @staticmethod
    def _record_certificates(run, profile):
        run.max_residual = None if math.isnan(profile.max_residual) else profile.max_residual
        run.closure_gap = profile.closure_gap
        run.embedded = profile.embedded
        run.ell_contacts = profile.ell_contacts
        run.save()


class GoldenValueService:

    @staticmethod
    def check(key, value):
        """Compare against the stored golden value; None when no row exists yet."""
        golden = GoldenValue.objects.filter(key=key).first()
        if golden is None:
            return None
        return golden.matches(value)

    @staticmethod
    @transaction.atomic
    def regolden(key, m, n, value, tolerance, provenance, digest=''):
        existing = GoldenValue.objects.filter(key=key).first()
        serializer = GoldenValueSerializer(existing, data={
            'key': key, 'm': m, 'n': n, 'value': value, 'tolerance': tolerance,
            'provenance': provenance, 'config_hash': digest,
        })
        if not serializer.is_valid():
            raise ShrinkerError(f"Invalid golden value {key}: {dict(serializer.errors)}", errors=serializer.errors)
        golden = serializer.save()
        logger.info("%s golden value %s = %r", 'Updated' if existing else 'Created', key, value)
        return golden

    @staticmethod
    def dump_fixture(path=None):
        path = path or settings.SHRINKERS['GOLDEN_FIXTURE']
        buffer = io.StringIO()
        call_command('dumpdata', 'shrinkers.GoldenValue', indent=2, stdout=buffer)
        return atomic_write(path, buffer.getvalue())


class FigureService:

    @staticmethod
    def figure_one_curves(n, cfg, rstar, large_R=20.0):
        """A large-R shot, the R* half-profile and the round-sphere arc."""
        p = SymmetryParams(n, n)
        large = shoot(large_R, p, cfg)
        circle = shoot(p.sphere_radius, p, cfg)
        return [
            LabeledCurve(f"R = {large_R:g}", trajectory_points(large.trajectory)),
            LabeledCurve(f"R* = {rstar.r_star:.6f}", trajectory_points(rstar.final_shot.trajectory)),
            LabeledCurve("sphere", trajectory_points(circle.trajectory)),
        ]

    @staticmethod
    def figure_two_curve(n, cfg, R, t_long):
        """Long free run from an orthogonal launch; self-crossing curves show immersed shrinkers."""
        p = SymmetryParams(n, n)
        result = explore(initial_state(R, p), p, cfg, t_long)
        return LabeledCurve(f"explore R = {R:g}", trajectory_points(result.trajectory)), result
