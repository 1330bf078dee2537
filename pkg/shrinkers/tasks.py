from dataclasses import asdict

from celery import shared_task

from .core_ode import SymmetryParams
from .integrator import IntegratorConfig
from .shooting import large_R_diagnostics, shoot, shooting_function


@shared_task
def shooting_value_task(R, m, n, integrator):
    """One point of the bracket pre-scan; value is None when the shot is unclassified."""
    shot = shoot(R, SymmetryParams(m, n), IntegratorConfig(**integrator))
    value = shooting_function(shot) if shot.classified else None
    return {'R': R, 'outcome': shot.outcome.value, 'value': value}


@shared_task
def large_r_task(R, m, n, integrator, r0=3.0):
    diagnostics = large_R_diagnostics(R, SymmetryParams(m, n), IntegratorConfig(**integrator), r0=r0)
    result = asdict(diagnostics)
    result['outcome'] = diagnostics.outcome.value
    return result
