from shrinkers.core_ode import SymmetryParams
from shrinkers.exports import export_trajectory
from shrinkers.management.base import ShrinkerCommand
from shrinkers.shooting import shoot


class Command(ShrinkerCommand):
    help = 'Launches one geodesic orthogonally from the diagonal and writes its trajectory CSV'
    validated_options = ('n', 'radius', 'tol')

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--radius', type=float, required=True)
        parser.add_argument('--tol', type=float, help='relative tolerance of the integrator')
        parser.add_argument('--out', required=True)
        self.add_integrator_arguments(parser)

    def run(self, config, **options):
        p = SymmetryParams(config['n'], config['n'])
        cfg = config['integrator'].with_overrides(rel_tol=config.get('tol'))
        shot = shoot(config['radius'], p, cfg)
        export_trajectory(shot.trajectory, options['out'])

        self.stdout.write(f"outcome: {shot.outcome.value}")
        self.report('theta_end', shot.theta_end)
        self.report('s_end', shot.s_end)
        if shot.shooting_value is not None:
            self.report('shooting value', shot.shooting_value)
        stats = shot.trajectory.stats
        self.stdout.write(f"steps: {stats.accepted_steps} accepted, {stats.rejected_steps} rejected")
        self.stdout.write(self.style.SUCCESS(f"Trajectory written to {options['out']}"))
