from shrinkers.core_ode import PhaseState, SymmetryParams
from shrinkers.exports import export_trajectory
from shrinkers.management.base import ShrinkerCommand
from shrinkers.shooting import explore


class Command(ShrinkerCommand):
    help = 'Integrates freely from any unit tangent vector and reports near closures'
    validated_options = ('m', 'n', 'tmax')

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--m', type=int, help='defaults to n')
        parser.add_argument('--x', type=float, required=True)
        parser.add_argument('--y', type=float, required=True)
        parser.add_argument('--theta', type=float, required=True)
        parser.add_argument('--tmax', type=float, required=True)
        parser.add_argument('--gap', type=float, default=1e-2, help='closure gap threshold')
        parser.add_argument('--out', required=True)
        self.add_integrator_arguments(parser)

    def run(self, config, **options):
        p = SymmetryParams(config.get('m', config['n']), config['n'])
        start = PhaseState(options['x'], options['y'], options['theta'])
        result = explore(start, p, config['integrator'], config['tmax'], gap_threshold=options['gap'])
        export_trajectory(result.trajectory, options['out'])

        self.stdout.write(f"terminated by: {result.trajectory.terminal_event.spec.label}")
        self.report('t_end', result.trajectory.t_end)
        for t, gap in result.near_closures:
            self.stdout.write(f"near closure at t={t!r}: gap {gap!r}")
        if not result.near_closures:
            self.stdout.write("no near closures")
        self.stdout.write(self.style.SUCCESS(f"Trajectory written to {options['out']}"))
