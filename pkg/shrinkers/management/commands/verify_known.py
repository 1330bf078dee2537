from shrinkers.core_ode import SymmetryParams, known_solutions, shrinker_residual
from shrinkers.exceptions import ShrinkerError
from shrinkers.management.base import ShrinkerCommand

RESIDUAL_LIMIT = 1e-12


class Command(ShrinkerCommand):
    help = 'Evaluates the shrinker residual on every closed-form solution family'
    validated_options = ('m', 'n')

    def add_arguments(self, parser):
        parser.add_argument('--m', type=int, required=True)
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--count', type=int, default=256)
        parser.add_argument('--limit', type=float, default=RESIDUAL_LIMIT)

    def run(self, config, **options):
        p = SymmetryParams(config['m'], config['n'])
        worst = 0.0
        for name, family in known_solutions(p).items():
            family_worst = max(abs(shrinker_residual(jet, p)) for jet in family.sample(options['count']))
            self.report(f"{name} max residual", family_worst)
            worst = max(worst, family_worst)
        self.report('max residual', worst)
        if not worst < options['limit']:
            raise ShrinkerError(f"Residual {worst!r} is not below {options['limit']!r}")
        self.stdout.write(self.style.SUCCESS(f"All families satisfy the equation for m={p.m}, n={p.n}"))
