from shrinkers.linear_analysis import (
    Variant, discriminant_integrality_scan, indicial_roots, numeric_indicial_probe, resonant_orders,
)
from shrinkers.management.base import ShrinkerCommand


def _format_root(root):
    if root.imag == 0:
        return repr(float(root.real))
    return f"{root.real!r}{root.imag:+}i"


class Command(ShrinkerCommand):
    help = 'Indicial roots of the linearization about the diagonal at the origin'
    validated_options = ('n', 'variant')

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--variant', choices=[v.value for v in Variant], default=Variant.PRINTED.value)
        parser.add_argument('--probe', action='store_true',
                            help='compare with the nonlinear flow started near the diagonal')
        parser.add_argument('--scan', type=int, metavar='N_MAX',
                            help='list every n <= N_MAX whose printed discriminant is a perfect square')
        self.add_integrator_arguments(parser)

    def run(self, config, **options):
        n = config['n']
        report = indicial_roots(n, config.get('variant', Variant.PRINTED))
        self.stdout.write(f"variant: {report.variant.value}")
        self.stdout.write(f"equation: alpha^2 + {report.b!r} alpha + {report.c!r} = 0")
        self.report('discriminant', report.discriminant)
        self.stdout.write(f"roots: {', '.join(_format_root(root) for root in report.roots)}")
        self.stdout.write(f"classification: {report.classification.value}")
        self.report('near-origin exponent', report.near_origin_exponent)

        if options.get('scan'):
            orders = resonant_orders(options['scan'])
            passed = discriminant_integrality_scan(options['scan'])
            self.stdout.write(f"perfect-square discriminants up to {options['scan']}: {orders} "
                              f"({'only n=7' if passed else 'unexpected'})")

        if options['probe']:
            probe = numeric_indicial_probe(n, config['integrator'])
            self.report('linearity error', probe.linearity_error)
            self.stdout.write(f"sign changes: {probe.sign_changes}")
            for variant, distance in probe.distances.items():
                predicted = 'oscillatory' if probe.predicted_oscillatory[variant] else 'non-oscillatory'
                self.stdout.write(f"distance to {variant.value}: {distance!r} (predicts {predicted})")
            self.stdout.write(f"closest linearization: {probe.matched_variant.value}")
            if not probe.linear:
                self.stdout.write(self.style.WARNING("Probe amplitudes are outside the linear regime"))
