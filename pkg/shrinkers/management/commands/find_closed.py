from shrinkers.exceptions import ShrinkerError
from shrinkers.management.base import ShrinkerCommand
from shrinkers.services import GoldenValueService, ProfileService


class Command(ShrinkerCommand):
    help = 'Solves for R*, closes the profile by reflection, certifies it and writes the profile document'
    validated_options = ('n', 'bracket', 'tol', 'resample_h')

    def add_arguments(self, parser):
        parser.add_argument('--n', type=int, required=True)
        parser.add_argument('--bracket', help='LO:HI search interval for R*')
        parser.add_argument('--tol', type=float, help='tolerance on the shooting function')
        parser.add_argument('--resample-h', type=float)
        parser.add_argument('--samples', type=int, help='grid size of the bracket pre-scan')
        parser.add_argument('--out', required=True)
        parser.add_argument('--regolden', action='store_true',
                            help='store R* as the golden value and rewrite the fixture')
        parser.add_argument('--golden-tolerance', type=float, default=1e-6)
        parser.add_argument('--summary', help='also write the run record as JSON')
        self.add_integrator_arguments(parser)

    def run(self, config, **options):
        n = config['n']
        run, profile, rstar = ProfileService.find_closed(
            n,
            config['integrator'],
            bracket=config.get('bracket'),
            solve_tol=config.get('tol'),
            resample_h=config.get('resample_h'),
            out=options['out'],
            samples=options.get('samples'),
        )
        self.stdout.write(f"run: {run.reference} ({run.state})")
        self.report('R*', rstar.r_star)
        self.report('orthogonality residual', rstar.orthogonality_residual)
        self.report('s residual', rstar.s_residual)
        self.report('max residual', profile.max_residual)
        self.report('closure gap', profile.closure_gap)
        self.stdout.write(f"embedded: {profile.embedded}")
        self.stdout.write(f"ell contacts: {profile.ell_contacts}")
        if len(run.candidates) > 1:
            self.stdout.write(f"candidates: {[c['r_star'] for c in run.candidates]}")

        key = f"r_star_n{n}"
        if options['regolden']:
            GoldenValueService.regolden(
                key, n, n, rstar.r_star, options['golden_tolerance'],
                provenance=f"find_closed {run.reference}", digest=run.config_hash,
            )
            path = GoldenValueService.dump_fixture()
            self.stdout.write(self.style.WARNING(f"Golden value {key} rewritten in {path}"))
        else:
            match = GoldenValueService.check(key, rstar.r_star)
            if match is False:
                raise ShrinkerError(f"R* = {rstar.r_star!r} disagrees with the golden value {key}")
            if match is None:
                self.stdout.write(f"golden: no stored value for {key}")
        if options['summary']:
            ProfileService.write_summary(run, options['summary'])
        self.stdout.write(self.style.SUCCESS(f"Certified profile written to {options['out']}"))
