from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from shrinkers.core_ode import SymmetryParams
from shrinkers.exports import import_profile, import_trajectory
from shrinkers.figures import LabeledCurve, render_svg
from shrinkers.management.base import ShrinkerCommand
from shrinkers.services import FigureService, SweepService
from shrinkers.shooting import find_rstar


class Command(ShrinkerCommand):
    help = 'Renders trajectory CSVs and profile documents as one SVG figure'
    validated_options = ('m', 'n', 'size', 'margin')

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='inputs', nargs='+', default=[],
                            help='trajectory CSV or profile JSON files')
        parser.add_argument('--out', required=True)
        parser.add_argument('--m', type=int)
        parser.add_argument('--n', type=int)
        parser.add_argument('--figure-one', action='store_true',
                            help='add a large-R shot, the R* half-profile and the sphere arc')
        parser.add_argument('--size', type=int)
        parser.add_argument('--margin', type=float)
        self.add_integrator_arguments(parser)

    def run(self, config, **options):
        if not options['inputs'] and not options['figure_one']:
            raise CommandError("Give at least one --in file or --figure-one", returncode=2)

        curves, documents = [], []
        for name in options['inputs']:
            path = Path(name)
            if path.suffix == '.json':
                document = import_profile(path)
                documents.append(document)
                curves.append(LabeledCurve(path.stem, document.points))
            else:
                curves.append(LabeledCurve(path.stem, import_trajectory(path).points))

        n = config.get('n') or (documents[0].n if documents else 4)
        m = config.get('m') or (documents[0].m if documents else n)
        p = SymmetryParams(m, n)

        if options['figure_one']:
            cfg = config['integrator']
            brackets = SweepService.locate(p, cfg, samples=settings.SHRINKERS['SCAN_SAMPLES'])
            rstar = find_rstar(p, cfg, brackets[0], settings.SHRINKERS['SOLVE_TOL'])
            curves = FigureService.figure_one_curves(n, cfg, rstar) + curves

        conf = settings.SHRINKERS
        render_svg(curves, p, options['out'],
                   size=config.get('size', conf['SVG_SIZE']), margin=config.get('margin', conf['SVG_MARGIN']))
        self.stdout.write(self.style.SUCCESS(f"{len(curves)} curve(s) written to {options['out']}"))
