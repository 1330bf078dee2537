from django.conf import settings

from shrinkers.core_ode import SymmetryParams
from shrinkers.exports import export_point_cloud, import_profile, sample_hypersurface
from shrinkers.management.base import ShrinkerCommand


class Command(ShrinkerCommand):
    help = 'Samples the invariant hypersurface of a certified profile as a point cloud in R^(m+n)'
    validated_options = ('counts', 'seed')

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='source', required=True, help='profile document')
        parser.add_argument('--counts', type=int, required=True, help='samples per profile point')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--out', required=True)

    def run(self, config, **options):
        document = import_profile(options['source'])
        profile = document.to_profile()
        p = SymmetryParams(document.m, document.n)
        seed = config.get('seed', settings.SHRINKERS['SAMPLE_SEED'])
        cloud = sample_hypersurface(profile, p, config['counts'], seed)
        export_point_cloud(cloud, options['out'], seed, p)
        self.stdout.write(f"points: {len(cloud)} in R^{p.m + p.n} (seed {seed})")
        self.stdout.write(self.style.SUCCESS(f"Point cloud written to {options['out']}"))
