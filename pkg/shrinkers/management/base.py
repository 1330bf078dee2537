from django.core.management.base import BaseCommand, CommandError

from shrinkers.exceptions import ShrinkerError
from shrinkers.serializers import RunConfigSerializer

INTEGRATOR_OPTIONS = ('rel_tol', 'abs_tol', 'h_max', 'eps_axis', 'eps_origin', 'axis_band')


class ShrinkerCommand(BaseCommand):
    """
    Base for the laboratory subcommands.
    Options go through RunConfigSerializer; bad options exit 2 with the
    subcommand help, failed computations and certificates exit 1.
    """
    validated_options = ()
    symmetric = False

    def add_integrator_arguments(self, parser):
        group = parser.add_argument_group('integrator')
        group.add_argument('--rel-tol', type=float)
        group.add_argument('--abs-tol', type=float)
        group.add_argument('--h-max', type=float)
        group.add_argument('--eps-axis', type=float)
        group.add_argument('--eps-origin', type=float)
        group.add_argument('--axis-band', type=float)

    def validate(self, options):
        names = self.validated_options + INTEGRATOR_OPTIONS
        data = {name: options[name] for name in names if options.get(name) is not None}
        serializer = RunConfigSerializer(data=data, context={'symmetric': self.symmetric})
        if not serializer.is_valid():
            self.print_help('manage.py', self.__module__.rsplit('.', 1)[-1])
            raise CommandError(f"Invalid options: {dict(serializer.errors)}", returncode=2)
        return serializer.validated_data

    def handle(self, *args, **options):
        config = self.validate(options)
        try:
            self.run(config, **options)
        except ShrinkerError as exc:
            raise CommandError(str(exc), returncode=1) from exc

    def run(self, config, **options):
        raise NotImplementedError

    def report(self, label, value):
        """Full-precision numeric line for the human summary."""
        self.stdout.write(f"{label}: {float(value)!r}")
