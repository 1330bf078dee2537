#!/usr/bin/env python
"""Command-line entry point for the shrinker laboratory."""
import os
import sys


def main(argv=None):
    """Run a laboratory subcommand; returns through sys.exit with its exit code."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'shrinker_lab.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    execute_from_command_line(argv if argv is not None else sys.argv)


if __name__ == '__main__':
    main()
