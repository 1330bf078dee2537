"""
Django settings for the shrinker laboratory.
Numerical defaults live in SHRINKERS; everything can be overridden per command.
"""

from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = 'django-insecure-shrinker-lab-local-only'

DEBUG = False

ALLOWED_HOSTS = []

INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'shrinkers',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': BASE_DIR / 'db.sqlite3',
    }
}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'STRICT_JSON': True,
    'COERCE_DECIMAL_TO_STRING': False,
}

SHRINKERS = {
    'INTEGRATOR': {
        'rel_tol': 1e-10,
        'abs_tol': 1e-12,
        'h_init': 1e-3,
        'h_max': 0.05,
        't_max': 200.0,
        'eps_axis': 1e-8,
        'eps_origin': 1e-6,
        'event_tol': 1e-12,
        # integration stops this far from an axis; the approach below it is extrapolated
        'axis_band': 5e-2,
    },
    'SOLVE_TOL': 1e-7,
    'BRACKET_HIGH': 30.0,
    'SCAN_SAMPLES': 64,
    'RESAMPLE_H': 1e-3,
    'SVG_SIZE': 600,
    'SVG_MARGIN': 0.08,
    'SAMPLE_SEED': 20240101,
    'GOLDEN_FIXTURE': BASE_DIR / 'shrinkers' / 'fixtures' / 'golden_values.json',
}

CELERY_BROKER_URL = 'redis://localhost:6379/0'
CELERY_RESULT_BACKEND = 'redis://localhost:6379/0'
CELERY_ACCEPT_CONTENT = ['json']
CELERY_TASK_SERIALIZER = 'json'
CELERY_RESULT_SERIALIZER = 'json'
CELERY_TIMEZONE = 'UTC'
# sweeps run in-process unless a worker pool is configured
CELERY_TASK_ALWAYS_EAGER = True
CELERY_TASK_EAGER_PROPAGATES = True

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'shrinkers': {
            'handlers': ['console'],
            'level': 'INFO',
            'propagate': False,
        },
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
    },
}
