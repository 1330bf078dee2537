import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'shrinker_lab.settings')

app = Celery('shrinker_lab')
app.config_from_object('django.conf:settings', namespace='CELERY')
app.autodiscover_tasks()
