from django.apps import AppConfig


class ShrinkersConfig(AppConfig):
    name = 'shrinkers'
