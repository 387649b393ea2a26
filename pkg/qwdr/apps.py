from django.apps import AppConfig


class QwdrConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'qwdr'
    verbose_name = 'QWDR simulator'
