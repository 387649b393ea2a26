"""
WSGI-приложение qwdrsim: JSON-просмотр сохранённых прогонов и админка.
"""
import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'qwdrsim.settings')

application = get_wsgi_application()
