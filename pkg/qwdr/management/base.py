import json
import logging

from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from qwdr.oracle import EnumerationTooLarge

logger = logging.getLogger(__name__)

CONFIG_ERROR = 2
SIZE_ERROR = 3


def format_validation_error(exc):
    if hasattr(exc, 'error_dict'):
        return json.dumps(exc.message_dict, ensure_ascii=False, sort_keys=True)
    return '; '.join(exc.messages)


class QWDRCommand(BaseCommand):
    """Команда с кодами возврата: 2 - ошибка конфигурации, 3 - слишком большой перебор."""

    def execute(self, *args, **options):
        try:
            return super().execute(*args, **options)
        except ValidationError as exc:
            message = format_validation_error(exc)
            logger.error(f"Configuration error: {message}")
            raise CommandError(f"configuration error: {message}", returncode=CONFIG_ERROR)
        except EnumerationTooLarge as exc:
            logger.error(f"Enumeration too large: {exc}")
            raise CommandError(f"size error: {exc}", returncode=SIZE_ERROR)

    def write_frame(self, frame):
        self.stdout.write(frame.to_string(index=False))
