from decimal import ROUND_HALF_UP, Decimal

from django.utils.text import slugify
from unidecode import unidecode

SLUG_MAX_LENGTH = 250
SLUG_FALLBACK = 'scenario'


def scenario_slug(name, queryset):
    """
    Slug сценария из имени: транслитерация латиницей, при занятом slug
    добавляется наименьший свободный номер начиная с 2 (tandem, tandem-2, ...).

    :param queryset: записи, среди которых slug должен быть уникален
    """
    # Запас под суффикс номера
    base = slugify(unidecode(name or ''))[:SLUG_MAX_LENGTH - 8].strip('-') or SLUG_FALLBACK
    taken = set(queryset.filter(slug__startswith=base).values_list('slug', flat=True))
    if base not in taken:
        return base
    number = 2
    while f'{base}-{number}' in taken:
        number += 1
    return f'{base}-{number}'


def round_half_away(value):
    """Округление до целого, половина от нуля: 3.5 -> 4, -2.5 -> -3."""
    if value is None:
        return None
    return int(Decimal(repr(float(value))).quantize(Decimal('1'), rounding=ROUND_HALF_UP))
