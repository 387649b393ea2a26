from django import forms
from django.core.exceptions import ValidationError

from .solver import WEIGHT_ARGUMENTS
from .stochastic import GAIN_MODELS

MODES = ('qwdr', 'unweighted')


def _choices(values):
    return [(value, value) for value in values]


class ScenarioParametersForm(forms.Form):
    """Числовые параметры сценария (значения по умолчанию из QWDR_DEFAULTS)."""

    POSITIVE_FIELDS = ('k0', 'alpha', 'a2', 'sigma2', 'gamma_truncation_factor', 'gain_scale')

    # часы пересмотра
    k0 = forms.FloatField()
    # оптимизация
    alpha = forms.FloatField()
    cycles = forms.IntegerField(min_value=1)
    n_rep = forms.IntegerField(min_value=1)
    tolerance = forms.FloatField(min_value=0)
    weight_argument = forms.ChoiceField(choices=_choices(WEIGHT_ARGUMENTS))
    a1 = forms.FloatField(min_value=0)
    a2 = forms.FloatField()
    # канал
    sigma2 = forms.FloatField()
    gamma_truncation_factor = forms.FloatField()
    gain_model = forms.ChoiceField(choices=_choices(GAIN_MODELS))
    gain_scale = forms.FloatField()
    channel_seed = forms.IntegerField(min_value=0)
    arrival_seed = forms.IntegerField(min_value=0)
    # прогон
    horizon_slots = forms.IntegerField(min_value=1)
    replications = forms.IntegerField(min_value=1)
    queue_sample_interval = forms.IntegerField(min_value=1)
    check_invariants = forms.BooleanField(required=False)
    schedule_trace = forms.BooleanField(required=False)
    solver_trace = forms.BooleanField(required=False)
    mode = forms.ChoiceField(choices=_choices(MODES))
    # оракул
    capacity_channel_samples = forms.IntegerField(min_value=1)
    capacity_tolerance = forms.FloatField(min_value=0)

    def clean(self):
        cleaned_data = super().clean()
        for name in self.POSITIVE_FIELDS:
            value = cleaned_data.get(name)
            if value is not None and value <= 0:
                self.add_error(name, 'Ensure this value is greater than 0.')
        # Невзвешенный режим: w ≡ 1
        if cleaned_data.get('mode') == 'unweighted':
            cleaned_data['a1'] = 0.0
        return cleaned_data


def clean_parameters(parameters):
    """
    Проверка словаря параметров формой.

    :param parameters: полный словарь параметров (умолчания уже подставлены)
    :return: очищенный словарь
    :raises ValidationError: с сообщениями по именам полей
    """
    unknown = sorted(set(parameters) - set(ScenarioParametersForm.base_fields))
    if unknown:
        raise ValidationError({name: 'Unknown parameter.' for name in unknown})
    form = ScenarioParametersForm(data=parameters)
    if not form.is_valid():
        errors = form.errors.get_json_data()
        raise ValidationError({
            name: [error['message'] for error in messages] for name, messages in errors.items()
        })
    return dict(form.cleaned_data)


class ExportFormatForm(forms.Form):
    export_format = forms.ChoiceField(
        choices=[('excel', 'Excel'), ('csv', 'CSV')],
        label="Выберите формат экспорта"
    )
