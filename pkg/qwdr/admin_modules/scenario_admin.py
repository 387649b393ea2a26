import json

from django import forms
from django.contrib import admin, messages
from django.core.exceptions import ValidationError

from qwdr.models import Scenario
from qwdr.scenarios import scenario_from_document


# Админская форма для модели Scenario
class ScenarioAdminForm(forms.ModelForm):

    class Meta:
        model = Scenario
        fields = '__all__'
        widgets = {'document': forms.Textarea(attrs={'rows': 30})}

    def clean_document(self):
        document = self.cleaned_data['document']
        try:
            scenario_from_document(document)
        except ValidationError as exc:
            raise ValidationError(json.dumps(exc.message_dict, ensure_ascii=False))
        return document


@admin.register(Scenario)
class ScenarioAdmin(admin.ModelAdmin):
    form = ScenarioAdminForm
    prepopulated_fields = {"slug": ("name",)}
    list_display = ('name', 'slug', 'flow_count', 'run_count', 'created_at')
    search_fields = ('name', 'slug')
    actions = ['validate_scenarios']

    @admin.display(description='Потоки')
    def flow_count(self, obj):
        return len(obj.document.get('flows', []))

    @admin.display(description='Прогоны')
    def run_count(self, obj):
        return obj.runs.count()

    @admin.action(description='Проверить сценарии')
    def validate_scenarios(self, request, queryset):
        for scenario in queryset:
            try:
                config = scenario.to_config()
            except ValidationError as exc:
                self.message_user(request, f"{scenario.name}: {exc.message_dict}", level=messages.ERROR)
            else:
                self.message_user(
                    request,
                    f"{scenario.name}: {len(config.model.nodes)} узлов, {len(config.model.flows)} потоков, "
                    f"|K|={config.model.size}",
                )
