from django.contrib import admin
from django.shortcuts import render
from django.urls import path

from qwdr.admin_modules.export import export_flow_results
from qwdr.forms import ExportFormatForm
from qwdr.models import ExperimentRun, FlowResult


class FlowResultInline(admin.TabularInline):
    model = FlowResult
    extra = 0
    can_delete = False
    readonly_fields = (
        'flow_id', 'name', 'arrival_rate', 'delay_target', 'mean_delay', 'reported_delay',
        'delivered', 'throughput', 'met',
    )
    fields = readonly_fields

    @admin.display(boolean=True, description='Цель')
    def met(self, obj):
        return obj.met


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ('scenario_name', 'mode', 'seed', 'horizon', 'max_total_queue', 'mean_total_queue', 'wall_time', 'created_at')
    list_filter = ('mode', 'scenario')
    search_fields = ('scenario_name',)
    readonly_fields = ('metrics', 'created_at')
    inlines = [FlowResultInline]
    actions = ['export_excel', 'export_csv']

    # Добавление URL для экспорта всех прогонов
    def get_urls(self):
        urls = super().get_urls()
        custom_urls = [
            path('export/', self.admin_site.admin_view(self.export_data), name='qwdr_experimentrun_export'),
        ]
        return custom_urls + urls

    # Экспорт данных
    def export_data(self, request):
        if request.method == 'POST':
            form = ExportFormatForm(request.POST)
            if form.is_valid():
                return export_flow_results(ExperimentRun.objects.all(), form.cleaned_data['export_format'])
        else:
            form = ExportFormatForm()
        return render(request, "admin/qwdr/export.html", {"form": form})

    @admin.action(description='Экспорт результатов в Excel')
    def export_excel(self, request, queryset):
        return export_flow_results(queryset, 'excel')

    @admin.action(description='Экспорт результатов в CSV')
    def export_csv(self, request, queryset):
        return export_flow_results(queryset, 'csv')
