# Стандартные библиотеки Python
import logging

# Django импорты
from django.core.paginator import Paginator
from django.http import JsonResponse
from django.shortcuts import get_object_or_404
from django.views.decorators.http import require_GET

# Импорты из приложения
from .admin_modules.export import export_flow_results
from .forms import ExportFormatForm
from .models import ExperimentRun

# Настройка логгера
logger = logging.getLogger(__name__)

RUNS_PER_PAGE = 50


def _run_summary(run):
    return {
        'id': run.pk,
        'scenario': run.scenario_name,
        'mode': run.mode,
        'seed': run.seed,
        'horizon': run.horizon,
        'max_total_queue': run.max_total_queue,
        'mean_total_queue': run.mean_total_queue,
        'created_at': run.created_at.isoformat(),
        'url': run.get_absolute_url(),
    }


@require_GET
def run_list(request):
    runs = ExperimentRun.objects.all()
    mode = request.GET.get('mode')
    if mode:
        runs = runs.filter(mode=mode)
    scenario = request.GET.get('scenario')
    if scenario:
        runs = runs.filter(scenario_name=scenario)
    page = Paginator(runs, RUNS_PER_PAGE).get_page(request.GET.get('page'))
    return JsonResponse({
        'count': page.paginator.count,
        'page': page.number,
        'pages': page.paginator.num_pages,
        'results': [_run_summary(run) for run in page],
    })


@require_GET
def run_detail(request, pk):
    run = get_object_or_404(ExperimentRun, pk=pk)
    data = _run_summary(run)
    data['wall_time'] = run.wall_time
    data['flows'] = [
        {
            'flow_id': result.flow_id,
            'name': result.name,
            'arrival_rate': result.arrival_rate,
            'delay_target': result.delay_target,
            'mean_delay': result.mean_delay,
            'reported_delay': result.reported_delay,
            'delivered': result.delivered,
            'throughput': result.throughput,
            'met': result.met,
        }
        for result in run.flow_results.all()
    ]
    data['metrics'] = run.metrics
    return JsonResponse(data)


@require_GET
def run_export(request, pk):
    run = get_object_or_404(ExperimentRun, pk=pk)
    form = ExportFormatForm(request.GET or {'export_format': 'excel'})
    if not form.is_valid():
        logger.warning(f"Invalid export request for run {pk}: {form.errors.get_json_data()}")
        return JsonResponse({'errors': form.errors.get_json_data()}, status=400)
    return export_flow_results([run], form.cleaned_data['export_format'])
