import pandas as pd
from django.http import HttpResponse

from qwdr.models import FlowResult

FLOW_RESULT_FIELDS = [
    'run_id', 'run__scenario_name', 'run__mode', 'run__seed', 'run__horizon',
    'flow_id', 'name', 'arrival_rate', 'delay_target', 'mean_delay', 'reported_delay',
    'delivered', 'throughput',
]


def flow_results_frame(runs):
    """
    Результаты по потокам для набора прогонов.

    :param runs: QuerySet или список ExperimentRun
    """
    data = FlowResult.objects.filter(run__in=runs).order_by('run_id', 'flow_id').values(*FLOW_RESULT_FIELDS)
    df = pd.DataFrame(list(data), columns=FLOW_RESULT_FIELDS)
    df = df.rename(columns=lambda name: name.replace('run__', ''))
    df['met'] = [
        None if pd.isna(target) or pd.isna(delay) else bool(delay <= target)
        for target, delay in zip(df['delay_target'], df['reported_delay'])
    ]
    return df


# Экспорт результатов в Excel
def export_to_excel(runs, filename="flow_results.xlsx"):
    df = flow_results_frame(runs)
    response = HttpResponse(content_type='application/vnd.openxmlformats-officedocument.spreadsheetml.sheet')
    response['Content-Disposition'] = f'attachment; filename={filename}'
    df.to_excel(response, index=False)
    return response


# Экспорт результатов в CSV
def export_to_csv(runs, filename="flow_results.csv"):
    df = flow_results_frame(runs)
    response = HttpResponse(content_type='text/csv')
    response['Content-Disposition'] = f'attachment; filename={filename}'
    df.to_csv(response, index=False, lineterminator='\n')
    return response


def export_flow_results(runs, export_format):
    if export_format == 'csv':
        return export_to_csv(runs)
    return export_to_excel(runs)
