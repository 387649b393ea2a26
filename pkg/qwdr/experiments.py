"""
Повторные прогоны с разными зёрнами и таблица задержек по наборам целей.
"""
import copy
import logging
import multiprocessing
from pathlib import Path

import numpy as np
import pandas as pd

from .metrics import FlowMetrics, RunMetrics, collect_metrics, compare_runs, write_json
from .scenarios import make_paper15_scenario, paper15_rows, scenario_from_document, to_document
from .scheduler import run
from .utils import round_half_away

logger = logging.getLogger(__name__)


def run_scenario(scenario, out_dir=None):
    output = run(
        scenario.model,
        scenario.run_config(),
        scenario.channel_model(),
        scenario.arrival_process(),
    )
    return collect_metrics(output, scenario, out_dir)


def _replication_worker(args):
    scenario = scenario_from_document(args['document'])
    metrics = run_scenario(scenario, args['out_dir'])
    return args['index'], metrics


def replication_seeds(base_seed, count):
    return [base_seed + n for n in range(count)]


def run_replications(scenario, replications=None, base_seed=None, out_dir=None, workers=1):
    """
    Независимые прогоны сценария с разными зёрнами.

    :param replications: число повторов (по умолчанию параметр сценария)
    :param base_seed: первое зерно, далее base_seed + 1, ...
    :param workers: число процессов; 1 - последовательно
    :return: список RunMetrics в порядке зёрен
    """
    replications = replications or scenario.parameters['replications']
    base_seed = scenario.parameters['channel_seed'] if base_seed is None else base_seed
    worker_args = []
    for index, seed in enumerate(replication_seeds(base_seed, replications)):
        seeded = scenario.with_seed(seed)
        worker_args.append({
            'index': index,
            'document': to_document(seeded),
            'out_dir': None if out_dir is None else str(Path(out_dir) / f'seed-{seed}'),
        })

    logger.info(f"Running {replications} replications of {scenario.name} ({scenario.mode})")
    if workers <= 1 or replications == 1:
        results = [_replication_worker(args) for args in worker_args]
    else:
        with multiprocessing.Pool(min(workers, replications)) as pool:
            results = list(pool.imap_unordered(_replication_worker, worker_args))

    # Порядок зёрен
    results.sort(key=lambda item: item[0])
    return [metrics for _, metrics in results]


def mean_metrics(runs):
    """Средние по повторам; задержка потока усредняется по прогонам с доставками."""
    if not runs:
        raise ValueError('no runs to average')
    first = runs[0]
    flows = []
    for flow in first.flows:
        per_run = [run_metrics.flow(flow.flow_id) for run_metrics in runs]
        delays = [f.mean_delay for f in per_run if f.mean_delay is not None]
        mean_delay = float(np.mean(delays)) if delays else None
        flows.append(FlowMetrics(
            flow_id=flow.flow_id,
            name=flow.name,
            arrival_rate=flow.arrival_rate,
            delay_target=flow.delay_target,
            injected=sum(f.injected for f in per_run),
            delivered=sum(f.delivered for f in per_run),
            mean_delay=mean_delay,
            reported_delay=round_half_away(mean_delay),
            histogram=(),
            throughput=float(np.mean([f.throughput for f in per_run])),
            late_throughput=float(np.mean([f.late_throughput for f in per_run])),
        ))
    signature = copy.deepcopy(first.signature)
    signature.get('parameters', {}).pop('channel_seed', None)
    signature.get('parameters', {}).pop('arrival_seed', None)
    return RunMetrics(
        scenario=first.scenario,
        mode=first.mode,
        horizon=first.horizon,
        seeds=tuple(seed for run_metrics in runs for seed in run_metrics.seeds[:1]),
        flows=tuple(flows),
        max_total_queue=max(r.max_total_queue for r in runs),
        mean_total_queue=float(np.mean([r.mean_total_queue for r in runs])),
        final_total_queue=int(round(np.mean([r.final_total_queue for r in runs]))),
        reviews=int(round(np.mean([r.reviews for r in runs]))),
        signature={**signature, 'seeds': [seed for r in runs for seed in r.seeds[:1]]},
        metadata=first.metadata,
    )


def _cell(flow):
    if flow.targeted:
        return f'({flow.delay_target:g},{flow.reported_delay})'
    return str(flow.reported_delay)


def qos_table(rows=None, horizon=None, replications=1, base_seed=1, out_dir=None, workers=1):
    """
    Таблица задержек 15-узлового сценария: строка 1 невзвешенная, остальные
    строки с целями (цель, достигнуто) для F10, F11, F6.

    :return: (DataFrame таблицы, {строка: DataFrame сравнения с невзвешенным прогоном})
    """
    rows = rows or paper15_rows()
    if 1 not in rows:
        rows = [1, *rows]
    averaged = {}
    for row in rows:
        scenario = make_paper15_scenario(seed=base_seed, row=row)
        if horizon is not None:
            scenario = scenario.with_parameters(horizon_slots=horizon)
        row_dir = None if out_dir is None else Path(out_dir) / f'row-{row}'
        runs = run_replications(scenario, replications, base_seed, row_dir, workers)
        averaged[row] = mean_metrics(runs)

    baseline = averaged[1]
    table = []
    comparisons = {}
    for row in rows:
        metrics = averaged[row]
        reference = metrics.metadata.get('metadata', {}).get('reference_delays', {})
        record = {'row': row, 'mode': metrics.mode}
        for flow in metrics.flows:
            record[flow.name] = _cell(flow)
            record[f'{flow.name}_reference'] = reference.get(flow.name)
        table.append(record)
        if row != 1:
            comparisons[row] = compare_runs(baseline, metrics)

    frame = pd.DataFrame(table)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        frame.to_csv(out_dir / 'qos_table.csv', index=False, lineterminator='\n')
        for row, comparison in comparisons.items():
            comparison.to_csv(out_dir / f'compare-row-{row}.csv', index=False, lineterminator='\n')
        write_json(out_dir / 'qos_table.json', {str(row): averaged[row].to_dict() for row in rows})
    return frame, comparisons
