"""
Показатели прогона по потокам и файлы вывода.

Файлы каталога прогона: metrics.json, delays.csv, queues.csv, reviews.csv,
а также schedule.csv и solver_trace.csv, если трассировка включена.
В metrics.json нет времени выполнения: повторный прогон с теми же зёрнами
даёт побайтно тот же файл.
"""
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

import pandas as pd

from .utils import round_half_away

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowMetrics:
    flow_id: int
    name: str
    arrival_rate: float
    delay_target: Optional[float]
    injected: int
    delivered: int
    mean_delay: Optional[float]
    reported_delay: Optional[int]
    histogram: tuple  # ((задержка, число пакетов), ...)
    throughput: float
    late_throughput: float

    @property
    def targeted(self):
        return self.delay_target is not None

    @property
    def met(self):
        if not self.targeted or self.reported_delay is None:
            return None
        return self.reported_delay <= self.delay_target


@dataclass(frozen=True)
class RunMetrics:
    scenario: str
    mode: str
    horizon: int
    seeds: tuple
    flows: tuple
    max_total_queue: int
    mean_total_queue: float
    final_total_queue: int
    reviews: int
    signature: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def flow(self, key):
        """Поток по номеру или имени (``F10``)."""
        for flow in self.flows:
            if key in (flow.flow_id, flow.name):
                return flow
        raise KeyError(key)

    def to_dict(self):
        data = asdict(self)
        data['seeds'] = list(self.seeds)
        data['flows'] = [
            {**asdict(flow), 'histogram': [list(pair) for pair in flow.histogram], 'met': flow.met}
            for flow in self.flows
        ]
        return data

    @classmethod
    def from_dict(cls, data):
        flows = tuple(
            FlowMetrics(
                **{key: value for key, value in flow.items() if key not in ('histogram', 'met')},
                histogram=tuple(tuple(pair) for pair in flow['histogram']),
            )
            for flow in data['flows']
        )
        return cls(**{**data, 'flows': flows, 'seeds': tuple(data['seeds'])})


def _flow_metrics(flow, log, horizon):
    histogram = tuple(sorted(log.delays[flow.flow_id].items()))
    delivered = log.delivered[flow.flow_id]
    mean_delay = None
    if delivered:
        mean_delay = sum(delay * count for delay, count in histogram) / delivered
    late_slots = max(horizon - log.late_from, 1)
    return FlowMetrics(
        flow_id=flow.flow_id,
        name=flow.label,
        arrival_rate=flow.arrival_rate,
        delay_target=flow.delay_target,
        injected=log.injected[flow.flow_id],
        delivered=delivered,
        mean_delay=mean_delay,
        reported_delay=round_half_away(mean_delay),
        histogram=histogram,
        throughput=delivered / horizon,
        late_throughput=log.delivered_late[flow.flow_id] / late_slots,
    )


def build_metrics(run_output, scenario=None):
    model = run_output.model
    config = run_output.config
    flows = tuple(_flow_metrics(flow, run_output.log, config.horizon) for flow in model.flows)
    parameters = scenario.parameters if scenario is not None else {}
    return RunMetrics(
        scenario=scenario.name if scenario is not None else 'scenario',
        mode=parameters.get('mode', 'qwdr'),
        horizon=config.horizon,
        seeds=(parameters.get('channel_seed'), parameters.get('arrival_seed')),
        flows=flows,
        max_total_queue=run_output.total_queue_max,
        mean_total_queue=run_output.mean_total_queue,
        final_total_queue=run_output.final_queue,
        reviews=len(run_output.reviews),
        signature=scenario.signature() if scenario is not None else {},
        metadata=scenario.echo() if scenario is not None else {},
    )


def write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')


def delays_frame(metrics):
    return pd.DataFrame(
        [
            {
                'flow': flow.name,
                'target': flow.delay_target,
                'achieved': flow.reported_delay,
                'mean_delay': flow.mean_delay,
                'delivered': flow.delivered,
                'throughput': flow.throughput,
            }
            for flow in metrics.flows
        ],
        columns=['flow', 'target', 'achieved', 'mean_delay', 'delivered', 'throughput'],
    )


def queues_frame(run_output):
    labels = [flow.label for flow in run_output.model.flows]
    rows = [(slot, total, *backlogs) for slot, total, backlogs in run_output.queue_samples]
    return pd.DataFrame(rows, columns=['slot', 'total', *labels])


def _write_csv(frame, path):
    frame.to_csv(path, index=False, lineterminator='\n')


def collect_metrics(run_output, scenario=None, out_dir=None):
    """
    Показатели по потокам и, если задан out_dir, файлы прогона.

    :param run_output: результат QWDRSimulation.run
    :param scenario: ScenarioConfig прогона (параметры попадают в metadata)
    :param out_dir: каталог для файлов вывода
    :return: RunMetrics
    """
    metrics = build_metrics(run_output, scenario)
    if out_dir is None:
        return metrics

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_json(out_dir / 'metrics.json', metrics.to_dict())
    _write_csv(delays_frame(metrics), out_dir / 'delays.csv')
    _write_csv(queues_frame(run_output), out_dir / 'queues.csv')
    _write_csv(
        pd.DataFrame(
            [(r.index, r.start, r.end, r.total_queue) for r in run_output.reviews],
            columns=['review_index', 'T_O', 'T_N', 'total_queue'],
        ),
        out_dir / 'reviews.csv',
    )
    if run_output.config.schedule_trace:
        _write_csv(pd.DataFrame(run_output.schedule, columns=['slot', 'i', 'j', 'f']), out_dir / 'schedule.csv')
    if run_output.config.solver.trace:
        _write_csv(
            pd.DataFrame(run_output.solver_trace, columns=['review_index', 'step', 'objective']),
            out_dir / 'solver_trace.csv',
        )
    logger.info(f"Run files written to {out_dir}")
    return metrics


def load_metrics(path):
    path = Path(path)
    if path.is_dir():
        path = path / 'metrics.json'
    return RunMetrics.from_dict(json.loads(path.read_text(encoding='utf-8')))


def compare_runs(baseline, weighted):
    """
    Отчёт о снижении задержек: невзвешенная и взвешенная задержка по
    потокам, отношение и выполнение целей.

    :raises ValueError: прогоны относятся к разным сценариям
    """
    if baseline.signature != weighted.signature:
        raise ValueError('runs belong to different scenarios or seeds and cannot be compared')

    rows = []
    for base in baseline.flows:
        flow = weighted.flow(base.flow_id)
        ratio = None
        if base.mean_delay and flow.mean_delay is not None:
            ratio = flow.mean_delay / base.mean_delay
        elif base.mean_delay == 0 and flow.mean_delay == 0:
            ratio = 1.0
        status = None
        if flow.targeted:
            status = 'met' if flow.met else 'missed'
        rows.append({
            'flow_id': flow.flow_id,
            'flow': flow.name,
            'target': flow.delay_target,
            'unweighted': base.reported_delay,
            'weighted': flow.reported_delay,
            'ratio': ratio,
            'status': status,
        })
    return pd.DataFrame(rows, columns=['flow_id', 'flow', 'target', 'unweighted', 'weighted', 'ratio', 'status'])
