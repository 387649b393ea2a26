"""
Внешний цикл QWDR: моменты пересмотра, решение задачи распределения,
жадное построение расписания по слотам и динамика очередей.
"""
import logging
import math
from collections import Counter
from dataclasses import dataclass, field

from .network import InvariantViolation, QueueMatrix
from .solver import SolverConfig, WeightConfig, solve_allocation
from .stochastic import draw_arrivals, draw_channel

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-9
QUOTA_EPSILON = 1e-9


class InfeasibleAllocation(ValueError):
    """Вектор долей нарушает ограничения узлов или выходит за [0, 1]."""


def next_review_period(total_queue, k0):
    if total_queue < 0:
        raise ValueError('total queue must be non-negative')
    return max(1, math.ceil(max(1.0, math.log1p(k0 * total_queue))))


@dataclass
class ReviewClock:
    k0: float
    start: int = 0
    next: int = 0
    index: int = -1

    @property
    def period(self):
        return self.next - self.start

    def open(self, slot, total_queue):
        self.start = slot
        self.next = slot + next_review_period(total_queue, self.k0)
        self.index += 1
        return self.period


@dataclass(frozen=True)
class SlotSchedule:
    start: int
    length: int
    active: tuple  # по слотам: позиции активных элементов
    quotas: tuple
    counts: tuple

    def active_at(self, slot):
        offset = slot - self.start
        if not 0 <= offset < self.length:
            raise ValueError(f'slot {slot} is outside review [{self.start}, {self.start + self.length})')
        return self.active[offset]

    def is_scheduled(self, position):
        return self.counts[position] > 0


def check_feasible(values, model, tolerance=FEASIBILITY_TOLERANCE):
    bad = [k for k, x in enumerate(values) if x < -tolerance or x > 1 + tolerance]
    if bad:
        raise InfeasibleAllocation(f'fractions outside [0, 1] at {[model.elements[k] for k in bad]}')
    for node, positions in model.node_elements.items():
        load = sum(values[k] for k in positions)
        if load > 1 + tolerance:
            raise InfeasibleAllocation(f'node {node} is allocated {load:.12g} > 1')


def create_schedule(allocation, model, period_length, start=0):
    """
    Жадное построение расписания: узлы по возрастанию, исходящие элементы
    узла в лексикографическом порядке, слоты по порядку. Слот отдаётся
    элементу, если оба конца канала свободны и квота s·T̂ ещё не выбрана.

    :param allocation: AllocationVector или последовательность долей в порядке φ
    :param period_length: длина периода пересмотра T̂ (слоты)
    """
    if period_length < 1:
        raise ValueError('period length must be at least 1')
    values = tuple(getattr(allocation, 'values', allocation))
    if len(values) != model.size:
        raise InfeasibleAllocation(f'expected {model.size} fractions, got {len(values)}')
    check_feasible(values, model)

    busy = [set() for _ in range(period_length)]
    active = [[] for _ in range(period_length)]
    counts = [0] * model.size
    quotas = tuple(max(x, 0.0) * period_length for x in values)

    for node in model.nodes:
        for position in model.outgoing_elements.get(node, ()):
            quota = quotas[position] - QUOTA_EPSILON
            if quota <= 0:
                continue
            i, j, _ = model.elements[position]
            for offset in range(period_length):
                if counts[position] >= quota:
                    break
                slot_busy = busy[offset]
                if i in slot_busy or j in slot_busy:
                    continue
                slot_busy.add(i)
                slot_busy.add(j)
                active[offset].append(position)
                counts[position] += 1

    return SlotSchedule(
        start=start,
        length=period_length,
        active=tuple(tuple(sorted(slot)) for slot in active),
        quotas=quotas,
        counts=tuple(counts),
    )


class ServiceLog:
    """Накопленные передачи S, поступления A и доставки по потокам."""

    def __init__(self, model, late_from=0):
        self.model = model
        self.late_from = late_from
        self.served = [0] * model.size
        self.arrived = {key: 0 for key in model.queue_keys}
        self.delays = {flow.flow_id: Counter() for flow in model.flows}
        self.delivered = {flow.flow_id: 0 for flow in model.flows}
        self.delivered_late = {flow.flow_id: 0 for flow in model.flows}
        self.injected = {flow.flow_id: 0 for flow in model.flows}

        self._incoming = {key: [] for key in model.queue_keys}
        self._outgoing = {key: [] for key in model.queue_keys}
        for pos, (i, j, f) in enumerate(model.elements):
            self._outgoing[(i, f)].append(pos)
            if j != f:
                self._incoming[(j, f)].append(pos)

    def record_service(self, position, count):
        self.served[position] += count

    def record_arrivals(self, node, flow_id, count):
        self.arrived[(node, flow_id)] += count
        self.injected[flow_id] += count

    def record_delivery(self, flow_id, delay, slot):
        self.delays[flow_id][delay] += 1
        self.delivered[flow_id] += 1
        if slot >= self.late_from:
            self.delivered_late[flow_id] += 1

    def expected_length(self, key):
        return (
            self.arrived[key]
            + sum(self.served[k] for k in self._incoming[key])
            - sum(self.served[k] for k in self._outgoing[key])
        )

    def check_balance(self, queues, keys=None):
        """Q_i^f(t) − Q_i^f(0) = A_i^f(t) + Σ_k S_ki^f(t) − Σ_j S_ij^f(t)."""
        for key in keys if keys is not None else self.model.queue_keys:
            expected = self.expected_length(key)
            actual = queues.length(*key)
            if actual != expected:
                raise InvariantViolation(
                    f'queue balance broken at {key}: length {actual}, ledger {expected}'
                )

    def check_conservation(self, queues):
        for flow in self.model.flows:
            queued = queues.flow_backlog(flow.flow_id)
            if self.injected[flow.flow_id] != queued + self.delivered[flow.flow_id]:
                raise InvariantViolation(f'packets of flow {flow.flow_id} are not conserved')


def step_slot(queues, schedule, channel, arrivals, t, log=None):
    """
    Один слот: обслуживание из очередей на начало слота, затем пересылки
    и внешние поступления ставятся в очередь в конце слота.

    :param arrivals: {(узел-источник, поток): число пакетов}
    :return: (затронутые очереди, доставки [(поток, задержка)])
    """
    model = queues.model
    transfers = []
    for position in schedule.active_at(t):
        i, j, f = model.elements[position]
        capacity = int(channel.service[model.element_link(position)])
        packets = queues.dequeue(i, f, capacity)
        if packets:
            transfers.append((position, j, f, packets))

    touched = set()
    deliveries = []
    for position, j, f, packets in transfers:
        i = model.elements[position][0]
        touched.add((i, f))
        if log is not None:
            log.record_service(position, len(packets))
        if j == f:
            for stamp in packets:
                delay = t - stamp
                deliveries.append((f, delay))
                if log is not None:
                    log.record_delivery(f, delay, t)
        else:
            queues.enqueue(j, f, packets)
            touched.add((j, f))

    for (node, f), count in arrivals.items():
        if count:
            queues.enqueue(node, f, [t] * count)
            touched.add((node, f))
            if log is not None:
                log.record_arrivals(node, f, count)

    queues.slot = t + 1
    return touched, deliveries


@dataclass(frozen=True)
class RunConfig:
    horizon: int = 100000
    k0: float = 0.01
    solver: SolverConfig = field(default_factory=SolverConfig)
    weights: WeightConfig = field(default_factory=WeightConfig)
    check_invariants: bool = True
    schedule_trace: bool = False
    queue_sample_interval: int = 100

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError('horizon must be at least 1 slot')
        if self.k0 <= 0:
            raise ValueError('k0 must be positive')
        if self.queue_sample_interval < 1:
            raise ValueError('queue sample interval must be at least 1')

    @classmethod
    def from_parameters(cls, model, parameters):
        """Конфигурация прогона из разрешённых параметров сценария."""
        return cls(
            horizon=int(parameters['horizon_slots']),
            k0=parameters['k0'],
            solver=SolverConfig(
                alpha=parameters['alpha'],
                cycles=int(parameters['cycles']),
                n_rep=int(parameters['n_rep']),
                tolerance=parameters['tolerance'],
                trace=bool(parameters.get('solver_trace', False)),
            ),
            weights=WeightConfig.for_model(
                model,
                a1=parameters['a1'],
                a2=parameters['a2'],
                argument=parameters['weight_argument'],
            ),
            check_invariants=bool(parameters.get('check_invariants', True)),
            schedule_trace=bool(parameters.get('schedule_trace', False)),
            queue_sample_interval=int(parameters.get('queue_sample_interval', 100)),
        )


@dataclass(frozen=True)
class ReviewRecord:
    index: int
    start: int
    end: int
    total_queue: int


@dataclass
class RunOutput:
    model: object
    config: RunConfig
    log: ServiceLog
    reviews: list = field(default_factory=list)
    schedule: list = field(default_factory=list)  # (slot, i, j, f)
    queue_samples: list = field(default_factory=list)  # (slot, total, backlog по потокам)
    solver_trace: list = field(default_factory=list)  # (review, step, objective)
    total_queue_sum: int = 0
    total_queue_max: int = 0
    final_queue: int = 0

    @property
    def horizon(self):
        return self.config.horizon

    @property
    def mean_total_queue(self):
        return self.total_queue_sum / self.config.horizon


class QWDRSimulation:
    """
    Прогон политики QWDR на горизонте в слотах.

    Пересмотр: снимок очередей, канал периода, решение задачи распределения,
    расписание на T̂ слотов. Все случайные величины определяются зёрнами
    моделей канала и поступлений.
    """

    def __init__(self, model, config, channel_model, arrival_process):
        if channel_model.links != model.links:
            raise ValueError('channel model links do not match the network')
        self.model = model
        self.config = config
        self.channel_model = channel_model
        self.arrival_process = arrival_process
        self.queues = QueueMatrix(model)
        self.clock = ReviewClock(k0=config.k0)
        self.log = ServiceLog(model, late_from=config.horizon // 2)

    def _review(self, slot, total_queue, output):
        model = self.model
        period = self.clock.open(slot, total_queue)
        channel = draw_channel(self.channel_model, self.clock.index)
        result = solve_allocation(
            self.queues, channel, model, self.config.solver, self.config.weights
        )
        schedule = create_schedule(result.allocation, model, period, start=slot)

        if self.config.check_invariants:
            for position, backlog in enumerate(result.backlogs):
                if backlog == 0 and schedule.is_scheduled(position):
                    raise InvariantViolation(
                        f'element {model.elements[position]} scheduled with zero differential backlog'
                    )

        output.reviews.append(ReviewRecord(self.clock.index, slot, self.clock.next, total_queue))
        if result.trace:
            output.solver_trace.extend(
                (self.clock.index, step, objective) for step, objective in result.trace
            )
        return channel, schedule

    def run(self):
        model = self.model
        config = self.config
        output = RunOutput(model=model, config=config, log=self.log)
        sources = self.arrival_process.sources
        logger.info(
            f"QWDR run: {len(model.nodes)} nodes, {len(model.flows)} flows, "
            f"|K|={model.size}, horizon={config.horizon}"
        )

        total_queue = 0
        channel = schedule = None
        for t in range(config.horizon):
            if t == self.clock.next:
                channel, schedule = self._review(t, total_queue, output)

            if config.check_invariants:
                model.check_activation(schedule.active_at(t))
            if config.schedule_trace:
                output.schedule.extend((t, *model.elements[pos]) for pos in schedule.active_at(t))

            counts = draw_arrivals(self.arrival_process, t)
            arrivals = {source: int(count) for source, count in zip(sources, counts)}
            touched, deliveries = step_slot(self.queues, schedule, channel, arrivals, t, self.log)
            total_queue += sum(arrivals.values()) - len(deliveries)

            if config.check_invariants:
                self.log.check_balance(self.queues, touched)

            output.total_queue_sum += total_queue
            output.total_queue_max = max(output.total_queue_max, total_queue)
            if (t + 1) % config.queue_sample_interval == 0:
                output.queue_samples.append((
                    t + 1,
                    total_queue,
                    tuple(self.queues.flow_backlog(flow.flow_id) for flow in model.flows),
                ))

        if config.check_invariants:
            self.log.check_balance(self.queues)
            self.log.check_conservation(self.queues)
        output.final_queue = total_queue
        logger.info(
            f"QWDR run finished: {len(output.reviews)} reviews, final total queue {total_queue}, "
            f"max {output.total_queue_max}"
        )
        return output


def run(model, config, channel_model, arrival_process):
    return QWDRSimulation(model, config, channel_model, arrival_process).run()
