"""
Распределённое решение задачи взвешенного распределения времени в момент
пересмотра: циклический инкрементный градиентный подъём по элементам
канал-поток с проекцией на полупространства узловых ограничений.

Итерации ведутся на обычных списках: каждый шаг меняет одну координату и
несколько соседних, векторные операции numpy здесь только мешают.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Optional

from .network import differential_backlog

logger = logging.getLogger(__name__)

WEIGHT_ARGUMENTS = ('network', 'node')


@dataclass(frozen=True)
class WeightConfig:
    a1: float = 0.2
    a2: float = 2.0
    thresholds: Mapping = field(default_factory=dict)  # поток -> Q̄ (пакеты)
    argument: str = 'network'

    def __post_init__(self):
        if self.a1 < 0:
            raise ValueError('a1 must be non-negative')
        if self.a2 <= 0:
            raise ValueError('a2 must be positive')
        if self.argument not in WEIGHT_ARGUMENTS:
            raise ValueError(f'weight argument must be one of {WEIGHT_ARGUMENTS}')
        for flow_id, value in self.thresholds.items():
            if value is not None and value <= 0:
                raise ValueError(f'threshold of flow {flow_id} must be positive')

    @classmethod
    def for_model(cls, model, a1=0.2, a2=2.0, argument='network'):
        thresholds = {flow.flow_id: flow.threshold for flow in model.flows if flow.threshold}
        return cls(a1=a1, a2=a2, thresholds=thresholds, argument=argument)

    def threshold(self, flow_id):
        return self.thresholds.get(flow_id)


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 1e-4
    cycles: int = 15
    n_rep: int = 10
    tolerance: float = 1e-9
    trace: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError('alpha must be positive')
        if self.cycles < 1:
            raise ValueError('cycles must be at least 1')
        if self.n_rep < 1:
            raise ValueError('n_rep must be at least 1')


@dataclass(frozen=True)
class HalfspaceConstraint:
    support: tuple
    bound: float = 1.0
    node: Optional[int] = None

    @property
    def size(self):
        return len(self.support)

    def value(self, s):
        return sum(s[k] for k in self.support)


@dataclass(frozen=True)
class AllocationVector:
    values: tuple
    elements: tuple

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        # номера k = 1..|K|
        return self.values[k - 1]

    def fraction(self, i, j, f):
        return self.values[self.elements.index((i, j, f))]

    def as_dict(self):
        return dict(zip(self.elements, self.values))

    @classmethod
    def zeros(cls, elements):
        return cls(values=(0.0,) * len(elements), elements=tuple(elements))


@dataclass(frozen=True)
class AllocationResult:
    allocation: AllocationVector
    gradients: tuple
    backlogs: tuple
    objective: float
    c1: float
    bound: float
    trace: tuple = ()


def weight(x, x_bar, cfg):
    if x_bar is None or cfg.a1 == 0:
        return 1.0
    z = cfg.a2 * (x - x_bar)
    # логистическая функция без переполнения exp
    if z >= 0:
        return 1.0 + cfg.a1 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return 1.0 + cfg.a1 * e / (1.0 + e)


def _element_gradient(queues, channel, model, position, cfg):
    i, j, f = model.elements[position]
    backlog = differential_backlog(queues, i, j, f)
    if backlog == 0:
        return 0.0, 0
    x = queues.flow_backlog(f) if cfg.argument == 'network' else queues.length(i, f)
    w = weight(x, cfg.threshold(f), cfg)
    mu = float(channel.mu[model.element_link(position)])
    return w * backlog * mu, backlog


def _review_gradients(queues, channel, model, cfg):
    # Все градиенты пересмотра за один проход: backlog потока считается один раз
    mu = channel.mu.tolist()
    lengths = {key: queues.length(*key) for key in model.queue_keys}
    flow_backlogs = {}
    gradients = []
    backlogs = []
    for (i, j, f), link in zip(model.elements, model.element_links):
        upstream = lengths[(i, f)]
        backlog = upstream - (0 if j == f else lengths[(j, f)])
        if backlog <= 0:
            gradients.append(0.0)
            backlogs.append(0)
            continue
        if cfg.argument == 'network':
            x = flow_backlogs.get(f)
            if x is None:
                x = flow_backlogs[f] = sum(lengths[(node, f)] for node in model.flow_by_id[f].route[:-1])
        else:
            x = upstream
        gradients.append(weight(x, cfg.threshold(f), cfg) * backlog * mu[link])
        backlogs.append(backlog)
    return gradients, backlogs


def gradient(k, queues, channel, cfg):
    """∇G_k = w(Q^f, Q̄^f)·Q_ij^f·μ_ij для k = φ(i, j, f)."""
    model = queues.model
    model.link_flow_index.element(k)
    value, _ = _element_gradient(queues, channel, model, k - 1, cfg)
    return value


def lemma1_bound(alpha, K_size, c1):
    if K_size == 0 or c1 == 0:
        return 0.0
    return alpha * (4.0 + 1.0 / K_size) * K_size ** 2 * c1 ** 2 / 2.0


def node_constraints(elements, bound=1.0):
    """Одно ограничение на узел: сумма долей всех инцидентных элементов ≤ bound."""
    supports = {}
    for position, (i, j, _) in enumerate(elements):
        supports.setdefault(i, []).append(position)
        supports.setdefault(j, []).append(position)
    return {
        node: HalfspaceConstraint(support=tuple(support), bound=bound, node=node)
        for node, support in sorted(supports.items())
    }


@lru_cache(maxsize=32)
def _ascent_layout(elements):
    # Ограничения и пары (узел i, узел j) элементов не меняются между пересмотрами
    constraints = node_constraints(elements)
    pairs = []
    for i, j, _ in elements:
        a = constraints[i]
        b = constraints[j]
        shared = len(set(a.support) & set(b.support))
        pairs.append((a.support, b.support, a.bound, b.bound, shared))
    return constraints, tuple(pairs)


def _shift(s, support, amount):
    for k in support:
        s[k] -= amount


def _excess(s, support, bound):
    return sum([s[k] for k in support]) - bound


def _project_pair_in_place(s, a, b, beta_a, beta_b, shared, n_rep, tolerance):
    na = len(a)
    nb = len(b)
    ea = _excess(s, a, beta_a)
    eb = _excess(s, b, beta_b)
    if ea <= tolerance and eb <= tolerance:
        return
    if eb <= tolerance:
        _shift(s, a, ea / na)
        return
    if ea <= tolerance:
        _shift(s, b, eb / nb)
        return

    # Оба нарушены: если одной проекции достаточно, она и есть ответ
    if eb - shared * ea / na <= tolerance:
        _shift(s, a, ea / na)
        return
    if ea - shared * eb / nb <= tolerance:
        _shift(s, b, eb / nb)
        return

    # Оба ограничения активны: поочерёдно на гиперплоскости
    for _ in range(n_rep):
        _shift(s, a, _excess(s, a, beta_a) / na)
        _shift(s, b, _excess(s, b, beta_b) / nb)
        if abs(_excess(s, a, beta_a)) <= tolerance:
            return

    # Предел чередования на пересечении двух гиперплоскостей
    ra = _excess(s, a, beta_a)
    rb = _excess(s, b, beta_b)
    det = na * nb - shared * shared
    if det <= 0:
        return
    _shift(s, a, (nb * ra - shared * rb) / det)
    _shift(s, b, (na * rb - shared * ra) / det)


def project_onto_halfspace(s, constraint):
    s = list(s)
    excess = _excess(s, constraint.support, constraint.bound)
    if excess > 0:
        # β_ex = (β* − β)/(N + 1)
        _shift(s, constraint.support, excess / constraint.size)
    return s


def project_pair(s, constraint_a, constraint_b, n_rep=10, tolerance=1e-9):
    s = list(s)
    shared = len(set(constraint_a.support) & set(constraint_b.support))
    _project_pair_in_place(
        s, constraint_a.support, constraint_b.support,
        constraint_a.bound, constraint_b.bound, shared, n_rep, tolerance,
    )
    return s


class IncrementalGradientAscent:
    """
    Циклический инкрементный градиентный подъём для линейной цели Σ g_k s_k.

    После шага по элементу k точка проецируется на ограничения двух узлов,
    на которых лежит канал элемента. Координаты во время итераций могут
    становиться отрицательными; ``finalize`` возвращает допустимую точку.
    """

    def __init__(self, elements, gradients, config, constraints=None):
        self.elements = tuple(elements)
        self.gradients = [float(g) for g in gradients]
        self.config = config
        if constraints is None:
            self.constraints, self._pairs = _ascent_layout(self.elements)
        else:
            self.constraints = constraints
            self._pairs = tuple(
                (constraints[i].support, constraints[j].support,
                 constraints[i].bound, constraints[j].bound,
                 len(set(constraints[i].support) & set(constraints[j].support)))
                for i, j, _ in self.elements
            )
        self.s = [0.0] * len(self.elements)
        self.steps = 0
        # Шаг с нулевым градиентом точку не меняет
        self._active = tuple(k for k, g in enumerate(self.gradients) if g != 0.0)

    def step(self, k):
        g = self.gradients[k]
        self.steps += 1
        if g == 0.0:
            return
        self.s[k] += self.config.alpha * g
        a, b, beta_a, beta_b, shared = self._pairs[k]
        _project_pair_in_place(
            self.s, a, b, beta_a, beta_b, shared, self.config.n_rep, self.config.tolerance
        )

    def cycle(self, trace=None):
        if trace is not None:
            for k in range(len(self.elements)):
                self.step(k)
                trace.append((self.steps, self.objective()))
            return

        s = self.s
        alpha = self.config.alpha
        n_rep = self.config.n_rep
        tolerance = self.config.tolerance
        gradients = self.gradients
        pairs = self._pairs
        for k in self._active:
            s[k] += alpha * gradients[k]
            a, b, beta_a, beta_b, shared = pairs[k]
            _project_pair_in_place(s, a, b, beta_a, beta_b, shared, n_rep, tolerance)
        self.steps += len(self.elements)

    def _run_without_projection(self, cycles):
        """
        Те же шаги без проекций. Координаты только растут, поэтому если в
        конечной точке ни одно ограничение не нарушено, то не нарушалось и
        по дороге, и результат совпадает с обычным подъёмом.
        """
        alpha = self.config.alpha
        s = list(self.s)
        for k in self._active:
            increment = alpha * self.gradients[k]
            x = s[k]
            for _ in range(cycles):
                x += increment
            s[k] = x
        tolerance = self.config.tolerance
        for constraint in self.constraints.values():
            if _excess(s, constraint.support, constraint.bound) > tolerance:
                return False
        self.s = s
        self.steps += cycles * len(self.elements)
        return True

    def run(self, cycles=None, trace=None):
        cycles = cycles or self.config.cycles
        if trace is None and self._run_without_projection(cycles):
            return self.s
        for _ in range(cycles):
            self.cycle(trace)
        return self.s

    def objective(self, s=None):
        s = self.s if s is None else s
        return sum(g * x for g, x in zip(self.gradients, s))

    def finalize(self):
        s = [max(x, 0.0) for x in self.s]
        for constraint in self.constraints.values():
            load = constraint.value(s)
            if load > constraint.bound:
                scale = constraint.bound / load
                for k in constraint.support:
                    s[k] *= scale
        return s


def solve_allocation(queues_at_review, channel, model, solver_cfg, weight_cfg):
    """
    Решение задачи распределения для одного пересмотра.

    :param queues_at_review: снимок очередей (QueueSnapshot или QueueMatrix)
    :param channel: ChannelState текущего пересмотра
    :return: AllocationResult с допустимым вектором долей
    """
    gradients, backlogs = _review_gradients(queues_at_review, channel, model, weight_cfg)

    c1 = max(gradients, default=0.0)
    bound = lemma1_bound(solver_cfg.alpha, model.size, c1)
    if not any(backlogs):
        return AllocationResult(
            allocation=AllocationVector.zeros(model.elements),
            gradients=tuple(gradients),
            backlogs=tuple(backlogs),
            objective=0.0,
            c1=c1,
            bound=bound,
        )

    ascent = IncrementalGradientAscent(model.elements, gradients, solver_cfg)
    trace = [] if solver_cfg.trace else None
    ascent.run(trace=trace)
    s = ascent.finalize()

    # Элементы без дифференциального backlog не планируются
    s = [0.0 if backlog == 0 else x for x, backlog in zip(s, backlogs)]

    return AllocationResult(
        allocation=AllocationVector(values=tuple(s), elements=model.elements),
        gradients=tuple(gradients),
        backlogs=tuple(backlogs),
        objective=ascent.objective(s),
        c1=c1,
        bound=bound,
        trace=tuple(trace or ()),
    )
