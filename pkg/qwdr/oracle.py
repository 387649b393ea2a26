"""
Точные эталоны малого размера: перебор базисных решений ЛП задачи
пересмотра, евклидова проекция перебором активных множеств и проверка
принадлежности интенсивностей области пропускной способности.
"""
import logging
from dataclasses import dataclass
from itertools import combinations, islice

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .solver import HalfspaceConstraint, node_constraints
from .stochastic import draw_channels, rate

logger = logging.getLogger(__name__)

LP_MAX_VARIABLES = 8
QP_MAX_VARIABLES = 6
MAX_ACTIVATION_SETS = 50000
MAX_LP_COLUMNS = 2_000_000
BATCH = 20000


class EnumerationTooLarge(ValueError):
    """Перебор превышает допустимый размер."""


def _as_constraint(constraint):
    if isinstance(constraint, HalfspaceConstraint):
        return constraint
    support, bound = constraint
    return HalfspaceConstraint(support=tuple(support), bound=float(bound))


@dataclass(frozen=True)
class LinearProgramInstance:
    c: tuple
    constraints: tuple

    @classmethod
    def from_elements(cls, elements, gradients):
        """ЛП пересмотра: max Σ g_k s_k при узловых ограничениях и s ∈ [0, 1]."""
        return cls(c=tuple(gradients), constraints=tuple(node_constraints(elements).values()))

    @property
    def size(self):
        return len(self.c)

    def objective(self, x):
        return float(np.dot(self.c, x))

    def is_feasible(self, x, tolerance=1e-9):
        x = np.asarray(x, dtype=float)
        if np.any(x < -tolerance) or np.any(x > 1 + tolerance):
            return False
        return all(x[list(h.support)].sum() <= h.bound + tolerance for h in self.constraints)

    def rows(self):
        """Все неравенства вида a·x ≤ b, включая ограничения ящика."""
        n = self.size
        a_rows = []
        b = []
        for h in map(_as_constraint, self.constraints):
            row = np.zeros(n)
            row[list(h.support)] = 1.0
            a_rows.append(row)
            b.append(h.bound)
        eye = np.eye(n)
        a_rows.extend(-eye)
        b.extend([0.0] * n)
        a_rows.extend(eye)
        b.extend([1.0] * n)
        return np.array(a_rows), np.array(b)


def lp_solve_exact(instance, tolerance=1e-9):
    """
    Максимум линейной цели перебором базисных решений.

    :return: (G*, оптимальная точка)
    """
    n = instance.size
    if n > LP_MAX_VARIABLES:
        raise EnumerationTooLarge(f'{n} variables exceed the exact LP limit of {LP_MAX_VARIABLES}')
    if n == 0:
        return 0.0, np.zeros(0)

    a, b = instance.rows()
    c = np.asarray(instance.c, dtype=float)
    best_value = -np.inf
    best_point = None
    subsets = combinations(range(len(b)), n)
    while True:
        chunk = np.array(list(islice(subsets, BATCH)), dtype=int)
        if chunk.size == 0:
            break
        systems = a[chunk]
        regular = np.abs(np.linalg.det(systems)) > 1e-12
        if not regular.any():
            continue
        points = np.linalg.solve(systems[regular], b[chunk[regular]][..., None])[..., 0]
        feasible = np.all(points @ a.T <= b + tolerance, axis=1)
        if not feasible.any():
            continue
        points = points[feasible]
        values = points @ c
        top = int(np.argmax(values))
        if values[top] > best_value + tolerance:
            best_value = float(values[top])
            best_point = points[top]
    return best_value, best_point


def qp_project_exact(point, constraints, tolerance=1e-9):
    """
    Евклидова проекция точки на пересечение полупространств перебором
    активных множеств (условия ККТ).
    """
    p = np.asarray(point, dtype=float)
    n = p.size
    if n > QP_MAX_VARIABLES:
        raise EnumerationTooLarge(f'{n} variables exceed the exact projection limit of {QP_MAX_VARIABLES}')
    halfspaces = [_as_constraint(h) for h in constraints]
    a = np.zeros((len(halfspaces), n))
    for r, h in enumerate(halfspaces):
        a[r, list(h.support)] = 1.0
    b = np.array([h.bound for h in halfspaces])

    if np.all(a @ p <= b + tolerance):
        return p.copy()

    best = None
    best_distance = np.inf
    for size in range(1, len(halfspaces) + 1):
        for active in combinations(range(len(halfspaces)), size):
            rows = a[list(active)]
            gram = rows @ rows.T
            if abs(np.linalg.det(gram)) < 1e-12:
                continue
            multipliers = np.linalg.solve(gram, rows @ p - b[list(active)])
            if np.any(multipliers < -tolerance):
                continue
            x = p - rows.T @ multipliers
            if np.any(a @ x > b + 1e-7):
                continue
            distance = float(np.linalg.norm(x - p))
            if distance < best_distance:
                best = x
                best_distance = distance
    return best


def enumerate_activation_sets(model, limit=MAX_ACTIVATION_SETS):
    """
    Все множества элементов канал-поток без конфликтов по узлам, включая
    пустое. На канале активен не более чем один поток.
    """
    elements = model.elements
    sets = []

    def extend(start, chosen, busy):
        sets.append(tuple(chosen))
        if len(sets) > limit:
            raise EnumerationTooLarge(f'more than {limit} activation sets')
        for pos in range(start, len(elements)):
            i, j, _ = elements[pos]
            if i in busy or j in busy:
                continue
            chosen.append(pos)
            extend(pos + 1, chosen, busy | {i, j})
            chosen.pop()

    extend(0, [], frozenset())
    return sets


@dataclass(frozen=True)
class CapacityQuery:
    model: object
    arrival_rates: dict  # (узел, поток) -> λ
    service_states: np.ndarray  # уникальные floor(μ) по каналам
    weights: np.ndarray
    activation_sets: tuple

    def __post_init__(self):
        if len(self.service_states) != len(self.weights):
            raise ValueError('one weight per channel state is required')
        if len(self.weights) and not np.isclose(np.sum(self.weights), 1.0):
            raise ValueError('channel state weights must sum to 1')

    def scaled(self, factor):
        return CapacityQuery(
            model=self.model,
            arrival_rates={key: value * factor for key, value in self.arrival_rates.items()},
            service_states=self.service_states,
            weights=self.weights,
            activation_sets=self.activation_sets,
        )


@dataclass(frozen=True)
class CapacityResult:
    status: str  # inside | outside | boundary
    slack: float
    key_slack: dict
    states: int
    activation_sets: int

    @property
    def inside(self):
        return self.status == 'inside'


def build_capacity_query(model, channel_model, samples=200, arrival_rates=None, limit=MAX_ACTIVATION_SETS):
    """
    Эмпирическое распределение состояний канала: samples выборок, одинаковые
    векторы целых скоростей объединяются с суммарным весом.
    """
    if samples < 1:
        raise ValueError('at least one channel sample is required')
    gains = draw_channels(channel_model, 0, samples)
    service = np.floor(rate(gains, channel_model.sigma2)).astype(int)
    states, counts = np.unique(service, axis=0, return_counts=True)
    if arrival_rates is None:
        arrival_rates = {(flow.source, flow.flow_id): flow.arrival_rate for flow in model.flows}
    activation_sets = enumerate_activation_sets(model, limit=limit)
    logger.info(
        f"Capacity query: {len(states)} distinct channel states from {samples} samples, "
        f"{len(activation_sets)} activation sets"
    )
    return CapacityQuery(
        model=model,
        arrival_rates=dict(arrival_rates),
        service_states=states,
        weights=counts / samples,
        activation_sets=tuple(activation_sets),
    )


def capacity_membership(query, tolerance=1e-6):
    """
    Наибольший запас ε: существует ли выпуклая комбинация допустимых
    множеств активации в каждом состоянии канала, при которой для каждой
    очереди (i, f) λ_i^f + ε ≤ исходящая − входящая скорость обслуживания.
    """
    model = query.model
    n_states = len(query.service_states)
    n_sets = len(query.activation_sets)
    columns = n_states * n_sets
    if columns > MAX_LP_COLUMNS:
        raise EnumerationTooLarge(f'capacity LP would need {columns} columns')

    keys = model.queue_keys
    row_of = {key: r for r, key in enumerate(keys)}
    eps = columns

    rows, cols, data = [], [], []
    for m, service in enumerate(query.service_states):
        for a, active in enumerate(query.activation_sets):
            col = m * n_sets + a
            for pos in active:
                i, j, f = model.elements[pos]
                mu = float(service[model.element_link(pos)])
                if mu == 0:
                    continue
                rows.append(row_of[(i, f)])
                cols.append(col)
                data.append(-mu)
                if j != f:
                    rows.append(row_of[(j, f)])
                    cols.append(col)
                    data.append(mu)
    for r in range(len(keys)):
        rows.append(r)
        cols.append(eps)
        data.append(1.0)
    a_ub = sparse.coo_matrix((data, (rows, cols)), shape=(len(keys), columns + 1)).tocsr()
    lam = np.array([query.arrival_rates.get(key, 0.0) for key in keys])
    b_ub = -lam

    eq_rows = np.repeat(np.arange(n_states), n_sets)
    a_eq = sparse.coo_matrix(
        (np.ones(columns), (eq_rows, np.arange(columns))), shape=(n_states, columns + 1)
    ).tocsr()

    objective = np.zeros(columns + 1)
    objective[eps] = -1.0
    bounds = [(0, None)] * columns + [(None, None)]
    result = linprog(
        objective, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=query.weights,
        bounds=bounds, method='highs',
    )
    if result.status != 0:
        raise RuntimeError(f'capacity LP failed: {result.message}')

    slack = float(result.x[eps])
    key_slack = {key: float(s) + slack for key, s in zip(keys, result.slack)}
    if slack > tolerance:
        status = 'inside'
    elif slack < -tolerance:
        status = 'outside'
    else:
        status = 'boundary'
    logger.debug(f"Capacity LP slack {slack:.6g}: {status}")
    return CapacityResult(
        status=status,
        slack=slack,
        key_slack=key_slack,
        states=n_states,
        activation_sets=n_sets,
    )
