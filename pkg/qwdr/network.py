import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import networkx as nx
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


class UnknownLinkFlow(KeyError):
    """Тройка (i, j, f) не является элементом канал-поток сети."""


class InvariantViolation(AssertionError):
    """Нарушен инвариант симуляции (интерференция, баланс очередей, простой)."""


@dataclass(frozen=True)
class FlowSpec:
    flow_id: int
    route: tuple
    arrival_rate: float
    delay_target: Optional[float] = None
    weight_enabled: bool = True
    name: str = ''

    @property
    def source(self):
        return self.route[0]

    @property
    def destination(self):
        return self.route[-1]

    @property
    def hops(self):
        return tuple(zip(self.route[:-1], self.route[1:]))

    @property
    def threshold(self):
        # Закон Литтла: Q̄ = λ·D̄
        if self.delay_target is None or not self.weight_enabled:
            return None
        return self.arrival_rate * self.delay_target

    @property
    def label(self):
        return self.name or f'F{self.flow_id}'


class LinkFlowIndex:
    """
    Биекция φ между элементами канал-поток (i, j, f) и номерами 1..|K|.

    Внутри симулятора используются позиции 0..|K|-1 (``position``),
    наружу отдаются номера с единицы (``phi``).
    """

    def __init__(self, elements):
        self.elements = tuple(elements)
        self._positions = {element: k for k, element in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, element):
        return element in self._positions

    def position(self, i, j, f):
        try:
            return self._positions[(i, j, f)]
        except KeyError:
            raise UnknownLinkFlow((i, j, f)) from None

    def phi(self, i, j, f):
        return self.position(i, j, f) + 1

    def element(self, k):
        if not 1 <= k <= len(self.elements):
            raise UnknownLinkFlow(k)
        return self.elements[k - 1]


def _as_digraph(graph):
    if isinstance(graph, nx.DiGraph):
        return graph
    digraph = nx.DiGraph()
    digraph.add_edges_from(graph)
    return digraph


def build_interference_sets(graph):
    """
    Множества интерференции узловой модели: для каждого узла n все каналы,
    входящие в n или выходящие из него. Пустые множества не возвращаются.

    :param graph: nx.DiGraph или итерируемое множество каналов (i, j)
    :return: словарь {узел: frozenset каналов}, упорядоченный по узлам
    """
    digraph = _as_digraph(graph)
    sets = {}
    for node in sorted(digraph.nodes):
        incident = set(digraph.in_edges(node)) | set(digraph.out_edges(node))
        if incident:
            sets[node] = frozenset(incident)
    return sets


def build_link_flow_index(flows):
    triples = []
    for flow in flows:
        for i, j in flow.hops:
            triples.append((i, j, flow.flow_id))
    seen = set()
    for triple in triples:
        if triple in seen:
            raise ValidationError({'flows': f'duplicate link-flow element {triple}'})
        seen.add(triple)
    return LinkFlowIndex(sorted(triples))


@dataclass
class NetworkModel:
    graph: nx.DiGraph
    flows: tuple
    interference_sets: dict
    link_flow_index: LinkFlowIndex
    coordinates: Mapping = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = tuple(sorted(self.graph.nodes))
        self.links = tuple(sorted(self.graph.edges))
        self.flow_by_id = {flow.flow_id: flow for flow in self.flows}
        self.elements = self.link_flow_index.elements
        self.link_position = {link: pos for pos, link in enumerate(self.links)}
        self.element_links = tuple(self.link_position[(i, j)] for i, j, _ in self.elements)

        # Элементы, инцидентные узлу, и исходящие из узла (в порядке φ)
        incident = {node: [] for node in self.nodes}
        outgoing = {node: [] for node in self.nodes}
        for pos, (i, j, _) in enumerate(self.elements):
            incident[i].append(pos)
            incident[j].append(pos)
            outgoing[i].append(pos)
        self.node_elements = {node: tuple(v) for node, v in incident.items() if v}
        self.outgoing_elements = {node: tuple(v) for node, v in outgoing.items() if v}

        # Очереди существуют только на маршруте до получателя
        self.queue_keys = tuple(sorted(
            (node, flow.flow_id) for flow in self.flows for node in flow.route[:-1]
        ))

    @property
    def size(self):
        return len(self.elements)

    def incident_elements(self, node):
        return self.node_elements.get(node, ())

    def element_link(self, position):
        return self.element_links[position]

    def check_activation(self, active_positions):
        """Не более одной активной пары канал-поток на узел в слоте."""
        busy = set()
        for pos in active_positions:
            i, j, _ = self.elements[pos]
            if i in busy or j in busy:
                raise InvariantViolation(
                    f'interference: element {self.elements[pos]} collides at node '
                    f'{i if i in busy else j}'
                )
            busy.add(i)
            busy.add(j)


def build_network(nodes, links, flows, coordinates=None):
    """
    Собирает и проверяет модель сети.

    :param nodes: идентификаторы узлов
    :param links: направленные каналы (i, j)
    :param flows: список FlowSpec
    :param coordinates: координаты узлов в единичном квадрате (необязательно)
    """
    errors = {}
    nodes = set(nodes)
    if not nodes:
        errors['nodes'] = 'at least one node is required'

    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    for n, (i, j) in enumerate(links):
        if i == j:
            errors[f'links[{n}]'] = f'self-loop {i}->{j}'
        elif i not in nodes or j not in nodes:
            errors[f'links[{n}]'] = f'link {i}->{j} references an unknown node'
        else:
            graph.add_edge(i, j)
    if graph.number_of_edges() == 0 and 'nodes' not in errors:
        errors['links'] = 'at least one link is required'

    seen_ids = set()
    for n, flow in enumerate(flows):
        key = f'flows[{n}]'
        route = flow.route
        if flow.flow_id in seen_ids:
            errors[f'{key}.flow_id'] = f'duplicate flow {flow.flow_id}'
        seen_ids.add(flow.flow_id)
        if len(route) < 2:
            errors[f'{key}.route'] = 'route needs at least one hop'
            continue
        if len(set(route)) != len(route):
            errors[f'{key}.route'] = f'route {list(route)} is not a simple path'
            continue
        if route[-1] != flow.flow_id:
            errors[f'{key}.route'] = f'route must end at the flow destination {flow.flow_id}'
            continue
        missing = [f'{i}->{j}' for i, j in flow.hops if not graph.has_edge(i, j)]
        if missing:
            errors[f'{key}.route'] = f'hop {missing[0]} is not a link'
        if flow.arrival_rate < 0:
            errors[f'{key}.arrival_rate'] = 'arrival rate must be non-negative'
        if flow.delay_target is not None and flow.delay_target <= 0:
            errors[f'{key}.delay_target'] = 'delay target must be positive'

    if errors:
        logger.warning(f"Network validation failed: {errors}")
        raise ValidationError(errors)

    flows = tuple(flows)
    return NetworkModel(
        graph=graph,
        flows=flows,
        interference_sets=build_interference_sets(graph),
        link_flow_index=build_link_flow_index(flows),
        coordinates=dict(coordinates or {}),
    )


class _BacklogView:
    model: NetworkModel

    def length(self, node, flow_id):
        raise NotImplementedError

    def flow_backlog(self, flow_id):
        flow = self.model.flow_by_id[flow_id]
        return sum(self.length(node, flow_id) for node in flow.route[:-1])

    def total(self):
        return sum(self.length(node, f) for node, f in self.model.queue_keys)


@dataclass(frozen=True)
class QueueSnapshot(_BacklogView):
    """Длины очередей в момент пересмотра."""
    model: NetworkModel
    lengths: Mapping
    slot: int = 0

    def length(self, node, flow_id):
        return self.lengths.get((node, flow_id), 0)


class QueueMatrix(_BacklogView):
    """FIFO-очереди пакетов по (узел, поток); пакет хранит слот поступления в сеть."""

    def __init__(self, model):
        self.model = model
        self.slot = 0
        self._queues = {key: deque() for key in model.queue_keys}

    def length(self, node, flow_id):
        queue = self._queues.get((node, flow_id))
        return len(queue) if queue is not None else 0

    def enqueue(self, node, flow_id, stamps):
        if node == flow_id:
            raise InvariantViolation(f'packet enqueued at its destination {node}')
        self._queues[(node, flow_id)].extend(stamps)

    def dequeue(self, node, flow_id, count):
        queue = self._queues[(node, flow_id)]
        return [queue.popleft() for _ in range(min(count, len(queue)))]

    def head(self, node, flow_id):
        queue = self._queues[(node, flow_id)]
        return queue[0] if queue else None

    def snapshot(self):
        return QueueSnapshot(
            model=self.model,
            lengths={key: len(queue) for key, queue in self._queues.items()},
            slot=self.slot,
        )


def differential_backlog(queues, i, j, f):
    # Очередь получателя всегда пуста
    queues.model.link_flow_index.position(i, j, f)
    upstream = queues.length(i, f)
    downstream = 0 if j == f else queues.length(j, f)
    return max(upstream - downstream, 0)
