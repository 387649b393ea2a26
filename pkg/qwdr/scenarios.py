"""
Загрузка и проверка сценариев (JSON), сборка модели сети и конфигурации
прогона, встроенный сценарий на 15 узлов.

Схема документа сценария::

    {
      "name": "tandem",
      "nodes": [1, 2, 3],                      # необязательно
      "coordinates": {"1": [0.1, 0.5], ...},   # единичный квадрат
      "links": [[1, 2], [2, 3]],
      "bidirectional": false,
      "link_gains": [[1, 2, 89.0]],            # явный средний коэффициент
      "flows": [{"name": "F3", "route": [1, 2, 3], "arrival_rate": 1.5,
                 "delay_target": 40, "weight_enabled": true}],
      "parameters": {"k0": 0.01, ...},         # переопределяют QWDR_DEFAULTS
      "metadata": {...}
    }
"""
import copy
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings
from django.core.exceptions import ValidationError

from .forms import clean_parameters
from .network import FlowSpec, build_network
from .scheduler import RunConfig
from .stochastic import ArrivalProcess, ChannelModel

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / 'data'
PAPER15_PATH = DATA_DIR / 'paper15.json'

DOCUMENT_KEYS = {
    'name', 'description', 'nodes', 'coordinates', 'links', 'bidirectional',
    'link_gains', 'flows', 'parameters', 'metadata', 'presets', 'reference_delays',
}
FLOW_KEYS = {'name', 'flow_id', 'route', 'arrival_rate', 'delay_target', 'weight_enabled'}

# Параметры, не влияющие на сам сценарий (сравнение прогонов)
WEIGHT_PARAMETERS = ('a1', 'a2', 'weight_argument', 'mode')
RUN_PARAMETERS = ('check_invariants', 'schedule_trace', 'solver_trace', 'replications')


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: object
    parameters: dict
    link_gains: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    document: dict = field(default_factory=dict)

    @property
    def mode(self):
        return self.parameters['mode']

    @property
    def horizon(self):
        return self.parameters['horizon_slots']

    def channel_model(self):
        p = self.parameters
        return ChannelModel.from_coordinates(
            self.model.links,
            self.model.coordinates,
            p['gain_scale'],
            overrides=self.link_gains,
            sigma2=p['sigma2'],
            truncation_factor=p['gamma_truncation_factor'],
            gain_model=p['gain_model'],
            seed=p['channel_seed'],
        )

    def arrival_process(self):
        return ArrivalProcess.for_flows(self.model.flows, seed=self.parameters['arrival_seed'])

    def run_config(self):
        return RunConfig.from_parameters(self.model, self.parameters)

    def with_parameters(self, **overrides):
        """Тот же сценарий с переопределёнными параметрами (проверяются заново)."""
        document = copy.deepcopy(self.document)
        document.setdefault('parameters', {}).update(overrides)
        return scenario_from_document(document)

    def with_seed(self, seed):
        return self.with_parameters(channel_seed=seed, arrival_seed=seed)

    def signature(self):
        """Описание сценария без весов, целей и режима: для сравнения прогонов."""
        parameters = {
            key: value for key, value in self.parameters.items()
            if key not in WEIGHT_PARAMETERS and key not in RUN_PARAMETERS
        }
        return {
            'nodes': list(self.model.nodes),
            'links': [list(link) for link in self.model.links],
            'flows': [
                {'flow_id': flow.flow_id, 'route': list(flow.route), 'arrival_rate': flow.arrival_rate}
                for flow in self.model.flows
            ],
            'parameters': parameters,
        }

    def echo(self):
        """Разрешённые параметры и происхождение сценария для метаданных вывода."""
        return {
            'scenario': self.name,
            'config': dict(sorted(self.parameters.items())),
            'flows': [
                {
                    'flow_id': flow.flow_id,
                    'name': flow.label,
                    'route': list(flow.route),
                    'arrival_rate': flow.arrival_rate,
                    'delay_target': flow.delay_target,
                    'threshold': flow.threshold,
                }
                for flow in self.model.flows
            ],
            'metadata': self.metadata,
        }


def _node_id(value, key, errors):
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, str) and value.strip().isdigit():
        return int(value)
    errors[key] = f'{value!r} is not a node id'
    return None


def _parse_links(document, errors):
    links = []
    for n, link in enumerate(document.get('links', [])):
        if not isinstance(link, (list, tuple)) or len(link) != 2:
            errors[f'links[{n}]'] = 'a link is a pair [i, j]'
            continue
        i = _node_id(link[0], f'links[{n}]', errors)
        j = _node_id(link[1], f'links[{n}]', errors)
        if i is None or j is None:
            continue
        links.append((i, j))
        if document.get('bidirectional', False):
            links.append((j, i))
    return list(dict.fromkeys(links))


def _parse_flows(document, errors):
    flows = []
    raw_flows = document.get('flows', [])
    if not isinstance(raw_flows, list):
        errors['flows'] = 'flows must be a list'
        return flows
    for n, raw in enumerate(raw_flows):
        key = f'flows[{n}]'
        if not isinstance(raw, dict):
            errors[key] = 'a flow is an object'
            continue
        unknown = sorted(set(raw) - FLOW_KEYS)
        if unknown:
            errors[key] = f'unknown fields {unknown}'
            continue
        route = raw.get('route')
        if not isinstance(route, list) or not route:
            errors[f'{key}.route'] = 'route must be a non-empty list of nodes'
            continue
        route = [_node_id(node, f'{key}.route', errors) for node in route]
        if None in route:
            continue
        try:
            arrival_rate = float(raw.get('arrival_rate', 0.0))
        except (TypeError, ValueError):
            errors[f'{key}.arrival_rate'] = 'arrival rate must be a number'
            continue
        target = raw.get('delay_target')
        try:
            target = None if target is None else float(target)
        except (TypeError, ValueError):
            errors[f'{key}.delay_target'] = 'delay target must be a number'
            continue
        flows.append(FlowSpec(
            flow_id=int(raw.get('flow_id', route[-1])),
            route=tuple(route),
            arrival_rate=arrival_rate,
            delay_target=target,
            weight_enabled=bool(raw.get('weight_enabled', True)),
            name=str(raw.get('name', '')),
        ))
    return flows


def scenario_from_document(document, overrides=None):
    """
    Проверенная конфигурация сценария из словаря документа.

    :param overrides: параметры, заменяющие значения документа (например, из CLI)
    :raises ValidationError: сообщения по полям (``flows[2].route``, ``k0``, ...)
    """
    if not isinstance(document, dict):
        raise ValidationError({'document': 'scenario document must be a JSON object'})
    errors = {}
    unknown = sorted(set(document) - DOCUMENT_KEYS)
    if unknown:
        errors['document'] = f'unknown fields {unknown}'

    links = _parse_links(document, errors)
    flows = _parse_flows(document, errors)

    coordinates = {}
    for key, point in (document.get('coordinates') or {}).items():
        node = _node_id(key, f'coordinates.{key}', errors)
        if node is None:
            continue
        if not isinstance(point, (list, tuple)) or len(point) != 2:
            errors[f'coordinates.{key}'] = 'coordinates are a pair [x, y]'
            continue
        coordinates[node] = (float(point[0]), float(point[1]))

    link_gains = {}
    for n, entry in enumerate(document.get('link_gains') or []):
        try:
            i, j, gain = entry
            gain = float(gain)
            if gain < 0:
                raise ValueError
        except (TypeError, ValueError):
            errors[f'link_gains[{n}]'] = 'a link gain is [i, j, gain >= 0]'
            continue
        link_gains[(int(i), int(j))] = gain

    if 'nodes' in document:
        nodes = [_node_id(node, 'nodes', errors) for node in document['nodes']]
    else:
        nodes = sorted({node for link in links for node in link} | set(coordinates))

    parameters = dict(settings.QWDR_DEFAULTS)
    raw_parameters = document.get('parameters') or {}
    if not isinstance(raw_parameters, dict):
        errors['parameters'] = 'parameters must be an object'
        raw_parameters = {}
    parameters.update(raw_parameters)
    parameters.update(overrides or {})
    try:
        parameters = clean_parameters(parameters)
    except ValidationError as exc:
        errors.update(exc.message_dict)

    if errors:
        logger.warning(f"Scenario {document.get('name', '?')} is invalid: {errors}")
        raise ValidationError(errors)

    model = build_network([n for n in nodes if n is not None], links, flows, coordinates)

    for link in model.links:
        if link in link_gains:
            continue
        if link[0] not in coordinates or link[1] not in coordinates:
            logger.warning(
                f"Link {link[0]}->{link[1]} has neither coordinates nor an explicit gain; "
                f"using gain_scale {parameters['gain_scale']}"
            )

    metadata = dict(document.get('metadata') or {})
    stored = copy.deepcopy(document)
    stored['parameters'] = {**raw_parameters, **(overrides or {})}
    return ScenarioConfig(
        name=str(document.get('name', 'scenario')),
        model=model,
        parameters=parameters,
        link_gains=link_gains,
        metadata=metadata,
        document=stored,
    )


def load_scenario(path, overrides=None):
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ValidationError({'path': f'scenario file {path} does not exist'})
    except json.JSONDecodeError as exc:
        raise ValidationError({'path': f'{path} is not valid JSON: {exc}'})
    config = scenario_from_document(document, overrides)
    logger.info(
        f"Loaded scenario {config.name}: {len(config.model.nodes)} nodes, "
        f"{len(config.model.flows)} flows, |K|={config.model.size}"
    )
    return config


def paper15_document():
    return json.loads(PAPER15_PATH.read_text(encoding='utf-8'))


def paper15_rows():
    return sorted(int(row) for row in paper15_document()['presets'])


def make_paper15_scenario(seed=None, row=2):
    """
    Сценарий на 15 узлов и 7 потоков с набором целевых задержек строки row.

    Строка 1: невзвешенный режим (w ≡ 1). Строки 2..5: цели для F10, F11, F6.
    """
    document = paper15_document()
    presets = document['presets']
    if str(row) not in presets:
        raise ValidationError({'row': f'row must be one of {sorted(presets)}'})
    preset = presets[str(row)]
    for flow in document['flows']:
        target = preset['targets'].get(flow['name'])
        if target is not None:
            flow['delay_target'] = target
    document['parameters']['mode'] = preset['mode']
    if seed is not None:
        document['parameters']['channel_seed'] = seed
        document['parameters']['arrival_seed'] = seed
    document['metadata'] = {
        **document['metadata'],
        'row': row,
        'reference_delays': document['reference_delays'][str(row)],
    }
    return scenario_from_document(document)


def to_document(config):
    """JSON-документ сценария с разрешёнными параметрами."""
    document = copy.deepcopy(config.document)
    document['parameters'] = dict(sorted(config.parameters.items()))
    document['metadata'] = config.metadata
    return document
