import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

logger = logging.getLogger(__name__)

# Выборки генерируются блоками, ключ блока (seed, stream, номер блока)
BLOCK_SIZE = 1024

CHANNEL_STREAM = 0
ARRIVAL_STREAM = 1

GAIN_MODELS = ('power', 'amplitude', 'fixed')


def rate(gamma, sigma2=1.0):
    """Достижимая скорость μ = ln(1 + γ/σ²)."""
    return np.log1p(np.asarray(gamma, dtype=float) / sigma2)


def _generator(seed, stream, block):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, block])))


@lru_cache(maxsize=16)
def _uniform_block(seed, stream, block, width):
    block_values = _generator(seed, stream, block).random((BLOCK_SIZE, width))
    block_values.setflags(write=False)
    return block_values


@lru_cache(maxsize=16)
def _poisson_block(seed, stream, block, rates):
    counts = _generator(seed, stream, block).poisson(rates, size=(BLOCK_SIZE, len(rates)))
    counts.setflags(write=False)
    return counts


def _uniform_rows(seed, stream, start, count, width):
    rows = []
    index = start
    end = start + count
    while index < end:
        block, offset = divmod(index, BLOCK_SIZE)
        take = min(BLOCK_SIZE - offset, end - index)
        rows.append(_uniform_block(seed, stream, block, width)[offset:offset + take])
        index += take
    if not rows:
        return np.empty((0, width))
    return np.vstack(rows)


@dataclass(frozen=True)
class ChannelModel:
    links: tuple
    mean_gain: tuple
    sigma2: float = 1.0
    truncation_factor: float = 10.0
    gain_model: str = 'power'
    seed: int = 1
    stream: int = CHANNEL_STREAM

    def __post_init__(self):
        if self.gain_model not in GAIN_MODELS:
            raise ValueError(f"gain_model must be one of {GAIN_MODELS}, got {self.gain_model!r}")
        if self.sigma2 <= 0:
            raise ValueError('sigma2 must be positive')
        if self.truncation_factor <= 0:
            raise ValueError('gamma truncation factor must be positive')
        if len(self.links) != len(self.mean_gain):
            raise ValueError('one mean gain per link is required')

    @classmethod
    def from_coordinates(cls, links, coordinates, gain_scale, overrides=None, **kwargs):
        """
        Средний коэффициент передачи обратно пропорционален квадрату расстояния.

        :param overrides: явные средние коэффициенты {(i, j): γ̄}
        """
        overrides = overrides or {}
        means = []
        for i, j in links:
            if (i, j) in overrides:
                means.append(float(overrides[(i, j)]))
            elif i in coordinates and j in coordinates:
                d2 = float(np.sum((np.asarray(coordinates[i]) - np.asarray(coordinates[j])) ** 2))
                means.append(gain_scale / max(d2, 1e-12))
            else:
                means.append(float(gain_scale))
        return cls(links=tuple(links), mean_gain=tuple(means), **kwargs)

    @property
    def gamma_max(self):
        return np.asarray(self.mean_gain) * self.truncation_factor

    @property
    def mu_max(self):
        return float(np.max(rate(self.gamma_max, self.sigma2), initial=0.0))

    def gains(self, uniforms):
        """Обратное преобразование усечённого распределения на [0, γ_max]."""
        mean = np.asarray(self.mean_gain)
        if self.gain_model == 'fixed':
            return np.broadcast_to(mean, uniforms.shape).copy()
        if self.gain_model == 'power':
            # экспоненциальная мощность (квадрат релеевской амплитуды)
            cap = 1.0 - np.exp(-self.truncation_factor)
            return -mean * np.log1p(-uniforms * cap)
        # релеевская амплитуда с тем же средним
        scale = mean / np.sqrt(np.pi / 2.0)
        r_max = self.truncation_factor * mean
        with np.errstate(divide='ignore', invalid='ignore'):
            cap = 1.0 - np.exp(-np.where(scale > 0, r_max ** 2 / (2.0 * scale ** 2), 0.0))
        return scale * np.sqrt(-2.0 * np.log1p(-uniforms * cap))


@dataclass(frozen=True)
class ChannelState:
    links: tuple
    gamma: np.ndarray
    mu: np.ndarray
    service: np.ndarray
    review_index: int = 0

    def rate(self, i, j):
        return float(self.mu[self.links.index((i, j))])


def _state(model, gamma, review_index):
    mu = rate(gamma, model.sigma2)
    return ChannelState(
        links=model.links,
        gamma=gamma,
        mu=mu,
        service=np.floor(mu).astype(int),
        review_index=review_index,
    )


def draw_channels(model, start, count):
    """Матрица коэффициентов передачи (count × каналы) для пересмотров start.."""
    uniforms = _uniform_rows(model.seed, model.stream, start, count, len(model.links))
    return model.gains(uniforms)


def draw_channel(model, review_index):
    if review_index < 0:
        raise ValueError('review_index must be non-negative')
    block, offset = divmod(review_index, BLOCK_SIZE)
    uniforms = _uniform_block(model.seed, model.stream, block, len(model.links))[offset]
    return _state(model, model.gains(uniforms), review_index)


def fixed_channel(model, gamma):
    return _state(model, np.asarray(gamma, dtype=float), 0)


@dataclass(frozen=True)
class ArrivalProcess:
    sources: tuple  # ((узел-источник, поток), ...)
    rates: tuple
    seed: int = 1
    stream: int = ARRIVAL_STREAM

    def __post_init__(self):
        if any(r < 0 for r in self.rates):
            raise ValueError('arrival rates must be non-negative')

    @classmethod
    def for_flows(cls, flows, **kwargs):
        return cls(
            sources=tuple((flow.source, flow.flow_id) for flow in flows),
            rates=tuple(float(flow.arrival_rate) for flow in flows),
            **kwargs,
        )


def draw_arrivals(process, slot):
    if slot < 0:
        raise ValueError('slot must be non-negative')
    if not process.sources:
        return np.zeros(0, dtype=int)
    block, offset = divmod(slot, BLOCK_SIZE)
    return _poisson_block(process.seed, process.stream, block, process.rates)[offset]
