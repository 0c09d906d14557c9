"""Waiting-time Monte Carlo for nested entanglement swapping.

Each elementary link is attempted in slots of ``L0 / (c N)``; the number
of slots until the first herald is geometric with parameter ``P0`` and is
drawn by inverse transform.  A level-``k`` link waits for both of its
level-``k-1`` halves (the maximum of their times), optionally pays the swap
duration and the ``2**(k-1) L0/c`` announcement delay, and then succeeds
with probability ``q``.  On failure both halves are rebuilt from scratch.

Trials are processed in fixed-size blocks.  Block ``b`` draws from a
Philox counter-based generator keyed by ``SeedSequence(seed,
spawn_key=(b,))``, so results are bit-identical whatever the number of
worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConsistencyError, InfeasibleLinkError, ParameterError
from .link import LinkParams, p0
from .repeater import RepeaterConfig, swap_overhead, t_total

BLOCK_SIZE = 8192
PERCENTILES = (5, 25, 50, 75, 95)


@dataclass(frozen=True)
class SimOptions:
    config: RepeaterConfig
    trials: int = 10_000
    seed: int = 0
    include_swap_overhead: bool = False
    include_higher_level_comms: bool = False
    workers: int = 1

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be an integer >= 1, got {self.trials!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass(frozen=True)
class WaitingTimeDistribution:
    samples: np.ndarray = field(repr=False)
    mean: float
    stderr: float
    percentiles: dict[int, float]

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> WaitingTimeDistribution:
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        stderr = float(samples.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
        pct = {q: float(v) for q, v in zip(PERCENTILES, np.percentile(samples, PERCENTILES))}
        return cls(samples, float(samples.mean()), stderr, pct)


@dataclass(frozen=True)
class LevelFactorReport:
    """Per level ``k >= 1``: mean of ``max(left, right)`` over mean sub-link time.

    Both means run over every swap attempt at that level, so each factor
    lies in ``[1, 2]`` by construction of the sample.
    """

    per_level_factor: list[float]


class SimulationResult(NamedTuple):
    distribution: WaitingTimeDistribution
    factors: LevelFactorReport


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def geometric_slots(prob: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Number of Bernoulli(prob) trials up to and including the first success."""
    if not 0.0 < prob <= 1.0:
        raise ParameterError(f"success probability must lie in (0, 1], got {prob!r}")
    if prob == 1.0:
        return np.ones(size)
    u = 1.0 - rng.random(size)  # (0, 1]
    k = np.ceil(np.log(u) / math.log1p(-prob))
    return np.maximum(k, 1.0)


def sample_link_times(link: LinkParams, size: int, rng: np.random.Generator, multiplex_factor: int = 1) -> np.ndarray:
    prob = p0(link)
    if prob <= 0.0:
        raise InfeasibleLinkError("heralding probability is zero")
    return geometric_slots(prob, size, rng) * (link.communication_time / multiplex_factor)


def simulate_link(link: LinkParams, rng: np.random.Generator, multiplex_factor: int = 1) -> float:
    return float(sample_link_times(link, 1, rng, multiplex_factor)[0])


class _Model(NamedTuple):
    link: LinkParams
    multiplex: int
    q: float
    overhead: float
    comm_unit: float


def _level_times(rng, size: int, level: int, model: _Model, stats: np.ndarray) -> np.ndarray:
    if level == 0:
        return sample_link_times(model.link, size, rng, model.multiplex)
    if model.q == 1.0:
        attempts = np.ones(size, dtype=np.int64)
    else:
        attempts = geometric_slots(model.q, size, rng).astype(np.int64)
    n_attempts = int(attempts.sum())
    left = _level_times(rng, n_attempts, level - 1, model, stats)
    right = _level_times(rng, n_attempts, level - 1, model, stats)
    joined = np.maximum(left, right)
    stats[level, 0] += joined.sum()
    stats[level, 1] += 0.5 * (left.sum() + right.sum())
    per_attempt = joined + (model.overhead + 2 ** (level - 1) * model.comm_unit)
    if model.q == 1.0:
        return per_attempt
    starts = np.concatenate(([0], np.cumsum(attempts)[:-1]))
    return np.add.reduceat(per_attempt, starts)


def _run_block(options: SimOptions, model: _Model, block: int):
    start = block * BLOCK_SIZE
    size = min(BLOCK_SIZE, options.trials - start)
    n = options.config.nesting_level
    stats = np.zeros((n + 1, 2))
    times = _level_times(block_rng(options.seed, block), size, n, model, stats)
    return times, stats


def simulate_nested(options: SimOptions) -> SimulationResult:
    config = options.config
    if p0(config.link) <= 0.0:
        raise InfeasibleLinkError("heralding probability is zero")
    model = _Model(
        link=config.link,
        multiplex=config.multiplex_factor,
        q=config.swap_success,
        overhead=swap_overhead(config.swap_budget) if options.include_swap_overhead else 0.0,
        comm_unit=config.link.communication_time if options.include_higher_level_comms else 0.0,
    )
    blocks = range(math.ceil(options.trials / BLOCK_SIZE))
    if options.workers > 1:
        with ThreadPoolExecutor(options.workers) as pool:
            parts = list(pool.map(lambda b: _run_block(options, model, b), blocks))
    else:
        parts = [_run_block(options, model, b) for b in blocks]

    samples = np.concatenate([t for t, _ in parts])
    stats = sum(s for _, s in parts)
    factors = [float(stats[k, 0] / stats[k, 1]) for k in range(1, config.nesting_level + 1)]
    return SimulationResult(WaitingTimeDistribution.from_samples(samples), LevelFactorReport(factors))


@dataclass(frozen=True)
class AnalyticComparison:
    simulated_mean: float
    stderr: float
    analytic: float
    relative_deviation: float
    level_factors: list[float]

    @property
    def z_score(self) -> float:
        return (self.simulated_mean - self.analytic) / self.stderr


def compare_to_analytic(options: SimOptions) -> AnalyticComparison:
    """Relative deviation of the simulated mean from the 3/2-per-level closed form."""
    dist, report = simulate_nested(options)
    analytic = t_total(
        options.config,
        include_swap_overhead=options.include_swap_overhead,
        include_higher_level_comms=options.include_higher_level_comms,
    )
    for k, f in enumerate(report.per_level_factor, start=1):
        if not 1.0 - 1e-12 <= f <= 2.0 + 1e-12:
            raise ConsistencyError(f"level {k} factor {f} outside [1, 2]")
    return AnalyticComparison(
        simulated_mean=dist.mean,
        stderr=dist.stderr,
        analytic=analytic,
        relative_deviation=(dist.mean - analytic) / analytic,
        level_factors=report.per_level_factor,
    )
