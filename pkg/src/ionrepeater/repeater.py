"""Closed-form times for nested repeaters and the direct-transmission baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ParameterError
from .link import C_FIBER, L_ATT_KM, LinkParams, t_link

LEVEL_FACTOR = 1.5
MAX_NESTING = 4


@dataclass(frozen=True)
class SwapBudget:
    """Durations of the three phases of one ion-based swap, in seconds."""

    coherent_transfer: float = 10e-6
    bichromatic_gate: float = 50e-6
    ion_detection: float = 145e-6

    def __post_init__(self):
        for name in ("coherent_transfer", "bichromatic_gate", "ion_detection"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be non-negative")


@dataclass(frozen=True)
class DirectBaseline:
    source_rate: float = 1e10
    loss_db_per_km: float = 0.2

    def __post_init__(self):
        if self.source_rate <= 0 or self.loss_db_per_km <= 0:
            raise ParameterError("source_rate and loss_db_per_km must be positive")


@dataclass(frozen=True)
class RepeaterConfig:
    """A chain of ``2**nesting_level`` elementary links spanning ``total_distance_km``.

    ``swap_success`` is the per-swap success probability applied at every
    level; a failed swap discards both sub-links, which are rebuilt.
    """

    total_distance_km: float
    nesting_level: int
    p: float = 0.9
    eta_d: float = 0.9
    L_att_km: float = L_ATT_KM
    c: float = C_FIBER
    swap_success: float = 1.0
    swap_budget: SwapBudget = field(default_factory=SwapBudget)
    memory_lifetime: float = 1.0
    multiplex_factor: int = 1
    max_nesting: int = MAX_NESTING

    def __post_init__(self):
        if int(self.nesting_level) != self.nesting_level or self.nesting_level < 0:
            raise ParameterError(f"nesting_level must be a non-negative integer, got {self.nesting_level!r}")
        if self.nesting_level > self.max_nesting:
            raise ParameterError(
                f"nesting_level {self.nesting_level} exceeds the cap of {self.max_nesting} "
                f"({2**self.max_nesting} links)"
            )
        if self.total_distance_km < 0:
            raise ParameterError("total_distance_km must be non-negative")
        if not 0.0 < self.swap_success <= 1.0:
            raise ParameterError(f"swap_success must lie in (0, 1], got {self.swap_success!r}")
        if self.memory_lifetime < 0:
            raise ParameterError("memory_lifetime must be non-negative")
        if int(self.multiplex_factor) != self.multiplex_factor or self.multiplex_factor < 1:
            raise ParameterError(f"multiplex_factor must be an integer >= 1, got {self.multiplex_factor!r}")
        # validates p, eta_d, L_att, c
        self.link

    @property
    def n_links(self) -> int:
        return 2**self.nesting_level

    @property
    def L0_km(self) -> float:
        return self.total_distance_km / self.n_links

    @property
    def link(self) -> LinkParams:
        return LinkParams(L0_km=self.L0_km, L_att_km=self.L_att_km, c=self.c, p=self.p, eta_d=self.eta_d)


def t_total(
    config: RepeaterConfig,
    include_swap_overhead: bool = False,
    include_higher_level_comms: bool = False,
) -> float:
    """Mean distribution time with a fixed 3/2 waiting factor per level.

    Without the optional terms this is
    ``(L0/c) / P0 * prod_k (3/2)/q / N``.  With them, level ``k`` adds
    the swap duration and the ``2**(k-1) L0/c`` announcement delay before
    the success draw, so both are repeated on a failed swap.
    """
    link = config.link
    q = config.swap_success
    t = t_link(link) / config.multiplex_factor
    overhead = swap_overhead(config.swap_budget) if include_swap_overhead else 0.0
    for k in range(1, config.nesting_level + 1):
        comm = 2 ** (k - 1) * link.communication_time if include_higher_level_comms else 0.0
        t = (LEVEL_FACTOR * t + overhead + comm) / q
    return t


def t_total_closed_form(config: RepeaterConfig) -> float:
    """``3^n / 2^(n-1) * (L0/c) / (p^2 eta_t^2 eta_d^2)`` for deterministic swaps."""
    link = config.link
    n = config.nesting_level
    eta_t2 = math.exp(-link.L0_km / link.L_att_km)
    return 3**n / 2 ** (n - 1) * link.communication_time / (link.p**2 * eta_t2 * link.eta_d**2)


def t_two_links(config: RepeaterConfig) -> float:
    if config.nesting_level != 1:
        raise ParameterError(f"t_two_links needs nesting_level 1, got {config.nesting_level}")
    if config.swap_success != 1.0:
        raise ParameterError("t_two_links assumes deterministic swapping")
    return LEVEL_FACTOR * t_link(config.link) / config.multiplex_factor


def t_direct(distance_km: float, baseline: DirectBaseline | None = None) -> float:
    """Mean time per transmitted photon through a lossy fibre from a pulsed source."""
    baseline = baseline or DirectBaseline()
    if distance_km < 0:
        raise ParameterError("distance_km must be non-negative")
    return 10.0 ** (baseline.loss_db_per_km * distance_km / 10.0) / baseline.source_rate


def swap_overhead(budget: SwapBudget | None = None) -> float:
    budget = budget or SwapBudget()
    return budget.coherent_transfer + budget.bichromatic_gate + budget.ion_detection


class MemoryCheck(NamedTuple):
    feasible: bool
    ratio: float


def memory_feasible(config: RepeaterConfig, **t_total_options) -> MemoryCheck:
    """Compare the mean distribution time with the memory lifetime."""
    t = t_total(config, **t_total_options)
    if config.memory_lifetime == 0:
        return MemoryCheck(t == 0, math.inf if t > 0 else 0.0)
    return MemoryCheck(t <= config.memory_lifetime, t / config.memory_lifetime)
