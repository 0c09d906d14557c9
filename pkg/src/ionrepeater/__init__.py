"""Rate analysis and simulation of quantum repeaters built from single trapped ions."""

from .errors import (
    ConsistencyError,
    DegenerateRegimeWarning,
    InfeasibleLinkError,
    ParameterError,
    RepeaterError,
    SchedulingError,
)
from .link import (
    CavityParams,
    LinkParams,
    SourceBudget,
    collection_efficiency,
    compose_source_efficiency,
    fiber_transmission,
    p0,
    purcell_factor,
    t_link,
)
from .montecarlo import SimOptions, compare_to_analytic, simulate_link, simulate_nested
from .multiplex import (
    ChainConfig,
    TimingParams,
    attempts_per_window,
    cavity_length_speedup,
    multiplexed_t_total,
    rate_from_cavity_length,
    schedule_swap,
)
from .photonic import (
    apply_loss,
    apply_pbs,
    build_emission_state,
    herald_probability,
    measure,
    simulate_heralding,
)
from .repeater import (
    DirectBaseline,
    RepeaterConfig,
    SwapBudget,
    memory_feasible,
    swap_overhead,
    t_direct,
    t_total,
    t_two_links,
)

__version__ = "0.1.0"
