"""Scenario files: flat ``key=value`` lines with dotted namespaces.

Example::

    # 16-link repeater over 1000 km
    link.p = 0.3
    link.eta_d = 0.9
    repeater.distance_km = 1000
    repeater.nesting_level = 4

Blank lines and ``#`` comments are ignored.  Unknown keys are errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ParameterError, RepeaterError
from .link import C_FIBER, L_ATT_KM, CavityParams
from .montecarlo import SimOptions
from .multiplex import ChainConfig, TimingParams
from .repeater import DirectBaseline, RepeaterConfig, SwapBudget


class ConfigError(RepeaterError, ValueError):
    """A scenario key is unknown, malformed or out of range."""


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text: str) -> float | None:
    return None if text.strip().lower() in ("", "none") else float(text)


def _optional_int(text: str) -> int | None:
    return None if text.strip().lower() in ("", "none") else int(text)


# key -> (parser, default)
SCHEMA: dict[str, tuple[Callable[[str], Any], Any]] = {
    "link.p": (float, 0.9),
    "link.eta_d": (float, 0.9),
    "link.L_att_km": (float, L_ATT_KM),
    "link.c_m_per_s": (float, C_FIBER),
    "link.L0_km": (_optional_float, None),
    "repeater.distance_km": (_optional_float, None),
    "repeater.nesting_level": (_optional_int, None),
    "repeater.swap_success": (float, 1.0),
    "repeater.memory_lifetime_s": (float, 1.0),
    "repeater.multiplex_factor": (int, 1),
    "repeater.max_nesting": (int, 4),
    "swap.coherent_transfer_s": (float, 10e-6),
    "swap.bichromatic_gate_s": (float, 50e-6),
    "swap.ion_detection_s": (float, 145e-6),
    "cavity.finesse": (float, 1e5),
    "cavity.length_m": (float, 0.02),
    "cavity.wavelength_m": (float, 854e-9),
    "cavity.mode_volume_m3": (_optional_float, None),
    "timing.raman_rate_hz": (float, 2e4),
    "timing.transport_s_per_mm": (float, 50e-6),
    "timing.cavity_length_m": (float, 0.02),
    "timing.reference_cavity_length_m": (float, 0.02),
    "chain.end_node_ions": (int, 8),
    "chain.inter_ion_spacing_m": (float, 8e-6),
    "chain.beam_waist_m": (float, 2e-6),
    "direct.source_rate_hz": (float, 1e10),
    "direct.loss_db_per_km": (float, 0.2),
    "sim.trials": (int, 10_000),
    "sim.seed": (int, 0),
    "sim.include_swap_overhead": (_bool, False),
    "sim.include_higher_level_comms": (_bool, False),
    "sim.workers": (int, 1),
    "bell.p_a": (float, 1.0),
    "bell.p_b": (float, 1.0),
    "bell.eta_t": (float, 1.0),
    "bell.eta_d": (float, 1.0),
}

DEFAULT_DISTANCE_KM = 1000.0


def parse_config_text(text: str) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        parser = SCHEMA[key][0]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    return values


@dataclass
class Scenario:
    """All parameters for one CLI run; defaults reproduce the standard curves."""

    values: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        unknown = set(self.values) - set(SCHEMA)
        if unknown:
            raise ConfigError(f"unknown keys: {sorted(unknown)}")
        self.values = {k: self.values.get(k, default) for k, (_, default) in SCHEMA.items()}

    @classmethod
    def from_file(cls, path: str | Path) -> Scenario:
        return cls(parse_config_text(Path(path).read_text(encoding="utf-8")))

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def with_overrides(self, **overrides: Any) -> Scenario:
        merged = dict(self.values)
        for key, value in overrides.items():
            if value is not None:
                merged[key] = value
        return Scenario(merged)

    def _build(self, section: str, factory, **kwargs):
        try:
            return factory(**kwargs)
        except (ParameterError, TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] {exc}") from None

    def swap_budget(self) -> SwapBudget:
        v = self.values
        return self._build("swap", SwapBudget, coherent_transfer=v["swap.coherent_transfer_s"],
                           bichromatic_gate=v["swap.bichromatic_gate_s"],
                           ion_detection=v["swap.ion_detection_s"])

    def repeater(self, default_nesting: int = 4, **overrides: Any) -> RepeaterConfig:
        v = self.values
        n = v["repeater.nesting_level"]
        n = default_nesting if n is None else n
        distance = v["repeater.distance_km"]
        L0 = v["link.L0_km"]
        if L0 is not None:
            if distance is not None and abs(L0 * 2**n - distance) > 1e-9 * max(distance, 1.0):
                raise ConfigError(
                    f"link.L0_km={L0} inconsistent with repeater.distance_km={distance} at nesting level {n}"
                )
            distance = L0 * 2**n
        elif distance is None:
            distance = DEFAULT_DISTANCE_KM
        kwargs = dict(
            total_distance_km=distance,
            nesting_level=n,
            p=v["link.p"],
            eta_d=v["link.eta_d"],
            L_att_km=v["link.L_att_km"],
            c=v["link.c_m_per_s"],
            swap_success=v["repeater.swap_success"],
            swap_budget=self.swap_budget(),
            memory_lifetime=v["repeater.memory_lifetime_s"],
            multiplex_factor=v["repeater.multiplex_factor"],
            max_nesting=v["repeater.max_nesting"],
        )
        kwargs.update(overrides)
        return self._build("repeater", RepeaterConfig, **kwargs)

    def cavity(self) -> CavityParams:
        v = self.values
        return self._build("cavity", CavityParams, finesse=v["cavity.finesse"], length=v["cavity.length_m"],
                           wavelength=v["cavity.wavelength_m"], mode_volume=v["cavity.mode_volume_m3"])

    def timing(self) -> TimingParams:
        v = self.values
        return self._build("timing", TimingParams, raman_rate=v["timing.raman_rate_hz"],
                           transport_time_per_mm=v["timing.transport_s_per_mm"],
                           cavity_length=v["timing.cavity_length_m"],
                           reference_cavity_length=v["timing.reference_cavity_length_m"])

    def chain(self) -> ChainConfig:
        v = self.values
        return self._build("chain", ChainConfig, end_node_ions=v["chain.end_node_ions"],
                           inter_ion_spacing=v["chain.inter_ion_spacing_m"], beam_waist=v["chain.beam_waist_m"])

    def direct(self) -> DirectBaseline:
        v = self.values
        return self._build("direct", DirectBaseline, source_rate=v["direct.source_rate_hz"],
                           loss_db_per_km=v["direct.loss_db_per_km"])

    def sim_options(self, default_nesting: int = 4) -> SimOptions:
        v = self.values
        return self._build("sim", SimOptions, config=self.repeater(default_nesting), trials=v["sim.trials"],
                           seed=v["sim.seed"], include_swap_overhead=v["sim.include_swap_overhead"],
                           include_higher_level_comms=v["sim.include_higher_level_comms"],
                           workers=v["sim.workers"])

    def validate(self) -> None:
        """Build every component once so errors surface before any output."""
        self.repeater()
        self.cavity()
        self.timing()
        self.chain()
        self.direct()
        self.sim_options()
        for key in ("bell.p_a", "bell.p_b", "bell.eta_t", "bell.eta_d"):
            if not 0.0 <= self.values[key] <= 1.0:
                raise ConfigError(f"[bell] {key} must lie in [0, 1]")
