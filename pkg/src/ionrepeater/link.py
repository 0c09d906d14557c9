"""Closed-form elementary-link quantities.

Distances are given in km, the fibre group velocity in m/s, times come
out in seconds.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DegenerateRegimeWarning, InfeasibleLinkError, ParameterError

L_ATT_KM = 22.0
C_FIBER = 2e8


def _unit(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class LinkParams:
    """Hardware and geometry of one elementary link.

    ``L0_km`` is the node-to-node distance; the heralding station sits
    half way, so each photon travels ``L0_km / 2``.
    """

    L0_km: float
    L_att_km: float = L_ATT_KM
    c: float = C_FIBER
    p: float = 0.9
    eta_d: float = 0.9

    def __post_init__(self):
        if self.L0_km < 0:
            raise ParameterError(f"L0_km must be non-negative, got {self.L0_km!r}")
        if self.L_att_km <= 0:
            raise ParameterError(f"L_att_km must be positive, got {self.L_att_km!r}")
        if self.c <= 0:
            raise ParameterError(f"c must be positive, got {self.c!r}")
        _unit("p", self.p)
        _unit("eta_d", self.eta_d)

    @property
    def communication_time(self) -> float:
        """One-way signalling time ``L0 / c`` in seconds."""
        return self.L0_km * 1000.0 / self.c


@dataclass(frozen=True)
class CavityParams:
    finesse: float
    length: float
    wavelength: float
    mode_volume: float | None = None

    def __post_init__(self):
        for name in ("finesse", "length", "wavelength"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.mode_volume is not None and self.mode_volume <= 0:
            raise ParameterError(f"mode_volume must be positive, got {self.mode_volume!r}")

    @property
    def effective_mode_volume(self) -> float:
        # confocal estimate l^2 * lambda unless overridden
        if self.mode_volume is not None:
            return self.mode_volume
        return self.length**2 * self.wavelength


@dataclass(frozen=True)
class SourceBudget:
    prep_efficiency: float = 1.0
    cavity_emission: float = 1.0
    fiber_coupling: float = 1.0
    conversion_efficiency: float = 1.0

    def __post_init__(self):
        for name in ("prep_efficiency", "cavity_emission", "fiber_coupling", "conversion_efficiency"):
            _unit(name, getattr(self, name))


def fiber_transmission(params: LinkParams) -> float:
    """Single-photon transmission over half a link, ``exp(-L0 / (2 L_att))``."""
    return math.exp(-params.L0_km / (2.0 * params.L_att_km))


def p0(params: LinkParams) -> float:
    """Per-attempt heralding probability ``p^2 eta_t^2 eta_d^2 / 2``."""
    eta_t = fiber_transmission(params)
    return 0.5 * params.p**2 * eta_t**2 * params.eta_d**2


def t_link(params: LinkParams) -> float:
    """Mean time to herald one elementary link, ``(L0/c) / P0``."""
    prob = p0(params)
    if prob <= 0.0:
        raise InfeasibleLinkError("heralding probability is zero (p or eta_d is 0)")
    return params.communication_time / prob


def purcell_factor(cavity: CavityParams) -> float:
    return 3.0 * cavity.length * cavity.wavelength**2 * cavity.finesse / (
        2.0 * math.pi**2 * cavity.effective_mode_volume
    )


def collection_efficiency(purcell: float) -> float:
    """``(F_P - 1) / F_P``, clamped to ``[0, 1]``.

    Purcell factors below one make the expression negative; 0 is returned
    and a :class:`DegenerateRegimeWarning` is emitted.
    """
    if purcell < 1.0:
        warnings.warn(
            f"Purcell factor {purcell!r} < 1: collection efficiency clamped to 0",
            DegenerateRegimeWarning,
            stacklevel=2,
        )
        return 0.0
    return min(1.0, (purcell - 1.0) / purcell)


def compose_source_efficiency(budget: SourceBudget) -> float:
    return (
        budget.prep_efficiency
        * budget.cavity_emission
        * budget.fiber_coupling
        * budget.conversion_efficiency
    )
