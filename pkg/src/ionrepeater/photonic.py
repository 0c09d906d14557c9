"""Exact pure-state simulation of the two-photon heralding step.

Two ions, A and B, each emit (with some probability) a photon whose
polarisation is entangled with the ion's ground state.  The photons are
combined on a polarising beam splitter and counted in the rotated output
modes::

    d+  = (aH + bV)/sqrt(2)      d~+ = (bH + aV)/sqrt(2)
    d-  = (aH - bV)/sqrt(2)      d~- = (bH - aV)/sqrt(2)

A coincidence with one photon in ``{d+, d-}`` and one in ``{d~+, d~-}``
heralds a Bell state of the ions.

Losses (fibre, detectors) are beam splitters coupling a mode to its own
loss mode; what leaves through a loss mode is never observed.  The state
therefore stays pure and every outcome probability is an exact sum of
squared amplitudes.

Phase corrections mapping each coincidence onto
``|psi+> = (|gH gH> + |gV gV>)/sqrt(2)`` follow from expanding the
emission state in the output modes:

=============  ==========  ==========
pattern        ion state   correction
=============  ==========  ==========
d+ , d~+       psi+        I
d- , d~-       psi+        I
d- , d~+       psi-        Z_A
d+ , d~-       psi-        Z_A
=============  ==========  ==========

``Z_A`` (flip the sign of ``|gV>`` on ion A) and ``Z_B`` are equivalent
on ``psi-``; ``Z_A`` is reported by convention.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ConsistencyError, ParameterError

EXACT_TOL = 1e-12
DRIFT_TOL = 1e-9
_PRUNE = 1e-15


class Mode(IntEnum):
    """Optical modes; the integer value is the position in an occupation tuple."""

    A_H = 0
    A_V = 1
    B_H = 2
    B_V = 3
    LOSS_A_H = 4
    LOSS_A_V = 5
    LOSS_B_H = 6
    LOSS_B_V = 7
    D_PLUS = 8
    D_MINUS = 9
    DT_PLUS = 10
    DT_MINUS = 11
    LOSS_D_PLUS = 12
    LOSS_D_MINUS = 13
    LOSS_DT_PLUS = 14
    LOSS_DT_MINUS = 15

    @property
    def kind(self) -> str:
        if self in SIGNAL_MODES:
            return "signal"
        if self in DETECTED_MODES:
            return "detected"
        return "loss"

    @property
    def loss_partner(self) -> Mode:
        if self.kind == "loss":
            raise ParameterError(f"{self.name} is already a loss mode")
        return Mode(self.value + 4)


SIGNAL_MODES = (Mode.A_H, Mode.A_V, Mode.B_H, Mode.B_V)
DETECTED_MODES = (Mode.D_PLUS, Mode.D_MINUS, Mode.DT_PLUS, Mode.DT_MINUS)
N_MODES = len(Mode)


class Ion(str, Enum):
    GH = "gH"
    GV = "gV"
    NO_EMIT = "noEmit"


class BasisState(NamedTuple):
    ion_a: Ion
    ion_b: Ion
    occupation: tuple[int, ...]

    @property
    def photons(self) -> int:
        return sum(self.occupation)


def vacuum_occupation() -> tuple[int, ...]:
    return (0,) * N_MODES


def occupation_of(*modes: Mode) -> tuple[int, ...]:
    occ = [0] * N_MODES
    for m in modes:
        occ[m] += 1
    return tuple(occ)


@dataclass(frozen=True)
class PhotonicState:
    """Immutable map from basis states to complex amplitudes."""

    amplitudes: Mapping[BasisState, complex]
    stage: str = "emission"

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", MappingProxyType(dict(self.amplitudes)))

    def norm_squared(self) -> float:
        return math.fsum(abs(a) ** 2 for a in self.amplitudes.values())

    def amplitude(self, basis: BasisState) -> complex:
        return self.amplitudes.get(basis, 0j)

    def __len__(self) -> int:
        return len(self.amplitudes)

    def __iter__(self):
        return iter(self.amplitudes.items())


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0 or math.isnan(value):
        raise ParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def _check_drift(state: PhotonicState, reference: float) -> None:
    drift = abs(state.norm_squared() - reference)
    if drift > DRIFT_TOL:
        raise ConsistencyError(f"norm drifted by {drift:.3e}")


def build_emission_state(p_a: float, p_b: float) -> PhotonicState:
    """Product of the two ion-photon states right after excitation.

    Each side carries amplitude ``sqrt(p/2)`` on ``|gH>|1_H>`` and on
    ``|gV>|1_V>``, plus ``sqrt(1-p)`` on ``|noEmit>|vac>``.
    """
    p_a = _check_probability("p_a", p_a)
    p_b = _check_probability("p_b", p_b)

    def side(p: float, h: Mode, v: Mode):
        branches = [(Ion.GH, h, math.sqrt(p / 2)), (Ion.GV, v, math.sqrt(p / 2)),
                    (Ion.NO_EMIT, None, math.sqrt(1.0 - p))]
        return [b for b in branches if b[2] > 0.0]

    amps: dict[BasisState, complex] = {}
    for (ion_a, mode_a, amp_a), (ion_b, mode_b, amp_b) in itertools.product(
        side(p_a, Mode.A_H, Mode.A_V), side(p_b, Mode.B_H, Mode.B_V)
    ):
        modes = [m for m in (mode_a, mode_b) if m is not None]
        amps[BasisState(ion_a, ion_b, occupation_of(*modes))] = complex(amp_a * amp_b)
    return PhotonicState(amps, stage="emission")


def transform_modes(
    state: PhotonicState,
    mapping: Mapping[Mode, Sequence[tuple[Mode, complex]]],
    stage: str | None = None,
) -> PhotonicState:
    """Apply a linear map on creation operators, ``a_m^dag -> sum_j c_j a_j^dag``.

    Modes absent from ``mapping`` are left untouched.  The map must be
    unitary for the result to stay normalised; callers check drift.
    """
    out: dict[BasisState, complex] = defaultdict(complex)
    for basis, amp in state:
        photons = [m for m in range(N_MODES) for _ in range(basis.occupation[m])]
        options = [mapping.get(Mode(m), ((Mode(m), 1.0),)) for m in photons]
        in_norm = math.prod(math.factorial(n) for n in basis.occupation)
        for choice in itertools.product(*options):
            coeff = amp
            occ = [0] * N_MODES
            for target, c in choice:
                coeff *= c
                occ[target] += 1
            if coeff == 0:
                continue
            out_norm = math.prod(math.factorial(n) for n in occ)
            key = BasisState(basis.ion_a, basis.ion_b, tuple(occ))
            out[key] += coeff * math.sqrt(out_norm / in_norm)
    pruned = {k: v for k, v in out.items() if abs(v) > _PRUNE}
    return PhotonicState(pruned, stage=stage or state.stage)


def loss_coupling(mode: Mode, transmissivity: float) -> dict[Mode, tuple[tuple[Mode, complex], ...]]:
    """Beam-splitter map coupling ``mode`` to its loss partner."""
    t = math.sqrt(transmissivity)
    r = math.sqrt(1.0 - transmissivity)
    loss = mode.loss_partner
    return {mode: ((mode, t), (loss, r)), loss: ((mode, -r), (loss, t))}


def apply_loss(state: PhotonicState, mode: Mode, transmissivity: float) -> PhotonicState:
    """Send ``mode`` through a channel of the given power transmissivity."""
    transmissivity = _check_probability("transmissivity", transmissivity)
    mode = Mode(mode)
    if mode.kind == "loss":
        raise ParameterError(f"cannot attenuate loss mode {mode.name}")
    if transmissivity == 1.0:
        return state
    result = transform_modes(state, loss_coupling(mode, transmissivity))
    _check_drift(result, state.norm_squared())
    return result


_S = 1.0 / math.sqrt(2.0)
PBS_MAP: dict[Mode, tuple[tuple[Mode, complex], ...]] = {
    Mode.A_H: ((Mode.D_PLUS, _S), (Mode.D_MINUS, _S)),
    Mode.B_V: ((Mode.D_PLUS, _S), (Mode.D_MINUS, -_S)),
    Mode.B_H: ((Mode.DT_PLUS, _S), (Mode.DT_MINUS, _S)),
    Mode.A_V: ((Mode.DT_PLUS, _S), (Mode.DT_MINUS, -_S)),
}


def apply_pbs(state: PhotonicState) -> PhotonicState:
    """Rewrite the signal modes in the detected ``d+/d-/d~+/d~-`` basis."""
    for basis, _ in state:
        if any(basis.occupation[m] for m in DETECTED_MODES):
            raise ConsistencyError("state already contains photons in detected modes")
    result = transform_modes(state, PBS_MAP, stage="pbs")
    _check_drift(result, state.norm_squared())
    return result


class DetectionPattern(NamedTuple):
    d_plus: int = 0
    d_minus: int = 0
    dt_plus: int = 0
    dt_minus: int = 0

    @property
    def is_herald(self) -> bool:
        return self.d_plus + self.d_minus == 1 and self.dt_plus + self.dt_minus == 1

    @property
    def total(self) -> int:
        return sum(self)


HERALD_PATTERNS = (
    DetectionPattern(1, 0, 1, 0),
    DetectionPattern(0, 1, 1, 0),
    DetectionPattern(1, 0, 0, 1),
    DetectionPattern(0, 1, 0, 1),
)

PSI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)
CORRECTIONS: dict[str, np.ndarray] = {
    "I": np.array([1, 1, 1, 1], dtype=complex),
    "Z_A": np.array([1, 1, -1, -1], dtype=complex),
    "Z_B": np.array([1, -1, 1, -1], dtype=complex),
    "Z_A.Z_B": np.array([1, -1, -1, 1], dtype=complex),
}
_ION_INDEX = {(Ion.GH, Ion.GH): 0, (Ion.GH, Ion.GV): 1, (Ion.GV, Ion.GH): 2, (Ion.GV, Ion.GV): 3}


def bell_fidelity(vector: np.ndarray) -> float:
    return float(abs(np.vdot(PSI_PLUS, vector)) ** 2)


@dataclass(frozen=True)
class HeraldOutcome:
    """One detector pattern, its probability and, for coincidences, the ion state."""

    pattern: DetectionPattern
    probability: float
    conditional_state: np.ndarray | None = field(default=None, compare=False)
    correction: str | None = None

    @property
    def is_herald(self) -> bool:
        return self.pattern.is_herald

    @property
    def corrected_state(self) -> np.ndarray | None:
        if self.conditional_state is None or self.correction is None:
            return None
        return CORRECTIONS[self.correction] * self.conditional_state

    @property
    def fidelity(self) -> float | None:
        corrected = self.corrected_state
        return None if corrected is None else bell_fidelity(corrected)


def choose_correction(vector: np.ndarray) -> str:
    """Pick the first Z-type correction that maximises overlap with psi+."""
    best, best_f = "I", -1.0
    for name, diag in CORRECTIONS.items():
        f = bell_fidelity(diag * vector)
        if f > best_f + EXACT_TOL:
            best, best_f = name, f
    return best


def measure(state: PhotonicState, detector_efficiency: float) -> list[HeraldOutcome]:
    """Photon-number-resolving detection of the four PBS outputs.

    Returns every detector pattern with non-zero probability, sorted by
    pattern.  Unobserved loss modes are summed over.
    """
    detector_efficiency = _check_probability("detector_efficiency", detector_efficiency)
    norm = state.norm_squared()
    if abs(norm - 1.0) > DRIFT_TOL:
        raise ConsistencyError(f"input state is not normalised (|psi|^2 = {norm!r})")
    for basis, _ in state:
        if any(basis.occupation[m] for m in SIGNAL_MODES):
            raise ConsistencyError("measure() expects a state in the PBS output basis")

    for mode in DETECTED_MODES:
        state = apply_loss(state, mode, detector_efficiency)

    probs: dict[DetectionPattern, list[float]] = defaultdict(list)
    branches: dict[tuple[DetectionPattern, tuple[int, ...]], dict[tuple[Ion, Ion], complex]] = defaultdict(dict)
    for basis, amp in state:
        pattern = DetectionPattern(*(basis.occupation[m] for m in DETECTED_MODES))
        probs[pattern].append(abs(amp) ** 2)
        if pattern.is_herald:
            hidden = tuple(n for m, n in enumerate(basis.occupation) if Mode(m) not in DETECTED_MODES)
            branches[(pattern, hidden)][(basis.ion_a, basis.ion_b)] = amp

    conditional: dict[DetectionPattern, np.ndarray] = {}
    for (pattern, _), ions in branches.items():
        if pattern in conditional:
            raise ConsistencyError(f"conditional state for {pattern} is mixed")
        vec = np.zeros(4, dtype=complex)
        for key, amp in ions.items():
            if key not in _ION_INDEX:
                raise ConsistencyError(f"coincidence with a non-emitting ion: {key}")
            vec[_ION_INDEX[key]] = amp
        conditional[pattern] = vec / np.linalg.norm(vec)

    outcomes = []
    for pattern in sorted(probs):
        p = math.fsum(probs[pattern])
        if p <= 0.0:
            continue
        vec = conditional.get(pattern)
        corr = choose_correction(vec) if vec is not None else None
        outcomes.append(HeraldOutcome(pattern, p, vec, corr))

    total = math.fsum(o.probability for o in outcomes)
    if abs(total - 1.0) > DRIFT_TOL:
        raise ConsistencyError(f"outcome probabilities sum to {total!r}")
    return outcomes


def coincidence_probability(outcomes: Iterable[HeraldOutcome]) -> float:
    return math.fsum(o.probability for o in outcomes if o.is_herald)


def simulate_heralding(p_a: float, p_b: float, eta_t: float, eta_d: float) -> list[HeraldOutcome]:
    """Full pipeline: emission, fibre loss on every signal mode, PBS, detection."""
    state = build_emission_state(p_a, p_b)
    eta_t = _check_probability("eta_t", eta_t)
    for mode in SIGNAL_MODES:
        state = apply_loss(state, mode, eta_t)
    return measure(apply_pbs(state), eta_d)


def herald_probability(p_a: float, p_b: float, eta_t: float, eta_d: float) -> float:
    """Closed-form coincidence probability ``p_a p_b eta_t^2 eta_d^2 / 2``."""
    for name, value in (("p_a", p_a), ("p_b", p_b), ("eta_t", eta_t), ("eta_d", eta_d)):
        _check_probability(name, value)
    return 0.5 * p_a * p_b * eta_t**2 * eta_d**2
