import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from ionrepeater.errors import ConsistencyError, ParameterError
from ionrepeater.photonic import (
    HERALD_PATTERNS,
    SIGNAL_MODES,
    BasisState,
    DetectionPattern,
    Ion,
    Mode,
    PhotonicState,
    apply_loss,
    apply_pbs,
    build_emission_state,
    coincidence_probability,
    herald_probability,
    measure,
    occupation_of,
    simulate_heralding,
    vacuum_occupation,
)

from oracles import brute_force_outcomes

unit = st.floats(0.0, 1.0)
positive_unit = st.floats(0.01, 1.0)


def test_ideal_emission_state_has_four_equal_terms():
    state = build_emission_state(1, 1)
    assert len(state) == 4
    for amp in state.amplitudes.values():
        assert amp == pytest.approx(0.5, abs=1e-15)
    assert state.amplitude(BasisState(Ion.GV, Ion.GH, occupation_of(Mode.A_V, Mode.B_H))) == pytest.approx(0.5)


def test_no_emission_is_a_single_vacuum_term():
    state = build_emission_state(0, 0)
    assert dict(state.amplitudes) == {BasisState(Ion.NO_EMIT, Ion.NO_EMIT, vacuum_occupation()): 1}


def test_emission_amplitude_matches_symbolic_expansion():
    p = sympy.Rational(9, 10)
    gH_a, gV_a, e_a, gH_b, gV_b, e_b = sympy.symbols("gHa gVa ea gHb gVb eb")
    side_a = sympy.sqrt(p / 2) * gH_a + sympy.sqrt(p / 2) * gV_a + sympy.sqrt(1 - p) * e_a
    side_b = sympy.sqrt(p / 2) * gH_b + sympy.sqrt(p / 2) * gV_b + sympy.sqrt(1 - p) * e_b
    poly = sympy.Poly(sympy.expand(side_a * side_b), gH_a, gV_a, e_a, gH_b, gV_b, e_b)
    expected = float(poly.coeff_monomial(gH_a * gH_b))
    assert expected == pytest.approx(0.45, abs=1e-15)

    state = build_emission_state(0.9, 0.9)
    hh = state.amplitude(BasisState(Ion.GH, Ion.GH, occupation_of(Mode.A_H, Mode.B_H)))
    assert hh == pytest.approx(expected, abs=1e-15)
    ee = state.amplitude(BasisState(Ion.NO_EMIT, Ion.NO_EMIT, vacuum_occupation()))
    assert ee == pytest.approx(float(poly.coeff_monomial(e_a * e_b)), abs=1e-15)


@pytest.mark.parametrize("bad", [-0.1, 1.1, math.nan])
def test_emission_rejects_bad_probability(bad):
    with pytest.raises(ParameterError):
        build_emission_state(bad, 0.5)


def test_unit_transmissivity_is_identity():
    state = build_emission_state(0.7, 0.4)
    assert dict(apply_loss(state, Mode.A_H, 1.0).amplitudes) == dict(state.amplitudes)


def test_zero_transmissivity_moves_photon_to_loss_mode():
    state = apply_loss(build_emission_state(1, 1), Mode.A_H, 0.0)
    for basis, _ in state:
        assert basis.occupation[Mode.A_H] == 0
    lost = [b for b, _ in state if b.occupation[Mode.LOSS_A_H] == 1]
    assert len(lost) == 2


def test_apply_loss_rejects_loss_mode_and_bad_eta():
    state = build_emission_state(1, 1)
    with pytest.raises(ParameterError):
        apply_loss(state, Mode.LOSS_A_H, 0.5)
    with pytest.raises(ParameterError):
        apply_loss(state, Mode.A_H, 1.5)


def survival_probability(state):
    loss_modes = [m for m in Mode if m.kind == "loss"]
    return math.fsum(abs(a) ** 2 for b, a in state if b.photons == 2 and not any(b.occupation[m] for m in loss_modes))


@pytest.mark.parametrize("eta", [0.0, 0.3, 0.8, 1.0])
def test_both_photons_survive_with_probability_eta_squared(eta):
    state = build_emission_state(1, 1)
    for mode in SIGNAL_MODES:
        state = apply_loss(state, mode, eta)
    assert survival_probability(state) == pytest.approx(eta**2, abs=1e-12)


def single_photon(mode):
    return PhotonicState({BasisState(Ion.GH, Ion.NO_EMIT, occupation_of(mode)): 1.0})


def test_pbs_splits_a_h_symmetrically():
    out = apply_pbs(single_photon(Mode.A_H))
    assert out.amplitude(BasisState(Ion.GH, Ion.NO_EMIT, occupation_of(Mode.D_PLUS))) == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude(BasisState(Ion.GH, Ion.NO_EMIT, occupation_of(Mode.D_MINUS))) == pytest.approx(1 / math.sqrt(2))


def test_pbs_splits_b_v_antisymmetrically():
    out = apply_pbs(single_photon(Mode.B_V))
    assert out.amplitude(BasisState(Ion.GH, Ion.NO_EMIT, occupation_of(Mode.D_PLUS))) == pytest.approx(1 / math.sqrt(2))
    assert out.amplitude(BasisState(Ion.GH, Ion.NO_EMIT, occupation_of(Mode.D_MINUS))) == pytest.approx(-1 / math.sqrt(2))


def test_pbs_coincidence_d_plus_dt_plus_is_one_eighth():
    out = apply_pbs(build_emission_state(1, 1))
    occ = occupation_of(Mode.D_PLUS, Mode.DT_PLUS)
    prob = math.fsum(abs(a) ** 2 for b, a in out if b.occupation == occ)
    assert prob == pytest.approx(1 / 8, abs=1e-12)


def test_pbs_bunches_same_group_photons():
    # aH and bV both feed d+/d-: they leave together, never split across d+ and d-
    state = PhotonicState({BasisState(Ion.GH, Ion.GV, occupation_of(Mode.A_H, Mode.B_V)): 1.0})
    out = apply_pbs(state)
    occs = {b.occupation for b, _ in out}
    assert occs == {occupation_of(Mode.D_PLUS, Mode.D_PLUS), occupation_of(Mode.D_MINUS, Mode.D_MINUS)}
    for _, a in out:
        assert abs(a) ** 2 == pytest.approx(0.5)


def test_pbs_twice_is_an_error():
    with pytest.raises(ConsistencyError):
        apply_pbs(apply_pbs(build_emission_state(1, 1)))


def test_ideal_measurement():
    outcomes = {o.pattern: o for o in simulate_heralding(1, 1, 1, 1)}
    first = outcomes[DetectionPattern(1, 0, 1, 0)]
    assert first.probability == pytest.approx(1 / 8, abs=1e-12)
    assert first.correction == "I"
    np.testing.assert_allclose(first.conditional_state, [1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], atol=1e-12)
    assert coincidence_probability(outcomes.values()) == pytest.approx(0.5, abs=1e-12)


def test_correction_table():
    outcomes = {o.pattern: o for o in simulate_heralding(1, 1, 1, 1)}
    table = {p: outcomes[p].correction for p in HERALD_PATTERNS}
    assert table == {
        DetectionPattern(1, 0, 1, 0): "I",
        DetectionPattern(0, 1, 1, 0): "Z_A",
        DetectionPattern(1, 0, 0, 1): "Z_A",
        DetectionPattern(0, 1, 0, 1): "I",
    }


def test_lossy_herald_probability():
    outcomes = simulate_heralding(0.9, 0.9, 0.5, 0.9)
    assert coincidence_probability(outcomes) == pytest.approx(0.0820125, abs=1e-12)


def test_measure_rejects_unnormalised_or_unrotated_state():
    with pytest.raises(ConsistencyError):
        measure(build_emission_state(1, 1), 1.0)
    bad = PhotonicState({BasisState(Ion.GH, Ion.GH, occupation_of(Mode.D_PLUS, Mode.DT_PLUS)): 0.5})
    with pytest.raises(ConsistencyError):
        measure(bad, 1.0)


@pytest.mark.parametrize(
    "args, expected",
    [((1, 1, 1, 1), 0.5), ((0, 0.3, 0.7, 0.9), 0.0), ((0.9, 0.9, math.exp(-62.5 / 44), 0.9), 1.91491235103e-2)],
)
def test_herald_probability_closed_form(args, expected):
    assert herald_probability(*args) == pytest.approx(expected, rel=1e-10, abs=1e-15)


def test_herald_probability_range_check():
    with pytest.raises(ParameterError):
        herald_probability(1.2, 1, 1, 1)


@settings(max_examples=1000, deadline=None)
@given(unit, unit, unit, st.sampled_from(list(SIGNAL_MODES)))
def test_norm_preserved(p_a, p_b, eta, mode):
    state = build_emission_state(p_a, p_b)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)
    state = apply_loss(state, mode, eta)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)
    state = apply_pbs(state)
    assert state.norm_squared() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(unit, unit, unit, unit)
def test_outcome_probabilities_complete(p_a, p_b, eta_t, eta_d):
    outcomes = simulate_heralding(p_a, p_b, eta_t, eta_d)
    assert math.fsum(o.probability for o in outcomes) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300, deadline=None)
@given(positive_unit, positive_unit, positive_unit, positive_unit)
def test_heralded_fidelity_is_one(p_a, p_b, eta_t, eta_d):
    heralds = [o for o in simulate_heralding(p_a, p_b, eta_t, eta_d) if o.is_herald]
    assert len(heralds) == 4
    for o in heralds:
        assert o.fidelity == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(unit, unit, unit, unit)
def test_measure_matches_permanent_oracle(p_a, p_b, eta_t, eta_d):
    probs, ion_vecs = brute_force_outcomes(p_a, p_b, eta_t, eta_d)
    outcomes = {tuple(o.pattern): o for o in simulate_heralding(p_a, p_b, eta_t, eta_d)}
    significant = {k for k, v in probs.items() if v > 1e-14}
    assert significant <= set(outcomes)
    for pattern, o in outcomes.items():
        assert o.probability == pytest.approx(probs.get(pattern, 0.0), abs=1e-12)
        if o.is_herald:
            ref = ion_vecs[pattern] / np.linalg.norm(ion_vecs[pattern])
            assert abs(np.vdot(ref, o.conditional_state)) == pytest.approx(1.0, abs=1e-12)


def test_factorization_grid():
    grid = np.linspace(0.2, 1.0, 5)
    for p in grid:
        for eta_t in grid:
            for eta_d in grid:
                sim = coincidence_probability(simulate_heralding(p, p, eta_t, eta_d))
                assert sim == pytest.approx(herald_probability(p, p, eta_t, eta_d), abs=1e-12)


def test_states_are_immutable():
    state = build_emission_state(1, 1)
    with pytest.raises(TypeError):
        state.amplitudes[next(iter(state.amplitudes))] = 0
