"""Sparse two-photon state algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clustersim.errors import NonContractive, ZeroState
from clustersim.modes import (
    IDLER,
    SIGNAL,
    JointTwoPhotonState,
    ModeGrid,
    TimeFreqMode,
    apply_single_photon_map,
    inner_product,
    normalize,
    projection_probability,
    state_from_json,
    state_to_json,
)


def make_state(pairs):
    grid = ModeGrid()
    return JointTwoPhotonState.from_amplitudes(
        grid, {((ts, fs), (ti, fi)): a for (ts, fs, ti, fi), a in pairs.items()}
    )


def test_norm_tracking_is_total_probability():
    s = make_state({(0, 0, 0, 0): 0.6, (1, 0, 1, 0): 0.8j})
    assert s.probability() == pytest.approx(1.0)
    assert s.amplitude(TimeFreqMode(1, 0), TimeFreqMode(1, 0)) == 0.8j


def test_normalize_and_zero_state():
    s = make_state({(0, 0, 0, 0): 0.1, (1, 0, 1, 0): 0.1j})
    n = normalize(s)
    assert n.probability() == pytest.approx(1.0, abs=1e-14)
    # relative phase preserved
    a = n.amplitude(TimeFreqMode(0, 0), TimeFreqMode(0, 0))
    b = n.amplitude(TimeFreqMode(1, 0), TimeFreqMode(1, 0))
    assert b / a == pytest.approx(1j)
    with pytest.raises(ZeroState):
        normalize(JointTwoPhotonState(ModeGrid(), {}, 0.0))


def test_single_photon_map_targets_correct_photon():
    s = make_state({(0, 0, 5, 0): 1.0})
    shifted = apply_single_photon_map(
        s, SIGNAL, lambda m: [(TimeFreqMode(m.t_index + 1, m.f_index), 1.0)]
    )
    assert shifted.amplitude(TimeFreqMode(1, 0), TimeFreqMode(5, 0)) == 1.0
    shifted = apply_single_photon_map(
        s, IDLER, lambda m: [(TimeFreqMode(m.t_index + 1, m.f_index), 1.0)]
    )
    assert shifted.amplitude(TimeFreqMode(0, 0), TimeFreqMode(6, 0)) == 1.0


def test_non_contractive_map_rejected():
    s = make_state({(0, 0, 0, 0): 1.0})
    with pytest.raises(NonContractive):
        apply_single_photon_map(s, SIGNAL, lambda m: [(m, 1.2)])


def test_lossy_map_shrinks_norm():
    s = make_state({(0, 0, 0, 0): 1.0})
    out = apply_single_photon_map(s, SIGNAL, lambda m: [(m, 0.5)])
    assert out.probability() == pytest.approx(0.25)


def test_projection_probability_and_inner_product():
    s = make_state({(0, 0, 0, 0): 0.6, (1, 0, 1, 0): 0.8})
    assert projection_probability(
        s, TimeFreqMode(0, 0), TimeFreqMode(0, 0)
    ) == pytest.approx(0.36)
    t = make_state({(0, 0, 0, 0): 1.0})
    assert inner_product(t, s) == pytest.approx(0.6)
    assert inner_product(s, t) == pytest.approx(np.conj(inner_product(t, s)))


def test_json_round_trip():
    s = make_state({(0, 0, 0, 0): 0.5, (3, 1, 3, -2): -0.5 + 0.25j})
    r = state_from_json(state_to_json(s))
    assert r.grid == s.grid
    assert r.amplitudes == s.amplitudes
    assert r.norm_tracking == pytest.approx(s.norm_tracking)


amp = st.complex_numbers(
    min_magnitude=1e-6, max_magnitude=1.0, allow_nan=False, allow_infinity=False
)
mode_idx = st.integers(min_value=-4, max_value=4)


@st.composite
def sparse_states(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    pairs = {}
    for _ in range(n):
        key = (draw(mode_idx), draw(mode_idx), draw(mode_idx), draw(mode_idx))
        pairs[key] = draw(amp)
    return make_state(pairs)


@given(sparse_states(), st.floats(min_value=0.0, max_value=1.0))
@settings(max_examples=60, deadline=None)
def test_contractive_maps_never_grow_probability(state, scale):
    out = apply_single_photon_map(
        state, SIGNAL, lambda m: [(TimeFreqMode(m.t_index + 1, m.f_index), scale)]
    )
    assert out.probability() <= state.probability() + 1e-9


@given(sparse_states())
@settings(max_examples=60, deadline=None)
def test_normalize_is_idempotent(state):
    n1 = normalize(state)
    n2 = normalize(n1)
    assert n2.probability() == pytest.approx(1.0, abs=1e-12)
    for key, val in n1.amplitudes.items():
        assert n2.amplitudes[key] == pytest.approx(val, abs=1e-12)
