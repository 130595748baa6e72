"""Binary-tree bin layouts and level specifications."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clustersim.encoding import (
    BinLayout,
    Level,
    LevelSpec,
    bin_to_bits,
    bits_to_bin,
    default_levels,
    extend_levels,
    layout_from_levels,
    uniform_shift_offsets,
)
from clustersim.errors import IncompatibleShift, LengthMismatch, OutOfRange
from clustersim.modes import ModeGrid


def test_default_layout_positions():
    layout = layout_from_levels(default_levels())
    assert layout.positions_ps == (0.0, 100.0, 300.0, 400.0)
    assert layout.level_count == 2


def test_bin_bits_msb_is_outer_level():
    layout = layout_from_levels(default_levels())
    # bin 2 = binary 10: T branch taken, t branch not
    assert bin_to_bits(layout, 2) == (1, 0)
    assert layout.position(2) == 300.0
    assert bits_to_bin(layout, (1, 0)) == 2


def test_bits_round_trip_and_errors():
    layout = layout_from_levels(default_levels())
    for b in range(4):
        assert bits_to_bin(layout, bin_to_bits(layout, b)) == b
    with pytest.raises(OutOfRange):
        bin_to_bits(layout, 4)
    with pytest.raises(LengthMismatch):
        bits_to_bin(layout, (0, 1, 1))


def test_incompatible_shift_rejected():
    bad = LevelSpec((Level("A", 90.0, 1.0), Level("B", 100.0, 1.25)))
    with pytest.raises(IncompatibleShift):
        layout_from_levels(bad)


def test_layout_validation():
    with pytest.raises(ValueError):
        BinLayout((0.0, 100.0, 50.0, 400.0))  # not increasing
    with pytest.raises(ValueError):
        BinLayout((0.0, 100.0, 300.0))  # not a power of two


def test_extend_to_three_levels():
    extended = extend_levels(
        default_levels(), Level("tau", 900.0, 0.4166666667), ModeGrid()
    )
    layout = layout_from_levels(extended)
    assert layout.count == 8
    assert layout.positions_ps == (
        0.0, 100.0, 300.0, 400.0, 900.0, 1000.0, 1200.0, 1300.0,
    )
    assert uniform_shift_offsets(layout) == (900.0, 300.0, 100.0)


def test_extend_rejects_overlapping_outer_shift():
    with pytest.raises(IncompatibleShift):
        extend_levels(default_levels(), Level("tau", 400.0, 1.0), ModeGrid())
    with pytest.raises(IncompatibleShift):
        # off the 100 ps grid
        extend_levels(default_levels(), Level("tau", 950.0, 1.0), ModeGrid())


def test_uniform_shift_offsets_default():
    layout = layout_from_levels(default_levels())
    assert uniform_shift_offsets(layout) == (300.0, 100.0)


def test_duplicate_level_names_rejected():
    with pytest.raises(ValueError):
        LevelSpec((Level("T", 300.0, 3.75), Level("T", 100.0, 1.25)))


@given(st.integers(min_value=1, max_value=6), st.integers(min_value=0))
def test_bits_round_trip_any_depth(n_levels, raw):
    shifts = [100.0 * 2 ** (n_levels - 1 - k) for k in range(n_levels)]
    spec = LevelSpec(
        tuple(Level(f"L{k}", s, 1.0 + k) for k, s in enumerate(shifts))
    )
    layout = layout_from_levels(spec)
    b = raw % layout.count
    assert bits_to_bin(layout, bin_to_bits(layout, b)) == b
    # position equals the sum of the set branch shifts
    bits = bin_to_bits(layout, b)
    assert layout.position(b) == sum(
        s for s, bit in zip(shifts, bits) if bit
    )
