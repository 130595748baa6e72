"""Binary-tree multi-level time-bin encoding.

Each level of the tree encodes one qubit; the outermost level (largest
time shift) is the most significant bit.  The default two-level spec is
T (300 ps shift, 3.75 GHz tone) over t (100 ps shift, 1.25 GHz tone),
giving the irregular physical bin positions 0, 100, 300, 400 ps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import IncompatibleShift, LengthMismatch, OutOfRange
from .modes import ModeGrid


@dataclass(frozen=True)
class Level:
    name: str
    shift_ps: float  # time-bin separation bridged by this level's splitter
    rf_frequency_ghz: float


@dataclass(frozen=True)
class LevelSpec:
    """Ordered levels, outermost (largest shift) first."""

    levels: tuple[Level, ...]

    def __post_init__(self):
        names = [lv.name for lv in self.levels]
        if len(set(names)) != len(names):
            raise ValueError("duplicate level names")

    @property
    def count(self) -> int:
        return len(self.levels)

    def level(self, name: str) -> Level:
        for lv in self.levels:
            if lv.name == name:
                return lv
        raise KeyError(name)

    def index_of(self, name: str) -> int:
        for k, lv in enumerate(self.levels):
            if lv.name == name:
                return k
        raise KeyError(name)


@dataclass(frozen=True)
class BinLayout:
    """Physical bin arrival times, ordered by bin index.

    bin index read as a binary number gives the branch bits, most
    significant bit = outermost level.
    """

    positions_ps: tuple[float, ...]

    def __post_init__(self):
        pos = self.positions_ps
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("bin positions must be strictly increasing")
        n = len(pos)
        if n & (n - 1) or n == 0:
            raise ValueError("bin count must be a power of two")

    @property
    def count(self) -> int:
        return len(self.positions_ps)

    @property
    def level_count(self) -> int:
        return self.count.bit_length() - 1

    def position(self, bin_index: int) -> float:
        return self.positions_ps[bin_index]


def default_levels() -> LevelSpec:
    return LevelSpec((Level("T", 300.0, 3.75), Level("t", 100.0, 1.25)))


def layout_from_levels(spec: LevelSpec) -> BinLayout:
    """Canonical layout: position(bin) = sum of the shifts of set branch bits.

    Valid only when every level's shift exceeds the sum of the inner
    shifts, so bin order by position equals binary order.
    """
    shifts = [lv.shift_ps for lv in spec.levels]
    for k, s in enumerate(shifts):
        if s <= sum(shifts[k + 1:]):
            raise IncompatibleShift(
                f"level {spec.levels[k].name}: shift {s} ps does not clear inner levels"
            )
    n = 1 << spec.count
    positions = []
    for b in range(n):
        bits = bin_to_bits_count(spec.count, b)
        positions.append(sum(s for s, bit in zip(shifts, bits) if bit))
    return BinLayout(tuple(positions))


def bin_to_bits_count(n_levels: int, bin_index: int) -> tuple[int, ...]:
    if not 0 <= bin_index < (1 << n_levels):
        raise OutOfRange(f"bin {bin_index} outside 0..{(1 << n_levels) - 1}")
    return tuple((bin_index >> (n_levels - 1 - k)) & 1 for k in range(n_levels))


def bin_to_bits(layout: BinLayout, bin_index: int) -> tuple[int, ...]:
    """Branch bits taken at each tree level, outermost level first."""
    return bin_to_bits_count(layout.level_count, bin_index)


def bits_to_bin(layout: BinLayout, bits) -> int:
    bits = tuple(bits)
    if len(bits) != layout.level_count:
        raise LengthMismatch(
            f"expected {layout.level_count} bits, got {len(bits)}"
        )
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    out = 0
    for b in bits:
        out = (out << 1) | b
    return out


def extend_levels(spec: LevelSpec, new_level: Level, grid: ModeGrid | None = None) -> LevelSpec:
    """Add an outer level with twice the bin count.

    The new shift must sit on the mode grid and must clear the span of the
    existing layout so the uniform-shift property survives at every level.
    """
    grid = grid or ModeGrid()
    steps = new_level.shift_ps / grid.time_quantum_ps
    if abs(steps - round(steps)) > 1e-9:
        raise IncompatibleShift(
            f"shift {new_level.shift_ps} ps is not a multiple of "
            f"{grid.time_quantum_ps} ps"
        )
    extended = LevelSpec((new_level,) + spec.levels)
    layout_from_levels(extended)  # raises IncompatibleShift if invalid
    return extended


def uniform_shift_offsets(layout: BinLayout) -> tuple[float, ...]:
    """Per-level offset between paired |0> and |1> branch bins.

    Raises IncompatibleShift if any level's pairs are not uniformly spaced.
    """
    n_levels = layout.level_count
    out = []
    for k in range(n_levels):
        flip = 1 << (n_levels - 1 - k)
        deltas = {
            round(layout.position(b | flip) - layout.position(b), 9)
            for b in range(layout.count)
            if not b & flip
        }
        if len(deltas) != 1:
            raise IncompatibleShift(f"level index {k}: non-uniform pair shifts {sorted(deltas)}")
        out.append(deltas.pop())
    return tuple(out)
