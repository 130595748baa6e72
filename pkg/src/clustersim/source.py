"""Gate-free cluster-state generation.

Four coherent excitation pulses with per-pulse phases are frequency
doubled (which doubles each applied phase) and down-converted into a
photon pair whose signal/idler time bins are perfectly correlated with
the pump pulse.  With phases (0, 0, 0, pi/2) the doubled phases are
(0, 0, 0, pi), producing amplitudes (1/2, 1/2, 1/2, -1/2): the four-qubit
cluster state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import BinLayout
from .errors import LayoutMismatch
from .modes import (
    JointTwoPhotonState,
    ModeGrid,
    TimeFreqMode,
    inner_product,
    normalize,
)


@dataclass(frozen=True)
class ExcitationTrain:
    """Excitation pulse train driving the SHG/SPDC cascade."""

    times_ps: tuple[float, ...] = (0.0, 100.0, 300.0, 400.0)
    phases_rad: tuple[float, ...] = (0.0, 0.0, 0.0, np.pi / 2)
    pulse_fwhm_ps: float = 37.0
    repetition_ns: float = 20.0

    def __post_init__(self):
        if len(self.times_ps) != len(self.phases_rad):
            raise ValueError("times and phases must have the same length")
        if any(b <= a for a, b in zip(self.times_ps, self.times_ps[1:])):
            raise ValueError("pulse times must be strictly increasing")


def shg_phases(train: ExcitationTrain) -> tuple[float, ...]:
    """Second-harmonic phases: each pump phase is doubled (mod 2 pi)."""
    return tuple(float(np.mod(2.0 * p, 2.0 * np.pi)) for p in train.phases_rad)


def generate_pair_state(
    train: ExcitationTrain, layout: BinLayout, grid: ModeGrid
) -> JointTwoPhotonState:
    """Pair state (1/sqrt(K)) sum_k e^{i 2 phi_k} |bin k>_s |bin k>_i.

    SPDC amplitudes are equal across pulses (flat pump envelope); the
    signal-idler 600 GHz offset is not carried as a grid index, only the
    relative structure matters here.
    """
    if len(train.times_ps) != layout.count:
        raise LayoutMismatch(
            f"{len(train.times_ps)} pulses vs {layout.count} bins"
        )
    for t, p in zip(train.times_ps, layout.positions_ps):
        if abs(t - p) > 1e-9:
            raise LayoutMismatch(f"pulse at {t} ps does not match bin at {p} ps")
    doubled = shg_phases(train)
    amps = {}
    for k, (t, phase) in enumerate(zip(train.times_ps, doubled)):
        steps = grid.t_steps(t - grid.time_origin_ps)
        mode = TimeFreqMode(steps, 0)
        amps[(mode, mode)] = np.exp(1j * phase)
    return normalize(JointTwoPhotonState.from_amplitudes(grid, amps))


def ideal_cluster_state(layout: BinLayout, grid: ModeGrid) -> JointTwoPhotonState:
    """The target state with amplitudes (1/2, 1/2, 1/2, -1/2)."""
    train = ExcitationTrain(
        times_ps=layout.positions_ps,
        phases_rad=(0.0,) * (layout.count - 1) + (np.pi / 2,),
    )
    return generate_pair_state(train, layout, grid)


def is_cluster_state(
    state: JointTwoPhotonState, layout: BinLayout
) -> tuple[bool, float]:
    """Overlap fidelity |<cluster|state>|^2 and a pass flag at 1 - 1e-9."""
    target = ideal_cluster_state(layout, state.grid)
    fidelity = float(abs(inner_product(target, state)) ** 2)
    return fidelity > 1.0 - 1e-9, fidelity
