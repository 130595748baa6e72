"""Segment-scheduled coincidence detection.

One 180 ns RF frame holds 18 segments of 10 ns; interleaving signal and
idler segments (48 ns apart, 5 segments) realizes all nine joint
beam-splitter settings in parallel.  Exact output-bin probabilities are
degraded by interference-visibility penalties, detector jitter and
uniform background, then realized as Poisson counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cpm import BeamSplitterSetting, CpmSettings, PhotonMeasurement, measurement_map
from .encoding import BinLayout, LevelSpec, bin_to_bits, layout_from_levels
from .errors import MissingBasis, UnsupportedLevels
from .modes import (
    IDLER,
    SIGNAL,
    JointTwoPhotonState,
    ModeGrid,
    apply_single_photon_map,
)


@dataclass(frozen=True)
class SegmentEntry:
    segment_index: int
    photon: str  # "signal" | "idler"
    setting: BeamSplitterSetting


@dataclass(frozen=True)
class PairingRecord:
    """One joint setting: which segments measure the paired photons."""

    name: str
    signal_segment: int
    idler_segment: int
    signal_setting: BeamSplitterSetting
    idler_setting: BeamSplitterSetting


@dataclass(frozen=True)
class SegmentSchedule:
    frame_period_ns: float
    segment_length_ns: float
    entries: tuple[SegmentEntry, ...]
    pairing: tuple[PairingRecord, ...]

    def __post_init__(self):
        n = self.frame_period_ns / self.segment_length_ns
        if abs(n - round(n)) > 1e-9:
            raise ValueError("frame period must be a whole number of segments")
        used = [e.segment_index for e in self.entries]
        if len(set(used)) != len(used):
            raise ValueError("segments assigned more than once")
        if any(not 0 <= s < round(n) for s in used):
            raise ValueError("segment index outside the frame")

    @property
    def segment_count(self) -> int:
        return int(round(self.frame_period_ns / self.segment_length_ns))


@dataclass(frozen=True)
class DetectorModel:
    """Timing jitter, coincidence windowing and background."""

    jitter_signal_ps: float = 17.0
    jitter_idler_ps: float = 17.0
    tdc_jitter_ps: float = 18.0
    coincidence_window_ps: float = 50.0  # half-width around bin centers
    dark_coincidence_rate: float = 0.0  # fraction of detected coincidences
    efficiency: float = 1.0

    def __post_init__(self):
        if min(self.jitter_signal_ps, self.jitter_idler_ps, self.tdc_jitter_ps) < 0:
            raise ValueError("jitters must be nonnegative")
        if self.coincidence_window_ps <= 0:
            raise ValueError("coincidence window must be positive")
        if not 0.0 <= self.dark_coincidence_rate < 1.0:
            raise ValueError("dark fraction must lie in [0, 1)")
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must lie in (0, 1]")

    def photon_sigma_ps(self, photon: str) -> float:
        base = self.jitter_signal_ps if photon == SIGNAL else self.jitter_idler_ps
        return math.hypot(base, self.tdc_jitter_ps)


@dataclass(frozen=True)
class JointTemporalIntensity:
    """Coincidence histogram over (signal bin, idler bin) for one setting."""

    name: str
    signal_setting: BeamSplitterSetting
    idler_setting: BeamSplitterSetting
    counts: np.ndarray  # (n_bins, n_bins)
    ancillary: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=float)
        if c.ndim != 2 or np.any(c < 0):
            raise ValueError("counts must be a nonnegative matrix")
        object.__setattr__(self, "counts", c)


def default_settings(levels: LevelSpec) -> tuple[BeamSplitterSetting, ...]:
    """The three per-photon settings Z, X_t, X_T (unmodulated + one tone)."""
    if levels.count != 2:
        raise UnsupportedLevels(f"default schedule needs 2 levels, got {levels.count}")
    inner, outer = levels.levels[1].name, levels.levels[0].name
    return (
        BeamSplitterSetting("Z", inner),
        BeamSplitterSetting("X", inner),
        BeamSplitterSetting("X", outer),
    )


def build_default_schedule(levels: LevelSpec) -> SegmentSchedule:
    """Canonical 18-segment frame covering all 9 joint settings.

    Signal photons occupy even segments 0..16; each idler segment sits
    5 segments (50 ns ~ the 48 ns pair separation) after its partner.
    """
    settings = default_settings(levels)
    entries: list[SegmentEntry] = []
    pairing: list[PairingRecord] = []
    names = "abcdefghi"
    for k in range(9):
        s_setting = settings[k // 3]
        i_setting = settings[k % 3]
        s_seg = 2 * k
        i_seg = (s_seg + 5) % 18
        entries.append(SegmentEntry(s_seg, SIGNAL, s_setting))
        entries.append(SegmentEntry(i_seg, IDLER, i_setting))
        pairing.append(PairingRecord(names[k], s_seg, i_seg, s_setting, i_setting))
    return SegmentSchedule(180.0, 10.0, tuple(entries), tuple(pairing))


def _penalty_branches(
    setting: BeamSplitterSetting, penalty: dict[str, float] | None
):
    """Dephasing mixture implementing a fringe-visibility penalty.

    Splitting the RF phase between alpha and alpha + pi with weights
    (1 +/- sqrt(V))/2 multiplies every single-photon interference cross
    term by sqrt(V), so a joint fringe acquires exactly visibility V
    (or V_s * V_i when both photons are penalized).
    """
    if setting.kind == "Z" or not penalty:
        return ((1.0, 0.0),)
    v = float(penalty.get(setting.level, 1.0))
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility penalty {v} outside [0, 1]")
    if v >= 1.0:
        return ((1.0, 0.0),)
    s = math.sqrt(v)
    return ((0.5 * (1.0 + s), 0.0), (0.5 * (1.0 - s), math.pi))


def joint_outcome_probabilities(
    state: JointTwoPhotonState,
    signal_setting: BeamSplitterSetting,
    idler_setting: BeamSplitterSetting,
    levels: LevelSpec,
    base: CpmSettings | None = None,
    layout: BinLayout | None = None,
    visibility_penalty: dict[str, float] | None = None,
) -> np.ndarray:
    """Exact coincidence probability for every (signal bin, idler bin).

    The matrix sums to the jointly retained probability (state norm times
    the two splitter efficiencies); it is not renormalized here.
    """
    base = base or CpmSettings()
    layout = layout or layout_from_levels(levels)
    grid = state.grid
    steps_of_bin = {
        b: grid.t_steps(layout.position(b) - grid.time_origin_ps)
        for b in range(layout.count)
    }
    bin_of_steps = {s: b for b, s in steps_of_bin.items()}
    n = layout.count
    probs = np.zeros((n, n))
    s_branches = _penalty_branches(signal_setting, visibility_penalty)
    i_branches = _penalty_branches(idler_setting, visibility_penalty)
    for ws, offs in s_branches:
        ms = measurement_map(signal_setting, levels, base, grid, layout, offs)
        after_s = apply_single_photon_map(state, SIGNAL, ms.mode_map)
        for wi, offi in i_branches:
            mi = measurement_map(idler_setting, levels, base, grid, layout, offi)
            out = apply_single_photon_map(after_s, IDLER, mi.mode_map)
            for (s_mode, i_mode), amp in out.amplitudes.items():
                bs = bin_of_steps.get(s_mode.t_index)
                bi = bin_of_steps.get(i_mode.t_index)
                if bs is not None and bi is not None:
                    probs[bs, bi] += ws * wi * abs(amp) ** 2
    return probs


def jitter_transition_matrix(
    sigma_ps: float, layout: BinLayout, window_half_ps: float
) -> np.ndarray:
    """K[b, b'] = P(arrival recorded in bin b' window | emitted in bin b).

    Gaussian arrival-time smearing integrated over each bin's coincidence
    window; rows sum to < 1, the rest falls outside every window.
    """
    n = layout.count
    if sigma_ps == 0.0:
        return np.eye(n)
    k = np.zeros((n, n))
    denom = sigma_ps * math.sqrt(2.0)
    for b in range(n):
        center = layout.position(b)
        for b2 in range(n):
            lo = layout.position(b2) - window_half_ps
            hi = layout.position(b2) + window_half_ps
            k[b, b2] = 0.5 * (
                math.erf((hi - center) / denom) - math.erf((lo - center) / denom)
            )
    return k


def expected_counts(
    state: JointTwoPhotonState,
    pairing: PairingRecord,
    detector: DetectorModel,
    pairs_per_setting: int,
    levels: LevelSpec,
    base: CpmSettings | None = None,
    layout: BinLayout | None = None,
    visibility_penalty: dict[str, float] | None = None,
) -> tuple[np.ndarray, float]:
    """Mean coincidence counts per (signal bin, idler bin) and ancillary mean.

    Background coincidences are folded in as a uniform fraction
    dark_coincidence_rate of the detected total.
    """
    layout = layout or layout_from_levels(levels)
    probs = joint_outcome_probabilities(
        state, pairing.signal_setting, pairing.idler_setting,
        levels, base, layout, visibility_penalty,
    )
    ks = jitter_transition_matrix(
        detector.photon_sigma_ps(SIGNAL), layout, detector.coincidence_window_ps
    )
    ki = jitter_transition_matrix(
        detector.photon_sigma_ps(IDLER), layout, detector.coincidence_window_ps
    )
    smeared = ks.T @ probs @ ki
    scale = pairs_per_setting * detector.efficiency
    total = smeared.sum()
    d = detector.dark_coincidence_rate
    mean = scale * ((1.0 - d) * smeared + d * total / smeared.size)
    ancillary = scale * max(state.norm_tracking - total, 0.0)
    return mean, ancillary


def sample_coincidences(
    state: JointTwoPhotonState,
    schedule: SegmentSchedule,
    detector: DetectorModel,
    pairs_per_setting: int,
    visibility_penalty: dict[str, float] | None = None,
    seed: int = 0,
    levels: LevelSpec | None = None,
    base: CpmSettings | None = None,
    exact: bool = False,
) -> list[JointTemporalIntensity]:
    """Histogram of coincidences for every joint setting of the schedule.

    With exact=True the mean counts are returned unsampled (infinite
    statistics); otherwise each cell is an independent Poisson draw,
    reproducible via per-setting child seeds.
    """
    from .encoding import default_levels

    levels = levels or default_levels()
    layout = layout_from_levels(levels)
    children = np.random.SeedSequence(seed).spawn(len(schedule.pairing))
    out = []
    for pairing, child in zip(schedule.pairing, children):
        mean, ancillary = expected_counts(
            state, pairing, detector, pairs_per_setting,
            levels, base, layout, visibility_penalty,
        )
        if exact:
            counts, anc = mean, ancillary
        else:
            rng = np.random.default_rng(child)
            counts = rng.poisson(mean).astype(float)
            anc = float(rng.poisson(ancillary))
        out.append(
            JointTemporalIntensity(
                pairing.name, pairing.signal_setting, pairing.idler_setting,
                counts, anc,
            )
        )
    return out


WITNESS_BASES = ("ZZZZ", "ZZXX", "XXZZ")


def _basis_of_pairing(
    signal_setting: BeamSplitterSetting,
    idler_setting: BeamSplitterSetting,
    levels: LevelSpec,
) -> str | None:
    """Witness basis label (qubit order T_s, T_i, t_s, t_i) for matched settings."""
    if signal_setting.kind != idler_setting.kind:
        return None
    if signal_setting.kind == "Z":
        return "ZZZZ"
    if signal_setting.level != idler_setting.level:
        return None
    outer = levels.levels[0].name
    return "XXZZ" if signal_setting.level == outer else "ZZXX"


def _outcome_index(
    bs: int, bi: int, basis: str, layout: BinLayout
) -> int:
    """Outcome bit string (T_s, T_i, t_s, t_i) from the measured bin pair.

    Z-read levels report the branch bit directly; X-read levels report
    the splitter output port, whose "+1" port is the opposite bin (the
    J0 path keeps the bin, so a photon surfacing in its partner bin took
    the interference path).  The convention is pinned by requiring all
    six stabilizer expectations to be +1 on the ideal state.
    """
    s_bits = bin_to_bits(layout, bs)
    i_bits = bin_to_bits(layout, bi)
    # qubit order (T_s, T_i, t_s, t_i) = (outer_s, outer_i, inner_s, inner_i)
    raw = (s_bits[0], i_bits[0], s_bits[1], i_bits[1])
    measured_x = (basis[0] == "X", basis[1] == "X", basis[2] == "X", basis[3] == "X")
    bits = tuple(1 - b if x else b for b, x in zip(raw, measured_x))
    return bits[0] << 3 | bits[1] << 2 | bits[2] << 1 | bits[3]


def raw_basis_counts(
    histograms: list[JointTemporalIntensity],
    levels: LevelSpec | None = None,
) -> dict[str, np.ndarray]:
    """Raw (unnormalized) 16-outcome counts for each witness basis.

    Bin pairs are folded to outcome indices via the stabilizer outcome
    convention; no efficiency correction or normalization is applied, so
    these are the counts to feed into Poisson resampling.
    """
    from .encoding import default_levels

    levels = levels or default_levels()
    layout = layout_from_levels(levels)
    out: dict[str, np.ndarray] = {}
    for h in histograms:
        basis = _basis_of_pairing(h.signal_setting, h.idler_setting, levels)
        if basis is None or basis in out:
            continue
        values = np.zeros(16)
        for bs in range(layout.count):
            for bi in range(layout.count):
                values[_outcome_index(bs, bi, basis, layout)] += h.counts[bs, bi]
        out[basis] = values
    missing = [b for b in WITNESS_BASES if b not in out]
    if missing:
        raise MissingBasis(f"histograms lack bases {missing}")
    return {b: out[b] for b in WITNESS_BASES}


def extract_projections(
    histograms: list[JointTemporalIntensity],
    schedule: SegmentSchedule,
    levels: LevelSpec | None = None,
) -> dict[str, np.ndarray]:
    """48 normalized projection values: 3 witness bases x 16 outcomes.

    Z-only settings keep the full beam-splitter-free throughput, so their
    counts are rescaled by the splitter efficiency 0.601 per Z photon
    before each basis is normalized to sum 1 (the rescale cancels in the
    normalization but mirrors the published analysis).
    """
    from .bessel import efficiency, solve_balanced_depth
    from .encoding import default_levels

    levels = levels or default_levels()
    eta = efficiency(solve_balanced_depth())
    z_photons = {
        _basis_of_pairing(h.signal_setting, h.idler_setting, levels) or "": sum(
            1 for s in (h.signal_setting, h.idler_setting) if s.kind == "Z"
        )
        for h in histograms
    }
    raw = raw_basis_counts(histograms, levels)
    out: dict[str, np.ndarray] = {}
    for basis, values in raw.items():
        corrected = values * eta ** z_photons.get(basis, 0)
        total = corrected.sum()
        if total <= 0:
            raise MissingBasis(f"basis {basis} has no counts")
        out[basis] = corrected / total
    return out
