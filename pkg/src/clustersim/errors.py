"""Exception types shared across the simulator."""


class ClusterSimError(Exception):
    """Base class for simulation contract violations."""


class ZeroState(ClusterSimError):
    """All amplitudes fell below the sparsity threshold."""


class NonContractive(ClusterSimError):
    """A mode map would amplify probability beyond unity."""


class OutOfRange(ClusterSimError):
    """Bin index outside the layout."""


class LengthMismatch(ClusterSimError):
    """Bit-string length does not match the number of levels."""


class IncompatibleShift(ClusterSimError):
    """No bin layout satisfies the uniform-shift property for this level."""


class LayoutMismatch(ClusterSimError):
    """Excitation train and bin layout disagree."""


class GridMismatch(ClusterSimError):
    """Derived time/frequency shift does not land on the mode grid."""


class UnknownLevel(ClusterSimError):
    """Measurement references a level absent from the level spec."""


class UnsupportedLevels(ClusterSimError):
    """The default schedule builder only handles two levels."""


class MissingBasis(ClusterSimError):
    """A required joint measurement basis is absent."""


class InsufficientScan(ClusterSimError):
    """Fringe scan does not span enough phase values."""


class InconsistentSettings(ClusterSimError):
    """Modulation frequency and bin separation disagree."""


class WindowOverflow(ClusterSimError):
    """Stretched field would wrap around the sampling window."""


class ConfigError(ClusterSimError):
    """Malformed run configuration."""
