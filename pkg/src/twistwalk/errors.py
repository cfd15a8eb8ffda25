"""Exception types raised by the simulator."""


class TwistwalkError(Exception):
    """Base class for all simulator errors."""


class ValidationError(TwistwalkError):
    """A parameter is outside its allowed domain."""


class WindowError(TwistwalkError):
    """A state or envelope does not fit the requested OAM window."""


class TruncationError(TwistwalkError):
    """Evolution pushed significant amplitude onto the window boundary."""


class DegenerateBandError(TwistwalkError):
    """Quasi-energy bands coincide somewhere on the requested grid."""


class NotPlanarError(TwistwalkError):
    """Coin eigenstates do not lie on a great circle of the Poincare sphere."""


class QuadratureError(TwistwalkError):
    """A radial overlap integral failed to converge."""


class ZeroEfficiencyError(TwistwalkError):
    """Detection efficiency vanishes on the support of a distribution."""


class AmplitudeRangeError(TwistwalkError):
    """Hologram target amplitude is outside [0, 1]."""


class ZeroCountError(TwistwalkError):
    """All counts entering an inequality term are zero."""


class EmptyDistributionError(TwistwalkError):
    """A metric was requested for an empty probability distribution."""
