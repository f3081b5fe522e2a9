"""Exception hierarchy for qfc."""


class QFCError(Exception):
    """Base class for all errors raised by qfc."""


class InconsistentStateError(QFCError, ValueError):
    """A (density, pump) pair does not satisfy the mean-field fixed point."""


class EvanescentModeError(QFCError, ValueError):
    """The in-plane momentum exceeds the light cone, c k > omega_L."""


class RegimeError(QFCError, ValueError):
    """A regime-specific formula was called on a mode of the wrong class."""


class DegenerateModeError(QFCError, ValueError):
    """The mode sits on a regime boundary where the closed form is singular."""


class UnstableStateError(QFCError, ValueError):
    """The homogeneous state is dynamically unstable; no stationary state exists."""


class UnphysicalStateError(QFCError, ValueError):
    """Second moments violate (n + 1/2)^2 - |c|^2 >= 1/4."""


class NoOptimalDisplacementError(QFCError, ValueError):
    """|c| <= n: no displacement produces antibunching."""


class ResonantResponseError(QFCError, ValueError):
    """The linear-response matrix is singular."""


class ConvergenceError(QFCError, RuntimeError):
    """An iterative oracle failed to converge."""
