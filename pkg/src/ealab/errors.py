"""Error taxonomy shared by all modules.

Every failure mode maps to one of these classes so CLI exit-code policy can
distinguish configuration problems (exit 2) from assertion failures (exit 1).
"""


class LabError(Exception):
    """Base class for all package errors."""


class SizingError(LabError):
    """A dimension, cap, or enumeration budget was exceeded or is degenerate."""


class StructuralError(LabError):
    """Indices, graph elements, or inputs are inconsistent with the substrate."""


class UnsupportedKindError(LabError):
    """Operation requested on a lattice kind that does not support it."""


class PreconditionError(LabError):
    """A documented operation precondition does not hold for the inputs."""


class DegenerateDisorderError(LabError):
    """Tie audit failed: the disorder realization produced equal values/energies."""


class VerificationError(LabError):
    """A postcondition check failed; indicates a solver bug or tolerance breach."""


class InconsistencyError(LabError):
    """Internal cross-check disagreement (would contradict a proven lemma)."""


class ConfigError(LabError):
    """Unknown suite/event/statistic name or malformed run configuration."""
