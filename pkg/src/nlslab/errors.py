"""Exception taxonomy.

Two families matter to callers: configuration problems (bad input, bad
scenario file, mismatched branch) and numerical failures (a solve or
eigensolve that did not do its job).  The CLI maps the first family to
exit status 2 and the second to exit status 1.
"""

from __future__ import annotations


class LabError(Exception):
    """Base class for everything raised deliberately by this package."""


class ConfigError(LabError):
    """Invalid parameters, scenario files, or operation preconditions."""


class InvalidPotentialError(ConfigError):
    """A potential evaluated to something non-finite or below its stated bound."""


class TooFewSamplesError(ConfigError):
    """A fit window / amplitude floor combination left too few usable samples."""


class BranchMismatchError(ConfigError):
    """A verdict branch was requested that the spectral data cannot support."""


class SupercriticalExponentError(ConfigError):
    """Growth exponent at or above the critical Sobolev exponent."""


class SlackError(ConfigError):
    """Bootstrap slack outside the admissible open interval."""


class NumericalFailureError(LabError):
    """A numerical routine failed to meet its own acceptance contract."""


class NonConvergenceError(NumericalFailureError):
    """Newton iteration exhausted its budget or stalled at the damping floor.

    Carries the iteration trace and, when raised through a continuation
    ladder, the index of the failing rung.
    """

    def __init__(self, message: str, trace=None, ladder_position: int | None = None):
        super().__init__(message)
        self.trace = trace
        self.ladder_position = ladder_position


class SingularJacobianError(NumericalFailureError):
    """Linearized system was singular; a continuation ladder usually fixes this."""


class InternalInvariantError(LabError):
    """A guard that should be unreachable fired; indicates a bug, not bad input."""
