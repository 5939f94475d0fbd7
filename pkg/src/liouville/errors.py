"""Exception hierarchy shared across the package."""


class LiouvilleError(Exception):
    """Base class for all package-specific errors."""


class InputError(LiouvilleError, ValueError):
    """Malformed input: bad graph structure, bad parameters, parse failures."""


class IsolatedVertexError(InputError):
    """A vertex has measure zero, so the difference operators are undefined there."""


class HypothesisNotMetError(LiouvilleError):
    """An operation's mathematical hypotheses fail; its conclusion is not a theorem."""


class CalibrationError(LiouvilleError):
    """No passing parameter set found within the search budget."""

    def __init__(self, message, best_margin=None, best_spec=None):
        super().__init__(message)
        self.best_margin = best_margin
        self.best_spec = best_spec
