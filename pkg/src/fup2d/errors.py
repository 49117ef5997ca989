"""Exception types raised by the library.

The CLI maps these onto exit codes: :class:`ResourceCapError` gives 3 and
:class:`TheoremViolationError` gives 4.
"""


class FUPError(Exception):
    """Base class for library errors."""


class ResourceCapError(FUPError):
    """A dense operator would exceed the configured matrix-entry cap."""

    def __init__(self, entries, cap):
        self.entries = entries
        self.cap = cap
        super().__init__(
            f"dense operator needs {entries} entries, above matrix_entry_cap={cap} "
            "(raise it with FUP_CAP or --cap)"
        )


class InvalidModulusError(FUPError, ValueError):
    """The modulus is not a power of the alphabet base."""


class NotIrreducibleError(FUPError, ValueError):
    """Line coefficients are not coprime modulo N."""


class HorizontalDirectionError(FUPError, ValueError):
    """Interval machinery was asked for a direction with b = 0."""


class ConstructionFailedError(FUPError):
    """A sharpness witness left the Cantor iterate it was built for."""

    def __init__(self, message, point=None):
        self.point = point
        super().__init__(message if point is None else f"{message} at grid point {point}")


class TheoremViolationError(FUPError):
    """A search guaranteed to succeed came back empty (numerical rank failure)."""

    def __init__(self, message, payload=None):
        self.payload = payload or {}
        super().__init__(message)


class UnsupportedCaseError(FUPError, ValueError):
    """Coefficients are not rational, so the seven-polynomial cover does not apply."""


class UnsupportedLatticeError(FUPError, ValueError):
    """The exponent lattice of the polynomial is a proper sublattice of Z^2."""


class PolySyntaxError(FUPError, ValueError):
    """Malformed polynomial expression."""

    def __init__(self, message, column):
        self.column = column
        super().__init__(f"column {column}: {message}")
