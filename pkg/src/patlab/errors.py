"""Exception types raised across the package.

Everything derives from PatlabError (a ValueError) so callers can catch
broadly; the CLI maps any PatlabError to exit code 1 with a JSON report.
"""


class PatlabError(ValueError):
    """Base class for all patlab errors."""


class RowLengthMismatch(PatlabError):
    """A bond-table row does not match the topology arity."""


class BondValueOutOfRange(PatlabError):
    """A bond value exceeds the number of template generators."""


class IndexOutOfRange(PatlabError):
    """A flattened generator index lies outside 1..|G|."""


class InvalidDirection(PatlabError):
    """A direction index lies outside 1..arity."""


class UnsupportedVariant(PatlabError):
    """The requested growth variant is not handled by this operation."""


class DimensionMismatch(PatlabError):
    """Two lattices (or a lattice and a contract) disagree on shape."""


class LabelOutOfRange(PatlabError):
    """A label lattice contains values outside its documented range."""


class LTooLarge(PatlabError):
    """A pixel-ordering length exceeds the number of lattice sites."""


class CountMismatch(PatlabError):
    """Two sample collections disagree on length."""


class MissingClass(PatlabError):
    """A training set lacks samples for at least one class."""


class BadMagic(PatlabError):
    """A binary file does not start with the expected magic bytes."""


class TruncatedFile(PatlabError):
    """A binary file payload does not match its declared size."""


class TooManyGenerators(PatlabError):
    """A configuration holds more generator kinds than letters available."""
