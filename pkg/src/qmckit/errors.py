"""
Exception types raised by qmckit.

All library errors derive from QMCError. The concrete classes also derive from
ValueError, so callers that only guard against bad input data keep working.
"""

from typing import Optional


class QMCError(Exception):
    """Base class for every error raised by qmckit."""


class ConfigurationError(QMCError, ValueError):
    """A sampler, profile or command was configured with missing or invalid parameters."""


class IndexRangeError(QMCError, ValueError):
    """An index, coordinate or integer argument is outside the supported range."""


class GeneratorVectorError(QMCError, ValueError):
    """A rank-1 lattice generator vector is malformed (even or oversized components)."""


class TableFormatError(QMCError, ValueError):
    """A binary XOR table file or a scramble factor file could not be decoded."""


class IntegrationError(QMCError, ValueError):
    """An integrand produced a non-finite value or an accumulator left its range."""


class DirectionNumberError(QMCError, ValueError):
    """
    A direction-number file violates the Joe-Kuo grammar or the Sobol' invariants.

    Attributes:
        line_number (Optional[int]): 1-based line of the offending record, if known.
    """

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
