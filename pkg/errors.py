"""
Exception hierarchy for okbodies.

Every error raised on purpose by the library derives from OklabError so the
CLI can map it to an exit code.

Usage:
    from errors import HypothesisUnmet

    if not classify(X, D).big:
        raise HypothesisUnmet("divisor is not big")
"""
from __future__ import annotations


class OklabError(Exception):
    """Base class for library errors."""
    exit_code: int = 1


# ---------------------- Input problems (exit 2) ----------------------

class SchemaError(OklabError, ValueError):
    """Input JSON does not match the published schema."""
    exit_code = 2


class InvalidModel(OklabError, ValueError):
    """Variety or surface data is inconsistent."""
    exit_code = 2


class DimensionMismatch(OklabError, ValueError):
    exit_code = 2


class NotCoordinateFlat(OklabError, ValueError):
    """Polytope leaves the coordinate subspace a volume was requested in."""
    exit_code = 2


class InfeasibleError(OklabError):
    exit_code = 2


class UnboundedError(OklabError):
    exit_code = 2


# ---------------------- Preconditions (exit 3) ----------------------

class HypothesisUnmet(OklabError):
    """A demanded computation's hypothesis does not hold for this input."""
    exit_code = 3


# ---------------------- Refutations (exit 4) ----------------------

class ClosedFormRefuted(OklabError):
    """An internal cross-check disagrees with a closed form."""
    exit_code = 4

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ExtrapolationError(ClosedFormRefuted):
    """The epsilon schedule ran out before the data became affine in epsilon."""
