"""Exception types shared by the library and the CLI."""
from __future__ import annotations


class SpaceMismatchError(ValueError):
    """An object was used with a space it does not belong to."""


class EmbeddingValidationError(ValueError):
    """A map that must be an isometry is not one; carries the validation report."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class ChargeCompatibilityError(ValueError):
    """An embedding does not respect the additive charge structure."""


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""
