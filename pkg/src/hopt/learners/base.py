"""Failure type shared by every learner."""

from __future__ import annotations


class FitFailure(RuntimeError):
    """A learner could not produce a usable model for the given configuration.

    HOpt scores such configurations as the worst loss instead of aborting.
    """

    def __init__(self, message: str, config=None) -> None:
        super().__init__(message)
        self.config = config
