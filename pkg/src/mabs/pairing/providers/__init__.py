"""Concrete bilinear group realizations."""

from .mock import MockProvider

__all__ = ["MockProvider"]
