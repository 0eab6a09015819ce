"""Bilinear group providers and the factory that selects one."""

from __future__ import annotations

import logging
from typing import Any, Mapping, Optional

from ..config import SETTINGS
from ..errors import ConfigurationError
from .group import BilinearParams, BilinearProvider, GroupElement, Role
from .providers.mock import MockProvider

logger = logging.getLogger(__name__)


def get_provider(
    name: Optional[str] = None, seed: Optional[int] = None, order: Optional[int] = None
) -> BilinearProvider:
    """Build a provider by name (``production`` or ``mock``)."""
    name = (name or SETTINGS.provider).lower()
    logger.debug(f"Building {name} bilinear provider")
    if name == "mock":
        return MockProvider(
            seed=SETTINGS.mock_seed if seed is None else seed,
            order=SETTINGS.mock_order if order is None else order,
        )
    if name == "production":
        from .providers.bls12_381 import BLS12381Provider

        return BLS12381Provider()
    raise ConfigurationError(f"unknown provider {name!r}")


def provider_from_descriptor(descriptor: Mapping[str, Any]) -> BilinearProvider:
    """Rebuild a provider from :meth:`BilinearProvider.descriptor` output."""
    return get_provider(descriptor.get("name"), descriptor.get("seed"), descriptor.get("order"))


__all__ = [
    "BilinearParams",
    "BilinearProvider",
    "GroupElement",
    "MockProvider",
    "Role",
    "get_provider",
    "provider_from_descriptor",
]
