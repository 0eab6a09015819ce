"""Multi-authority attribute-based signcryption for smart-grid downlink multicast."""

__version__ = "0.1.0"

__all__ = ["__version__"]
