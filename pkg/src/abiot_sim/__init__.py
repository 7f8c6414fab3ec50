"""Simulator for acoustic/RF pest-control tricopters over a crop field."""

from ._kernels import BACKEND
from .config import RunConfig, default_config, load_config

__version__ = "0.1.0"
__all__ = ["BACKEND", "RunConfig", "default_config", "load_config", "__version__"]
