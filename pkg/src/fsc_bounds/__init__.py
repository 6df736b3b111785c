"""fsc-bounds package root."""

from fsc_bounds.__version__ import __version__

__all__ = ["__version__"]
