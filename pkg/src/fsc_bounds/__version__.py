"""Defines the version of the fsc-bounds package."""

__version__ = "0.1.0"
