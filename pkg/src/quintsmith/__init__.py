"""Synthesis pipeline: contract sources in, executable formal model out."""

__version__ = "0.1.0"
