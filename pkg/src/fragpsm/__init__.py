"""Bounded symbolic verification of 802.11 fragmentation and power-save mode."""

__version__ = "0.1.0"
