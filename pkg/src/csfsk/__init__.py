"""Matched-filter and chipping-sequence receivers for sparse FSK signalling."""

__version__ = "0.1.0"
