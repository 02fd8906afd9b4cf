"""Subset-sum lossless compression codecs and their exact counting oracles."""

__version__ = "0.1.0"
