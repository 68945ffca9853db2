"""Baseband lab for plain, frequency-domain N-continuous and low-interference smoothed OFDM."""

__version__ = "0.1.0"
