"""Estimate 2.5K properties (JDD and degree-dependent clustering) from graph samples and
generate synthetic graphs that match them."""

__version__ = "0.1.0"
