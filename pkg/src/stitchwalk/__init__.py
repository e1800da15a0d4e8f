"""Simulated CONGEST random walks built by stitching short walks, with exact oracles and applications."""

__version__ = "0.1.0"
