"""UGC Rank - learning-to-rank image quality from synthetically distorted pairs."""

__version__ = "0.1.0"
__author__ = "NZR Group"
