"""Symmetric partial Latin squares: censuses of isotopism-invariant squares,
completability reports, bases, and constraint-model export.
"""

__version__ = "0.1.0"
