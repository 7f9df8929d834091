"""Spectral sum-formula toolkit.

Exact arithmetic in real quadratic fields, Kloosterman sums and series,
Plancherel and reference measures, spectral-region geometry, test-function
machinery, Bessel transforms, and error-budget asymptotics, with a CLI
front end.
"""

__version__ = "0.1.0"
