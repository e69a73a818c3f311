"""Thick sensor sets, covering lattices and spectral constants on hyperbolic surfaces.

Submodules:
    geom        half-plane geometry, balls and volume integrals
    quotient    cusp and funnel ends, fundamental domains, lifts
    covering    maximal R-separated sets and covering checks
    thickness   sensor-set expressions and thickness profiles
    spectral    truncated-cusp eigenmodes, spectral constants, extensions
    heat        heat kernel bounds and the necessity pipeline
    cli         command-line runner
"""

from .errors import HypThickError, NumericalError, ValidationError

__version__ = "0.1.0"

__all__ = ["HypThickError", "NumericalError", "ValidationError", "__version__"]
