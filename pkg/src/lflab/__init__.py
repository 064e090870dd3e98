"""Gamma powers as exponential functionals of spectrally negative Levy processes.

Formulas, samplers, a path simulator and a registry of numerical checks.
"""

from .levy import FrechetParams, frechet_exponent, patie_exponent
from .samplers import DistSpec, RngStream, sample, split_stream

__version__ = "0.1.0"

__all__ = ["FrechetParams", "frechet_exponent", "patie_exponent", "DistSpec", "RngStream", "sample",
           "split_stream", "__version__"]
