"""Covariance of lattice-point counting errors for pairs of ellipses."""
from .quadform import (FreqKey, QuadForm, Spectrum, SpectrumEntry, common_arrays,
                       common_frequencies, curvature_radius, enumerate_spectrum,
                       freq_coefficient, normalize, y_key)

__version__ = "0.1.0"
