"""Dissipative Stern-Gerlach interferometer simulator.

From SQUID circuit parameters to the effective Ohmic bath, the closed-form
dissipative propagator, spin coherence, the attenuation factor h(t) and the
decoherence time.
"""

from .constants import HBAR, KB, MU_B, PHI0
from .model import ApparatusParams, DerivedBath, SquidParams, derive_bath
from .propagator import CoeffSet, ForceProfile, balanced_profile, coefficients
from .density import CoherenceTrace, coherence, decoherence_time, h_factor, make_trace

__version__ = "0.1.0"

__all__ = [
    "HBAR",
    "KB",
    "MU_B",
    "PHI0",
    "ApparatusParams",
    "DerivedBath",
    "SquidParams",
    "derive_bath",
    "CoeffSet",
    "ForceProfile",
    "balanced_profile",
    "coefficients",
    "CoherenceTrace",
    "coherence",
    "decoherence_time",
    "h_factor",
    "make_trace",
]
