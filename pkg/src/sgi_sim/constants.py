"""Physical constants (CODATA, SI units)."""

import math

HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23  # J / K
PHI0 = 2.067833848e-15  # Wb, flux quantum h / 2e
MU_B = 9.2740100783e-24  # J / T
MU0 = 4.0e-7 * math.pi  # T m / A
