"""Physical constants (CODATA 2018, exact SI where defined)."""

import math

HBAR = 1.054571817e-34          # J s
H_PLANCK = 6.62607015e-34       # J s (exact)
K_B = 1.380649e-23              # J/K (exact)
EPS0 = 8.8541878128e-12         # F/m
C_LIGHT = 2.99792458e8          # m/s (exact)

# first zero of J0
X01 = 2.404825557695773

TWO_PI = 2.0 * math.pi
