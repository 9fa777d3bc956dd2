"""
Physical constants (CODATA, via scipy.constants) and reference atom data
"""
from scipy import constants as _codata

EPSILON_0 = _codata.epsilon_0
SPEED_OF_LIGHT = _codata.c
HBAR = _codata.hbar
BOLTZMANN = _codata.k
ATOMIC_MASS_UNIT = _codata.atomic_mass

# Rb-87 D2 line (5S1/2 -> 5P3/2)
RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT
RB87_D2_WAVELENGTH = 780.241209686e-9
RB87_D2_LINEWIDTH_HZ = 6.0666e6

# Rays closer to the focus than this many wavelengths are not far field
FAR_FIELD_WAVELENGTHS = 100.0
