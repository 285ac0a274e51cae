"""Physical constants (CODATA 2018, SI units)."""

from math import pi

PLANCK = 6.62607015e-34  # J s
HBAR = PLANCK / (2 * pi)  # J s
BOLTZMANN = 1.380649e-23  # J/K
SPEED_OF_LIGHT = 299792458.0  # m/s
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg

RB87_MASS = 86.909180527 * ATOMIC_MASS_UNIT  # kg
RB87_D1_LINEWIDTH = 2 * pi * 5.746e6  # rad/s, full linewidth 2γ of the 795 nm line
RB87_D1_WAVELENGTH = 794.979e-9  # m
