"""Unit conventions shared across the package.

Energies are stored as E/h in GHz, times in ns, and fluxes as dimensionless
reduced flux in radians.  With these choices the only dimensional constant
needed anywhere is h/hbar = 2*pi: a state with energy E (GHz) acquires phase
exp(-1j * TWO_PI * E * t) over t nanoseconds.
"""

import math

TWO_PI = 2.0 * math.pi
