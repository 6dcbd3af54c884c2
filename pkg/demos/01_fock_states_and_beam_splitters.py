#!/usr/bin/env python3
"""Walk through the basic objects: sector bases, beam splitters, and the
Hong-Ou-Mandel effect.

Every state lives in a direct sum over total-particle-number sectors; a
passive linear unitary acts sector by sector through operator substitution.
"""

import math

import numpy as np

from bosonpe import enumerate_basis, lift_unitary, ModeUnitary

print("Canonical basis of two modes with two particles:")
basis = enumerate_basis(2, 2)
for occ in basis.states:
    print("   |%d,%d>" % occ)

print("\nA balanced beam splitter sends a_0 -> (a_0 - a_1)/sqrt(2):")
u = ModeUnitary(np.array([[1, 1], [-1, 1]]) / math.sqrt(2))
one_photon = np.zeros(2)
one_photon[enumerate_basis(2, 1).index((1, 0))] = 1.0
print("   |1,0>  ->", np.round(lift_unitary(u, 1) @ one_photon, 6))

print("\nTwo photons, one per port (Hong-Ou-Mandel):")
two_photons = np.zeros(basis.dim)
two_photons[basis.index((1, 1))] = 1.0
out = lift_unitary(u, 2) @ two_photons
for occ, amp in zip(basis.states, out):
    print("   <%d,%d| U |1,1> = %+.6f" % (occ[0], occ[1], amp.real))
print("The photons always leave together: the |1,1> amplitude vanishes.")
