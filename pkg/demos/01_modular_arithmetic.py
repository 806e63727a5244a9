"""
Modular inverses and the twisted character psi
==============================================

The basic object is psi(u) = e_p(x u + y u^-1), with psi(0) = 0.
"""

import numpy as np

from kloostlab import PsiParams, batch_inverse, inverse_table, mod_inverse
from kloostlab.modarith import psi_values

# single inverses use Python's built-in modular pow
print("3^-1 mod 7 =", mod_inverse(3, 7))

# many inverses at once: Montgomery's trick needs one inversion in total
p = 10007
vals = list(range(1, 11))
print("inverses of 1..10 mod", p, "->", batch_inverse(vals, p))

# a whole table is cached per prime and read-only
t = inverse_table(101)
assert all(a * t[a] % 101 == 1 for a in range(1, 101))

# psi on an array of residues; zeros are reported, not inverted
params = PsiParams(x=3, y=5, p=p)
u = np.array([0, 1, 2, p - 1, 12345 % p])
z, zero_count = psi_values(params, u)
print("psi values:", np.round(z, 4), "zeros:", zero_count)
print("|psi(u)| = 1 off zero:", np.allclose(np.abs(z[1:]), 1.0))
