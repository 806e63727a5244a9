"""
Exact floors of n^c
===================

floor(n^c) is the only place where floating point could silently change a
residue class.  The library certifies every floor: a double-precision fast
path with a safety margin, exact integer roots, then interval arithmetic.
"""

from kloostlab import SequenceSpec, floor_f, floor_values, kappa_estimate, taylor_split, carry_term

spec = SequenceSpec.power(1.2)

# 32^1.2 = 2^6 exactly; a plain double gives 63.999...
print("32**1.2 in floating point:", 32 ** 1.2)
print("certified floor:", floor_f(spec, 32))

print("first floors:", floor_values(spec, 1, 16).tolist())

# kappa measures how fast f'' decays; for t^c the estimate tends to 2 - c slowly
print("kappa estimates:", kappa_estimate(spec, [1e2, 1e4, 1e6]))

# f(n+h) = f(n) + h f'(K) + I + J, and the carry term when 0 <= I + J < 1
K, n, h = 10_000, 10_050, 7
s = taylor_split(spec, K, n, h)
print(f"I = {s.I:.6g}, J = {s.J:.6g}, total - f(n+h) = {s.total - (n + h) ** 1.2:.2e}")
for xi0 in (0.0, 0.25, 0.5):
    print(f"carry with xi0 = {xi0}:", carry_term(spec, K, n, h, xi0))
