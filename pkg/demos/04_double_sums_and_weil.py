"""
Bilinear sums and the Weil check
================================

sum_{u in U} sum_{v in V} a_u b_v psi(u + v), evaluated directly and through a
length-p transform, followed by the rational sums that drive its bound.
"""

import numpy as np

from kloostlab import (
    PoleVectors, PsiParams, WeightedSet, double_sum_completed, double_sum_direct,
    holder_step_check, lemma31_bound, prop42_bound, rational_sum, weil_threshold,
)
from kloostlab.experiments import weil_check

p = 1009
rng = np.random.default_rng(1)
U = WeightedSet(rng.choice(p, 150, replace=False), np.exp(2j * np.pi * rng.random(150)), p)
V = WeightedSet(rng.choice(p, 90, replace=False), np.exp(2j * np.pi * rng.random(90)), p)
params = PsiParams(17, 23, p)

direct = double_sum_direct(U, V, params)
completed = double_sum_completed(U, V, params)
print("direct   :", direct)
print("completed:", completed, " rel diff", abs(direct - completed) / abs(direct))
print("trivial bound", len(U.elements) * len(V.elements),
      " lemma bound (k=2)", round(lemma31_bound(150, 90, 1, 1, 2, p), 1),
      " large-set bound", round(prop42_bound(150, 90, 1, 1, p), 1))

lhs, rhs = holder_step_check(WeightedSet(U.elements[:20], U.weights[:20], p),
                             WeightedSet(V.elements[:20], V.weights[:20], p), params, 2)
print(f"Holder step: {lhs:.1f} <= {rhs:.1f}")

# diagonal pole vectors give p minus the number of distinct poles
print("diagonal:", rational_sum(PoleVectors((1, 2), (2, 1), 11)))
# off the diagonal, square-root cancellation
z = rational_sum(PoleVectors((1, 4), (2, 9), 499))
print(f"|sum| = {abs(z):.2f} vs 2k sqrt(p) = {weil_threshold(2, 499):.2f}")

res = weil_check(199, 2, pole_set_size=6)
print("weil-check p=199 k=2:", res)
